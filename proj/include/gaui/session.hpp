#ifndef GAUI_SESSION_HPP
#define GAUI_SESSION_HPP

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gaui/adaptation.hpp"
#include "gaui/dwell.hpp"
#include "gaui/errors.hpp"
#include "gaui/geometry.hpp"
#include "gaui/layout.hpp"

namespace gaui {

inline constexpr TimeMs kDefaultTimeoutMs = 60000;
inline constexpr TimeMs kEsmDelayMs = 30000;
// 1-based list position whose page anchors the hard task.
inline constexpr int kHardTaskAnchorPosition = 10;

enum class Difficulty { easy, hard, free };

inline std::string_view to_string(Difficulty d) {
    switch (d) {
    case Difficulty::easy: return "easy";
    case Difficulty::hard: return "hard";
    case Difficulty::free: return "free";
    }
    return "?";
}

inline Difficulty parse_difficulty(std::string_view s) {
    if (s == "easy") return Difficulty::easy;
    if (s == "hard") return Difficulty::hard;
    if (s == "free") return Difficulty::free;
    throw std::invalid_argument("unknown difficulty: " + std::string(s));
}

/// Instructed face-to-screen distance range for controlled trials.
enum class DistanceBand { near, middle, far };

inline constexpr DistanceBand kAllDistanceBands[] = {DistanceBand::near, DistanceBand::middle, DistanceBand::far};

inline std::string_view to_string(DistanceBand b) {
    switch (b) {
    case DistanceBand::near: return "25-29";
    case DistanceBand::middle: return "30-34";
    case DistanceBand::far: return "35-39";
    }
    return "?";
}

inline DistanceBand parse_distance_band(std::string_view s) {
    if (s == "25-29") return DistanceBand::near;
    if (s == "30-34") return DistanceBand::middle;
    if (s == "35-39") return DistanceBand::far;
    throw std::invalid_argument("unknown distance band: " + std::string(s));
}

// Integer-cm ranges are read as [lo, hi + 1).
inline double band_lower_cm(DistanceBand b) {
    switch (b) {
    case DistanceBand::near: return 25.0;
    case DistanceBand::middle: return 30.0;
    case DistanceBand::far: return 35.0;
    }
    return 25.0;
}
inline double band_upper_cm(DistanceBand b) { return band_lower_cm(b) + 5.0; }
inline double band_median_cm(DistanceBand b) { return band_lower_cm(b) + 2.0; }
inline bool in_distance_band(DistanceBand b, double cm) { return cm >= band_lower_cm(b) && cm < band_upper_cm(b); }

struct TrialConfig {
    InterfaceType interface_type = InterfaceType::adaptive;
    std::optional<DistanceBand> distance_band;  // nullopt: free posture (no instructed distance)
    Difficulty difficulty = Difficulty::easy;
    TimeMs timeout_ms = kDefaultTimeoutMs;
    std::uint64_t seed = 0;
    HysteresisConfig hysteresis{};

    bool free_distance() const { return !distance_band.has_value(); }

    void validate() const {
        if (timeout_ms <= 0) throw std::invalid_argument("timeout must be positive");
        hysteresis.validate();
    }
};

struct TaskSpec {
    int target_position = 1;  // 1-based list position
    int start_page = 1;

    int target_slot() const { return target_position - 1; }
};

enum class Outcome { running, success, timeout };

inline std::string_view to_string(Outcome o) {
    switch (o) {
    case Outcome::running: return "running";
    case Outcome::success: return "success";
    case Outcome::timeout: return "timeout";
    }
    return "?";
}

struct PlayerState {
    int current_page = 0;  // 0-based
    std::optional<int> playing;  // slot
    bool paused = false;
};

enum class SessionEventType {
    trial_start,
    dwell,
    page_change,
    adaptation,
    layout,
    track_played,
    play_pause,
    distance_alert,
    esm_prompt,
    esm_answer,
    trial_end,
};

inline std::string_view to_string(SessionEventType t) {
    switch (t) {
    case SessionEventType::trial_start: return "trial_start";
    case SessionEventType::dwell: return "dwell";
    case SessionEventType::page_change: return "page_change";
    case SessionEventType::adaptation: return "adaptation";
    case SessionEventType::layout: return "layout";
    case SessionEventType::track_played: return "track_played";
    case SessionEventType::play_pause: return "play_pause";
    case SessionEventType::distance_alert: return "distance_alert";
    case SessionEventType::esm_prompt: return "esm_prompt";
    case SessionEventType::esm_answer: return "esm_answer";
    case SessionEventType::trial_end: return "trial_end";
    }
    return "?";
}

using SessionDwellEvent = BasicDwellEvent<TargetId>;

/// One entry of a trial's event log. Only the fields relevant to `type` are
/// meaningful.
struct SessionEvent {
    SessionEventType type = SessionEventType::trial_start;
    TimeMs t_ms = 0;
    std::optional<SessionDwellEvent> dwell;
    std::optional<AdaptationEvent> adaptation;
    SizeBand band = SizeBand::medium;  // layout
    int page = -1;                     // page_change (new page), layout
    int from_page = -1;                // page_change
    int slot = -1;                     // track_played
    bool correct = false;              // page_change toward target / target track
    bool paused = false;               // play_pause
    TimeMs duration_ms = 0;            // page_change: time since the page was rendered
    std::string text;                  // track title, outcome, esm answers

    friend bool operator==(const SessionEvent&, const SessionEvent&) = default;
};

inline nlohmann::json to_json(const SessionEvent& e) {
    nlohmann::json j{{"type", to_string(e.type)}, {"t_ms", e.t_ms}};
    switch (e.type) {
    case SessionEventType::dwell:
        j["kind"] = to_string(e.dwell->kind);
        j["target"] = label(e.dwell->target);
        j["fraction"] = e.dwell->kind == DwellKind::progress ? e.dwell->progress : e.dwell->in_target;
        break;
    case SessionEventType::adaptation:
        j["from"] = to_string(e.adaptation->from);
        j["to"] = to_string(e.adaptation->to);
        break;
    case SessionEventType::layout:
        j["band"] = to_string(e.band);
        j["page"] = e.page;
        break;
    case SessionEventType::page_change:
        j["from_page"] = e.from_page;
        j["page"] = e.page;
        j["correct"] = e.correct;
        j["duration_ms"] = e.duration_ms;
        break;
    case SessionEventType::track_played:
        j["slot"] = e.slot;
        j["title"] = e.text;
        j["correct"] = e.correct;
        break;
    case SessionEventType::play_pause: j["paused"] = e.paused; break;
    case SessionEventType::esm_answer: j["answers"] = nlohmann::json::parse(e.text); break;
    case SessionEventType::trial_end: j["outcome"] = e.text; break;
    case SessionEventType::distance_alert: j["cm"] = std::stod(e.text); break;
    default: break;
    }
    return j;
}

struct TrialRecord {
    TrialConfig config;
    std::optional<TaskSpec> task;
    std::vector<std::string> playlist_order;
    SizeBand initial_band = SizeBand::medium;
    std::vector<SessionEvent> events;
    Outcome outcome = Outcome::running;
    TimeMs end_ms = 0;
    int out_of_band_samples = 0;
};

inline nlohmann::json to_json(const TrialRecord& r) {
    nlohmann::json events = nlohmann::json::array();
    for (const auto& e : r.events) events.push_back(to_json(e));
    nlohmann::json j{{"interface", to_string(r.config.interface_type)},
                     {"band", r.config.distance_band ? std::string(to_string(*r.config.distance_band)) : "free"},
                     {"difficulty", to_string(r.config.difficulty)},
                     {"timeout_ms", r.config.timeout_ms},
                     {"seed", r.config.seed},
                     {"playlist", r.playlist_order},
                     {"initial_band", to_string(r.initial_band)},
                     {"outcome", to_string(r.outcome)},
                     {"end_ms", r.end_ms},
                     {"out_of_band_samples", r.out_of_band_samples},
                     {"events", std::move(events)}};
    if (r.task) j["target_position"] = r.task->target_position;
    return j;
}

/// Time of the single experience-sampling prompt: 30 s after the first
/// adaptation, if there was one.
inline std::optional<TimeMs> esm_prompt_time(std::span<const AdaptationEvent> adaptations) {
    if (adaptations.empty()) return std::nullopt;
    return adaptations.front().t_ms + kEsmDelayMs;
}

/// Orchestrates one trial: distance readings drive the band selector, gaze
/// samples are hit-tested against the current page and fed to the dwell
/// machine, and activations drive the player.
class Session {
public:
    Session(const TrialConfig& config, const Playlist& playlist, const DisplayProfile& profile,
            std::optional<double> initial_distance_cm = std::nullopt, const ChromeConfig& chrome = {})
        : config_(validated(config)),
          profile_(profile),
          chrome_(chrome),
          // Origin just before t=0 so a reading at t=0 is still a new sample.
          selector_(config.interface_type, ViewingDistance::clamped(initial_distance(config, initial_distance_cm)),
                    -1, config.hysteresis),
          layout_(layout_for_band(selector_.band(), profile, playlist, chrome)),
          dwell_(DwellParams{kTrackDwellMs, 0.70, 30.0}) {
        std::mt19937_64 rng(config_.seed);
        playlist_ = playlist;
        std::shuffle(playlist_.tracks.begin(), playlist_.tracks.end(), rng);
        layout_ = layout_for_band(selector_.band(), profile_, playlist_, chrome_);

        record_.config = config_;
        record_.initial_band = selector_.band();
        for (const auto& t : playlist_.tracks) record_.playlist_order.push_back(t.title);

        if (config_.difficulty != Difficulty::free) {
            const int page = config_.difficulty == Difficulty::easy
                                 ? 0
                                 : layout_.page_of_track(std::min<int>(kHardTaskAnchorPosition,
                                                                       layout_.track_count())) - 1;
            const auto& slots = layout_.page(page);
            std::uniform_int_distribution<std::size_t> pick(0, slots.size() - 1);
            task_ = TaskSpec{slots[pick(rng)].id.slot + 1, 1};
            record_.task = task_;
        }

        push(SessionEvent{.type = SessionEventType::trial_start, .t_ms = 0});
        push_layout(0);
    }

    /// Consumes one gaze sample (and its distance reading, if any).
    std::vector<SessionEvent> step(const GazeSample& sample) {
        check_order(sample.t_ms);
        std::vector<SessionEvent> out;
        const std::size_t mark = record_.events.size();
        if (finished()) return out;
        last_t_ = sample.t_ms;

        advance(sample.t_ms);
        if (!finished() && sample.distance_cm) handle_distance(*sample.distance_cm, sample.t_ms);
        if (!finished()) {
            std::optional<LayoutHit> hit;
            if (sample.valid) hit = layout_.hit_test(player_.current_page, sample.x_px, sample.y_px);
            for (const auto& ev : dwell_.feed(sample, hit)) {
                push(SessionEvent{.type = SessionEventType::dwell, .t_ms = sample.t_ms, .dwell = ev});
                if (ev.kind == DwellKind::activated) activate(ev.target, sample.t_ms);
                if (finished()) break;
            }
        }
        out.assign(record_.events.begin() + static_cast<std::ptrdiff_t>(mark), record_.events.end());
        return out;
    }

    /// Distance reading without gaze (demo protocol).
    std::vector<SessionEvent> observe_distance(double cm, TimeMs t) {
        check_order(t);
        std::vector<SessionEvent> out;
        if (finished()) return out;
        const std::size_t mark = record_.events.size();
        last_t_ = t;
        advance(t);
        if (!finished()) handle_distance(cm, t);
        out.assign(record_.events.begin() + static_cast<std::ptrdiff_t>(mark), record_.events.end());
        return out;
    }

    /// Moves the clock without input: fires a due prompt or the timeout.
    std::vector<SessionEvent> advance_to(TimeMs t) {
        check_order(t);
        std::vector<SessionEvent> out;
        if (finished()) return out;
        const std::size_t mark = record_.events.size();
        last_t_ = t;
        advance(t);
        out.assign(record_.events.begin() + static_cast<std::ptrdiff_t>(mark), record_.events.end());
        return out;
    }

    void record_esm_answer(const nlohmann::json& answers, TimeMs t) {
        check_order(t);
        last_t_ = t;
        push(SessionEvent{.type = SessionEventType::esm_answer, .t_ms = t, .text = answers.dump()});
    }

    bool finished() const { return record_.outcome != Outcome::running; }
    Outcome outcome() const { return record_.outcome; }
    const TrialRecord& record() const { return record_; }
    const TrialConfig& config() const { return config_; }
    const std::optional<TaskSpec>& task() const { return task_; }
    const Playlist& playlist() const { return playlist_; }
    const LayoutModel& layout() const { return layout_; }
    const PlayerState& player() const { return player_; }
    int current_page() const { return player_.current_page; }
    SizeBand band() const { return selector_.band(); }
    const BandSelector& selector() const { return selector_; }
    const BasicDwellMachine<TargetId>& dwell() const { return dwell_; }
    std::optional<TimeMs> esm_due() const { return esm_fired_ ? std::nullopt : esm_due_; }
    TimeMs last_time_ms() const { return last_t_; }
    TimeMs page_rendered_ms() const { return page_rendered_ms_; }

    /// 0-based page currently holding the target, if there is a task.
    std::optional<int> target_page() const {
        if (!task_) return std::nullopt;
        return layout_.page_index_of_slot(task_->target_slot());
    }

private:
    static TrialConfig validated(const TrialConfig& c) {
        c.validate();
        return c;
    }

    static double initial_distance(const TrialConfig& c, std::optional<double> given) {
        if (given) return *given;
        if (c.distance_band) return band_median_cm(*c.distance_band);
        if (c.interface_type == InterfaceType::adaptive)
            throw std::invalid_argument("adaptive free-distance session needs an initial distance reading");
        return reference_distance_cm(SizeBand::medium);
    }

    void check_order(TimeMs t) const {
        if (t < last_t_) throw StreamOrderError(last_t_, t);
    }

    void push(SessionEvent e) { record_.events.push_back(std::move(e)); }

    void push_layout(TimeMs t) {
        page_rendered_ms_ = t;
        push(SessionEvent{.type = SessionEventType::layout, .t_ms = t, .band = layout_.band(),
                          .page = player_.current_page});
    }

    void finish(Outcome o, TimeMs t) {
        record_.outcome = o;
        record_.end_ms = t;
        push(SessionEvent{.type = SessionEventType::trial_end, .t_ms = t, .text = std::string(to_string(o))});
    }

    void advance(TimeMs t) {
        if (esm_due_ && !esm_fired_ && t >= *esm_due_ && *esm_due_ < config_.timeout_ms) {
            esm_fired_ = true;
            push(SessionEvent{.type = SessionEventType::esm_prompt, .t_ms = *esm_due_});
        }
        if (t >= config_.timeout_ms) finish(Outcome::timeout, config_.timeout_ms);
    }

    void handle_distance(double cm, TimeMs t) {
        if (config_.distance_band) {
            const bool inside = in_distance_band(*config_.distance_band, cm);
            if (!inside) {
                ++record_.out_of_band_samples;
                if (in_band_) push(SessionEvent{.type = SessionEventType::distance_alert, .t_ms = t,
                                                .text = std::to_string(cm)});
            }
            in_band_ = inside;
        }
        if (last_distance_t_ && t <= *last_distance_t_) return;
        last_distance_t_ = t;
        auto ev = selector_.observe(cm, t);
        if (!ev) return;

        push(SessionEvent{.type = SessionEventType::adaptation, .t_ms = t, .adaptation = *ev});
        if (auto d = dwell_.current_dwell()) {
            SessionDwellEvent cancel;
            cancel.kind = DwellKind::cancelled;
            cancel.target = d->target;
            cancel.t_ms = t;
            cancel.progress = static_cast<double>(t - d->start_ms) / d->threshold_ms;
            cancel.in_target = static_cast<double>(d->n_in) / d->n_total;
            cancel.samples = d->n_total;
            push(SessionEvent{.type = SessionEventType::dwell, .t_ms = t, .dwell = cancel});
        }
        dwell_.reset();
        layout_ = layout_for_band(ev->to, profile_, playlist_, chrome_);
        player_.current_page = std::min(player_.current_page, layout_.page_count() - 1);
        push_layout(t);
        if (config_.free_distance() && !esm_due_) esm_due_ = t + kEsmDelayMs;
    }

    void activate(const TargetId& target, TimeMs t) {
        switch (target.kind) {
        case TargetKind::nav_left:
        case TargetKind::nav_right: {
            const int from = player_.current_page;
            const int to = from + (target.kind == TargetKind::nav_right ? 1 : -1);
            bool toward = false;
            if (auto tp = target_page()) toward = std::abs(to - *tp) < std::abs(from - *tp);
            push(SessionEvent{.type = SessionEventType::page_change, .t_ms = t, .page = to, .from_page = from,
                              .correct = toward, .duration_ms = t - page_rendered_ms_});
            player_.current_page = to;
            dwell_.reset();
            push_layout(t);
            break;
        }
        case TargetKind::play_pause:
            player_.paused = !player_.paused;
            push(SessionEvent{.type = SessionEventType::play_pause, .t_ms = t, .paused = player_.paused});
            break;
        case TargetKind::track: {
            const bool hit_target = task_ && target.slot == task_->target_slot();
            player_.playing = target.slot;
            player_.paused = false;
            push(SessionEvent{.type = SessionEventType::track_played, .t_ms = t, .slot = target.slot,
                              .correct = hit_target,
                              .text = playlist_.tracks[static_cast<std::size_t>(target.slot)].title});
            if (hit_target) finish(Outcome::success, t);
            break;
        }
        }
    }

    TrialConfig config_;
    DisplayProfile profile_;
    ChromeConfig chrome_;
    Playlist playlist_;
    BandSelector selector_;
    LayoutModel layout_;
    BasicDwellMachine<TargetId> dwell_;
    PlayerState player_;
    std::optional<TaskSpec> task_;
    TrialRecord record_;
    TimeMs last_t_ = 0;
    std::optional<TimeMs> last_distance_t_;
    TimeMs page_rendered_ms_ = 0;
    std::optional<TimeMs> esm_due_;
    bool esm_fired_ = false;
    bool in_band_ = true;
};

inline Session start_trial(const TrialConfig& config, const Playlist& playlist, const DisplayProfile& profile,
                           std::optional<double> initial_distance_cm = std::nullopt,
                           const ChromeConfig& chrome = {}) {
    return Session(config, playlist, profile, initial_distance_cm, chrome);
}

struct TrialMetrics {
    std::optional<TimeMs> task_time_ms;
    std::optional<double> nav_time_ms;
    int nav_activations = 0;
    int correct_nav_activations = 0;
    int track_errors = 0;
    int pp_errors = 0;
    bool timeout = false;
};

/// Derives the trial measures purely from a record's event log.
inline TrialMetrics metrics(const TrialRecord& r) {
    TrialMetrics m;
    double nav_sum = 0.0;
    for (const auto& e : r.events) {
        switch (e.type) {
        case SessionEventType::page_change:
            ++m.nav_activations;
            if (e.correct) {
                ++m.correct_nav_activations;
                nav_sum += static_cast<double>(e.duration_ms);
            }
            break;
        case SessionEventType::track_played:
            if (!e.correct) ++m.track_errors;
            break;
        case SessionEventType::play_pause:
            if (r.config.difficulty == Difficulty::hard) ++m.pp_errors;
            break;
        default: break;
        }
    }
    if (m.correct_nav_activations > 0) m.nav_time_ms = nav_sum / m.correct_nav_activations;
    if (r.outcome == Outcome::success) m.task_time_ms = r.end_ms;
    m.timeout = r.outcome == Outcome::timeout;
    return m;
}

} // namespace gaui

#endif // GAUI_SESSION_HPP
