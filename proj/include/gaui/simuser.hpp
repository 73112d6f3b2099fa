#ifndef GAUI_SIMUSER_HPP
#define GAUI_SIMUSER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gaui/seeding.hpp"
#include "gaui/session.hpp"

namespace gaui {

/// Tracker error, all in degrees of visual angle.
struct GazeNoiseModel {
    double fixation_offset_sigma_deg = 0.7;
    double per_sample_jitter_sigma_deg = 0.3;
    double bottom_region_inflation = 1.5;  // for targets centred in the lowest 20% of the screen
    double frame_drop_prob = 0.02;

    static GazeNoiseModel none() { return {0.0, 0.0, 1.0, 0.0}; }

    void validate() const {
        if (!(fixation_offset_sigma_deg >= 0.0) || !(per_sample_jitter_sigma_deg >= 0.0))
            throw std::invalid_argument("noise sigmas must be >= 0");
        if (!(bottom_region_inflation >= 1.0)) throw std::invalid_argument("bottom inflation must be >= 1");
        if (!(frame_drop_prob >= 0.0 && frame_drop_prob <= 1.0))
            throw std::invalid_argument("frame drop probability must lie in [0, 1]");
    }
};

struct SearchModel {
    double inspect_mean_ms = 350.0;
    double inspect_log_sigma = 0.4;  // lognormal shape; 0 gives a constant
    double saccade_ms = 200.0;
    double decision_ms = 150.0;

    // Longest single inspection. Gaze that rests on an item for 70% of the
    // track dwell activates it even after moving on, so the time on an item
    // (inspection, saccade latency and, on the last item of a page, the
    // decision) stays a frame short of that.
    double inspect_cap_ms(bool last_on_page = false) const {
        return 0.7 * kTrackDwellMs - 1000.0 / kSampleRateHz - saccade_ms - (last_on_page ? decision_ms : 0.0);
    }

    void validate() const {
        if (!(inspect_mean_ms > 0.0) || !(saccade_ms > 0.0) || !(decision_ms > 0.0))
            throw std::invalid_argument("search durations must be positive");
        if (!(inspect_log_sigma >= 0.0)) throw std::invalid_argument("inspect sigma must be >= 0");
        if (!(inspect_cap_ms(true) > 0.0)) throw std::invalid_argument("saccade + decision leave no inspect time");
    }
};

struct SimParams {
    GazeNoiseModel noise;
    SearchModel search;
    double sway_sd_cm = 0.3;    // within-trial postural sway around the trial's distance
    double sway_rate_hz = 0.5;  // mean-reversion rate

    void validate() const {
        noise.validate();
        search.validate();
        if (!(sway_sd_cm >= 0.0) || !(sway_rate_hz >= 0.0)) throw std::invalid_argument("sway must be >= 0");
    }
};

inline nlohmann::json to_json(const SimParams& p) {
    return {{"noise",
             {{"fixation_offset_sigma_deg", p.noise.fixation_offset_sigma_deg},
              {"per_sample_jitter_sigma_deg", p.noise.per_sample_jitter_sigma_deg},
              {"bottom_region_inflation", p.noise.bottom_region_inflation},
              {"frame_drop_prob", p.noise.frame_drop_prob}}},
            {"search",
             {{"inspect_mean_ms", p.search.inspect_mean_ms},
              {"inspect_log_sigma", p.search.inspect_log_sigma},
              {"saccade_ms", p.search.saccade_ms},
              {"decision_ms", p.search.decision_ms}}},
            {"sway_sd_cm", p.sway_sd_cm},
            {"sway_rate_hz", p.sway_rate_hz}};
}

inline SimParams sim_params_from_json(const nlohmann::json& j) {
    SimParams p;
    if (j.contains("noise")) {
        const auto& n = j["noise"];
        p.noise.fixation_offset_sigma_deg = n.value("fixation_offset_sigma_deg", p.noise.fixation_offset_sigma_deg);
        p.noise.per_sample_jitter_sigma_deg =
            n.value("per_sample_jitter_sigma_deg", p.noise.per_sample_jitter_sigma_deg);
        p.noise.bottom_region_inflation = n.value("bottom_region_inflation", p.noise.bottom_region_inflation);
        p.noise.frame_drop_prob = n.value("frame_drop_prob", p.noise.frame_drop_prob);
    }
    if (j.contains("search")) {
        const auto& s = j["search"];
        p.search.inspect_mean_ms = s.value("inspect_mean_ms", p.search.inspect_mean_ms);
        p.search.inspect_log_sigma = s.value("inspect_log_sigma", p.search.inspect_log_sigma);
        p.search.saccade_ms = s.value("saccade_ms", p.search.saccade_ms);
        p.search.decision_ms = s.value("decision_ms", p.search.decision_ms);
    }
    p.sway_sd_cm = j.value("sway_sd_cm", p.sway_sd_cm);
    p.sway_rate_hz = j.value("sway_rate_hz", p.sway_rate_hz);
    p.validate();
    return p;
}

namespace detail {

// Independent random streams per concern, so changing one model part does
// not reshuffle the draws of another.
enum Stream : std::uint64_t { kDistanceStream = 1, kGazeStream = 2, kSearchStream = 3, kPostureStream = 4 };

inline std::mt19937_64 stream(std::uint64_t seed, Stream s) { return std::mt19937_64(mix_seed(seed, {s})); }

// Standard normal scaled afterwards: a zero sigma still consumes the draw,
// which keeps every other draw aligned across parameter values.
inline double gauss(std::mt19937_64& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }
inline double unit(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

} // namespace detail

/// Gaze sampler around an intended fixation point.
class GazeNoiser {
public:
    GazeNoiser(GazeNoiseModel model, const DisplayProfile& profile, std::uint64_t seed)
        : model_(model), profile_(profile), rng_(detail::stream(seed, detail::kGazeStream)) {
        model_.validate();
    }

    struct Fixation {
        double x = 0.0;
        double y = 0.0;
        double off_x_deg = 0.0;
        double off_y_deg = 0.0;
        double scale = 1.0;
    };

    Fixation fixate(double x, double y) {
        Fixation f{x, y, 0.0, 0.0, y > 0.8 * profile_.height_px ? model_.bottom_region_inflation : 1.0};
        const double s = model_.fixation_offset_sigma_deg * f.scale;
        f.off_x_deg = s * detail::gauss(rng_);
        f.off_y_deg = s * detail::gauss(rng_);
        return f;
    }

    GazeSample sample(const Fixation& f, TimeMs t, double distance_cm) {
        const bool dropped = detail::unit(rng_) < model_.frame_drop_prob;
        const double j = model_.per_sample_jitter_sigma_deg * f.scale;
        const double jx = j * detail::gauss(rng_);
        const double jy = j * detail::gauss(rng_);
        GazeSample g;
        g.t_ms = t;
        g.x_px = f.x + angular_offset_to_px(f.off_x_deg + jx, distance_cm, profile_);
        g.y_px = f.y + angular_offset_to_px(f.off_y_deg + jy, distance_cm, profile_);
        g.distance_cm = distance_cm;
        g.valid = !dropped;
        return g;
    }

private:
    GazeNoiseModel model_;
    DisplayProfile profile_;
    std::mt19937_64 rng_;
};

/// Instructed-distance holder: mean-reverting sway kept inside [lo, hi).
class DistanceSway {
public:
    DistanceSway(double centre_cm, double lo, double hi, double sd, double rate_hz, std::uint64_t seed)
        : centre_(centre_cm), lo_(lo), hi_(hi), sd_(sd), rate_(rate_hz), x_(centre_cm),
          rng_(detail::stream(seed, detail::kDistanceStream)) {
        detail::unit(rng_);  // the draw that picked the centre
    }

    double next() {
        const double dt = 1.0 / kSampleRateHz;
        x_ += rate_ * (centre_ - x_) * dt + sd_ * std::sqrt(2.0 * rate_ * dt) * detail::gauss(rng_);
        x_ = std::clamp(x_, lo_, std::nextafter(hi_, lo_));
        return x_;
    }

    // Trial distance: uniform over the instructed band.
    static double draw_centre(DistanceBand band, std::uint64_t seed) {
        auto rng = detail::stream(seed, detail::kDistanceStream);
        return band_lower_cm(band) + (band_upper_cm(band) - band_lower_cm(band)) * detail::unit(rng);
    }

private:
    double centre_, lo_, hi_, sd_, rate_, x_;
    std::mt19937_64 rng_;
};

/// Closed-loop synthetic participant for one trial.
///
/// Scans the current page top to bottom; when the inspected item is the
/// target it keeps fixating until activation, otherwise it moves to the
/// arrow toward the target page. Each fixation carries an angular offset
/// drawn once; the offset is redrawn after a cancelled dwell, a wrong
/// activation, or when no dwell starts within kRefixateMs of landing.
class SimulatedUser {
public:
    static constexpr double kRefixateMs = 500.0;

    SimulatedUser(const Session& session, const SimParams& params, const DisplayProfile& profile, std::uint64_t seed,
                  double distance_cm)
        : session_(session), params_(params), noiser_(params.noise, profile, seed),
          search_rng_(detail::stream(seed, detail::kSearchStream)), distance_(distance_cm) {
        params_.validate();
        if (!session_.task()) throw std::invalid_argument("simulated user needs a task");
        const auto band = session_.config().distance_band;
        if (band)
            sway_.emplace(distance_cm, band_lower_cm(*band), band_upper_cm(*band), params_.sway_sd_cm,
                          params_.sway_rate_hz, seed);
        gaze_ = noiser_.fixate(profile.width_px / 2.0, profile.height_px * 0.05);  // resting on the header
        start_page(0.0);
    }

    GazeSample next(TimeMs t) {
        advance(static_cast<double>(t));
        if (sway_) distance_ = sway_->next();
        return noiser_.sample(gaze_, t, distance_);
    }

    void observe(const std::vector<SessionEvent>& events, TimeMs t) {
        const double now = static_cast<double>(t);
        for (const auto& e : events) {
            switch (e.type) {
            case SessionEventType::page_change:
            case SessionEventType::adaptation:
                start_page(now);
                return;
            case SessionEventType::dwell:
                if (e.dwell->kind == DwellKind::started) dwell_seen_ = true;
                if (e.dwell->kind == DwellKind::cancelled && holding()) refixate(now);
                break;
            case SessionEventType::track_played:
                if (!e.correct && holding()) refixate(now);
                break;
            case SessionEventType::play_pause:
                if (holding()) refixate(now);
                break;
            default: break;
            }
        }
    }

    double distance_cm() const { return distance_; }
    const std::vector<double>& inspections() const { return inspections_; }

private:
    enum class Mode { scan, decide, nav, target };

    bool holding() const { return (mode_ == Mode::nav || mode_ == Mode::target) && !pending_; }

    const std::vector<TargetSpec>& items() const { return session_.layout().page(session_.current_page()); }

    void saccade_to(const TargetSpec& t, double now) {
        pending_ = noiser_.fixate(t.rect.cx(), t.rect.cy());
        jump_at_ = now + params_.search.saccade_ms;
    }

    void start_page(double now) {
        mode_ = Mode::scan;
        item_ = 0;
        saccade_to(items().front(), now);
    }

    void refixate(double now) {
        gaze_ = noiser_.fixate(gaze_.x, gaze_.y);
        landed_ = now;
        dwell_seen_ = false;
    }

    double draw_inspect() {
        const auto& s = params_.search;
        const double mu = std::log(s.inspect_mean_ms) - 0.5 * s.inspect_log_sigma * s.inspect_log_sigma;
        const double d = std::min(std::exp(mu + s.inspect_log_sigma * detail::gauss(search_rng_)),
                                  s.inspect_cap_ms(item_ + 1 == static_cast<int>(items().size())));
        inspections_.push_back(d);
        return d;
    }

    void land() {
        gaze_ = *pending_;
        pending_.reset();
        landed_ = jump_at_;
        dwell_seen_ = false;
        if (mode_ != Mode::scan) return;
        if (items()[static_cast<std::size_t>(item_)].id.slot == session_.task()->target_slot())
            mode_ = Mode::target;
        else
            until_ = landed_ + draw_inspect();
    }

    // Runs every scheduled transition due at or before `t`.
    void advance(double t) {
        for (;;) {
            if (pending_) {
                if (t < jump_at_) return;
                land();
                continue;
            }
            switch (mode_) {
            case Mode::scan:
                if (t < until_) return;
                if (item_ + 1 < static_cast<int>(items().size())) {
                    ++item_;
                    saccade_to(items()[static_cast<std::size_t>(item_)], until_);
                } else {
                    mode_ = Mode::decide;
                    until_ += params_.search.decision_ms;
                }
                break;
            case Mode::decide: {
                if (t < until_) return;
                const int page = session_.current_page();
                const int goal = *session_.target_page();
                mode_ = Mode::nav;
                saccade_to(session_.layout().control(goal < page ? TargetKind::nav_left : TargetKind::nav_right),
                           until_);
                break;
            }
            case Mode::nav:
            case Mode::target:
                if (dwell_seen_ || t < landed_ + kRefixateMs) return;
                refixate(landed_ + kRefixateMs);
                break;
            }
        }
    }

    const Session& session_;
    SimParams params_;
    GazeNoiser noiser_;
    std::mt19937_64 search_rng_;
    std::optional<DistanceSway> sway_;
    double distance_;

    GazeNoiser::Fixation gaze_;
    std::optional<GazeNoiser::Fixation> pending_;
    double jump_at_ = 0.0;
    Mode mode_ = Mode::scan;
    int item_ = 0;
    double until_ = 0.0;
    double landed_ = 0.0;
    bool dwell_seen_ = false;
    std::vector<double> inspections_;
};

struct SimTrial {
    TrialRecord record;
    double initial_distance_cm = 0.0;
    std::vector<GazeSample> trace;  // filled when requested
    std::vector<double> inspections;
};

/// Runs one seeded trial to completion at 30 Hz.
inline SimTrial simulate_trial(const TrialConfig& config, const SimParams& params, const DisplayProfile& profile = {},
                               const Playlist& playlist = default_playlist(), bool keep_trace = false) {
    if (!config.distance_band) throw std::invalid_argument("simulated trials need an instructed distance band");
    if (config.difficulty == Difficulty::free) throw std::invalid_argument("simulated trials need a task");
    const double d0 = DistanceSway::draw_centre(*config.distance_band, config.seed);
    Session session(config, playlist, profile, d0);
    SimulatedUser user(session, params, profile, config.seed, d0);
    SimTrial out;
    out.initial_distance_cm = d0;
    for (std::int64_t k = 0; !session.finished(); ++k) {
        const GazeSample g = user.next(frame_time(k));
        if (keep_trace) out.trace.push_back(g);
        user.observe(session.step(g), g.t_ms);
    }
    out.record = session.record();
    out.inspections = user.inspections();
    return out;
}

// Trace file: optional header {"config":{...}} then one GazeSample per line.
inline nlohmann::json trial_config_to_json(const TrialConfig& c, std::optional<double> initial_distance_cm) {
    nlohmann::json j{{"interface", to_string(c.interface_type)},
                     {"difficulty", to_string(c.difficulty)},
                     {"timeout_ms", c.timeout_ms},
                     {"seed", c.seed}};
    j["band"] = c.distance_band ? nlohmann::json(to_string(*c.distance_band)) : nlohmann::json(nullptr);
    if (initial_distance_cm) j["initial_distance_cm"] = *initial_distance_cm;
    return j;
}

inline TrialConfig trial_config_from_json(const nlohmann::json& j) {
    TrialConfig c;
    c.interface_type = parse_interface(j.at("interface").get<std::string>());
    c.difficulty = parse_difficulty(j.value("difficulty", std::string("easy")));
    c.timeout_ms = j.value("timeout_ms", kDefaultTimeoutMs);
    c.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("band") && !j["band"].is_null()) c.distance_band = parse_distance_band(j["band"].get<std::string>());
    c.validate();
    return c;
}

// ---------------------------------------------------------------------------
// Postures

struct PostureProfile {
    std::string name;
    double median_cm = 35.0;
    double q1_cm = 32.0;
    double q3_cm = 38.0;
    double volatility = 0.1;  // mean-reversion rate of the latent walk, 1/s; 0 freezes it

    void validate() const {
        if (!(q1_cm < median_cm && median_cm < q3_cm)) throw std::invalid_argument("posture needs q1 < median < q3");
        if (!(volatility >= 0.0)) throw std::invalid_argument("posture volatility must be >= 0");
    }

    // Standard-normal quantile mapped through the profile's two half-spreads.
    double distance_at(double z) const {
        constexpr double kQ3Z = 0.6744897501960817;
        return median_cm + z * (z < 0.0 ? median_cm - q1_cm : q3_cm - median_cm) / kQ3Z;
    }
};

inline std::vector<PostureProfile> default_postures() {
    return {{"walking", 33.0, 30.0, 37.0, 0.12},
            {"standing", 33.0, 30.0, 36.0, 0.06},
            {"slouching", 30.0, 27.0, 34.0, 0.05},
            {"sitting_handsfree", 41.0, 36.0, 44.0, 0.035},
            {"sitting_desk", 35.0, 32.0, 38.0, 0.04},
            {"sitting_chair", 32.0, 29.0, 36.0, 0.05}};
}

inline nlohmann::json to_json(const PostureProfile& p) {
    return {{"name", p.name}, {"median_cm", p.median_cm}, {"q1_cm", p.q1_cm}, {"q3_cm", p.q3_cm},
            {"volatility", p.volatility}};
}

inline PostureProfile posture_from_json(const nlohmann::json& j) {
    PostureProfile p{j.at("name").get<std::string>(), j.at("median_cm").get<double>(), j.at("q1_cm").get<double>(),
                     j.at("q3_cm").get<double>(), j.value("volatility", 0.1)};
    p.validate();
    return p;
}

inline std::vector<PostureProfile> postures_from_json(const nlohmann::json& j) {
    const auto& list = j.is_object() ? j.at("postures") : j;
    std::vector<PostureProfile> out;
    for (const auto& p : list) out.push_back(posture_from_json(p));
    return out;
}

inline constexpr TimeMs kPostureSessionMs = 120000;

/// Distance signal at 30 Hz for one posture session; sample k is at frame_time(k).
inline std::vector<double> generate_posture_session(const PostureProfile& profile,
                                                    TimeMs duration_ms = kPostureSessionMs, std::uint64_t seed = 0) {
    profile.validate();
    auto rng = detail::stream(seed, detail::kPostureStream);
    const double dt = 1.0 / kSampleRateHz;
    const double a = profile.volatility * dt;
    const double kick = std::sqrt(2.0 * a);
    std::vector<double> out;
    double z = 0.0;
    for (std::int64_t k = 0; frame_time(k) < duration_ms; ++k) {
        out.push_back(ViewingDistance::clamped(profile.distance_at(z)).cm());
        z += -a * z + kick * detail::gauss(rng);
    }
    return out;
}

/// Adaptation events an adaptive interface would emit on a 30 Hz distance signal.
inline std::vector<AdaptationEvent> adaptations_for_signal(const std::vector<double>& signal,
                                                           const HysteresisConfig& cfg = {}) {
    if (signal.empty()) return {};
    AdaptationController c(ViewingDistance::clamped(signal.front()), 0, cfg);
    for (std::size_t k = 1; k < signal.size(); ++k) c.update(signal[k], frame_time(static_cast<std::int64_t>(k)));
    return c.events();
}

inline double quantile(std::vector<double> v, double q) {
    if (v.empty()) throw std::invalid_argument("quantile of empty sample");
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// ---------------------------------------------------------------------------
// Noise diagnostics

/// Gaze offsets (px) from a fixed point at a fixed distance: `n` samples in
/// fixations of 30 samples each, frame drops ignored.
inline std::vector<std::pair<double, double>> fixation_scatter_px(double distance_cm, const GazeNoiseModel& noise,
                                                                  int n, std::uint64_t seed,
                                                                  const DisplayProfile& profile = {}) {
    GazeNoiseModel m = noise;
    m.bottom_region_inflation = 1.0;
    GazeNoiser g(m, profile, seed);
    std::vector<std::pair<double, double>> out;
    const double cx = profile.width_px / 2.0, cy = profile.height_px / 2.0;
    GazeNoiser::Fixation f;
    for (int i = 0; i < n; ++i) {
        if (i % 30 == 0) f = g.fixate(cx, cy);
        const auto s = g.sample(f, i, distance_cm);
        out.emplace_back(s.x_px - cx, s.y_px - cy);
    }
    return out;
}

struct MissStats {
    int attempts = 0;
    int misses = 0;
    double rate() const { return attempts ? static_cast<double>(misses) / attempts : 0.0; }
};

/// Monte Carlo miss rate of single dwell attempts on a list item with a
/// neighbour on each side. An attempt misses unless the intended item
/// activates first.
inline MissStats dwell_miss_probability(InterfaceType type, double distance_cm, const GazeNoiseModel& noise,
                                        int attempts, std::uint64_t seed, const DisplayProfile& profile = {}) {
    const SizeBand band = fixed_band(type).value_or(init_band(ViewingDistance(distance_cm)));
    const auto layout = layout_for_band(band, profile, default_playlist());
    const TargetSpec& target = layout.page(0).at(1);
    GazeNoiser g(noise, profile, seed);
    MissStats st;
    const int frame_budget = 2 * static_cast<int>(kSampleRateHz);
    for (int a = 0; a < attempts; ++a) {
        BasicDwellMachine<TargetId> m;
        const auto f = g.fixate(target.rect.cx(), target.rect.cy());
        bool hit = false;
        for (int k = 0; k < frame_budget; ++k) {
            const auto s = g.sample(f, frame_time(k), distance_cm);
            std::optional<LayoutHit> h;
            if (s.valid) h = layout.hit_test(0, s.x_px, s.y_px);
            bool done = false;
            for (const auto& e : m.feed(s, h)) {
                if (e.kind == DwellKind::activated) {
                    hit = e.target == target.id;
                    done = true;
                }
            }
            if (done) break;
        }
        ++st.attempts;
        if (!hit) ++st.misses;
    }
    return st;
}

// ---------------------------------------------------------------------------
// Calibration

struct CalibrationTargets {
    double easy_task_ms = 2330.0;
    double hard_task_ms = 10500.0;
    double track_errors = 0.12;  // mean wrong tracks per adaptive trial
    double error_weight = 0.25;
    int reps = 40;  // per band and difficulty, adaptive interface
    std::uint64_t seed = 20240501;
};

struct CalibrationStats {
    double easy_task_ms = 0.0;
    double hard_task_ms = 0.0;
    double track_errors = 0.0;
    double objective = 0.0;
};

struct CalibrationResult {
    SimParams params;
    CalibrationStats stats;
    int evaluations = 0;
    bool converged = false;
    std::string message;
};

inline CalibrationStats evaluate_calibration(const SimParams& params, const CalibrationTargets& targets,
                                             const DisplayProfile& profile = {}) {
    double easy = 0.0, hard = 0.0, errors = 0.0;
    int n_easy = 0, n_hard = 0, n = 0;
    for (auto band : kAllDistanceBands)
        for (auto diff : {Difficulty::easy, Difficulty::hard})
            for (int rep = 0; rep < targets.reps; ++rep) {
                TrialConfig c;
                c.interface_type = InterfaceType::adaptive;
                c.distance_band = band;
                c.difficulty = diff;
                c.seed = mix_seed(targets.seed, {static_cast<std::uint64_t>(band), static_cast<std::uint64_t>(diff),
                                                 static_cast<std::uint64_t>(rep)});
                const auto m = metrics(simulate_trial(c, params, profile).record);
                // A timeout counts at the timeout value so it still pulls the mean.
                const double tt = m.task_time_ms ? static_cast<double>(*m.task_time_ms) : c.timeout_ms;
                (diff == Difficulty::easy ? easy : hard) += tt;
                ++(diff == Difficulty::easy ? n_easy : n_hard);
                errors += m.track_errors;
                ++n;
            }
    CalibrationStats s{easy / n_easy, hard / n_hard, errors / n, 0.0};
    const auto rel = [](double got, double want) { return (got - want) / want; };
    s.objective = std::pow(rel(s.easy_task_ms, targets.easy_task_ms), 2) +
                  std::pow(rel(s.hard_task_ms, targets.hard_task_ms), 2) +
                  targets.error_weight * std::pow(rel(s.track_errors, targets.track_errors), 2);
    return s;
}

/// Pattern search over (fixation offset sigma, mean inspect time). Each round
/// tries +-step on both coordinates from the coarsest step down and takes the
/// best improving move at the first step size that has one; it stops when no
/// step size improves. A fitted point is therefore a fixed point.
inline CalibrationResult calibrate(const SimParams& start, const CalibrationTargets& targets = {},
                                   const DisplayProfile& profile = {}, int max_evaluations = 400) {
    start.validate();
    constexpr double kSigmaStep = 0.8, kInspectStep = 160.0;
    constexpr int kScales = 5;  // down to 1/16 of the first step
    const double inspect_lo = 50.0, inspect_hi = start.search.inspect_cap_ms();

    std::map<std::pair<double, double>, CalibrationStats> cache;
    CalibrationResult r;
    auto eval = [&](const SimParams& p) {
        const auto key = std::make_pair(p.noise.fixation_offset_sigma_deg, p.search.inspect_mean_ms);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        ++r.evaluations;
        return cache.emplace(key, evaluate_calibration(p, targets, profile)).first->second;
    };

    SimParams best = start;
    CalibrationStats best_stats = eval(best);
    for (;;) {
        bool moved = false;
        for (int s = 0; s < kScales && !moved; ++s) {
            const double f = std::ldexp(1.0, -s);
            SimParams round_best = best;
            CalibrationStats round_stats = best_stats;
            for (auto [ds, di] : {std::pair{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}}) {
                SimParams c = best;
                c.noise.fixation_offset_sigma_deg = std::max(0.0, c.noise.fixation_offset_sigma_deg + ds * kSigmaStep * f);
                c.search.inspect_mean_ms =
                    std::clamp(c.search.inspect_mean_ms + di * kInspectStep * f, inspect_lo, inspect_hi);
                if (r.evaluations >= max_evaluations) break;
                const auto st = eval(c);
                if (st.objective < round_stats.objective) {
                    round_best = c;
                    round_stats = st;
                }
            }
            if (round_stats.objective < best_stats.objective) {
                best = round_best;
                best_stats = round_stats;
                moved = true;
            }
        }
        if (!moved) {
            r.converged = r.evaluations < max_evaluations;
            break;
        }
        if (r.evaluations >= max_evaluations) break;
    }
    r.params = best;
    r.stats = best_stats;
    r.message = r.converged ? "converged"
                            : "evaluation budget of " + std::to_string(max_evaluations) +
                                  " exhausted; returning best so far";
    return r;
}

} // namespace gaui

#endif // GAUI_SIMUSER_HPP
