#ifndef GAUI_DWELL_HPP
#define GAUI_DWELL_HPP

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "gaui/errors.hpp"

namespace gaui {

struct GazeSample {
    TimeMs t_ms = 0;
    double x_px = 0.0;
    double y_px = 0.0;
    std::optional<double> distance_cm;
    bool valid = true;

    friend bool operator==(const GazeSample&, const GazeSample&) = default;
};

inline nlohmann::json to_json(const GazeSample& s) {
    nlohmann::json j{{"t_ms", s.t_ms}, {"x", s.x_px}, {"y", s.y_px}, {"valid", s.valid}};
    if (s.distance_cm) j["distance_cm"] = *s.distance_cm;
    return j;
}

inline GazeSample gaze_sample_from_json(const nlohmann::json& j) {
    GazeSample s;
    s.t_ms = j.at("t_ms").get<TimeMs>();
    s.x_px = j.value("x", 0.0);
    s.y_px = j.value("y", 0.0);
    s.valid = j.value("valid", true);
    if (j.contains("distance_cm") && !j["distance_cm"].is_null())
        s.distance_cm = j["distance_cm"].get<double>();
    return s;
}

struct DwellParams {
    int threshold_ms = 1000;
    double in_target_fraction = 0.70;
    double sample_rate_hz = 30.0;

    void validate() const {
        if (threshold_ms <= 0) throw std::invalid_argument("dwell threshold must be positive");
        if (!(in_target_fraction > 0.0 && in_target_fraction <= 1.0))
            throw std::invalid_argument("in-target fraction must lie in (0, 1]");
        if (!(sample_rate_hz > 0.0)) throw std::invalid_argument("sample rate must be positive");
    }
};

inline constexpr int kTrackDwellMs = 1000;
inline constexpr int kControlDwellMs = 500;
inline constexpr double kSampleRateHz = 30.0;

/// Timestamp of frame `k` on a fixed-rate sample clock, rounded to whole ms.
/// At 30 Hz: 0, 33, 67, 100, ...; every 30th frame lands on a whole second.
inline TimeMs frame_time(std::int64_t k, double rate_hz = kSampleRateHz) {
    return static_cast<TimeMs>(std::llround(static_cast<double>(k) * 1000.0 / rate_hz));
}

enum class DwellKind { started, progress, cancelled, activated };

inline std::string_view to_string(DwellKind k) {
    switch (k) {
    case DwellKind::started: return "started";
    case DwellKind::progress: return "progress";
    case DwellKind::cancelled: return "cancelled";
    case DwellKind::activated: return "activated";
    }
    return "?";
}

inline const std::string& label(const std::string& id) { return id; }

/// Feedback emitted by the machine. `progress` is elapsed/threshold;
/// `in_target` is the in-target fraction of the samples collected so far.
template <class Id>
struct BasicDwellEvent {
    DwellKind kind = DwellKind::started;
    Id target{};
    TimeMs t_ms = 0;
    double progress = 0.0;
    double in_target = 1.0;
    int samples = 0;

    friend bool operator==(const BasicDwellEvent&, const BasicDwellEvent&) = default;
};

// JSON line {"t_ms","kind","target","fraction"}. "fraction" is the elapsed
// fraction for progress events and the in-target fraction otherwise.
template <class Id>
nlohmann::json to_json(const BasicDwellEvent<Id>& e) {
    return {{"t_ms", e.t_ms},
            {"kind", to_string(e.kind)},
            {"target", label(e.target)},
            {"fraction", e.kind == DwellKind::progress ? e.progress : e.in_target}};
}

template <class Id>
struct BasicHit {
    Id target{};
    int threshold_ms = kTrackDwellMs;
};

/// Dwell-selection state machine for a single interactive stream.
///
/// A dwell starts on the first sample that hits a target. The samples
/// collected in [start, start + threshold) form the dwell window; the dwell is
/// cancelled as soon as the running in-target fraction of that window drops
/// below `in_target_fraction`. The first sample at or after start + threshold
/// closes the window and activates the target. After activation the target
/// stays disarmed until the gaze is seen somewhere else.
template <class Id>
class BasicDwellMachine {
public:
    using Event = BasicDwellEvent<Id>;
    using Hit = BasicHit<Id>;

    struct Idle {
        friend bool operator==(const Idle&, const Idle&) = default;
    };
    struct Dwelling {
        Id target{};
        TimeMs start_ms = 0;
        int threshold_ms = 0;
        int n_in = 0;
        int n_total = 0;
        friend bool operator==(const Dwelling&, const Dwelling&) = default;
    };
    struct Refractory {
        Id target{};
        friend bool operator==(const Refractory&, const Refractory&) = default;
    };
    using State = std::variant<Idle, Dwelling, Refractory>;

    explicit BasicDwellMachine(DwellParams params = {}) : params_(params) { params_.validate(); }

    std::vector<Event> feed(const GazeSample& sample, const std::optional<Hit>& hit) {
        if (last_t_ && sample.t_ms < *last_t_) throw StreamOrderError(*last_t_, sample.t_ms);
        last_t_ = sample.t_ms;

        const std::optional<Hit> on = sample.valid ? hit : std::nullopt;
        std::vector<Event> out;

        if (auto* d = std::get_if<Dwelling>(&state_)) {
            const TimeMs elapsed = sample.t_ms - d->start_ms;
            if (elapsed >= d->threshold_ms) {
                out.push_back(make(DwellKind::activated, d->target, sample.t_ms,
                                   static_cast<double>(elapsed) / d->threshold_ms, *d));
                state_ = Refractory{d->target};
                return out;
            }
            ++d->n_total;
            if (on && on->target == d->target) ++d->n_in;
            if (!passes(d->n_in, d->n_total)) {
                out.push_back(make(DwellKind::cancelled, d->target, sample.t_ms,
                                   static_cast<double>(elapsed) / d->threshold_ms, *d));
                state_ = Idle{};
                return out;
            }
            out.push_back(make(DwellKind::progress, d->target, sample.t_ms,
                               static_cast<double>(elapsed) / d->threshold_ms, *d));
            return out;
        }

        if (auto* r = std::get_if<Refractory>(&state_)) {
            // A dropped frame carries no evidence that the gaze left.
            if (!sample.valid) return out;
            if (on && on->target == r->target) return out;
            state_ = Idle{};
        }

        if (on) {
            Dwelling d{on->target, sample.t_ms, on->threshold_ms, 1, 1};
            out.push_back(make(DwellKind::started, d.target, sample.t_ms, 0.0, d));
            state_ = std::move(d);
        }
        return out;
    }

    void reset() { state_ = Idle{}; }

    const State& state() const { return state_; }
    const DwellParams& params() const { return params_; }
    std::optional<TimeMs> last_sample_ms() const { return last_t_; }

    bool idle() const { return std::holds_alternative<Idle>(state_); }
    bool dwelling() const { return std::holds_alternative<Dwelling>(state_); }
    bool refractory() const { return std::holds_alternative<Refractory>(state_); }

    const Dwelling* current_dwell() const { return std::get_if<Dwelling>(&state_); }

private:
    bool passes(int n_in, int n_total) const {
        return static_cast<double>(n_in) + 1e-9 >= params_.in_target_fraction * n_total;
    }

    static Event make(DwellKind kind, const Id& target, TimeMs t, double progress, const Dwelling& d) {
        Event e;
        e.kind = kind;
        e.target = target;
        e.t_ms = t;
        e.progress = progress;
        e.in_target = d.n_total > 0 ? static_cast<double>(d.n_in) / d.n_total : 0.0;
        e.samples = d.n_total;
        return e;
    }

    DwellParams params_;
    State state_{Idle{}};
    std::optional<TimeMs> last_t_;
};

using DwellEvent = BasicDwellEvent<std::string>;
using DwellMachine = BasicDwellMachine<std::string>;

/// Smallest in-target count out of `n` samples that satisfies the fraction rule.
inline int min_passing_count(int n, double fraction = 0.70) {
    for (int k = 0; k <= n; ++k)
        if (static_cast<double>(k) + 1e-9 >= fraction * n) return k;
    return n;
}

} // namespace gaui

#endif // GAUI_DWELL_HPP
