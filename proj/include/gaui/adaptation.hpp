#ifndef GAUI_ADAPTATION_HPP
#define GAUI_ADAPTATION_HPP

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gaui/errors.hpp"
#include "gaui/geometry.hpp"

namespace gaui {

enum class SizeBand { small, medium, large };

/// Distance (cm) at which a band's targets subtend their design angle: the
/// median of the 25-29, 30-34 and 35-39 cm distance bands.
constexpr double reference_distance_cm(SizeBand band) {
    switch (band) {
    case SizeBand::small: return 27.0;
    case SizeBand::medium: return 32.0;
    case SizeBand::large: return 37.0;
    }
    return 32.0;
}

inline std::string_view to_string(SizeBand band) {
    switch (band) {
    case SizeBand::small: return "small";
    case SizeBand::medium: return "medium";
    case SizeBand::large: return "large";
    }
    return "?";
}

inline SizeBand parse_band(std::string_view s) {
    if (s == "small") return SizeBand::small;
    if (s == "medium") return SizeBand::medium;
    if (s == "large") return SizeBand::large;
    throw std::invalid_argument("unknown size band: " + std::string(s));
}

enum class InterfaceType { static_small, static_medium, static_large, adaptive };

inline std::string_view to_string(InterfaceType type) {
    switch (type) {
    case InterfaceType::static_small: return "static-small";
    case InterfaceType::static_medium: return "static-medium";
    case InterfaceType::static_large: return "static-large";
    case InterfaceType::adaptive: return "adaptive";
    }
    return "?";
}

inline InterfaceType parse_interface(std::string_view s) {
    if (s == "static-small") return InterfaceType::static_small;
    if (s == "static-medium") return InterfaceType::static_medium;
    if (s == "static-large") return InterfaceType::static_large;
    if (s == "adaptive") return InterfaceType::adaptive;
    throw std::invalid_argument("unknown interface type: " + std::string(s));
}

inline constexpr InterfaceType kAllInterfaces[] = {
    InterfaceType::static_small, InterfaceType::static_medium,
    InterfaceType::static_large, InterfaceType::adaptive};

struct HysteresisConfig {
    double lower_threshold_cm = 30.0;
    double upper_threshold_cm = 35.0;
    double buffer_cm = 2.0;

    void validate() const {
        if (!(lower_threshold_cm < upper_threshold_cm))
            throw std::invalid_argument("hysteresis: thresholds must be strictly ordered");
        if (!(buffer_cm >= 0.0))
            throw std::invalid_argument("hysteresis: buffer must be non-negative");
        if (!(buffer_cm < (upper_threshold_cm - lower_threshold_cm) / 2.0))
            throw std::invalid_argument("hysteresis: buffer zones would overlap");
    }
};

struct AdaptationEvent {
    TimeMs t_ms = 0;
    SizeBand from = SizeBand::small;
    SizeBand to = SizeBand::small;

    friend bool operator==(const AdaptationEvent&, const AdaptationEvent&) = default;
};

inline nlohmann::json to_json(const AdaptationEvent& e) {
    return {{"t_ms", e.t_ms}, {"from", to_string(e.from)}, {"to", to_string(e.to)}};
}

/// Raw band assignment used at startup: half-open intervals, no hysteresis.
inline SizeBand init_band(ViewingDistance d, const HysteresisConfig& cfg = {}) {
    if (d.cm() < cfg.lower_threshold_cm) return SizeBand::small;
    if (d.cm() < cfg.upper_threshold_cm) return SizeBand::medium;
    return SizeBand::large;
}

/// Maps a stream of distance readings onto a size band with a dead zone of
/// +/- buffer around each threshold. Single writer; readings must arrive with
/// strictly increasing timestamps.
class AdaptationController {
public:
    AdaptationController(ViewingDistance initial, TimeMs t0, HysteresisConfig cfg = {})
        : cfg_(validated(cfg)), initial_(init_band(initial, cfg_)), current_(initial_), last_t_(t0) {}

    std::optional<AdaptationEvent> update(double distance_cm, TimeMs t) {
        if (t <= last_t_) throw StreamOrderError(last_t_, t);
        const double d = ViewingDistance::clamped(distance_cm).cm();
        last_t_ = t;

        const double up_low = cfg_.lower_threshold_cm + cfg_.buffer_cm;
        const double up_high = cfg_.upper_threshold_cm + cfg_.buffer_cm;
        const double down_low = cfg_.lower_threshold_cm - cfg_.buffer_cm;
        const double down_high = cfg_.upper_threshold_cm - cfg_.buffer_cm;

        SizeBand next = current_;
        if (d >= up_high)
            next = SizeBand::large;
        else if (d >= up_low && current_ == SizeBand::small)
            next = SizeBand::medium;
        else if (d <= down_low)
            next = SizeBand::small;
        else if (d <= down_high && current_ == SizeBand::large)
            next = SizeBand::medium;

        if (next == current_) return std::nullopt;
        AdaptationEvent ev{t, current_, next};
        current_ = next;
        log_.push_back(ev);
        return ev;
    }

    SizeBand current() const { return current_; }
    SizeBand initial() const { return initial_; }
    TimeMs last_update_ms() const { return last_t_; }
    const HysteresisConfig& config() const { return cfg_; }
    const std::vector<AdaptationEvent>& events() const { return log_; }

    // Band reached by applying `log` to `initial`; equals current() for the
    // controller's own log.
    static SizeBand replay(SizeBand initial, std::span<const AdaptationEvent> log) {
        SizeBand band = initial;
        for (const auto& e : log) {
            if (e.from != band) throw std::invalid_argument("adaptation log is not contiguous");
            band = e.to;
        }
        return band;
    }

private:
    static HysteresisConfig validated(const HysteresisConfig& cfg) {
        cfg.validate();
        return cfg;
    }

    HysteresisConfig cfg_;
    SizeBand initial_;
    SizeBand current_;
    TimeMs last_t_;
    std::vector<AdaptationEvent> log_;
};

inline std::optional<SizeBand> fixed_band(InterfaceType type) {
    switch (type) {
    case InterfaceType::static_small: return SizeBand::small;
    case InterfaceType::static_medium: return SizeBand::medium;
    case InterfaceType::static_large: return SizeBand::large;
    case InterfaceType::adaptive: return std::nullopt;
    }
    return std::nullopt;
}

/// Band shown by an interface: static types ignore distance, the adaptive one
/// runs its own controller.
class BandSelector {
public:
    BandSelector(InterfaceType type, ViewingDistance initial, TimeMs t0, HysteresisConfig cfg = {})
        : type_(type) {
        if (auto band = fixed_band(type))
            fixed_ = *band;
        else
            controller_.emplace(initial, t0, cfg);
    }

    std::optional<AdaptationEvent> observe(double distance_cm, TimeMs t) {
        if (!controller_) return std::nullopt;
        return controller_->update(distance_cm, t);
    }

    SizeBand band() const { return controller_ ? controller_->current() : fixed_; }
    InterfaceType type() const { return type_; }
    const AdaptationController* controller() const { return controller_ ? &*controller_ : nullptr; }

private:
    InterfaceType type_;
    SizeBand fixed_ = SizeBand::medium;
    std::optional<AdaptationController> controller_;
};

inline SizeBand band_for_interface(InterfaceType type, const AdaptationController& controller) {
    if (auto band = fixed_band(type)) return *band;
    return controller.current();
}

} // namespace gaui

#endif // GAUI_ADAPTATION_HPP
