#ifndef GAUI_GEOMETRY_HPP
#define GAUI_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace gaui {

inline constexpr double kCmPerInch = 2.54;

/// Physical and pixel description of the screen targets are laid out on.
struct DisplayProfile {
    int width_px = 1290;
    int height_px = 2796;
    double pixels_per_cm = 460.0 / kCmPerInch;
    std::string name = "iphone-16-plus";

    DisplayProfile() = default;

    DisplayProfile(std::string label, int width, int height, double px_per_cm)
        : width_px(width), height_px(height), pixels_per_cm(px_per_cm), name(std::move(label)) {
        validate();
    }

    static DisplayProfile from_ppi(std::string label, int width, int height, double ppi) {
        return DisplayProfile(std::move(label), width, height, ppi / kCmPerInch);
    }

    double physical_width_cm() const { return width_px / pixels_per_cm; }
    double physical_height_cm() const { return height_px / pixels_per_cm; }

    void validate() const {
        if (width_px <= 0 || height_px <= 0)
            throw std::invalid_argument("display profile: pixel dimensions must be positive");
        if (!(pixels_per_cm > 0.0) || !std::isfinite(pixels_per_cm))
            throw std::invalid_argument("display profile: pixels_per_cm must be positive and finite");
        if (!std::isfinite(physical_width_cm()))
            throw std::invalid_argument("display profile: physical width is not finite");
    }
};

inline DisplayProfile default_display() { return DisplayProfile{}; }

// JSON form: {"name","width_px","height_px","ppi"}; pixels_per_cm is derived.
inline DisplayProfile display_from_json(const nlohmann::json& j) {
    return DisplayProfile::from_ppi(j.value("name", std::string("custom")),
                                    j.at("width_px").get<int>(),
                                    j.at("height_px").get<int>(),
                                    j.at("ppi").get<double>());
}

inline nlohmann::json display_to_json(const DisplayProfile& p) {
    return {{"name", p.name},
            {"width_px", p.width_px},
            {"height_px", p.height_px},
            {"ppi", p.pixels_per_cm * kCmPerInch}};
}

/// Face-to-screen distance. Readings outside [5, 200] cm are sensor garbage.
class ViewingDistance {
public:
    static constexpr double kMinCm = 5.0;
    static constexpr double kMaxCm = 200.0;

    explicit ViewingDistance(double cm) : cm_(cm) {
        if (!(cm >= kMinCm && cm <= kMaxCm))
            throw std::invalid_argument("viewing distance outside [5, 200] cm: " + std::to_string(cm));
    }

    static ViewingDistance clamped(double cm) {
        if (std::isnan(cm)) throw std::invalid_argument("viewing distance is NaN");
        return ViewingDistance(std::clamp(cm, kMinCm, kMaxCm));
    }

    double cm() const { return cm_; }

    friend bool operator==(ViewingDistance, ViewingDistance) = default;

private:
    double cm_;
};

class VisualAngle {
public:
    explicit VisualAngle(double degrees) : degrees_(degrees) {
        if (!(degrees > 0.0 && degrees < 90.0))
            throw std::invalid_argument("visual angle must lie in (0, 90) degrees");
    }

    double degrees() const { return degrees_; }
    double radians() const { return degrees_ * std::numbers::pi / 180.0; }

private:
    double degrees_;
};

/// Extent (cm) subtending `theta` at distance `d`: 2 d tan(theta / 2).
inline double angle_to_physical(VisualAngle theta, ViewingDistance d) {
    return 2.0 * d.cm() * std::tan(theta.radians() / 2.0);
}

inline double physical_to_px(double size_cm, const DisplayProfile& profile) {
    if (size_cm < 0.0) throw std::invalid_argument("physical size must be non-negative");
    return size_cm * profile.pixels_per_cm;
}

inline double px_to_physical(double size_px, const DisplayProfile& profile) {
    return size_px / profile.pixels_per_cm;
}

inline double angle_to_px(VisualAngle theta, ViewingDistance d, const DisplayProfile& profile) {
    return physical_to_px(angle_to_physical(theta, d), profile);
}

// Signed on-screen displacement of a gaze direction offset by `degrees` from
// the line of sight. Unlike angle_to_px this is one-sided: d tan(theta).
inline double angular_offset_to_px(double degrees, double distance_cm, const DisplayProfile& profile) {
    return distance_cm * std::tan(degrees * std::numbers::pi / 180.0) * profile.pixels_per_cm;
}

// Render/hit-test boundary rounding: half away from zero.
inline long round_px(double px) { return std::lround(px); }

} // namespace gaui

#endif // GAUI_GEOMETRY_HPP
