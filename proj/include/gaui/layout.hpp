#ifndef GAUI_LAYOUT_HPP
#define GAUI_LAYOUT_HPP

#include <array>
#include <cmath>
#include <compare>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gaui/adaptation.hpp"
#include "gaui/dwell.hpp"
#include "gaui/errors.hpp"
#include "gaui/geometry.hpp"

namespace gaui {

enum class TargetKind { track, nav_left, nav_right, play_pause };

inline std::string_view to_string(TargetKind k) {
    switch (k) {
    case TargetKind::track: return "track";
    case TargetKind::nav_left: return "nav_left";
    case TargetKind::nav_right: return "nav_right";
    case TargetKind::play_pause: return "play_pause";
    }
    return "?";
}

/// Stable target identifier. `slot` is the 0-based list position for tracks
/// and -1 for controls.
struct TargetId {
    TargetKind kind = TargetKind::track;
    int slot = -1;

    static TargetId track(int slot) { return {TargetKind::track, slot}; }
    static TargetId control(TargetKind k) { return {k, -1}; }

    bool is_track() const { return kind == TargetKind::track; }
    bool is_nav() const { return kind == TargetKind::nav_left || kind == TargetKind::nav_right; }

    friend auto operator<=>(const TargetId&, const TargetId&) = default;
};

inline std::string label(const TargetId& id) {
    if (id.is_track()) return "track:" + std::to_string(id.slot);
    return std::string(to_string(id.kind));
}

inline TargetId parse_target_id(std::string_view s) {
    if (s.starts_with("track:")) return TargetId::track(std::stoi(std::string(s.substr(6))));
    if (s == "nav_left") return TargetId::control(TargetKind::nav_left);
    if (s == "nav_right") return TargetId::control(TargetKind::nav_right);
    if (s == "play_pause") return TargetId::control(TargetKind::play_pause);
    throw std::invalid_argument("unknown target id: " + std::string(s));
}

struct Rect {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double right() const { return x + w; }
    double bottom() const { return y + h; }
    double cx() const { return x + w / 2.0; }
    double cy() const { return y + h / 2.0; }

    // Integer pixel edges used for rendering and hit-testing.
    long left_px() const { return round_px(x); }
    long top_px() const { return round_px(y); }
    long right_px() const { return round_px(right()); }
    long bottom_px() const { return round_px(bottom()); }

    // Top/left inclusive, bottom/right exclusive.
    bool contains(double px, double py) const {
        return px >= left_px() && px < right_px() && py >= top_px() && py < bottom_px();
    }

    bool overlaps(const Rect& o) const {
        return left_px() < o.right_px() && o.left_px() < right_px() &&
               top_px() < o.bottom_px() && o.top_px() < bottom_px();
    }
};

struct Track {
    int index = 0;
    std::string title;
};

struct Playlist {
    std::vector<Track> tracks;

    std::size_t size() const { return tracks.size(); }

    void validate() const {
        if (tracks.empty()) throw std::invalid_argument("playlist must contain at least one track");
        std::set<std::string> seen;
        for (const auto& t : tracks)
            if (!seen.insert(t.title).second)
                throw std::invalid_argument("duplicate track title: " + t.title);
    }
};

inline Playlist default_playlist(int count = 30) {
    static constexpr std::array<std::string_view, 30> kTitles = {
        "Aurora", "Breeze", "Cascade", "Dawn", "Ember", "Fjord", "Glacier", "Harbor",
        "Island", "Jasmine", "Kestrel", "Lagoon", "Meadow", "Nebula", "Orchid", "Prairie",
        "Quartz", "Ripple", "Summit", "Tundra", "Umbra", "Valley", "Willow", "Xenon",
        "Yonder", "Zephyr", "Canyon", "Drift", "Echo", "Horizon"};
    if (count < 1) throw std::invalid_argument("playlist must contain at least one track");
    Playlist p;
    for (int i = 0; i < count; ++i) {
        std::string title = i < static_cast<int>(kTitles.size())
                                ? std::string(kTitles[i])
                                : std::string(kTitles[i % kTitles.size()]) + std::to_string(i / kTitles.size());
        p.tracks.push_back({i, std::move(title)});
    }
    return p;
}

/// Angular sizes of targets at their band's reference distance.
struct TargetAngles {
    double item_height_deg = 4.0;
    double control_width_deg = 3.0;
    double control_height_deg = 5.0;
    double control_gap_deg = 0.5;
};

/// Screen furniture around the list. Defaults give 4/3/2 items per page for
/// small/medium/large on the default display.
struct ChromeConfig {
    double header_px = 760.0;
    double control_bar_padding_px = 40.0;
    double list_bottom_margin_px = 0.0;
    TargetAngles angles{};
};

struct TargetSpec {
    TargetId id;
    Rect rect;
    int dwell_threshold_ms = kTrackDwellMs;
    std::string title;
};

using LayoutHit = BasicHit<TargetId>;

class LayoutModel {
public:
    SizeBand band() const { return band_; }
    int items_per_page() const { return items_per_page_; }
    int page_count() const { return static_cast<int>(pages_.size()); }
    int track_count() const { return track_count_; }
    double item_height_px() const { return item_height_px_; }
    double control_width_px() const { return control_width_px_; }
    double control_height_px() const { return control_height_px_; }
    double list_top_px() const { return list_top_px_; }
    double list_viewport_px() const { return list_viewport_px_; }
    const DisplayProfile& profile() const { return profile_; }

    const std::vector<TargetSpec>& page(int page_index) const { return pages_.at(check_page(page_index)); }
    const std::vector<std::vector<TargetSpec>>& pages() const { return pages_; }
    const std::array<TargetSpec, 3>& controls() const { return controls_; }

    const TargetSpec& control(TargetKind kind) const {
        for (const auto& c : controls_)
            if (c.id.kind == kind) return c;
        throw std::invalid_argument("not a control kind");
    }

    // Navigation does not wrap: left is disabled on the first page, right on
    // the last.
    bool control_enabled(TargetKind kind, int page_index) const {
        check_page(page_index);
        if (kind == TargetKind::nav_left) return page_index > 0;
        if (kind == TargetKind::nav_right) return page_index + 1 < page_count();
        return true;
    }

    /// Targets that are live on a page: its tracks plus enabled controls.
    std::vector<TargetSpec> targets_on_page(int page_index) const {
        std::vector<TargetSpec> out = page(page_index);
        for (const auto& c : controls_)
            if (control_enabled(c.id.kind, page_index)) out.push_back(c);
        return out;
    }

    std::optional<LayoutHit> hit_test(int page_index, double x, double y) const {
        for (const auto& t : page(page_index))
            if (t.rect.contains(x, y)) return LayoutHit{t.id, t.dwell_threshold_ms};
        for (const auto& c : controls_)
            if (control_enabled(c.id.kind, page_index) && c.rect.contains(x, y))
                return LayoutHit{c.id, c.dwell_threshold_ms};
        return std::nullopt;
    }

    /// 1-based page holding the 1-based list position.
    int page_of_track(int track_position) const {
        if (track_position < 1 || track_position > track_count_)
            throw std::out_of_range("track position outside playlist");
        return (track_position + items_per_page_ - 1) / items_per_page_;
    }

    /// 0-based page holding the 0-based slot.
    int page_index_of_slot(int slot) const { return page_of_track(slot + 1) - 1; }

    const TargetSpec& track_target(int slot) const {
        const auto& p = page(page_index_of_slot(slot));
        return p.at(static_cast<std::size_t>(slot % items_per_page_));
    }

    friend LayoutModel layout_for_band(SizeBand, const DisplayProfile&, const Playlist&, const ChromeConfig&);

private:
    int check_page(int page_index) const {
        if (page_index < 0 || page_index >= page_count()) throw std::out_of_range("page index out of range");
        return page_index;
    }

    SizeBand band_ = SizeBand::medium;
    DisplayProfile profile_;
    int items_per_page_ = 1;
    int track_count_ = 0;
    double item_height_px_ = 0.0;
    double control_width_px_ = 0.0;
    double control_height_px_ = 0.0;
    double list_top_px_ = 0.0;
    double list_viewport_px_ = 0.0;
    std::vector<std::vector<TargetSpec>> pages_;
    std::array<TargetSpec, 3> controls_{};
};

inline LayoutModel layout_for_band(SizeBand band, const DisplayProfile& profile, const Playlist& playlist,
                                   const ChromeConfig& chrome = {}) {
    profile.validate();
    playlist.validate();
    const ViewingDistance ref(reference_distance_cm(band));
    const auto& a = chrome.angles;

    LayoutModel m;
    m.band_ = band;
    m.profile_ = profile;
    m.track_count_ = static_cast<int>(playlist.size());
    m.item_height_px_ = angle_to_px(VisualAngle(a.item_height_deg), ref, profile);
    m.control_width_px_ = angle_to_px(VisualAngle(a.control_width_deg), ref, profile);
    m.control_height_px_ = angle_to_px(VisualAngle(a.control_height_deg), ref, profile);
    const double gap_px = angle_to_px(VisualAngle(a.control_gap_deg), ref, profile);

    const double bar_height = m.control_height_px_ + 2.0 * chrome.control_bar_padding_px;
    m.list_top_px_ = chrome.header_px;
    m.list_viewport_px_ = profile.height_px - chrome.header_px - chrome.list_bottom_margin_px - bar_height;
    if (m.list_viewport_px_ < m.item_height_px_)
        throw ConfigError("layout: viewport of " + std::to_string(m.list_viewport_px_) +
                          " px cannot fit one " + std::to_string(m.item_height_px_) + " px item");

    const double bar_width = 3.0 * m.control_width_px_ + 2.0 * gap_px;
    if (bar_width > profile.width_px)
        throw ConfigError("layout: control bar wider than the display");

    m.items_per_page_ = std::max(1, static_cast<int>(std::floor(m.list_viewport_px_ / m.item_height_px_)));
    const int page_count = (m.track_count_ + m.items_per_page_ - 1) / m.items_per_page_;

    m.pages_.assign(static_cast<std::size_t>(page_count), {});
    for (int slot = 0; slot < m.track_count_; ++slot) {
        const int row = slot % m.items_per_page_;
        TargetSpec t;
        t.id = TargetId::track(slot);
        t.rect = Rect{0.0, m.list_top_px_ + row * m.item_height_px_, static_cast<double>(profile.width_px),
                      m.item_height_px_};
        t.dwell_threshold_ms = kTrackDwellMs;
        t.title = playlist.tracks[static_cast<std::size_t>(slot)].title;
        m.pages_[static_cast<std::size_t>(slot / m.items_per_page_)].push_back(std::move(t));
    }

    const double bar_left = (profile.width_px - bar_width) / 2.0;
    const double bar_top = profile.height_px - chrome.control_bar_padding_px - m.control_height_px_;
    constexpr std::array<TargetKind, 3> kOrder = {TargetKind::nav_left, TargetKind::play_pause,
                                                  TargetKind::nav_right};
    for (std::size_t i = 0; i < kOrder.size(); ++i) {
        TargetSpec c;
        c.id = TargetId::control(kOrder[i]);
        c.rect = Rect{bar_left + static_cast<double>(i) * (m.control_width_px_ + gap_px), bar_top,
                      m.control_width_px_, m.control_height_px_};
        c.dwell_threshold_ms = kControlDwellMs;
        m.controls_[i] = std::move(c);
    }
    return m;
}

inline nlohmann::json to_json(const TargetSpec& t, bool enabled = true) {
    nlohmann::json j{{"id", label(t.id)},
                     {"kind", to_string(t.id.kind)},
                     {"x", t.rect.left_px()},
                     {"y", t.rect.top_px()},
                     {"w", t.rect.right_px() - t.rect.left_px()},
                     {"h", t.rect.bottom_px() - t.rect.top_px()},
                     {"threshold_ms", t.dwell_threshold_ms},
                     {"enabled", enabled}};
    if (t.id.is_track()) {
        j["slot"] = t.id.slot;
        j["title"] = t.title;
    }
    return j;
}

/// Targets of one page as rendered: tracks then the three controls with
/// their enabled state.
inline nlohmann::json page_targets_json(const LayoutModel& m, int page_index) {
    nlohmann::json targets = nlohmann::json::array();
    for (const auto& t : m.page(page_index)) targets.push_back(to_json(t));
    for (const auto& c : m.controls()) targets.push_back(to_json(c, m.control_enabled(c.id.kind, page_index)));
    return targets;
}

inline nlohmann::json to_json(const LayoutModel& m) {
    nlohmann::json pages = nlohmann::json::array();
    for (int p = 0; p < m.page_count(); ++p) pages.push_back(page_targets_json(m, p));
    return {{"band", to_string(m.band())},
            {"display", display_to_json(m.profile())},
            {"items_per_page", m.items_per_page()},
            {"page_count", m.page_count()},
            {"item_height_px", m.item_height_px()},
            {"control_width_px", m.control_width_px()},
            {"control_height_px", m.control_height_px()},
            {"pages", std::move(pages)}};
}

} // namespace gaui

#endif // GAUI_LAYOUT_HPP
