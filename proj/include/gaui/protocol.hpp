#ifndef GAUI_PROTOCOL_HPP
#define GAUI_PROTOCOL_HPP

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gaui/session.hpp"

namespace gaui {

// Live sessions have no task pressure; a day is effectively unbounded.
inline constexpr TimeMs kLiveTimeoutMs = 24LL * 3600 * 1000;
inline constexpr double kDefaultLiveDistanceCm = 32.0;

/// One demo client's interactive session, driven by JSON line frames.
///
/// Client frames: hello, gaze, distance, esm_answer, reset. Server frames:
/// layout, dwell, adaptation, player, esm_prompt, trial_end, error. A
/// session is started by hello or, failing that, by the first gaze or
/// distance frame. Until the first distance reading arrives the adaptive
/// layout is provisional; that reading becomes the initial distance.
class DemoConnection {
public:
    std::vector<nlohmann::json> handle(const std::string& line) {
        std::vector<nlohmann::json> out;
        nlohmann::json msg;
        try {
            msg = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error&) {
            out.push_back(error("malformed frame"));
            return out;
        }
        try {
            if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string())
                throw std::invalid_argument("frame needs a string \"type\"");
            const auto type = msg["type"].get<std::string>();
            if (type == "hello")
                on_hello(msg, out);
            else if (type == "gaze")
                on_gaze(msg, out);
            else if (type == "distance")
                on_distance(msg, out);
            else if (type == "esm_answer")
                on_esm_answer(msg, out);
            else if (type == "reset")
                start(std::nullopt, out);
            else
                throw std::invalid_argument("unknown frame type: " + type);
        } catch (const StreamOrderError& e) {
            out.push_back(error(e.what()));
        } catch (const nlohmann::json::exception& e) {
            out.push_back(error(std::string("bad field: ") + e.what()));
        } catch (const std::exception& e) {
            out.push_back(error(e.what()));
        }
        return out;
    }

    const Session* session() const { return session_ ? &*session_ : nullptr; }

    static nlohmann::json error(const std::string& msg) { return {{"type", "error"}, {"msg", msg}}; }

private:
    struct Setup {
        TrialConfig config;
        DisplayProfile profile;
        std::optional<double> distance_cm;
    };

    void on_hello(const nlohmann::json& m, std::vector<nlohmann::json>& out) {
        Setup s;
        s.config.interface_type = parse_interface(m.value("interface", std::string("adaptive")));
        s.config.difficulty = parse_difficulty(m.value("difficulty", std::string("free")));
        s.config.timeout_ms = s.config.difficulty == Difficulty::free ? kLiveTimeoutMs : kDefaultTimeoutMs;
        s.config.seed = m.value("seed", std::uint64_t{0});
        if (m.contains("band") && !m["band"].is_null())
            s.config.distance_band = parse_distance_band(m["band"].get<std::string>());
        if (m.contains("profile") && !m["profile"].is_null()) s.profile = display_from_json(m["profile"]);
        if (m.contains("distance_cm")) s.distance_cm = m["distance_cm"].get<double>();
        s.config.validate();
        setup_ = s;
        start(std::nullopt, out);
    }

    void on_gaze(const nlohmann::json& m, std::vector<nlohmann::json>& out) {
        ensure_session(std::nullopt, out);
        GazeSample g;
        g.t_ms = m.at("t_ms").get<TimeMs>();
        g.x_px = m.at("x").get<double>();
        g.y_px = m.at("y").get<double>();
        g.valid = m.value("valid", true);
        ++samples_;
        emit(session_->step(g), out);
    }

    void on_distance(const nlohmann::json& m, std::vector<nlohmann::json>& out) {
        const TimeMs t = m.at("t_ms").get<TimeMs>();
        const double cm = m.at("cm").get<double>();
        if (!session_ || (provisional_ && samples_ == 0)) {
            // First reading fixes the starting layout instead of adapting it.
            start(cm, out);
            ++samples_;
            if (t > 0) session_->advance_to(t);
            return;
        }
        ++samples_;
        emit(session_->observe_distance(cm, t), out);
    }

    void on_esm_answer(const nlohmann::json& m, std::vector<nlohmann::json>& out) {
        if (!session_) throw std::invalid_argument("no session");
        session_->record_esm_answer(m.value("answers", nlohmann::json::object()),
                                    m.value("t_ms", session_->last_time_ms()));
        (void)out;
    }

    void ensure_session(std::optional<double> cm, std::vector<nlohmann::json>& out) {
        if (!session_) start(cm, out);
    }

    void start(std::optional<double> cm, std::vector<nlohmann::json>& out) {
        if (!setup_) {
            setup_.emplace();
            setup_->config.difficulty = Difficulty::free;
            setup_->config.timeout_ms = kLiveTimeoutMs;
        }
        const auto initial = cm ? cm : setup_->distance_cm;
        provisional_ = !initial.has_value();
        samples_ = 0;
        session_.emplace(setup_->config, default_playlist(), setup_->profile,
                         initial.value_or(setup_->config.distance_band
                                              ? band_median_cm(*setup_->config.distance_band)
                                              : kDefaultLiveDistanceCm));
        out.push_back(layout_frame());
        out.push_back(player_frame());
    }

    nlohmann::json layout_frame() const {
        const auto& m = session_->layout();
        auto targets = page_targets_json(m, session_->current_page());
        const auto& page = m.page(session_->current_page());
        for (std::size_t i = 0; i < page.size(); ++i)
            targets[i]["title"] = session_->playlist().tracks[static_cast<std::size_t>(page[i].id.slot)].title;
        return {{"type", "layout"},
                {"band", to_string(m.band())},
                {"page", session_->current_page()},
                {"page_count", m.page_count()},
                {"targets", std::move(targets)}};
    }

    nlohmann::json player_frame() const {
        const auto& p = session_->player();
        nlohmann::json j{{"type", "player"}, {"paused", p.paused}};
        j["playing"] = p.playing ? nlohmann::json(session_->playlist().tracks[static_cast<std::size_t>(*p.playing)].title)
                                 : nlohmann::json(nullptr);
        return j;
    }

    void emit(const std::vector<SessionEvent>& events, std::vector<nlohmann::json>& out) {
        for (const auto& e : events) {
            switch (e.type) {
            case SessionEventType::dwell: {
                auto j = to_json(*e.dwell);
                j["type"] = "dwell";
                out.push_back(std::move(j));
                break;
            }
            case SessionEventType::adaptation:
                out.push_back({{"type", "adaptation"},
                               {"from", to_string(e.adaptation->from)},
                               {"to", to_string(e.adaptation->to)},
                               {"t_ms", e.t_ms}});
                break;
            case SessionEventType::layout: out.push_back(layout_frame()); break;
            case SessionEventType::track_played:
            case SessionEventType::play_pause: out.push_back(player_frame()); break;
            case SessionEventType::esm_prompt: out.push_back({{"type", "esm_prompt"}, {"t_ms", e.t_ms}}); break;
            case SessionEventType::trial_end:
                out.push_back({{"type", "trial_end"}, {"outcome", to_string(session_->outcome())}, {"t_ms", e.t_ms}});
                break;
            default: break;
            }
        }
    }

    std::optional<Setup> setup_;
    std::optional<Session> session_;
    bool provisional_ = true;
    long samples_ = 0;
};

} // namespace gaui

#endif // GAUI_PROTOCOL_HPP
