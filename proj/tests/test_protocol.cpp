#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <thread>

#include <gtest/gtest.h>

#include "gaui/server.hpp"

using namespace gaui;
using nlohmann::json;

namespace {

std::vector<json> send(DemoConnection& c, const json& frame) { return c.handle(frame.dump()); }

std::vector<json> of_type(const std::vector<json>& frames, const std::string& type) {
    std::vector<json> out;
    for (const auto& f : frames)
        if (f["type"] == type) out.push_back(f);
    return out;
}

std::pair<double, double> centre(const json& layout, const std::string& id) {
    for (const auto& t : layout["targets"])
        if (t["id"] == id)
            return {t["x"].get<double>() + t["w"].get<double>() / 2.0, t["y"].get<double>() + t["h"].get<double>() / 2.0};
    throw std::runtime_error("no target " + id);
}

std::vector<json> gaze_for(DemoConnection& c, std::pair<double, double> at, std::int64_t from_frame, int frames) {
    std::vector<json> all;
    for (int k = 0; k < frames; ++k) {
        auto out = send(c, {{"type", "gaze"}, {"t_ms", frame_time(from_frame + k)}, {"x", at.first}, {"y", at.second}});
        all.insert(all.end(), out.begin(), out.end());
    }
    return all;
}

} // namespace

TEST(Protocol, DistanceThenOneSecondOnTrackActivates) {
    DemoConnection c;
    auto first = send(c, {{"type", "distance"}, {"t_ms", 0}, {"cm", 37.0}});
    auto layouts = of_type(first, "layout");
    ASSERT_EQ(layouts.size(), 1u);
    EXPECT_EQ(layouts[0]["band"], "large");
    EXPECT_TRUE(of_type(first, "adaptation").empty());

    const auto frames = gaze_for(c, centre(layouts[0], "track:0"), 1, 31);
    auto dwell = of_type(frames, "dwell");
    ASSERT_FALSE(dwell.empty());
    EXPECT_EQ(dwell.front()["kind"], "started");
    EXPECT_EQ(dwell.back()["kind"], "activated");
    EXPECT_EQ(dwell.back()["target"], "track:0");
    EXPECT_EQ(dwell.back()["t_ms"], frame_time(1) + 1000);
    auto player = of_type(frames, "player");
    ASSERT_EQ(player.size(), 1u);
    EXPECT_EQ(player[0]["playing"], layouts[0]["targets"][0]["title"]);
    EXPECT_EQ(player[0]["playing"], c.session()->playlist().tracks[0].title);
}

TEST(Protocol, SweepTwentySevenToThirtyEightAdaptsTwice) {
    DemoConnection c;
    send(c, {{"type", "hello"}, {"interface", "adaptive"}});
    std::vector<json> all;
    TimeMs t = 0;
    for (double cm = 27.0; cm <= 38.0 + 1e-9; cm += 0.25, t += 100) {
        auto out = send(c, {{"type", "distance"}, {"t_ms", t}, {"cm", cm}});
        all.insert(all.end(), out.begin(), out.end());
    }
    const auto a = of_type(all, "adaptation");
    ASSERT_EQ(a.size(), 2u);
    EXPECT_EQ(a[0]["from"], "small");
    EXPECT_EQ(a[0]["to"], "medium");
    EXPECT_EQ(a[1]["from"], "medium");
    EXPECT_EQ(a[1]["to"], "large");
    EXPECT_EQ(of_type(all, "layout").back()["band"], "large");
}

TEST(Protocol, MalformedFramesAnswerErrorAndSessionContinues) {
    DemoConnection c;
    send(c, {{"type", "hello"}, {"interface", "static-medium"}});
    for (const std::string bad : {"{not json", "[1,2]", R"({"type":42})", R"({"type":"teleport"})",
                                  R"({"type":"gaze","t_ms":"soon","x":1,"y":2})", R"({"type":"distance","t_ms":5})"}) {
        auto out = c.handle(bad);
        ASSERT_EQ(out.size(), 1u) << bad;
        EXPECT_EQ(out[0]["type"], "error") << bad;
        EXPECT_TRUE(out[0]["msg"].is_string());
    }
    auto ok = send(c, {{"type", "gaze"}, {"t_ms", 10}, {"x", 5.0}, {"y", 5.0}});
    EXPECT_TRUE(of_type(ok, "error").empty());
    auto late = send(c, {{"type", "gaze"}, {"t_ms", 9}, {"x", 5.0}, {"y", 5.0}});
    ASSERT_EQ(late.size(), 1u);
    EXPECT_EQ(late[0]["type"], "error");
    EXPECT_NE(late[0]["msg"].get<std::string>().find("order"), std::string::npos);
    EXPECT_TRUE(of_type(send(c, {{"type", "gaze"}, {"t_ms", 11}, {"x", 5.0}, {"y", 5.0}}), "error").empty());
}

TEST(Protocol, HelloSelectsInterfaceAndDisplay) {
    DemoConnection c;
    auto out = send(c, {{"type", "hello"},
                        {"interface", "static-small"},
                        {"profile", {{"name", "tablet"}, {"width_px", 1640}, {"height_px", 2360}, {"ppi", 264}}}});
    auto l = of_type(out, "layout");
    ASSERT_EQ(l.size(), 1u);
    EXPECT_EQ(l[0]["band"], "small");
    EXPECT_EQ(l[0]["page"], 0);
    EXPECT_EQ(c.session()->layout().page(0).front().rect.w, 1640.0);
    auto bad = send(c, {{"type", "hello"}, {"interface", "holographic"}});
    ASSERT_EQ(bad.size(), 1u);
    EXPECT_EQ(bad[0]["type"], "error");
    EXPECT_EQ(c.session()->band(), SizeBand::small);  // previous session untouched
}

TEST(Protocol, NavigationSendsNewLayoutAndResetReturnsToFirstPage) {
    DemoConnection c;
    auto l = of_type(send(c, {{"type", "hello"}, {"interface", "static-large"}}), "layout")[0];
    auto frames = gaze_for(c, centre(l, "nav_right"), 1, 16);
    auto layouts = of_type(frames, "layout");
    ASSERT_EQ(layouts.size(), 1u);
    EXPECT_EQ(layouts[0]["page"], 1);
    EXPECT_EQ(layouts[0]["targets"][0]["id"], "track:2");
    auto r = send(c, {{"type", "reset"}});
    EXPECT_EQ(of_type(r, "layout")[0]["page"], 0);
}

TEST(Protocol, EsmPromptThirtySecondsAfterFirstAdaptation) {
    DemoConnection c;
    send(c, {{"type", "hello"}, {"interface", "adaptive"}, {"distance_cm", 27.0}});
    auto a = send(c, {{"type", "distance"}, {"t_ms", 1000}, {"cm", 38.0}});
    EXPECT_EQ(of_type(a, "adaptation").size(), 1u);
    EXPECT_TRUE(of_type(send(c, {{"type", "gaze"}, {"t_ms", 30999}, {"x", 1.0}, {"y", 1.0}}), "esm_prompt").empty());
    auto p = of_type(send(c, {{"type", "gaze"}, {"t_ms", 31000}, {"x", 1.0}, {"y", 1.0}}), "esm_prompt");
    ASSERT_EQ(p.size(), 1u);
    EXPECT_EQ(p[0]["t_ms"], 31000);
    EXPECT_TRUE(send(c, {{"type", "esm_answer"}, {"answers", {{"noticed", true}}}}).empty());
    EXPECT_EQ(c.session()->record().events.back().type, SessionEventType::esm_answer);
}

namespace {

class Client {
public:
    explicit Client(std::uint16_t port) {
        fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(port);
        ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
        if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) throw std::runtime_error("connect");
        timeval tv{5, 0};
        ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    }
    ~Client() { ::close(fd_); }

    void send_line(const std::string& s) {
        const std::string line = s + "\n";
        ASSERT_EQ(::send(fd_, line.data(), line.size(), MSG_NOSIGNAL), static_cast<ssize_t>(line.size()));
    }

    json read_frame() {
        for (;;) {
            auto nl = buf_.find('\n');
            if (nl != std::string::npos) {
                auto line = buf_.substr(0, nl);
                buf_.erase(0, nl + 1);
                return json::parse(line);
            }
            char chunk[4096];
            const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
            if (n <= 0) throw std::runtime_error("connection closed");
            buf_.append(chunk, static_cast<std::size_t>(n));
        }
    }

    // Reads until a frame of `type` arrives.
    json await(const std::string& type) {
        for (;;) {
            auto f = read_frame();
            if (f["type"] == type) return f;
        }
    }

private:
    int fd_;
    std::string buf_;
};

} // namespace

TEST(Server, EndToEndOverTcp) {
    DemoServer server(0);
    std::thread loop([&] { server.run(); });

    {
        Client a(server.port());
        Client b(server.port());
        a.send_line(R"({"type":"distance","t_ms":0,"cm":37})");
        const auto layout = a.await("layout");
        EXPECT_EQ(layout["band"], "large");
        a.send_line("this is not json");
        EXPECT_EQ(a.await("error")["type"], "error");

        b.send_line(R"({"type":"hello","interface":"static-small"})");
        EXPECT_EQ(b.await("layout")["band"], "small");

        const auto [x, y] = centre(layout, "track:1");
        for (int k = 1; k <= 31; ++k)
            a.send_line(json{{"type", "gaze"}, {"t_ms", frame_time(k)}, {"x", x}, {"y", y}}.dump());
        json d;
        do d = a.await("dwell");
        while (d["kind"] != "activated");
        EXPECT_EQ(d["target"], "track:1");
        EXPECT_EQ(a.await("player")["playing"], layout["targets"][1]["title"]);

        // The other connection's session is independent.
        b.send_line(R"({"type":"gaze","t_ms":0,"x":1,"y":1})");
        b.send_line(R"({"type":"reset"})");
        EXPECT_EQ(b.await("layout")["page"], 0);
    }

    EXPECT_THROW(DemoServer(server.port()), std::runtime_error);
    server.stop();
    loop.join();
}

TEST(Server, EsmPromptThirtySecondsAfterFirstAdaptationOverTcp) {
    DemoServer server(0);
    std::thread loop([&] { server.run(); });
    {
        Client c(server.port());
        c.send_line(R"({"type":"hello","interface":"adaptive"})");
        c.send_line(R"({"type":"distance","t_ms":0,"cm":27})");
        EXPECT_EQ(c.await("layout")["band"], "medium");  // provisional hello layout
        EXPECT_EQ(c.await("layout")["band"], "small");
        std::optional<TimeMs> adapted;
        json prompt;
        for (std::int64_t k = 1; k <= 30 * 33; ++k) {
            const TimeMs t = frame_time(k);
            if (k % 3 == 0) c.send_line(json{{"type", "distance"}, {"t_ms", t}, {"cm", k < 30 ? 27.0 + k * 0.4 : 38.0}}.dump());
            c.send_line(json{{"type", "gaze"}, {"t_ms", t}, {"x", 5.0}, {"y", 5.0}}.dump());
        }
        for (;;) {
            const auto f = c.read_frame();
            if (f["type"] == "adaptation" && !adapted) adapted = f["t_ms"].get<TimeMs>();
            if (f["type"] == "esm_prompt") {
                prompt = f;
                break;
            }
        }
        ASSERT_TRUE(adapted);
        EXPECT_NEAR(static_cast<double>(prompt["t_ms"].get<TimeMs>() - *adapted), 30000.0, 40.0);
    }
    server.stop();
    loop.join();
}
