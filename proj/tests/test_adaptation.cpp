#include <random>

#include <gtest/gtest.h>

#include "gaui/adaptation.hpp"

using namespace gaui;

TEST(InitBand, HalfOpenIntervals) {
    EXPECT_EQ(init_band(ViewingDistance(27)), SizeBand::small);
    EXPECT_EQ(init_band(ViewingDistance(29.999)), SizeBand::small);
    EXPECT_EQ(init_band(ViewingDistance(30)), SizeBand::medium);
    EXPECT_EQ(init_band(ViewingDistance(34.999)), SizeBand::medium);
    EXPECT_EQ(init_band(ViewingDistance(35)), SizeBand::large);
    EXPECT_EQ(init_band(ViewingDistance(41)), SizeBand::large);
}

TEST(SizeBand, ReferenceDistancesAreBandMedians) {
    EXPECT_EQ(reference_distance_cm(SizeBand::small), 27.0);
    EXPECT_EQ(reference_distance_cm(SizeBand::medium), 32.0);
    EXPECT_EQ(reference_distance_cm(SizeBand::large), 37.0);
}

TEST(HysteresisConfig, Validation) {
    EXPECT_THROW((HysteresisConfig{35, 30, 2}.validate()), std::invalid_argument);
    EXPECT_THROW((HysteresisConfig{30, 35, -1}.validate()), std::invalid_argument);
    EXPECT_THROW((HysteresisConfig{30, 35, 2.5}.validate()), std::invalid_argument);
    EXPECT_NO_THROW((HysteresisConfig{30, 35, 2.49}.validate()));
    EXPECT_THROW(AdaptationController(ViewingDistance(30), 0, HysteresisConfig{30, 35, 3}), std::invalid_argument);
}

TEST(Update, SwitchUpNeedsBufferCleared) {
    AdaptationController c(ViewingDistance(27), 0);
    EXPECT_FALSE(c.update(31, 1));
    EXPECT_EQ(c.current(), SizeBand::small);
    auto ev = c.update(32.5, 2);
    ASSERT_TRUE(ev);
    EXPECT_EQ(ev->from, SizeBand::small);
    EXPECT_EQ(ev->to, SizeBand::medium);
    EXPECT_EQ(ev->t_ms, 2);
}

TEST(Update, SwitchDownIsInclusive) {
    AdaptationController c(ViewingDistance(32), 0);
    ASSERT_EQ(c.current(), SizeBand::medium);
    EXPECT_FALSE(c.update(28.5, 1));
    auto ev = c.update(27.9, 2);
    ASSERT_TRUE(ev);
    EXPECT_EQ(ev->to, SizeBand::small);

    AdaptationController d(ViewingDistance(32), 0);
    EXPECT_TRUE(d.update(28.0, 1));  // exactly t1 - buffer
    AdaptationController u(ViewingDistance(27), 0);
    EXPECT_TRUE(u.update(32.0, 1));  // exactly t1 + buffer
}

TEST(Update, JumpAcrossBothBandsIsOneEvent) {
    AdaptationController c(ViewingDistance(26), 0);
    auto ev = c.update(38, 10);
    ASSERT_TRUE(ev);
    EXPECT_EQ(ev->from, SizeBand::small);
    EXPECT_EQ(ev->to, SizeBand::large);
    EXPECT_EQ(c.events().size(), 1u);
    auto down = c.update(26, 20);
    ASSERT_TRUE(down);
    EXPECT_EQ(down->to, SizeBand::small);
}

TEST(Update, LargeToMediumInsideMediumBand) {
    AdaptationController c(ViewingDistance(37), 0);
    EXPECT_FALSE(c.update(33.5, 1));
    auto ev = c.update(33.0, 2);
    ASSERT_TRUE(ev);
    EXPECT_EQ(ev->to, SizeBand::medium);
}

TEST(Update, OutOfRangeIsClampedAndExtremesKeepEdgeBands) {
    AdaptationController c(ViewingDistance(37), 0);
    EXPECT_FALSE(c.update(500, 1));  // clamps to 200, already large
    EXPECT_EQ(c.current(), SizeBand::large);
    auto ev = c.update(0.5, 2);      // clamps to 5
    ASSERT_TRUE(ev);
    EXPECT_EQ(ev->to, SizeBand::small);
    EXPECT_FALSE(c.update(10, 3));
}

TEST(Update, RejectsNonIncreasingTimestamps) {
    AdaptationController c(ViewingDistance(27), 100);
    EXPECT_THROW(c.update(40, 100), StreamOrderError);
    EXPECT_EQ(c.current(), SizeBand::small);
    EXPECT_TRUE(c.events().empty());
    EXPECT_TRUE(c.update(40, 101));
    EXPECT_THROW(c.update(20, 50), StreamOrderError);
    EXPECT_EQ(c.current(), SizeBand::large);
}

TEST(BandForInterface, StaticIgnoresDistance) {
    AdaptationController c(ViewingDistance(26), 0);
    EXPECT_EQ(band_for_interface(InterfaceType::static_large, c), SizeBand::large);
    EXPECT_EQ(band_for_interface(InterfaceType::static_small, AdaptationController(ViewingDistance(37), 0)),
              SizeBand::small);
    EXPECT_EQ(band_for_interface(InterfaceType::adaptive, AdaptationController(ViewingDistance(37), 0)),
              SizeBand::large);

    BandSelector fixed(InterfaceType::static_medium, ViewingDistance(26), 0);
    EXPECT_FALSE(fixed.observe(40, 1));
    EXPECT_EQ(fixed.band(), SizeBand::medium);

    BandSelector adaptive(InterfaceType::adaptive, ViewingDistance(37), 0);
    for (int t = 1; t <= 90; ++t) EXPECT_FALSE(adaptive.observe(37.0, t * 33));
    EXPECT_EQ(adaptive.band(), SizeBand::large);
}

TEST(Names, RoundTrip) {
    for (auto type : kAllInterfaces) EXPECT_EQ(parse_interface(to_string(type)), type);
    for (auto b : {SizeBand::small, SizeBand::medium, SizeBand::large}) EXPECT_EQ(parse_band(to_string(b)), b);
    EXPECT_THROW(parse_interface("huge"), std::invalid_argument);
}

TEST(AdaptationEvent, JsonLine) {
    auto j = to_json(AdaptationEvent{1200, SizeBand::medium, SizeBand::large});
    EXPECT_EQ(j.dump(), R"({"from":"medium","t_ms":1200,"to":"large"})");
}

namespace {

std::vector<AdaptationEvent> run_sweep(double from, double to, double step, TimeMs& t, AdaptationController& c) {
    std::vector<AdaptationEvent> evs;
    const double dir = to > from ? 1.0 : -1.0;
    for (double d = from; dir * (to - d) >= -1e-9; d += dir * step)
        if (auto e = c.update(d, ++t)) evs.push_back(*e);
    return evs;
}

} // namespace

TEST(Property, MonotoneSweepsEmitTwoEventsEachWay) {
    for (double step : {0.01, 0.1, 0.5, 1.0}) {
        TimeMs t = 0;
        AdaptationController c(ViewingDistance(25), t);
        auto up = run_sweep(25, 39, step, t, c);
        ASSERT_EQ(up.size(), 2u) << step;
        EXPECT_EQ(up[0].to, SizeBand::medium);
        EXPECT_EQ(up[1].to, SizeBand::large);
        auto down = run_sweep(39, 25, step, t, c);
        ASSERT_EQ(down.size(), 2u) << step;
        EXPECT_EQ(down[0].to, SizeBand::medium);
        EXPECT_EQ(down[1].to, SizeBand::small);
    }
}

TEST(Property, ConfinedSignalsNeverFlicker) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> inside(28.0 + 1e-9, 32.0 - 1e-9);
    std::uniform_int_distribution<int> len(1, 400);
    for (int trial = 0; trial < 10000; ++trial) {
        TimeMs t = 0;
        AdaptationController c(ViewingDistance(inside(rng)), t);
        const int n = len(rng);
        for (int i = 0; i < n; ++i) ASSERT_FALSE(c.update(inside(rng), ++t));
    }
}

TEST(Property, DeterministicAndReplayable) {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> walk(0.0, 1.5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> signal;
        double d = 32.0;
        for (int i = 0; i < 300; ++i) signal.push_back(d = std::clamp(d + walk(rng), 20.0, 45.0));
        AdaptationController a(ViewingDistance(signal[0]), 0), b(ViewingDistance(signal[0]), 0);
        for (std::size_t i = 1; i < signal.size(); ++i) {
            a.update(signal[i], static_cast<TimeMs>(i));
            b.update(signal[i], static_cast<TimeMs>(i));
        }
        ASSERT_EQ(a.events(), b.events());
        ASSERT_EQ(AdaptationController::replay(a.initial(), a.events()), a.current());
        for (std::size_t i = 1; i < a.events().size(); ++i)
            ASSERT_LT(a.events()[i - 1].t_ms, a.events()[i].t_ms);
    }
}
