#include <sstream>

#include <gtest/gtest.h>

#include "gaui/harness.hpp"

using namespace gaui;

namespace {

ExperimentPlan small_plan(int reps) {
    ExperimentPlan p;
    p.reps = reps;
    p.base_seed = 7;
    return p;
}

std::string raw_csv(const std::vector<TrialRow>& rows) {
    std::ostringstream os;
    write_raw_csv(os, rows);
    return os.str();
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

} // namespace

TEST(RawCsv, HeaderIsStable) {
    EXPECT_EQ(raw_csv({}), "seed,interface,band,difficulty,task_time_ms,nav_time_ms,track_errors,pp_errors,timeout\n");
}

TEST(RawCsv, RowFormatting) {
    TrialRow ok{123, {InterfaceType::static_small, DistanceBand::far, Difficulty::hard}, 0, {}};
    ok.metrics.task_time_ms = 10100;
    ok.metrics.nav_time_ms = 2500.0 / 3.0;
    ok.metrics.track_errors = 1;
    TrialRow late{9, {InterfaceType::adaptive, DistanceBand::near, Difficulty::easy}, 1, {}};
    late.metrics.timeout = true;
    const auto csv = raw_csv({ok, late});
    EXPECT_EQ(csv.substr(csv.find('\n') + 1),
              "123,static-small,35-39,hard,10100,833.333,1,0,0\n"
              "9,adaptive,25-29,easy,,,0,0,1\n");
}

TEST(Experiment, ZeroNoiseSingleRepAllSucceed) {
    SimParams sim;
    sim.noise = GazeNoiseModel::none();
    const auto rows = run_experiment(small_plan(1), sim);
    ASSERT_EQ(rows.size(), 24u);
    for (const auto& r : rows) {
        EXPECT_TRUE(r.metrics.task_time_ms);
        EXPECT_FALSE(r.metrics.timeout);
        EXPECT_EQ(r.metrics.track_errors, 0);
        EXPECT_EQ(r.metrics.pp_errors, 0);
    }
    for (const auto& c : summarize(rows)) {
        EXPECT_EQ(c.trials, 1);
        EXPECT_EQ(c.timeouts, 0);
    }
}

TEST(Experiment, OrderedByCellThenRepAndDeterministic) {
    const auto plan = small_plan(3);
    const auto a = run_experiment(plan, {}, {}, 1);
    const auto b = run_experiment(plan, {}, {}, 4);
    EXPECT_EQ(raw_csv(a), raw_csv(b));
    ASSERT_EQ(a.size(), plan.trial_count());
    std::size_t i = 0;
    for (const auto& cell : plan.cells())
        for (int rep = 0; rep < 3; ++rep, ++i) {
            EXPECT_EQ(a[i].cell, cell);
            EXPECT_EQ(a[i].rep, rep);
            EXPECT_EQ(a[i].seed, trial_seed(7, cell, rep));
        }
}

TEST(Experiment, SeedIsolationAcrossRepOverrides) {
    auto base = small_plan(3);
    auto changed = base;
    const CellKey bumped{InterfaceType::static_medium, DistanceBand::middle, Difficulty::hard};
    changed.rep_overrides[bumped] = 6;
    const auto a = run_experiment(base, {});
    const auto b = run_experiment(changed, {});
    ASSERT_EQ(b.size(), a.size() + 3);
    std::map<std::pair<CellKey, int>, std::string> by_coord;
    for (const auto& r : b) by_coord[{r.cell, r.rep}] = raw_csv({r});
    for (const auto& r : a) EXPECT_EQ(by_coord.at({r.cell, r.rep}), raw_csv({r}));

    auto subset = base;
    subset.interfaces = {InterfaceType::adaptive};
    for (const auto& r : run_experiment(subset, {})) EXPECT_EQ(by_coord.at({r.cell, r.rep}), raw_csv({r}));
}

TEST(Summary, MatchesRecomputationFromRawCsv) {
    const auto rows = run_experiment(small_plan(12), {});
    const auto table = summarize(rows);
    std::istringstream csv(raw_csv(rows));
    std::string line;
    std::getline(csv, line);
    // cell -> column -> values
    std::map<std::string, std::map<int, std::vector<double>>> cols;
    std::map<std::string, int> trials;
    while (std::getline(csv, line)) {
        const auto f = split(line);
        ASSERT_EQ(f.size(), 9u) << line;
        const std::string key = f[1] + "|" + f[2] + "|" + f[3];
        ++trials[key];
        for (int c = 4; c < 9; ++c)
            if (!f[static_cast<std::size_t>(c)].empty()) cols[key][c].push_back(std::stod(f[static_cast<std::size_t>(c)]));
    }
    auto mean = [](const std::vector<double>& v) {
        double s = 0;
        for (double x : v) s += x;
        return v.empty() ? 0.0 : s / static_cast<double>(v.size());
    };
    ASSERT_EQ(table.size(), 24u);
    for (const auto& c : table) {
        const std::string key = std::string(to_string(c.cell.interface_type)) + "|" +
                                std::string(to_string(c.cell.band)) + "|" + std::string(to_string(c.cell.difficulty));
        EXPECT_EQ(c.trials, trials[key]);
        EXPECT_NEAR(c.stats.at("task_time_ms").mean, mean(cols[key][4]), 1e-9);
        EXPECT_EQ(c.stats.at("task_time_ms").n, static_cast<int>(cols[key][4].size()));
        EXPECT_NEAR(c.stats.at("nav_time_ms").mean, mean(cols[key][5]), 5e-4);  // csv keeps 3 decimals
        EXPECT_NEAR(c.stats.at("track_errors").mean, mean(cols[key][6]), 1e-12);
        EXPECT_NEAR(c.stats.at("pp_errors").mean, mean(cols[key][7]), 1e-12);
        EXPECT_NEAR(c.stats.at("timeout").mean, mean(cols[key][8]), 1e-12);
        EXPECT_EQ(c.timeouts, static_cast<int>(mean(cols[key][8]) * c.trials + 0.5));
    }
}

TEST(Summary, DescribeUsesSampleSd) {
    const auto s = describe({2, 4, 4, 4, 5, 5, 7, 9});
    EXPECT_DOUBLE_EQ(s.mean, 5.0);
    EXPECT_NEAR(s.sd, std::sqrt(32.0 / 7.0), 1e-12);
    EXPECT_EQ(describe({3}).sd, 0.0);
    EXPECT_EQ(describe({}).n, 0);
}

TEST(Summary, CsvAndJsonShapes) {
    const auto table = summarize(run_experiment(small_plan(2), {}));
    std::ostringstream os;
    write_summary_csv(os, table);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    EXPECT_EQ(split(header).size(), 5u + 3u * 7u);
    const auto j = to_json(table);
    ASSERT_EQ(j["cells"].size(), 24u);
    EXPECT_EQ(j["cells"][0]["interface"], "static-small");
    EXPECT_EQ(j["cells"][0]["metrics"]["track_errors"]["n"], 2);
}

TEST(Plan, JsonRoundTripAndValidation) {
    auto p = small_plan(5);
    p.interfaces = {InterfaceType::adaptive, InterfaceType::static_large};
    p.rep_overrides[{InterfaceType::adaptive, DistanceBand::far, Difficulty::hard}] = 9;
    const auto q = plan_from_json(to_json(p));
    EXPECT_EQ(to_json(q), to_json(p));
    EXPECT_EQ(q.trial_count(), 2u * 3u * 2u * 5u + 4u);
    EXPECT_THROW(plan_from_json({{"reps", 0}}), std::invalid_argument);
    EXPECT_THROW(plan_from_json({{"interfaces", {"huge"}}}), std::invalid_argument);
    EXPECT_THROW(plan_from_json({{"difficulties", {"free"}}}), std::invalid_argument);
    EXPECT_EQ(plan_from_json(nlohmann::json::object()).trial_count(), 7200u);
}

TEST(Postures, SummaryOrderingAndMedians) {
    auto profiles = default_postures();
    const auto rows = run_postures(profiles, 30, 5);
    ASSERT_EQ(rows.size(), profiles.size());
    EXPECT_EQ(rows[0].name, "walking");
    EXPECT_EQ(rows[3].name, "sitting_handsfree");
    EXPECT_GT(rows[0].switches.mean, rows[3].switches.mean);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i].sessions, 30);
        EXPECT_NEAR(rows[i].median_cm, profiles[i].median_cm, 0.15 * profiles[i].median_cm) << rows[i].name;
    }
    profiles[3].volatility = 0.0;
    const auto frozen = run_postures({profiles[3]}, 5, 5);
    EXPECT_EQ(frozen[0].switches.mean, 0.0);
    EXPECT_EQ(frozen[0].median_cm, 41.0);
    std::ostringstream os;
    write_postures_csv(os, frozen);
    EXPECT_EQ(os.str(),
              "posture,sessions,switches_mean,switches_sd,distance_median_cm,distance_q1_cm,distance_q3_cm\n"
              "sitting_handsfree,5,0.000000,0.000000,41.000000,41.000000,41.000000\n");
}

TEST(Files, WritesThreeOutputsAndReportsFailures) {
    const auto dir = std::filesystem::temp_directory_path() / "gaui_harness_test";
    std::filesystem::remove_all(dir);
    write_experiment(dir, run_experiment(small_plan(1), {}));
    for (const char* f : {"raw.csv", "summary.csv", "summary.json"}) EXPECT_TRUE(std::filesystem::exists(dir / f));
    EXPECT_NO_THROW(read_json_file(dir / "summary.json"));
    EXPECT_THROW(read_json_file(dir / "missing.json"), std::runtime_error);
    EXPECT_THROW(write_experiment(dir / "raw.csv" / "nested", {}), std::runtime_error);
    std::filesystem::remove_all(dir);
}
