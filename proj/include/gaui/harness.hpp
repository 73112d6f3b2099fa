#ifndef GAUI_HARNESS_HPP
#define GAUI_HARNESS_HPP

#include <algorithm>
#include <atomic>
#include <exception>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "gaui/seeding.hpp"
#include "gaui/simuser.hpp"

namespace gaui {

struct CellKey {
    InterfaceType interface_type = InterfaceType::adaptive;
    DistanceBand band = DistanceBand::near;
    Difficulty difficulty = Difficulty::easy;

    friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

struct ExperimentPlan {
    std::vector<InterfaceType> interfaces{std::begin(kAllInterfaces), std::end(kAllInterfaces)};
    std::vector<DistanceBand> bands{std::begin(kAllDistanceBands), std::end(kAllDistanceBands)};
    std::vector<Difficulty> difficulties{Difficulty::easy, Difficulty::hard};
    int reps = 300;
    std::uint64_t base_seed = 42;
    std::map<CellKey, int> rep_overrides;  // per-cell rep counts

    int reps_for(const CellKey& k) const {
        auto it = rep_overrides.find(k);
        return it == rep_overrides.end() ? reps : it->second;
    }

    std::vector<CellKey> cells() const {
        std::vector<CellKey> out;
        for (auto i : interfaces)
            for (auto b : bands)
                for (auto d : difficulties) out.push_back({i, b, d});
        return out;
    }

    std::size_t trial_count() const {
        std::size_t n = 0;
        for (const auto& c : cells()) n += static_cast<std::size_t>(reps_for(c));
        return n;
    }

    void validate() const {
        if (interfaces.empty() || bands.empty() || difficulties.empty())
            throw std::invalid_argument("plan needs at least one interface, band and difficulty");
        if (reps < 1) throw std::invalid_argument("reps must be >= 1");
        for (auto d : difficulties)
            if (d == Difficulty::free) throw std::invalid_argument("plan difficulties are easy and hard");
        for (const auto& [k, r] : rep_overrides)
            if (r < 1) throw std::invalid_argument("reps must be >= 1");
    }
};

inline ExperimentPlan plan_from_json(const nlohmann::json& j) {
    ExperimentPlan p;
    if (j.contains("interfaces")) {
        p.interfaces.clear();
        for (const auto& s : j["interfaces"]) p.interfaces.push_back(parse_interface(s.get<std::string>()));
    }
    if (j.contains("bands")) {
        p.bands.clear();
        for (const auto& s : j["bands"]) p.bands.push_back(parse_distance_band(s.get<std::string>()));
    }
    if (j.contains("difficulties")) {
        p.difficulties.clear();
        for (const auto& s : j["difficulties"]) p.difficulties.push_back(parse_difficulty(s.get<std::string>()));
    }
    p.reps = j.value("reps", p.reps);
    p.base_seed = j.value("base_seed", p.base_seed);
    for (const auto& o : j.value("overrides", nlohmann::json::array()))
        p.rep_overrides[{parse_interface(o.at("interface").get<std::string>()),
                         parse_distance_band(o.at("band").get<std::string>()),
                         parse_difficulty(o.at("difficulty").get<std::string>())}] = o.at("reps").get<int>();
    p.validate();
    return p;
}

inline nlohmann::json to_json(const ExperimentPlan& p) {
    nlohmann::json j{{"reps", p.reps}, {"base_seed", p.base_seed}};
    for (auto i : p.interfaces) j["interfaces"].push_back(to_string(i));
    for (auto b : p.bands) j["bands"].push_back(to_string(b));
    for (auto d : p.difficulties) j["difficulties"].push_back(to_string(d));
    if (!p.rep_overrides.empty()) {
        j["overrides"] = nlohmann::json::array();
        for (const auto& [k, r] : p.rep_overrides)
            j["overrides"].push_back({{"interface", to_string(k.interface_type)},
                                      {"band", to_string(k.band)},
                                      {"difficulty", to_string(k.difficulty)},
                                      {"reps", r}});
    }
    return j;
}

/// Seed of one trial; a function of its coordinates only.
inline std::uint64_t trial_seed(std::uint64_t base, const CellKey& k, int rep) {
    return mix_seed(base, {name_hash(to_string(k.interface_type)), name_hash(to_string(k.band)),
                           name_hash(to_string(k.difficulty)), static_cast<std::uint64_t>(rep)});
}

struct TrialRow {
    std::uint64_t seed = 0;
    CellKey cell;
    int rep = 0;
    TrialMetrics metrics;
};

/// Runs a flat list of jobs on `threads` workers; results land by index.
template <class Job, class Result>
void parallel_map(const std::vector<Job>& jobs, std::vector<Result>& out, const std::function<Result(const Job&)>& fn,
                  unsigned threads) {
    out.assign(jobs.size(), Result{});
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(jobs.size(), 1)));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto work = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            try {
                out[i] = fn(jobs[i]);
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

/// All trials of a plan, ordered by cell (plan order) then rep.
inline std::vector<TrialRow> run_experiment(const ExperimentPlan& plan, const SimParams& sim,
                                            const DisplayProfile& profile = {}, unsigned threads = 0) {
    plan.validate();
    sim.validate();
    std::vector<TrialRow> jobs;
    for (const auto& cell : plan.cells())
        for (int rep = 0; rep < plan.reps_for(cell); ++rep)
            jobs.push_back({trial_seed(plan.base_seed, cell, rep), cell, rep, {}});
    std::vector<TrialRow> rows;
    parallel_map<TrialRow, TrialRow>(
        jobs, rows,
        [&](const TrialRow& job) {
            TrialConfig c;
            c.interface_type = job.cell.interface_type;
            c.distance_band = job.cell.band;
            c.difficulty = job.cell.difficulty;
            c.seed = job.seed;
            TrialRow r = job;
            r.metrics = metrics(simulate_trial(c, sim, profile).record);
            return r;
        },
        threads);
    return rows;
}

inline constexpr const char* kRawCsvHeader =
    "seed,interface,band,difficulty,task_time_ms,nav_time_ms,track_errors,pp_errors,timeout";

inline void write_raw_csv(std::ostream& os, const std::vector<TrialRow>& rows) {
    os << kRawCsvHeader << '\n';
    char nav[64];
    for (const auto& r : rows) {
        os << r.seed << ',' << to_string(r.cell.interface_type) << ',' << to_string(r.cell.band) << ','
           << to_string(r.cell.difficulty) << ',';
        if (r.metrics.task_time_ms) os << *r.metrics.task_time_ms;
        os << ',';
        if (r.metrics.nav_time_ms) {
            std::snprintf(nav, sizeof nav, "%.3f", *r.metrics.nav_time_ms);
            os << nav;
        }
        os << ',' << r.metrics.track_errors << ',' << r.metrics.pp_errors << ',' << (r.metrics.timeout ? 1 : 0)
           << '\n';
    }
}

struct Stat {
    int n = 0;
    double mean = 0.0;
    double sd = 0.0;  // sample SD; 0 below two values
};

inline Stat describe(const std::vector<double>& v) {
    Stat s;
    s.n = static_cast<int>(v.size());
    if (v.empty()) return s;
    for (double x : v) s.mean += x;
    s.mean /= s.n;
    if (s.n > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - s.mean) * (x - s.mean);
        s.sd = std::sqrt(ss / (s.n - 1));
    }
    return s;
}

inline constexpr const char* kMetricNames[] = {"task_time_ms",    "nav_time_ms",           "nav_activations",
                                               "correct_nav_activations", "track_errors", "pp_errors", "timeout"};

// Value of a named metric for one trial; nullopt when undefined.
inline std::optional<double> metric_value(const TrialMetrics& m, std::string_view name) {
    if (name == "task_time_ms") return m.task_time_ms ? std::optional<double>(*m.task_time_ms) : std::nullopt;
    if (name == "nav_time_ms") return m.nav_time_ms;
    if (name == "nav_activations") return m.nav_activations;
    if (name == "correct_nav_activations") return m.correct_nav_activations;
    if (name == "track_errors") return m.track_errors;
    if (name == "pp_errors") return m.pp_errors;
    if (name == "timeout") return m.timeout ? 1.0 : 0.0;
    throw std::invalid_argument("unknown metric: " + std::string(name));
}

struct CellSummary {
    CellKey cell;
    int trials = 0;
    int timeouts = 0;
    std::map<std::string, Stat> stats;
};

using SummaryTable = std::vector<CellSummary>;

inline SummaryTable summarize(const std::vector<TrialRow>& rows) {
    SummaryTable out;
    std::map<CellKey, std::size_t> index;
    std::vector<std::map<std::string, std::vector<double>>> values;
    for (const auto& r : rows) {
        auto [it, fresh] = index.try_emplace(r.cell, out.size());
        if (fresh) {
            out.push_back({r.cell, 0, 0, {}});
            values.emplace_back();
        }
        auto& cs = out[it->second];
        ++cs.trials;
        if (r.metrics.timeout) ++cs.timeouts;
        for (const char* name : kMetricNames)
            if (auto v = metric_value(r.metrics, name)) values[it->second][name].push_back(*v);
    }
    for (std::size_t i = 0; i < out.size(); ++i)
        for (const char* name : kMetricNames) out[i].stats[name] = describe(values[i][name]);
    return out;
}

inline void write_summary_csv(std::ostream& os, const SummaryTable& t) {
    os << "interface,band,difficulty,trials,timeouts";
    for (const char* name : kMetricNames) os << ',' << name << "_n," << name << "_mean," << name << "_sd";
    os << '\n';
    char buf[64];
    for (const auto& c : t) {
        os << to_string(c.cell.interface_type) << ',' << to_string(c.cell.band) << ','
           << to_string(c.cell.difficulty) << ',' << c.trials << ',' << c.timeouts;
        for (const char* name : kMetricNames) {
            const auto& s = c.stats.at(name);
            os << ',' << s.n << ',';
            if (s.n > 0) {
                std::snprintf(buf, sizeof buf, "%.6f,%.6f", s.mean, s.sd);
                os << buf;
            } else {
                os << ',';
            }
        }
        os << '\n';
    }
}

inline nlohmann::json to_json(const SummaryTable& t) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : t) {
        nlohmann::json j{{"interface", to_string(c.cell.interface_type)},
                         {"band", to_string(c.cell.band)},
                         {"difficulty", to_string(c.cell.difficulty)},
                         {"trials", c.trials},
                         {"timeouts", c.timeouts}};
        for (const auto& [name, s] : c.stats) {
            j["metrics"][name] = {{"n", s.n}};
            if (s.n > 0) {
                j["metrics"][name]["mean"] = s.mean;
                j["metrics"][name]["sd"] = s.sd;
            }
        }
        cells.push_back(std::move(j));
    }
    return {{"cells", cells}};
}

/// Mean of a metric over the trials matching `pick` (undefined values skipped).
inline Stat pooled(const std::vector<TrialRow>& rows, std::string_view metric,
                   const std::function<bool(const CellKey&)>& pick) {
    std::vector<double> v;
    for (const auto& r : rows)
        if (pick(r.cell))
            if (auto x = metric_value(r.metrics, metric)) v.push_back(*x);
    return describe(v);
}

// ---------------------------------------------------------------------------
// Postures

struct PostureSummary {
    std::string name;
    int sessions = 0;
    Stat switches;
    double median_cm = 0.0;  // over all samples of all sessions
    double q1_cm = 0.0;
    double q3_cm = 0.0;
};

inline std::uint64_t posture_seed(std::uint64_t base, const std::string& name, int rep) {
    return mix_seed(base, {name_hash(name), static_cast<std::uint64_t>(rep)});
}

inline std::vector<PostureSummary> run_postures(const std::vector<PostureProfile>& profiles, int reps,
                                                std::uint64_t base_seed = 42, const HysteresisConfig& cfg = {},
                                                unsigned threads = 0) {
    if (reps < 1) throw std::invalid_argument("reps must be >= 1");
    std::vector<PostureSummary> out;
    for (const auto& p : profiles) {
        p.validate();
        std::vector<int> jobs(static_cast<std::size_t>(reps));
        for (int i = 0; i < reps; ++i) jobs[static_cast<std::size_t>(i)] = i;
        std::vector<std::vector<double>> signals;
        parallel_map<int, std::vector<double>>(
            jobs, signals,
            [&](const int& rep) { return generate_posture_session(p, kPostureSessionMs, posture_seed(base_seed, p.name, rep)); },
            threads);
        std::vector<double> counts, all;
        for (const auto& s : signals) {
            counts.push_back(static_cast<double>(adaptations_for_signal(s, cfg).size()));
            all.insert(all.end(), s.begin(), s.end());
        }
        out.push_back({p.name, reps, describe(counts), quantile(all, 0.5), quantile(all, 0.25), quantile(all, 0.75)});
    }
    return out;
}

inline void write_postures_csv(std::ostream& os, const std::vector<PostureSummary>& rows) {
    os << "posture,sessions,switches_mean,switches_sd,distance_median_cm,distance_q1_cm,distance_q3_cm\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f,%.6f,%.6f,%.6f", r.sessions, r.switches.mean, r.switches.sd,
                      r.median_cm, r.q1_cm, r.q3_cm);
        os << r.name << ',' << buf << '\n';
    }
}

// ---------------------------------------------------------------------------
// Files

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out.flush()) throw std::runtime_error("write failed: " + path.string());
}

/// raw.csv, summary.csv and summary.json under `dir`.
inline void write_experiment(const std::filesystem::path& dir, const std::vector<TrialRow>& rows) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
    const auto table = summarize(rows);
    std::ostringstream raw, sum;
    write_raw_csv(raw, rows);
    write_summary_csv(sum, table);
    write_text_file(dir / "raw.csv", raw.str());
    write_text_file(dir / "summary.csv", sum.str());
    write_text_file(dir / "summary.json", to_json(table).dump(2) + "\n");
}

} // namespace gaui

#endif // GAUI_HARNESS_HPP
