// gaui: experiment runner, posture sessions, layout dump, trace replay and the demo server.
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "gaui/harness.hpp"
#include "gaui/server.hpp"

using namespace gaui;
using nlohmann::json;

namespace {

DisplayProfile load_profile(const std::string& path) {
    return path.empty() ? default_display() : display_from_json(read_json_file(path));
}

SimParams load_sim(const std::string& path) { return path.empty() ? SimParams{} : sim_params_from_json(read_json_file(path)); }

json metrics_json(const TrialMetrics& m) {
    json j{{"task_time_ms", nullptr},
           {"nav_time_ms", nullptr},
           {"nav_activations", m.nav_activations},
           {"track_errors", m.track_errors},
           {"pp_errors", m.pp_errors},
           {"timeout", m.timeout}};
    if (m.task_time_ms) j["task_time_ms"] = *m.task_time_ms;
    if (m.nav_time_ms) j["nav_time_ms"] = *m.nav_time_ms;
    return j;
}

int cmd_experiment(const std::string& plan_path, const std::string& profile_path, const std::string& sim_path,
                   const std::string& out, std::optional<std::uint64_t> seed, unsigned threads) {
    ExperimentPlan plan = plan_path.empty() ? ExperimentPlan{} : plan_from_json(read_json_file(plan_path));
    if (seed) plan.base_seed = *seed;
    const auto rows = run_experiment(plan, load_sim(sim_path), load_profile(profile_path), threads);
    write_experiment(out, rows);
    const auto table = summarize(rows);
    std::printf("%zu trials in %zu cells -> %s\n", rows.size(), table.size(), out.c_str());
    for (const auto& c : table) {
        const auto& tt = c.stats.at("task_time_ms");
        std::printf("  %-13s %-6s %-4s  task %8.1f ms (sd %7.1f)  timeouts %d\n", to_string(c.cell.interface_type).data(),
                    to_string(c.cell.band).data(), to_string(c.cell.difficulty).data(), tt.mean, tt.sd, c.timeouts);
    }
    return 0;
}

int cmd_postures(const std::string& profiles_path, int reps, const std::string& out, std::uint64_t seed) {
    const auto profiles = profiles_path.empty() ? default_postures() : postures_from_json(read_json_file(profiles_path));
    const auto rows = run_postures(profiles, reps, seed);
    std::ostringstream csv;
    write_postures_csv(csv, rows);
    if (out.empty() || out == "-")
        std::cout << csv.str();
    else
        write_text_file(out, csv.str());
    return 0;
}

int cmd_layout(const std::string& band, const std::string& profile_path) {
    const auto m = layout_for_band(parse_band(band), load_profile(profile_path), default_playlist());
    std::cout << to_json(m).dump(2) << '\n';
    return 0;
}

int cmd_replay(const std::string& trace_path, const std::string& profile_path) {
    std::ifstream in(trace_path);
    if (!in) throw std::runtime_error("cannot open " + trace_path);
    std::string line;
    std::optional<Session> session;
    const auto profile = load_profile(profile_path);
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw std::runtime_error(trace_path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (j.contains("config")) {
            if (session) throw std::runtime_error(trace_path + ":" + std::to_string(lineno) + ": second header");
            const auto& c = j["config"];
            const auto config = trial_config_from_json(c);
            const double d0 = c.value("initial_distance_cm",
                                      config.distance_band ? band_median_cm(*config.distance_band) : kDefaultLiveDistanceCm);
            session.emplace(config, default_playlist(), profile, d0);
            continue;
        }
        if (!session) throw std::runtime_error(trace_path + ": trace needs a {\"config\":...} header line");
        if (session->finished()) break;
        for (const auto& e : session->step(gaze_sample_from_json(j))) std::cout << to_json(e).dump() << '\n';
    }
    if (!session) throw std::runtime_error(trace_path + ": empty trace");
    std::cout << json{{"outcome", to_string(session->outcome())}, {"metrics", metrics_json(metrics(session->record()))}}.dump()
              << '\n';
    return 0;
}

int cmd_simulate(const std::string& interface, const std::string& band, const std::string& difficulty,
                 std::uint64_t seed, const std::string& sim_path, const std::string& profile_path, const std::string& out) {
    TrialConfig c;
    c.interface_type = parse_interface(interface);
    c.distance_band = parse_distance_band(band);
    c.difficulty = parse_difficulty(difficulty);
    c.seed = seed;
    c.validate();
    const auto t = simulate_trial(c, load_sim(sim_path), load_profile(profile_path), default_playlist(), true);
    std::ostringstream os;
    os << json{{"config", trial_config_to_json(c, t.initial_distance_cm)}}.dump() << '\n';
    for (const auto& g : t.trace) os << to_json(g).dump() << '\n';
    if (out.empty() || out == "-")
        std::cout << os.str();
    else
        write_text_file(out, os.str());
    std::cerr << to_string(t.record.outcome) << ", " << t.trace.size() << " samples\n";
    return 0;
}

int cmd_calibrate(const std::string& sim_path, const std::string& profile_path, const std::string& out, int budget) {
    const auto r = calibrate(load_sim(sim_path), {}, load_profile(profile_path), budget);
    std::fprintf(stderr, "%s after %d evaluations: easy %.0f ms, hard %.0f ms, track errors %.3f, objective %.5f\n",
                 r.message.c_str(), r.evaluations, r.stats.easy_task_ms, r.stats.hard_task_ms, r.stats.track_errors,
                 r.stats.objective);
    const auto text = to_json(r.params).dump(2) + "\n";
    if (out.empty() || out == "-")
        std::cout << text;
    else
        write_text_file(out, text);
    return r.converged ? 0 : 2;
}

int cmd_serve(std::uint16_t port, const std::string& host) {
    DemoServer server(port, host);
    std::fprintf(stderr, "listening on %s:%u\n", host.c_str(), static_cast<unsigned>(server.port()));
    server.run();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gaze-dwell adaptive UI engine"};
    app.require_subcommand(1);

    std::string plan, profile, sim, out, profiles, band, trace, host = "127.0.0.1";
    std::string interface = "adaptive", difficulty = "easy";
    std::uint64_t seed = 42;
    std::optional<std::uint64_t> exp_seed;
    unsigned threads = 0;
    int reps = 100, budget = 400;
    std::uint16_t port = 8080;

    auto* exp = app.add_subcommand("experiment", "run the factorial simulated-user experiment");
    exp->add_option("--plan", plan, "plan JSON (defaults: full factorial, 300 reps)")->check(CLI::ExistingFile);
    exp->add_option("--profile", profile, "display profile JSON")->check(CLI::ExistingFile);
    exp->add_option("--sim", sim, "simulated-user parameters JSON")->check(CLI::ExistingFile);
    exp->add_option("--out", out, "output directory")->required();
    exp->add_option("--seed", exp_seed, "base seed (overrides the plan)");
    exp->add_option("--threads", threads, "worker threads, 0 = hardware");

    auto* pos = app.add_subcommand("postures", "run posture distance sessions");
    pos->add_option("--profiles", profiles, "postures JSON")->check(CLI::ExistingFile);
    pos->add_option("--reps", reps, "sessions per posture")->check(CLI::PositiveNumber);
    pos->add_option("--out", out, "CSV path, - for stdout");
    pos->add_option("--seed", seed, "base seed");

    auto* lay = app.add_subcommand("layout", "print a band's layout as JSON");
    lay->add_option("--band", band, "small, medium or large")->required();
    lay->add_option("--profile", profile, "display profile JSON")->check(CLI::ExistingFile);

    auto* rep = app.add_subcommand("replay", "re-run a recorded gaze trace and print its events");
    rep->add_option("--trace", trace, "trace JSONL")->required()->check(CLI::ExistingFile);
    rep->add_option("--profile", profile, "display profile JSON")->check(CLI::ExistingFile);

    auto* simc = app.add_subcommand("simulate", "simulate one trial and write its trace");
    simc->add_option("--interface", interface, "adaptive, static-small, static-medium or static-large");
    simc->add_option("--band", band, "25-29, 30-34 or 35-39")->required();
    simc->add_option("--difficulty", difficulty, "easy or hard");
    simc->add_option("--seed", seed, "trial seed");
    simc->add_option("--sim", sim, "simulated-user parameters JSON")->check(CLI::ExistingFile);
    simc->add_option("--profile", profile, "display profile JSON")->check(CLI::ExistingFile);
    simc->add_option("--out", out, "trace path, - for stdout");

    auto* cal = app.add_subcommand("calibrate", "fit gaze noise and inspection time to the timing targets");
    cal->add_option("--sim", sim, "starting parameters JSON")->check(CLI::ExistingFile);
    cal->add_option("--profile", profile, "display profile JSON")->check(CLI::ExistingFile);
    cal->add_option("--out", out, "output sim JSON, - for stdout");
    cal->add_option("--budget", budget, "maximum objective evaluations")->check(CLI::PositiveNumber);

    auto* srv = app.add_subcommand("serve", "serve the demo line protocol over TCP");
    srv->add_option("--port", port, "TCP port, 0 picks a free one");
    srv->add_option("--host", host, "IPv4 address to bind");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*exp) return cmd_experiment(plan, profile, sim, out, exp_seed, threads);
        if (*pos) return cmd_postures(profiles, reps, out, seed);
        if (*lay) return cmd_layout(band, profile);
        if (*rep) return cmd_replay(trace, profile);
        if (*simc) return cmd_simulate(interface, band, difficulty, seed, sim, profile, out);
        if (*cal) return cmd_calibrate(sim, profile, out, budget);
        if (*srv) return cmd_serve(port, host);
    } catch (const std::exception& e) {
        std::cerr << "gaui: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
