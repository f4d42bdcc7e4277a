#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crowd/runner.hpp"
#include "crowd/scenario.hpp"

#ifndef CROWD_SCENARIO_DIR
#define CROWD_SCENARIO_DIR "scenarios"
#endif

namespace {

namespace fs = std::filesystem;

// A bare name such as "station" resolves to <scenario dir>/station.json.
std::string resolve_scenario(const std::string& arg) {
    if (fs::exists(arg)) return arg;
    for (const fs::path& dir : {fs::path("scenarios"), fs::path(CROWD_SCENARIO_DIR)}) {
        const fs::path candidate = dir / (arg + ".json");
        if (fs::exists(candidate)) return candidate.string();
    }
    return arg;
}

struct RunArgs {
    std::string scenario;
    std::string positional;
    std::optional<std::string> strategy;
    std::optional<double> t_end;
    std::optional<double> cfl;
    std::optional<long> dump_every;
    std::string out_dir;
    bool dump_potential = false;
    std::optional<long> seed;
    std::vector<std::string> overrides;
};

int do_run(const RunArgs& a) {
    using namespace crowd;
    std::string path = a.scenario.empty() ? a.positional : a.scenario;
    if (path.empty()) {
        std::cerr << error_report("usage", {"a scenario is required (--scenario <file> or a name)"}) << '\n';
        return 2;
    }
    path = resolve_scenario(path);
    Scenario s;
    try {
        nlohmann::json doc = load_scenario_document(path);
        if (a.strategy) apply_override(doc, "perception.strategy", nlohmann::json(*a.strategy).dump());
        if (a.t_end) apply_override(doc, "run.t_end", format_number(*a.t_end));
        if (a.cfl) apply_override(doc, "numerics.cfl", format_number(*a.cfl));
        if (a.dump_every) apply_override(doc, "run.dump_every", std::to_string(*a.dump_every));
        if (a.dump_potential) apply_override(doc, "run.dump_potential", "true");
        if (a.seed) apply_override(doc, "run.seed", std::to_string(*a.seed));
        for (const auto& o : a.overrides) apply_override(doc, o);
        s = parse_scenario(doc);
    } catch (const ScenarioError& e) {
        std::cerr << error_report("validation", e.problems()) << '\n';
        return 2;
    }

    const std::string out = a.out_dir.empty() ? "runs/" + s.name + "-" + to_string(s.perception.strategy) : a.out_dir;
    try {
        const RunSummary r = run_scenario(s, out);
        std::printf("run %s (%s, %s) finished: %zu steps to t = %.6g in %.2f s\n", s.name.c_str(),
                    to_string(s.mode).c_str(), to_string(s.perception.strategy).c_str(), r.steps, r.t_final,
                    r.seconds);
        std::printf("mass audit residual %.3g; output in %s\n", r.audit_residual, out.c_str());
        if (r.emptied) std::printf("emptying time %.6g\n", r.emptying_time);
    } catch (const Error& e) {
        std::cerr << error_report("runtime", {e.what()}) << '\n';
        return 3;
    }
    return 0;
}

int do_compare(const std::string& a, const std::string& b, const std::string& metric,
               const std::optional<std::string>& csv) {
    using namespace crowd;
    try {
        compare_runs(a, b, metric, std::cout, csv);
    } catch (const Error& e) {
        std::cerr << error_report("compare", {e.what()}) << '\n';
        return 3;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Non-local crowd dynamics simulator"};
    app.require_subcommand(1);

    RunArgs ra;
    auto* run = app.add_subcommand("run", "Run a scenario and write its output files");
    run->add_option("name", ra.positional, "Scenario file or shipped scenario name");
    run->add_option("--scenario", ra.scenario, "Scenario file (JSON)");
    run->add_option("--strategy", ra.strategy, "Perception strategy")
        ->check(CLI::IsMember({"s1", "s2", "s3", "s4", "local"}));
    run->add_option("--t-end", ra.t_end, "Final (nondimensional) time");
    run->add_option("--cfl", ra.cfl, "CFL number");
    run->add_option("--dump-every", ra.dump_every, "Steps between density snapshots");
    run->add_option("--out-dir", ra.out_dir, "Output directory");
    run->add_flag("--dump-potential", ra.dump_potential, "Also write potential.csv (2D)");
    run->add_option("--seed", ra.seed, "Recorded only; runs are deterministic");
    run->add_option("--override", ra.overrides, "key.path=value applied to the scenario document");

    std::string dir_a, dir_b, metric = "diagnostics";
    std::optional<std::string> csv;
    auto* cmp = app.add_subcommand("compare", "Compare two run directories");
    cmp->add_option("run_a", dir_a, "Reference run directory")->required();
    cmp->add_option("run_b", dir_b, "Run directory compared against it")->required();
    cmp->add_option("--metric", metric, "diagnostics|emptying|speed-crossing")
        ->check(CLI::IsMember({"diagnostics", "emptying", "speed-crossing"}));
    cmp->add_option("--csv", csv, "Write the difference series here (diagnostics metric)");

    CLI11_PARSE(app, argc, argv);
    if (run->parsed()) return do_run(ra);
    return do_compare(dir_a, dir_b, metric, csv);
}
