// Command-line front end: simulate scenario files, plan phase schedules for
// requested exit ports, enumerate reachable exits, cross-check the engine
// against the reference evolution, and export topology drawings.

#include <cstdint>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dualrail/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"dual-rail network simulator and phase-schedule planner"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string trace_path;
    std::string report_path;
    std::string out_path;
    std::optional<int> max_ticks;
    std::optional<int> hop_cap;
    std::uint64_t seed = 1;
    int trials = 200;

    CLI::App* sim = app.add_subcommand("simulate", "run a scenario file");
    sim->add_option("--scenario", scenario_path, "scenario file")->required();
    sim->add_option("--trace", trace_path, "write per-tick amplitude trace here");
    sim->add_option("--report", report_path, "write the run report here");
    sim->add_option("--max-ticks", max_ticks, "override the scenario's tick count");

    CLI::App* pl = app.add_subcommand(
        "plan", "derive a phase schedule that routes photons to the targets");
    pl->add_option("--scenario", scenario_path, "scenario file with target lines")
        ->required();
    pl->add_option("--out", out_path, "write the replayable scenario here");
    pl->add_option("--hop-cap", hop_cap, "override the scenario's hop cap");

    CLI::App* re = app.add_subcommand(
        "reach", "list exit ports reachable from each insertion");
    re->add_option("--scenario", scenario_path, "scenario file")->required();
    re->add_option("--hop-cap", hop_cap, "override the scenario's hop cap");

    CLI::App* oc = app.add_subcommand(
        "oracle-check", "compare the engine against the reference evolution");
    oc->add_option("--seed", seed, "random seed");
    oc->add_option("--trials", trials, "number of random scenarios");

    CLI::App* dot = app.add_subcommand("export-dot", "emit a Graphviz drawing");
    dot->add_option("--scenario", scenario_path, "scenario file")->required();
    dot->add_option("--out", out_path, "write the drawing here");

    CLI11_PARSE(app, argc, argv);

    if (sim->parsed())
        return dualrail::cmd_simulate(scenario_path, trace_path, report_path,
                                      max_ticks);
    if (pl->parsed()) return dualrail::cmd_plan(scenario_path, out_path, hop_cap);
    if (re->parsed()) return dualrail::cmd_reach(scenario_path, hop_cap);
    if (oc->parsed()) return dualrail::cmd_oracle_check(seed, trials);
    if (dot->parsed()) return dualrail::cmd_export_dot(scenario_path, out_path);
    return 2;
}
