/*
 * Scenario-file checks: byte-stable serialization round trips, strict parse
 * errors naming their line, builder name resolution, the Graphviz export,
 * the bundled example files (each must load, run, and land where its header
 * comment says), and the command entry points' exit codes.
 */

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "dualrail/scenario.hpp"

using namespace dualrail;

namespace {

#ifndef DUALRAIL_SCENARIO_DIR
#error "DUALRAIL_SCENARIO_DIR must point at the bundled scenario files"
#endif
const std::string kScenarioDir = DUALRAIL_SCENARIO_DIR;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// Settled exit ports of a finished scenario run, with total probability.
std::pair<std::set<std::vector<std::string>>, double> run_exits(
    const std::string& name) {
    const Scenario s = load_scenario(kScenarioDir + "/" + name);
    const Topology topo = make_topology(s);
    const SitePlan plan = SitePlan::build(topo);
    const SimResult res =
        simulate(topo, make_insertions(s, topo), make_schedule(s, topo), s.max_ticks);
    const ExitDistribution dist = exit_distribution(res.final_state, plan);
    std::set<std::vector<std::string>> keys;
    double total = 0.0;
    for (const auto& [key, prob] : dist.probs) {
        keys.insert(key);
        total += prob;
    }
    return {keys, total};
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("scenario text round-trips byte-stable") {
    Scenario s;
    s.id = "roundtrip";
    s.layered = false;
    s.units = {"m0", "m1"};
    s.links = {{"m0", SideId::Right, PortId::e, "m1", SideId::Left, PortId::e}};
    Scenario::InsertSpec ins;
    ins.kind = Insertion::Kind::Single;
    ins.pol0 = Pol::V;
    ins.pol1 = Pol::V;  // singles carry one polarization in both slots
    ins.port = PortId::f;
    ins.unit = "m0";
    ins.side = SideId::Left;
    ins.tick = 4;
    s.inserts = {ins};
    s.regime = Regime::Active;
    s.control = Scenario::Control::Schedule;
    s.phases = {{"m0", SideId::Left, 5, kPi}, {"m1", SideId::Right, -1, 0.0}};
    s.max_ticks = 12;
    s.hop_cap = 16;
    s.seed = 7;

    const std::string text = serialize_scenario(s);
    CHECK(parse_scenario(text) == s);
    CHECK(serialize_scenario(parse_scenario(text)) == text);

    Scenario targets;
    targets.id = "goals";
    targets.layered = true;
    targets.layers = 2;
    Scenario::InsertSpec pair;
    pair.kind = Insertion::Kind::Bell;
    pair.bell = BellKind::PsiMinus;
    pair.unit = "n0";
    pair.tap = true;
    targets.inserts = {pair};
    targets.control = Scenario::Control::Targets;
    targets.targets = {{"n1", SideId::Left, PortId::f},
                       {"n4", SideId::Right, PortId::f}};
    const std::string text2 = serialize_scenario(targets, {"hello", "world"});
    CHECK(text2.find("# hello\n# world\n") == 0);
    CHECK(parse_scenario(text2) == targets);
}

TEST_CASE("the parser is strict and names the offending line") {
    auto error_of = [](const std::string& text) -> std::string {
        try {
            parse_scenario(text);
        } catch (const std::invalid_argument& e) {
            return e.what();
        }
        return "";
    };

    CHECK(error_of("version 1\nfrobnicate 3\n").find("line 2") == 0);
    CHECK(error_of("version 2\n").find("line 1") == 0);
    CHECK(error_of("version 1\nversion 1\n").find("line 2") == 0);
    CHECK(error_of("version 1\ntopology layered 1\nmax_ticks\n").find("line 3") == 0);
    CHECK(error_of("version 1\ntopology layered 1\nmax_ticks zap\n").find("line 3") ==
          0);
    CHECK(error_of("version 1\ntopology layered 1\ninsert bell phi+ n0 L tick 2 "
                   "tap tap\n")
              .find("line 3") == 0);
    CHECK(error_of("version 1\ntopology layered 1\nphase n0 X 1 pi\n").find(
              "line 3") == 0);
    CHECK(!error_of("topology layered 1\n").empty());  // missing version
    CHECK(!error_of("version 1\n").empty());           // no topology at all
    CHECK(!error_of("version 1\ntopology layered 1\nunit m0\n").empty());
    CHECK(!error_of("version 1\ntopology layered 1\nphase n0 L * pi\ntarget n0 L "
                    "e\n")
               .empty());  // ambiguous control
    CHECK(!error_of("version 1\ntopology layered 1\ncontrol targets\nphase n0 L * "
                    "pi\n")
               .empty());  // contradicts declared control
    CHECK(!error_of("version 1\ntopology layered 1\nregime passive\nphase n0 L 3 "
                    "pi\n")
               .empty());  // per-tick setting under fixed control

    // Comments, blank lines, and arbitrary spacing are fine.
    const Scenario ok = parse_scenario(
        "# heading\n\nversion 1\n  topology   layered  1\ninsert single H n0 L e "
        "tick 0  # trailing\n");
    CHECK(ok.layered);
    CHECK(ok.inserts.size() == 1);
}

TEST_CASE("builders resolve unit names or refuse") {
    Scenario s;
    s.layered = true;
    s.layers = 2;
    const Topology topo = make_topology(s);
    CHECK(topo.unit_count() == 5);

    Scenario::InsertSpec ins;
    ins.kind = Insertion::Kind::Single;
    ins.unit = "zz";
    s.inserts = {ins};
    CHECK_THROWS_AS(make_insertions(s, topo), std::invalid_argument);

    s.inserts.clear();
    s.phases = {{"zz", SideId::Left, -1, kPi}};
    CHECK_THROWS_AS(make_schedule(s, topo), std::invalid_argument);

    s.phases.clear();
    s.targets = {{"zz", SideId::Left, PortId::e}};
    CHECK_THROWS_AS(make_targets(s, topo), std::invalid_argument);

    Scenario bad;
    bad.units = {"a", "a"};
    CHECK_THROWS_AS(make_topology(bad), std::invalid_argument);
}

TEST_CASE("the dot export draws units, links, and routes") {
    const Topology topo = Topology::layered_tree(2);
    const std::string plain = export_dot(topo);
    CHECK(plain.find("digraph") != std::string::npos);
    for (const std::string unit : {"n0", "n1", "n2", "n3", "n4"})
        CHECK(plain.find("\"" + unit + "\" [label=") != std::string::npos);
    size_t links = 0, pos = 0;
    while ((pos = plain.find("dir=none", pos)) != std::string::npos) {
        ++links;
        pos += 8;
    }
    CHECK(links == 4);

    const Insertion ins =
        Insertion::single_photon(Pol::H, 3, SideId::Left, PortId::e, 0, true);
    const PlanResult pr = plan(topo, ins, {{2, SideId::Left, PortId::f}},
                               Regime::Active);
    const std::string routed = export_dot(topo, &pr);
    CHECK(routed.find("p0 ") != std::string::npos);
    CHECK(routed.find("peripheries=2") != std::string::npos);
    CHECK(routed.find("constraint=false") != std::string::npos);
}

TEST_CASE("bundled scenarios land where their comments say") {
    {
        const auto [keys, prob] = run_exits("mcu_phiplus.scn");
        CHECK(keys == std::set<std::vector<std::string>>{{"n0.Le", "n0.Rf"}});
        CHECK(prob == doctest::Approx(1.0));
    }
    {
        const auto [keys, prob] = run_exits("mcu_phase_switch.scn");
        CHECK(keys == std::set<std::vector<std::string>>{{"n0.Le", "n0.Re"}});
        CHECK(prob == doctest::Approx(1.0));
    }
    for (const std::string name :
         {"bell_phiminus.scn", "bell_psiplus.scn", "bell_psiminus.scn"}) {
        const auto [keys, prob] = run_exits(name);
        CHECK(keys == std::set<std::vector<std::string>>{{"n0.Le", "n0.Rf"}});
        CHECK(prob == doctest::Approx(1.0));
    }
    {
        const auto [keys, prob] = run_exits("centralized_passive.scn");
        CHECK(keys == std::set<std::vector<std::string>>{{"n1.Lf", "n4.Rf"}});
        CHECK(prob == doctest::Approx(1.0));
    }
    {
        const auto [keys, prob] = run_exits("passive_return.scn");
        CHECK(keys == std::set<std::vector<std::string>>{{"n0.Le"}});
        CHECK(prob == doctest::Approx(1.0));
    }
    {
        const auto [keys, prob] = run_exits("active_redirect.scn");
        CHECK(keys == std::set<std::vector<std::string>>{{"n0.Lf"}});
        CHECK(prob == doctest::Approx(1.0));
    }
}

TEST_CASE("target-controlled scenarios plan and deliver") {
    for (const std::string name : {"targeted_single.scn", "decentralized_pair.scn"}) {
        const Scenario s = load_scenario(kScenarioDir + "/" + name);
        REQUIRE(s.control == Scenario::Control::Targets);
        const Topology topo = make_topology(s);
        const SitePlan plan_ = SitePlan::build(topo);
        const auto insertions = make_insertions(s, topo);
        REQUIRE(insertions.size() == 1);
        const PlanResult pr =
            plan(topo, insertions[0], make_targets(s, topo), s.regime, s.hop_cap);
        int horizon = s.max_ticks;
        for (const RoutePlan& rp : pr.photons)
            horizon = std::max(horizon, rp.arrival_tick + 1);
        const SimResult res = simulate(topo, insertions, pr.schedule, horizon);
        const ExitDistribution dist = exit_distribution(res.final_state, plan_);
        REQUIRE(dist.probs.size() == 1);
        std::vector<std::string> expect;
        for (const RoutePlan& rp : pr.photons)
            expect.push_back(plan_.port_site(rp.target));
        std::sort(expect.begin(), expect.end());
        CHECK(dist.probs.begin()->first == expect);
        CHECK(dist.probs.begin()->second == doctest::Approx(1.0));
    }
}

TEST_CASE("command entry points enforce their exit codes") {
    CHECK(cmd_simulate(kScenarioDir + "/mcu_phiplus.scn", "", "") == 0);
    CHECK(cmd_simulate(kScenarioDir + "/no_such_file.scn", "", "") == 2);

    // A target no schedule can reach: exit code 4.
    const std::string unreachable = temp_path("dualrail_test_unreachable.scn");
    {
        std::ofstream out(unreachable);
        out << "version 1\ntopology layered 1\n"
               "insert single H n0 L e tick 0\n"
               "regime passive\ncontrol targets\ntarget n0 L f\n";
    }
    CHECK(cmd_simulate(unreachable, "", "") == 4);
    CHECK(cmd_plan(unreachable, "") == 4);
    std::filesystem::remove(unreachable);

    // Planning needs a target-controlled scenario.
    CHECK(cmd_plan(kScenarioDir + "/mcu_phiplus.scn", "") == 2);

    // Planning writes a schedule-controlled replay that simulates cleanly.
    const std::string replay = temp_path("dualrail_test_replay.scn");
    CHECK(cmd_plan(kScenarioDir + "/targeted_single.scn", replay) == 0);
    const Scenario replayed = load_scenario(replay);
    CHECK(replayed.control == Scenario::Control::Schedule);
    CHECK(replayed.targets.empty());
    CHECK(!replayed.phases.empty());
    const std::string trace = temp_path("dualrail_test_trace.tsv");
    const std::string report = temp_path("dualrail_test_report.txt");
    CHECK(cmd_simulate(replay, trace, report) == 0);
    const std::string report_text = read_file(report);
    CHECK(report_text.find("exit n6.Lf 1.000000000") != std::string::npos);
    CHECK(read_file(trace).find("\tNORM\t") != std::string::npos);
    std::filesystem::remove(replay);
    std::filesystem::remove(trace);
    std::filesystem::remove(report);

    CHECK(cmd_reach(kScenarioDir + "/mcu_phiplus.scn") == 0);
    CHECK(cmd_oracle_check(3, 25) == 0);

    const std::string dot = temp_path("dualrail_test_net.dot");
    CHECK(cmd_export_dot(kScenarioDir + "/decentralized_pair.scn", dot) == 0);
    CHECK(read_file(dot).find("digraph") == 0);
    std::filesystem::remove(dot);
}

TEST_CASE("reports are identical across repeated runs") {
    const std::string report = temp_path("dualrail_test_rerun.txt");
    CHECK(cmd_simulate(kScenarioDir + "/centralized_passive.scn", "", report) == 0);
    const std::string first = read_file(report);
    CHECK(cmd_simulate(kScenarioDir + "/centralized_passive.scn", "", report) == 0);
    CHECK(read_file(report) == first);
    CHECK(first.find("bell phi+ fidelity 1.000000000") != std::string::npos);
    std::filesystem::remove(report);
}
