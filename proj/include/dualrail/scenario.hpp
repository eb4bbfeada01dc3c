#pragma once
/*
 * Scenario files: a line-oriented description of one run (network, photon
 * sources, control regime, shifter program or delivery targets), plus the
 * command entry points the CLI wraps.  Format:
 *
 *   version 1
 *   scenario_id <token>
 *   topology layered <layers>      # or explicit unit/link lines:
 *   unit <name>
 *   link <unit> <L|R> <e|f> <unit> <L|R> <e|f>
 *   insert bell <phi+|phi-|psi+|psi-> <unit> <L|R> tick <t> [tap]
 *   insert product <HH|HV|VH|VV> <unit> <L|R> tick <t> [tap]
 *   insert single <H|V> <unit> <L|R> <e|f> tick <t> [tap]
 *   regime <passive|active>
 *   control <schedule|targets>
 *   phase <unit> <L|R> <tick|*> <radians|pi>
 *   target <unit> <L|R> <e|f>
 *   max_ticks <n>
 *   hop_cap <n>
 *   seed <n>
 *
 * '#' starts a comment.  A scenario drives either a shifter program (phase
 * lines) or a delivery goal (target lines), never both.
 */

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dualrail/analysis.hpp"
#include "dualrail/engine.hpp"
#include "dualrail/planner.hpp"
#include "dualrail/topology.hpp"

namespace dualrail {

struct Scenario {
    enum class Control { Schedule, Targets };

    struct LinkSpec {
        std::string unit_a;
        SideId side_a = SideId::Left;
        PortId port_a = PortId::e;
        std::string unit_b;
        SideId side_b = SideId::Left;
        PortId port_b = PortId::e;
        friend bool operator==(const LinkSpec&, const LinkSpec&) = default;
    };
    struct InsertSpec {
        Insertion::Kind kind = Insertion::Kind::Bell;
        BellKind bell = BellKind::PhiPlus;
        Pol pol0 = Pol::H;
        Pol pol1 = Pol::H;
        PortId port = PortId::e;  // single only
        std::string unit;
        SideId side = SideId::Left;
        int tick = 0;
        bool tap = false;
        friend bool operator==(const InsertSpec&, const InsertSpec&) = default;
    };
    struct PhaseSpec {
        std::string unit;
        SideId side = SideId::Left;
        int tick = -1;  // -1: every tick
        double value = 0.0;
        friend bool operator==(const PhaseSpec&, const PhaseSpec&) = default;
    };
    struct TargetSpec {
        std::string unit;
        SideId side = SideId::Left;
        PortId port = PortId::e;
        friend bool operator==(const TargetSpec&, const TargetSpec&) = default;
    };

    int version = 1;
    std::string id = "unnamed";
    bool layered = false;
    int layers = 1;
    std::vector<std::string> units;
    std::vector<LinkSpec> links;
    std::vector<InsertSpec> inserts;
    Regime regime = Regime::Active;
    Control control = Control::Schedule;
    std::vector<PhaseSpec> phases;
    std::vector<TargetSpec> targets;
    int max_ticks = 24;
    int hop_cap = kDefaultHopCap;
    std::uint64_t seed = 1;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

// Strict parser: unknown keys, wrong arities, duplicate one-shot keys,
// malformed numbers, missing version, or mixing phase and target lines all
// raise std::invalid_argument naming the offending line.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);  // adds file errors

// Canonical text form; parse(serialize(s)) == s.  `header_comments` lines are
// emitted first, each prefixed "# ".
std::string serialize_scenario(const Scenario& s,
                               const std::vector<std::string>& header_comments = {});

Topology make_topology(const Scenario& s);
std::vector<Insertion> make_insertions(const Scenario& s, const Topology& topo);
PhaseSchedule make_schedule(const Scenario& s, const Topology& topo);
std::vector<PortRef> make_targets(const Scenario& s, const Topology& topo);

// Graphviz view of the network: one box per unit listing its open ports, one
// edge per link; when routes are given their hops are overlaid as colored
// directed edges labeled with ticks.
std::string export_dot(const Topology& topo, const PlanResult* routes = nullptr);

// Command entry points (the CLI parses flags and delegates here).  Return
// codes: 0 success, 2 invalid input, 3 runtime failure, 4 unreachable target.
int cmd_simulate(const std::string& scenario_path, const std::string& trace_path,
                 const std::string& report_path,
                 std::optional<int> max_ticks_override = {});
int cmd_plan(const std::string& scenario_path, const std::string& out_path,
             std::optional<int> hop_cap_override = {});
int cmd_reach(const std::string& scenario_path,
              std::optional<int> hop_cap_override = {});
int cmd_oracle_check(std::uint64_t seed, int trials);
int cmd_export_dot(const std::string& scenario_path, const std::string& out_path);

}  // namespace dualrail
