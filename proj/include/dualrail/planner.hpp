#pragma once
/*
 * Route planning: given an injection and target exit ports, find per-photon
 * unit traversal sequences and the shifter settings realizing them, resolve
 * timing collisions between routes, and enumerate which exits are reachable
 * at all under each control regime.
 */

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "dualrail/engine.hpp"
#include "dualrail/topology.hpp"

namespace dualrail {

// Default search depth limit, in unit traversals per photon.
inline constexpr int kDefaultHopCap = 32;
// Deconfliction gives up once a route has been delayed this many ticks.
inline constexpr int kDeconflictDelayCap = 32;

// One crossing of one unit: the photon sits on the entry port at
// entry_tick, rides the rails for three ticks, and sits on the exit port at
// entry_tick + 3.  Transmit exits on the side opposite the entry, reflect on
// the entry side.
struct TraversalRec {
    int unit = 0;
    SideId entry_side = SideId::Left;
    PortId entry_port = PortId::e;
    McuOutcome outcome = McuOutcome::Transmit;
    SideId exit_side = SideId::Right;
    PortId exit_port = PortId::f;
    int entry_tick = 0;

    friend bool operator==(const TraversalRec&, const TraversalRec&) = default;
};

struct RoutePlan {
    std::vector<TraversalRec> traversals;
    // True when the first traversal is the shared crossing of a pair source:
    // both photons ride the same unit with a common entry shifter, one
    // reflecting and one transmitting.
    bool joint_first = false;
    PortRef target;
    int arrival_tick = 0;  // tick at which the photon settles on the target
};

struct PlanResult {
    std::vector<RoutePlan> photons;  // one per injected photon, in order
    PhaseSchedule schedule;
};

class UnreachableError : public std::runtime_error {
public:
    UnreachableError(PortRef target, const std::string& why);
    PortRef target() const { return target_; }

private:
    PortRef target_;
};

// Exit ports a photon of the injection can settle on under some schedule of
// the given regime.  For pair injections the union over both photons.
std::set<PortRef> reachable_exits(const Topology& topo, const Insertion& ins,
                                  Regime regime, int hop_cap = kDefaultHopCap);

// Minimal-traversal routes from the injection to the targets (one target per
// injected photon, any assignment), deconflicted, with the schedule that
// drives them.  Throws UnreachableError when no routing exists.
PlanResult plan(const Topology& topo, const Insertion& ins,
                const std::vector<PortRef>& targets, Regime regime,
                int hop_cap = kDefaultHopCap);

// Delays `follower` with round-trip detours until it shares no resource
// (a side shifter or a link, at one tick) with `fixed`.  Active regime only.
// Throws std::runtime_error when the delay cap is exceeded.
RoutePlan deconflict(const Topology& topo, const RoutePlan& fixed,
                     RoutePlan follower);

// Shifter settings driving the given routes: per-tick entries in the active
// regime, fixed per-side values in the passive.  Throws std::runtime_error
// when two traversals demand different values of one setting.
PhaseSchedule schedule_from_plans(Regime regime,
                                  const std::vector<RoutePlan>& plans);

}  // namespace dualrail
