#pragma once
/*
 * Clocked network simulator.  Time advances in a fixed four-stage cycle:
 *   tick % 4 == 1  entry:  occupied edge ports and incoming slots couple
 *                          through the entry splitter onto the side's rails,
 *                          then the side's shifter acts on the lower rail
 *   tick % 4 == 2  mix:    the four-port mixer stirs each unit's rails
 *   tick % 4 == 3  exit:   per side, the shifter acts on the lower rail and
 *                          the exit splitter lands the rails on the ports
 *   tick % 4 == 0  hop:    photons on linked ports move onto the directed
 *                          slot toward the peer unit
 * Photons landing on unlinked ports are out of every later stage's reach and
 * keep their amplitudes: they have left the network.  Injections happen only
 * at hop ticks, after that tick's motion.
 */

#include <array>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "dualrail/fock.hpp"
#include "dualrail/topology.hpp"

namespace dualrail {

// Per-tick norm drift beyond this aborts the run.
inline constexpr double kNormDriftTol = 1e-9;

enum class Regime { Passive, Active };

enum class Stage { Hop = 0, Entry = 1, Mix = 2, Exit = 3 };
Stage stage_of(int tick);

// Binary {0, pi} settings of the per-(unit, side) shifters.  Active regime:
// values may change every tick; passive regime: one fixed value per shifter
// for the whole run.  Lookup order: exact tick entry, then wildcard, then 0.
class PhaseSchedule {
public:
    explicit PhaseSchedule(Regime r = Regime::Active) : regime_(r) {}

    Regime regime() const { return regime_; }

    void set_wildcard(int unit, SideId side, double phi);
    // Throws std::logic_error in the passive regime.
    void set_at(int unit, SideId side, int tick, double phi);
    double lookup(int unit, SideId side, int tick) const;

    // Keyed (unit, side, tick) with tick -1 for wildcard entries.
    const std::map<std::tuple<int, int, int>, double>& entries() const {
        return entries_;
    }

private:
    Regime regime_;
    std::map<std::tuple<int, int, int>, double> entries_;
};

// A photon source attached to one or two ports of a unit side.  Pair kinds
// occupy ports e and f of the side; singles occupy one chosen port.  `tap`
// marks injection on a linked port (a mid-network source); otherwise the
// target ports must be unlinked.
struct Insertion {
    enum class Kind { Bell, Product, Single };

    Kind kind = Kind::Bell;
    BellKind bell = BellKind::PhiPlus;
    std::array<Pol, 2> pols = {Pol::H, Pol::H};  // Product: both; Single: [0]
    int unit = 0;
    SideId side = SideId::Left;
    PortId single_port = PortId::e;  // Single only
    int tick = 0;                    // must be a hop tick (multiple of 4)
    bool tap = false;

    static Insertion bell_pair(BellKind kind, int unit, SideId side, int tick,
                               bool tap = false);
    static Insertion product_pair(Pol p0, Pol p1, int unit, SideId side,
                                  int tick, bool tap = false);
    static Insertion single_photon(Pol p, int unit, SideId side, PortId port,
                                   int tick, bool tap = false);

    // Port sites the insertion populates, in photon order.
    std::vector<PortRef> target_ports() const;
};

// Normalized injected state on the insertion's port sites.
PhotonState insertion_poly(const Insertion& ins, const SitePlan& plan);

struct TraceRecord {
    int tick;
    std::string site;
    Pol pol;
    cplx amp;  // amplitude of the owning term
};

struct Trace {
    std::vector<TraceRecord> records;
    std::vector<std::pair<int, double>> norms;  // (tick, state norm)

    // "tick<TAB>site<TAB>pol<TAB>re<TAB>im" per record, then
    // "tick<TAB>NORM<TAB>value" per tick, both in time order.
    std::string to_file_string() const;
};

struct SimResult {
    PhotonState final_state;
    Trace trace;
};

// The combined linear substitution for one tick.  `armed_ports` names the
// port sites acting as entry sources this tick (ports populated by an
// injection at tick-1); only meaningful at entry ticks.
ModeMap stage_map(const SitePlan& plan, const PhaseSchedule& sched, int tick,
                  const std::set<std::string>& armed_ports);

// Applies one tick to a state.  Entry sources are inferred as the occupied
// port sites — convenient for single-shot studies, not for runs where parked
// photons remain on unlinked ports (use simulate for those).
PhotonState step(const PhotonState& state, const SitePlan& plan,
                 const PhaseSchedule& sched, int tick);

// Runs ticks 1..max_ticks from vacuum, applying each injection at its tick.
// Validates injections (known ports, hop-tick timing, no same-tick overlap,
// unoccupied targets, unlinked targets unless tapped) and guards every tick
// against norm drift and against landing a photon onto an already-occupied
// exit port.  Throws std::invalid_argument for bad setups and
// std::runtime_error for runtime violations.
SimResult simulate(const Topology& topo, const std::vector<Insertion>& insertions,
                   const PhaseSchedule& sched, int max_ticks);

// Convenience: each pair kind injected at tick 0 on the given side of unit 0
// and run under the same schedule.
std::map<BellKind, PhotonState> run_all_bell(const Topology& topo,
                                             const PhaseSchedule& sched,
                                             SideId side = SideId::Left,
                                             int max_ticks = 4);

}  // namespace dualrail
