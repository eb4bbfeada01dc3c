#pragma once
/*
 * Measurement-side utilities: state overlap, one-photon polarization density
 * matrices, exit-port statistics, reachability counts, plain-text run
 * reports, and an independent full-space reference evolution for
 * cross-checking the term-based simulator.
 */

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dualrail/engine.hpp"
#include "dualrail/planner.hpp"
#include "dualrail/topology.hpp"

namespace dualrail {

// |<a|b>|^2 for normalized states.  Throws std::invalid_argument when either
// norm strays from 1 by more than kCompareTol.
double fidelity(const PhotonState& a, const PhotonState& b);

struct PolDensity {
    cplx m[2][2];  // indexed by Pol (H=0, V=1)
    double eig_lo = 0.0;
    double eig_hi = 0.0;
};

// Reduced polarization density matrix of the photon at `site` in a
// two-photon state.  Requires every term to place exactly one photon at
// `site` and its partner somewhere else.
PolDensity reduced_polarization_dm(const PhotonState& state,
                                   const std::string& site);

struct ExitDistribution {
    // Key: exit-port site labels of one outcome, one entry per photon
    // (doubly-occupied ports repeat), optionally "/P"-suffixed.
    std::map<std::vector<std::string>, double> probs;
    double residual = 0.0;  // probability not yet settled on exit ports
};

// Probabilities of the settled outcomes: terms whose photons all sit on
// unlinked ports.
ExitDistribution exit_distribution(const PhotonState& state, const SitePlan& plan,
                                   bool include_pol = false);

// Exit ports reachable under fixed settings and under per-tick control.
std::pair<int, int> count_reachable(const Topology& topo, const Insertion& ins,
                                    int hop_cap = kDefaultHopCap);

struct OraclePerTick {
    int tick = 0;
    double unitarity_defect = 0.0;
};

// Reference evolution: the same injections and schedule evaluated on dense
// per-photon amplitude vectors over all (site, polarization) modes, moved by
// per-tick elementary operations that complete every stage to a genuine
// unitary.  Shares no state-representation code with simulate().  When
// `stats` is given (requires check_unitarity) each tick's materialized
// matrix is tested against U*U = 1.
PhotonState dense_oracle(const Topology& topo,
                         const std::vector<Insertion>& insertions,
                         const PhaseSchedule& sched, int max_ticks,
                         std::vector<OraclePerTick>* stats = nullptr,
                         bool check_unitarity = false);

struct OracleCheckOutcome {
    int requested = 0;
    int completed = 0;
    int skipped = 0;  // scenarios the simulator rejected (e.g. collisions)
    double max_amp_dev = 0.0;
    double max_norm_dev = 0.0;
};

// Runs `trials` randomized scenarios (topology, injections, schedule) through
// both evolutions and compares final amplitudes termwise.
OracleCheckOutcome oracle_check(std::uint64_t seed, int trials);

// Deterministic plain-text summary of one finished run.
std::string make_report(const std::string& id, const Topology& topo,
                        const std::vector<Insertion>& insertions,
                        const SimResult& result);

}  // namespace dualrail
