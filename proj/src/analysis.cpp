#include "dualrail/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <stdexcept>

namespace dualrail {

double fidelity(const PhotonState& a, const PhotonState& b) {
    if (std::abs(a.norm() - 1.0) > kCompareTol ||
        std::abs(b.norm() - 1.0) > kCompareTol)
        throw std::invalid_argument("fidelity expects normalized states");
    return std::norm(inner_product(a, b));
}

PolDensity reduced_polarization_dm(const PhotonState& state,
                                   const std::string& site) {
    if (state.photon_number() != 2)
        throw std::invalid_argument("polarization reduction expects a two-photon state");
    // Amplitude table indexed by the partner mode; column index is the
    // polarization at `site`.
    std::map<Mode, std::array<cplx, 2>> table;
    for (const auto& [mono, amp] : state.terms()) {
        const Mode* here = nullptr;
        const Mode* partner = nullptr;
        for (const auto& [mode, count] : mono.factors()) {
            if (count != 1)
                throw std::invalid_argument(
                    "polarization reduction expects singly-occupied modes");
            (mode.site == site ? here : partner) = &mode;
        }
        if (!here || !partner)
            throw std::invalid_argument(
                "every term must place one photon at " + site);
        auto [it, inserted] = table.try_emplace(*partner, std::array<cplx, 2>{});
        it->second[static_cast<int>(here->pol)] += amp;
    }
    PolDensity rho{};
    for (const auto& [partner, col] : table)
        for (int s = 0; s < 2; ++s)
            for (int s2 = 0; s2 < 2; ++s2) rho.m[s][s2] += col[s] * std::conj(col[s2]);
    const double tr = rho.m[0][0].real() + rho.m[1][1].real();
    const double det = (rho.m[0][0] * rho.m[1][1] - rho.m[0][1] * rho.m[1][0]).real();
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    rho.eig_lo = tr / 2.0 - disc;
    rho.eig_hi = tr / 2.0 + disc;
    return rho;
}

ExitDistribution exit_distribution(const PhotonState& state, const SitePlan& plan,
                                   bool include_pol) {
    ExitDistribution dist;
    for (const auto& [mono, amp] : state.terms()) {
        const double prob = std::norm(amp) * mono.bosonic_factor();
        bool settled = true;
        for (const auto& [mode, count] : mono.factors())
            if (!plan.is_free_port_site(mode.site)) settled = false;
        if (!settled || mono.empty()) {
            dist.residual += prob;
            continue;
        }
        std::vector<std::string> key;
        for (const auto& [mode, count] : mono.factors()) {
            std::string label = mode.site;
            if (include_pol) label += std::string("/") + pol_char(mode.pol);
            for (int k = 0; k < count; ++k) key.push_back(label);
        }
        dist.probs[key] += prob;
    }
    return dist;
}

std::pair<int, int> count_reachable(const Topology& topo, const Insertion& ins,
                                    int hop_cap) {
    return {static_cast<int>(reachable_exits(topo, ins, Regime::Passive, hop_cap).size()),
            static_cast<int>(reachable_exits(topo, ins, Regime::Active, hop_cap).size())};
}

// ---------------------------------------------------------------------------
// Reference evolution on dense per-photon vectors.
// ---------------------------------------------------------------------------

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

// In-place unitary primitives over site indices (each acts on both
// polarization components of its sites).
struct Op {
    enum class Kind { Swap, Cycle, Rotate, Phase, Grover };
    Kind kind;
    int i = -1, j = -1, k = -1, l = -1;
    cplx m00, m01, m10, m11;  // Rotate
    cplx factor;              // Phase
};

Op op_swap(int i, int j) { return {Op::Kind::Swap, i, j, -1, -1, 0, 0, 0, 0, 0}; }
// Amplitude at i moves to j, j to k, k to i.
Op op_cycle(int i, int j, int k) {
    return {Op::Kind::Cycle, i, j, k, -1, 0, 0, 0, 0, 0};
}
Op op_rotate(int i, int j, cplx m00, cplx m01, cplx m10, cplx m11) {
    return {Op::Kind::Rotate, i, j, -1, -1, m00, m01, m10, m11, 0};
}
Op op_phase(int i, cplx factor) {
    return {Op::Kind::Phase, i, -1, -1, -1, 0, 0, 0, 0, factor};
}
Op op_grover(int i, int j, int k, int l) {
    return {Op::Kind::Grover, i, j, k, l, 0, 0, 0, 0, 0};
}

// Applies one op to a vector indexed by site (stride 1), used both for the
// site-space matrix materialization and, per polarization, for state factors.
template <typename At>
void apply_op(const Op& op, At at) {
    switch (op.kind) {
        case Op::Kind::Swap:
            std::swap(at(op.i), at(op.j));
            break;
        case Op::Kind::Cycle: {
            const cplx vi = at(op.i), vj = at(op.j), vk = at(op.k);
            at(op.j) = vi;
            at(op.k) = vj;
            at(op.i) = vk;
            break;
        }
        case Op::Kind::Rotate: {
            const cplx vi = at(op.i), vj = at(op.j);
            at(op.i) = op.m00 * vi + op.m01 * vj;
            at(op.j) = op.m10 * vi + op.m11 * vj;
            break;
        }
        case Op::Kind::Phase:
            at(op.i) *= op.factor;
            break;
        case Op::Kind::Grover: {
            const cplx v[4] = {at(op.i), at(op.j), at(op.k), at(op.l)};
            const cplx sum = v[0] + v[1] + v[2] + v[3];
            at(op.i) = sum * 0.5 - v[0];
            at(op.j) = sum * 0.5 - v[1];
            at(op.k) = sum * 0.5 - v[2];
            at(op.l) = sum * 0.5 - v[3];
            break;
        }
    }
}

struct OracleSpace {
    SitePlan plan;
    std::vector<std::string> sites;
    std::map<std::string, int> index;
    std::vector<bool> free_port;  // by site index

    explicit OracleSpace(const Topology& topo) : plan(SitePlan::build(topo)) {
        sites = plan.all_sites();
        for (size_t i = 0; i < sites.size(); ++i) {
            index[sites[i]] = static_cast<int>(i);
            free_port.push_back(plan.is_free_port_site(sites[i]));
        }
    }
    int at(const std::string& site) const { return index.at(site); }
    int count() const { return static_cast<int>(sites.size()); }
};

std::vector<Op> tick_ops(const OracleSpace& space, const PhaseSchedule& sched,
                         int tick, const std::set<int>& armed_sites) {
    const Topology& topo = space.plan.topology();
    const SitePlan& plan = space.plan;
    std::vector<Op> ops;
    switch (stage_of(tick)) {
        case Stage::Entry: {
            for (int u = 0; u < topo.unit_count(); ++u) {
                for (SideId s : {SideId::Left, SideId::Right}) {
                    const int upper = space.at(plan.rail_site(u, upper_rail(s)));
                    const int lower = space.at(plan.rail_site(u, lower_rail(s)));
                    bool any_source = false;
                    for (PortId p : {PortId::e, PortId::f}) {
                        const PortRef ref{u, s, p};
                        const int port = space.at(plan.port_site(ref));
                        const int rail = p == PortId::e ? upper : lower;
                        const bool armed = armed_sites.count(port) > 0;
                        const bool linked = topo.is_linked(ref);
                        if (armed && linked) {
                            ops.push_back(op_cycle(space.at(plan.in_slot_site(ref)),
                                                   port, rail));
                        } else if (armed) {
                            ops.push_back(op_swap(port, rail));
                        } else if (linked) {
                            ops.push_back(
                                op_swap(space.at(plan.in_slot_site(ref)), rail));
                        } else {
                            continue;
                        }
                        any_source = true;
                    }
                    if (!any_source) continue;
                    ops.push_back(op_rotate(upper, lower, kInvSqrt2, kInvSqrt2,
                                            -kInvSqrt2, kInvSqrt2));
                    ops.push_back(op_phase(
                        lower, std::exp(cplx(0.0, sched.lookup(u, s, tick)))));
                }
            }
            break;
        }
        case Stage::Mix: {
            for (int u = 0; u < topo.unit_count(); ++u)
                ops.push_back(op_grover(space.at(plan.rail_site(u, RailId::a)),
                                        space.at(plan.rail_site(u, RailId::b)),
                                        space.at(plan.rail_site(u, RailId::c)),
                                        space.at(plan.rail_site(u, RailId::d))));
            break;
        }
        case Stage::Exit: {
            for (int u = 0; u < topo.unit_count(); ++u) {
                for (SideId s : {SideId::Left, SideId::Right}) {
                    const int upper = space.at(plan.rail_site(u, upper_rail(s)));
                    const int lower = space.at(plan.rail_site(u, lower_rail(s)));
                    const int pe = space.at(plan.port_site({u, s, PortId::e}));
                    const int pf = space.at(plan.port_site({u, s, PortId::f}));
                    ops.push_back(op_phase(
                        lower, std::exp(cplx(0.0, sched.lookup(u, s, tick)))));
                    ops.push_back(op_rotate(upper, lower, kInvSqrt2, -kInvSqrt2,
                                            kInvSqrt2, kInvSqrt2));
                    ops.push_back(op_swap(upper, pe));
                    ops.push_back(op_swap(lower, pf));
                }
            }
            break;
        }
        case Stage::Hop: {
            for (const Link& link : topo.links()) {
                for (PortRef p : {link.a, link.b})
                    ops.push_back(op_swap(space.at(plan.port_site(p)),
                                          space.at(plan.out_slot_site(p))));
            }
            break;
        }
    }
    return ops;
}

double materialized_defect(const std::vector<Op>& ops, int n) {
    std::vector<std::vector<cplx>> u(n, std::vector<cplx>(n, 0.0));
    for (int col = 0; col < n; ++col) {
        std::vector<cplx> v(n, 0.0);
        v[col] = 1.0;
        for (const Op& op : ops)
            apply_op(op, [&](int i) -> cplx& { return v[i]; });
        for (int row = 0; row < n; ++row) u[row][col] = v[row];
    }
    double defect = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            cplx dot = 0.0;
            for (int r = 0; r < n; ++r) dot += std::conj(u[r][i]) * u[r][j];
            if (i == j) dot -= 1.0;
            defect = std::max(defect, std::abs(dot));
        }
    }
    return defect;
}

struct OTerm {
    cplx c;
    std::vector<std::vector<cplx>> factors;  // length 2 * site count, pol-interleaved
    std::vector<char> frozen;
};

void apply_ops_to_term(const std::vector<Op>& ops, OTerm& term) {
    for (size_t f = 0; f < term.factors.size(); ++f) {
        if (term.frozen[f]) continue;
        std::vector<cplx>& v = term.factors[f];
        for (int pol = 0; pol < 2; ++pol)
            for (const Op& op : ops)
                apply_op(op, [&](int i) -> cplx& { return v[2 * i + pol]; });
    }
}

// Splits off the amplitude each live factor has accumulated on unlinked
// ports: that part of the photon has left the network and must not rejoin
// later stages.
void split_settled(std::vector<OTerm>& terms, const OracleSpace& space) {
    std::vector<OTerm> done;
    std::vector<OTerm> work = std::move(terms);
    while (!work.empty()) {
        OTerm term = std::move(work.back());
        work.pop_back();
        bool split = false;
        for (size_t f = 0; f < term.factors.size() && !split; ++f) {
            if (term.frozen[f]) continue;
            std::vector<cplx>& v = term.factors[f];
            double settled_mag = 0.0, live_mag = 0.0;
            for (int i = 0; i < space.count(); ++i)
                for (int pol = 0; pol < 2; ++pol)
                    (space.free_port[i] ? settled_mag : live_mag) +=
                        std::norm(v[2 * i + pol]);
            if (settled_mag < kPruneTol * kPruneTol) continue;
            std::vector<cplx> settled(v.size(), 0.0), live(v.size(), 0.0);
            for (int i = 0; i < space.count(); ++i)
                for (int pol = 0; pol < 2; ++pol)
                    (space.free_port[i] ? settled : live)[2 * i + pol] =
                        v[2 * i + pol];
            if (live_mag < kPruneTol * kPruneTol) {
                term.factors[f] = std::move(settled);
                term.frozen[f] = 1;
                continue;  // factor fully settled; keep scanning the term
            }
            OTerm settled_term = term;
            settled_term.factors[f] = std::move(settled);
            settled_term.frozen[f] = 1;
            term.factors[f] = std::move(live);
            work.push_back(std::move(settled_term));
            work.push_back(std::move(term));
            split = true;
        }
        if (!split) done.push_back(std::move(term));
    }
    terms = std::move(done);
}

void multiply_insertion(std::vector<OTerm>& terms, const Insertion& ins,
                        const OracleSpace& space) {
    const PhotonState poly = insertion_poly(ins, space.plan);
    std::vector<OTerm> out;
    for (const OTerm& base : terms) {
        for (const auto& [mono, amp] : poly.terms()) {
            OTerm t = base;
            t.c *= amp;
            for (const auto& [mode, count] : mono.factors()) {
                for (int k = 0; k < count; ++k) {
                    std::vector<cplx> v(2 * space.count(), 0.0);
                    v[2 * space.at(mode.site) + static_cast<int>(mode.pol)] = 1.0;
                    t.factors.push_back(std::move(v));
                    t.frozen.push_back(0);
                }
            }
            out.push_back(std::move(t));
        }
    }
    terms = std::move(out);
}

PhotonState extract_state(const std::vector<OTerm>& terms,
                          const OracleSpace& space) {
    PhotonState out;
    for (const OTerm& term : terms) {
        Monomial mono;
        std::function<void(size_t, cplx)> expand = [&](size_t f, cplx amp) {
            if (f == term.factors.size()) {
                out.add(mono, amp);
                return;
            }
            const std::vector<cplx>& v = term.factors[f];
            for (int i = 0; i < space.count(); ++i) {
                for (int pol = 0; pol < 2; ++pol) {
                    const cplx a = v[2 * i + pol];
                    if (std::abs(a) == 0.0) continue;
                    Monomial saved = mono;
                    mono.multiply_mode({space.sites[i], static_cast<Pol>(pol)});
                    expand(f + 1, amp * a);
                    mono = std::move(saved);
                }
            }
        };
        expand(0, term.c);
    }
    return canonicalize(out);
}

}  // namespace

PhotonState dense_oracle(const Topology& topo,
                         const std::vector<Insertion>& insertions,
                         const PhaseSchedule& sched, int max_ticks,
                         std::vector<OraclePerTick>* stats,
                         bool check_unitarity) {
    const OracleSpace space(topo);
    std::vector<OTerm> terms{{1.0, {}, {}}};
    std::set<int> armed;

    auto insert_due = [&](int tick) {
        for (const Insertion& ins : insertions) {
            if (ins.tick != tick) continue;
            multiply_insertion(terms, ins, space);
            for (PortRef p : ins.target_ports())
                armed.insert(space.at(space.plan.port_site(p)));
        }
    };
    insert_due(0);

    for (int tick = 1; tick <= max_ticks; ++tick) {
        const std::vector<Op> ops = tick_ops(space, sched, tick, armed);
        if (stats && check_unitarity)
            stats->push_back({tick, materialized_defect(ops, space.count())});
        if (stage_of(tick) == Stage::Exit) {
            // A live photon waiting on a port here would be dragged onto the
            // rails by the landing step; the clocked model parks it instead.
            for (const OTerm& term : terms)
                for (size_t f = 0; f < term.factors.size(); ++f) {
                    if (term.frozen[f]) continue;
                    for (int i = 0; i < space.count(); ++i) {
                        if (space.plan.info(space.sites[i]).kind !=
                            SiteInfo::Kind::Port)
                            continue;
                        if (std::abs(term.factors[f][2 * i]) > kPruneTol ||
                            std::abs(term.factors[f][2 * i + 1]) > kPruneTol)
                            throw std::runtime_error(
                                "reference evolution does not model photons "
                                "waiting on ports across a landing step");
                    }
                }
        }
        for (OTerm& term : terms) apply_ops_to_term(ops, term);
        armed.clear();
        if (stage_of(tick) == Stage::Hop) {
            split_settled(terms, space);
            insert_due(tick);
        }
    }
    return extract_state(terms, space);
}

// ---------------------------------------------------------------------------
// Randomized cross-check of simulate() against the reference evolution.
// ---------------------------------------------------------------------------

namespace {

double max_amp_deviation(const PhotonState& a, const PhotonState& b) {
    double dev = 0.0;
    for (const auto& [mono, amp] : a.terms()) {
        auto it = b.terms().find(mono);
        const cplx other = it == b.terms().end() ? cplx(0.0) : it->second;
        dev = std::max(dev, std::abs(amp - other));
    }
    for (const auto& [mono, amp] : b.terms())
        if (!a.terms().count(mono)) dev = std::max(dev, std::abs(amp));
    return dev;
}

}  // namespace

OracleCheckOutcome oracle_check(std::uint64_t seed, int trials) {
    std::mt19937_64 rng(seed);
    auto pick = [&rng](int n) { return static_cast<int>(rng() % n); };
    OracleCheckOutcome out;
    out.requested = trials;

    // Draw until `trials` scenarios complete; draws the simulator rejects
    // (e.g. landing collisions between injections) are redrawn and counted
    // as skips.
    for (int attempt = 0; out.completed < trials && attempt < 20 * trials;
         ++attempt) {
        Topology topo;
        switch (pick(4)) {
            case 0: topo = Topology::layered_tree(1); break;
            case 1: topo = Topology::layered_tree(2); break;
            case 2: topo = Topology::layered_tree(3); break;
            default: {
                topo.add_unit("n0");
                topo.add_unit("n1");
                topo.add_link({0, SideId::Right, PortId::e},
                              {1, SideId::Left, PortId::e});
                break;
            }
        }
        const Regime regime = pick(3) ? Regime::Active : Regime::Passive;
        const int max_ticks = 8 + 4 * pick(5);

        std::vector<Insertion> insertions;
        std::set<std::string> claimed;
        const int want = 1 + pick(2);
        for (int i = 0; i < want; ++i) {
            const int tick = i == 0 ? 0 : std::min(4 * (1 + pick(3)), max_ticks - 4);
            const int kind = pick(3);
            bool placed = false;
            for (int attempt = 0; attempt < 8 && !placed; ++attempt) {
                const int unit = pick(topo.unit_count());
                const SideId side = pick(2) ? SideId::Right : SideId::Left;
                Insertion ins;
                if (kind == 0) {
                    ins = Insertion::bell_pair(static_cast<BellKind>(pick(4)), unit,
                                               side, tick);
                } else if (kind == 1) {
                    ins = Insertion::product_pair(pick(2) ? Pol::V : Pol::H,
                                                  pick(2) ? Pol::V : Pol::H, unit,
                                                  side, tick);
                } else {
                    ins = Insertion::single_photon(pick(2) ? Pol::V : Pol::H, unit,
                                                   side,
                                                   pick(2) ? PortId::f : PortId::e,
                                                   tick);
                }
                bool linked_target = false;
                bool overlap = false;
                for (PortRef p : ins.target_ports()) {
                    if (topo.is_linked(p)) linked_target = true;
                    const std::string key = std::to_string(p.unit) +
                                            side_char(p.side) + port_char(p.port);
                    if (!claimed.insert(key).second) overlap = true;
                }
                if (overlap) continue;
                // Sources on linked ports only make sense before anything is
                // in flight toward them.
                if (linked_target) {
                    if (tick != 0) continue;
                    ins.tap = true;
                }
                insertions.push_back(ins);
                placed = true;
            }
        }
        if (insertions.empty()) {
            ++out.skipped;
            continue;
        }

        PhaseSchedule sched(regime);
        if (regime == Regime::Active) {
            const int n = pick(6);
            for (int i = 0; i < n; ++i)
                sched.set_at(pick(topo.unit_count()),
                             pick(2) ? SideId::Right : SideId::Left,
                             1 + pick(max_ticks), kPi);
        } else {
            const int n = pick(4);
            for (int i = 0; i < n; ++i)
                sched.set_wildcard(pick(topo.unit_count()),
                                   pick(2) ? SideId::Right : SideId::Left, kPi);
        }

        SimResult from_engine;
        try {
            from_engine = simulate(topo, insertions, sched, max_ticks);
        } catch (const std::exception&) {
            ++out.skipped;  // e.g. landing collision between the injections
            continue;
        }
        const PhotonState reference =
            dense_oracle(topo, insertions, sched, max_ticks);
        out.max_amp_dev = std::max(
            out.max_amp_dev, max_amp_deviation(from_engine.final_state, reference));
        out.max_norm_dev =
            std::max(out.max_norm_dev,
                     std::abs(from_engine.final_state.norm() - reference.norm()));
        // The run starts from one normalized injection, so every per-tick norm
        // should sit at 1 exactly.
        for (const auto& [tick, norm] : from_engine.trace.norms)
            out.max_norm_dev = std::max(out.max_norm_dev, std::abs(norm - 1.0));
        ++out.completed;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reports.
// ---------------------------------------------------------------------------

std::string make_report(const std::string& id, const Topology& topo,
                        const std::vector<Insertion>& insertions,
                        const SimResult& result) {
    const SitePlan plan = SitePlan::build(topo);
    const ExitDistribution dist = exit_distribution(result.final_state, plan);
    char buf[160];
    std::string out;
    out += "scenario " + id + "\n";
    std::snprintf(buf, sizeof buf, "units %d\nlinks %d\nfree_ports %d\n",
                  topo.unit_count(), static_cast<int>(topo.links().size()),
                  static_cast<int>(topo.free_ports().size()));
    out += buf;
    std::snprintf(buf, sizeof buf, "final_norm %.9f\n", result.final_state.norm());
    out += buf;
    for (const auto& [key, prob] : dist.probs) {
        out += "exit";
        for (const std::string& site : key) out += " " + site;
        std::snprintf(buf, sizeof buf, " %.9f\n", prob);
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "residual %.9f\n", dist.residual);
    out += buf;

    // With a pair fully settled on two ports, name the entangled state it
    // realizes best.
    if (insertions.size() == 1 && insertions[0].kind == Insertion::Kind::Bell &&
        dist.residual < 1e-6 && dist.probs.size() == 1) {
        const std::vector<std::string>& key = dist.probs.begin()->first;
        if (key.size() == 2 && key[0] != key[1]) {
            double best = -1.0;
            const char* best_name = nullptr;
            for (BellKind kind : {BellKind::PhiPlus, BellKind::PhiMinus,
                                  BellKind::PsiPlus, BellKind::PsiMinus}) {
                const double f =
                    fidelity(make_bell(kind, key[0], key[1]), result.final_state);
                if (f > best) {
                    best = f;
                    best_name = bell_name(kind);
                }
            }
            std::snprintf(buf, sizeof buf, "bell %s fidelity %.9f\n", best_name,
                          best);
            out += buf;
        }
    }
    if (insertions.size() == 1) {
        const auto [passive, active] = count_reachable(topo, insertions[0]);
        std::snprintf(buf, sizeof buf, "reach passive %d active %d\n", passive,
                      active);
        out += buf;
    }
    return out;
}

}  // namespace dualrail
