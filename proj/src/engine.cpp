#include "dualrail/engine.hpp"

#include <cmath>
#include <stdexcept>

namespace dualrail {

namespace {
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

int norm_tick_key(int tick) { return tick < 0 ? -1 : tick; }
}  // namespace

Stage stage_of(int tick) {
    int m = tick % 4;
    if (m < 0) m += 4;
    return static_cast<Stage>(m);
}

void PhaseSchedule::set_wildcard(int unit, SideId side, double phi) {
    entries_[{unit, static_cast<int>(side), -1}] = canonical_binary_phase(phi);
}

void PhaseSchedule::set_at(int unit, SideId side, int tick, double phi) {
    if (regime_ == Regime::Passive)
        throw std::logic_error("per-tick phase entries require the active regime");
    if (tick < 0) throw std::invalid_argument("phase tick must be non-negative");
    entries_[{unit, static_cast<int>(side), norm_tick_key(tick)}] =
        canonical_binary_phase(phi);
}

double PhaseSchedule::lookup(int unit, SideId side, int tick) const {
    auto it = entries_.find({unit, static_cast<int>(side), norm_tick_key(tick)});
    if (it != entries_.end()) return it->second;
    it = entries_.find({unit, static_cast<int>(side), -1});
    if (it != entries_.end()) return it->second;
    return 0.0;
}

Insertion Insertion::bell_pair(BellKind kind, int unit, SideId side, int tick,
                               bool tap) {
    Insertion ins;
    ins.kind = Kind::Bell;
    ins.bell = kind;
    ins.unit = unit;
    ins.side = side;
    ins.tick = tick;
    ins.tap = tap;
    return ins;
}

Insertion Insertion::product_pair(Pol p0, Pol p1, int unit, SideId side, int tick,
                                  bool tap) {
    Insertion ins;
    ins.kind = Kind::Product;
    ins.pols = {p0, p1};
    ins.unit = unit;
    ins.side = side;
    ins.tick = tick;
    ins.tap = tap;
    return ins;
}

Insertion Insertion::single_photon(Pol p, int unit, SideId side, PortId port,
                                   int tick, bool tap) {
    Insertion ins;
    ins.kind = Kind::Single;
    ins.pols = {p, p};
    ins.unit = unit;
    ins.side = side;
    ins.single_port = port;
    ins.tick = tick;
    ins.tap = tap;
    return ins;
}

std::vector<PortRef> Insertion::target_ports() const {
    if (kind == Kind::Single) return {{unit, side, single_port}};
    return {{unit, side, PortId::e}, {unit, side, PortId::f}};
}

PhotonState insertion_poly(const Insertion& ins, const SitePlan& plan) {
    std::vector<PortRef> ports = ins.target_ports();
    switch (ins.kind) {
        case Insertion::Kind::Bell:
            return make_bell(ins.bell, plan.port_site(ports[0]),
                             plan.port_site(ports[1]));
        case Insertion::Kind::Product:
            return PhotonState::single_term(
                Monomial::pair({plan.port_site(ports[0]), ins.pols[0]},
                               {plan.port_site(ports[1]), ins.pols[1]}),
                1.0);
        case Insertion::Kind::Single:
            return PhotonState::single_term(
                Monomial::single({plan.port_site(ports[0]), ins.pols[0]}), 1.0);
    }
    throw std::logic_error("unhandled insertion kind");
}

std::string Trace::to_file_string() const {
    std::string out;
    char buf[96];
    for (const TraceRecord& r : records) {
        std::snprintf(buf, sizeof buf, "%d\t%s\t%c\t%.17g\t%.17g\n", r.tick,
                      r.site.c_str(), pol_char(r.pol), r.amp.real(), r.amp.imag());
        out += buf;
    }
    for (const auto& [tick, norm] : norms) {
        std::snprintf(buf, sizeof buf, "%d\tNORM\t%.17g\n", tick, norm);
        out += buf;
    }
    return out;
}

ModeMap stage_map(const SitePlan& plan, const PhaseSchedule& sched, int tick,
                  const std::set<std::string>& armed_ports) {
    const Topology& topo = plan.topology();
    ModeMap map = ModeMap::identity();
    switch (stage_of(tick)) {
        case Stage::Entry: {
            for (int u = 0; u < topo.unit_count(); ++u) {
                for (SideId s : {SideId::Left, SideId::Right}) {
                    const cplx lower_amp =
                        std::exp(cplx(0.0, sched.lookup(u, s, tick))) * kInvSqrt2;
                    const std::string upper = plan.rail_site(u, upper_rail(s));
                    const std::string lower = plan.rail_site(u, lower_rail(s));
                    for (PortId p : {PortId::e, PortId::f}) {
                        const PortRef ref{u, s, p};
                        const std::string port = plan.port_site(ref);
                        const bool armed = armed_ports.count(port) > 0;
                        const bool linked = topo.is_linked(ref);
                        std::string src;
                        if (armed)
                            src = port;
                        else if (linked)
                            src = plan.in_slot_site(ref);
                        else
                            continue;
                        const cplx lower_signed =
                            (p == PortId::e) ? -lower_amp : lower_amp;
                        map.set_image(src, {{upper, kInvSqrt2}, {lower, lower_signed}});
                        // A source feeding a linked port blocks the inbound
                        // slot for one cycle: anything arriving parks on the
                        // port and continues next cycle.
                        if (armed && linked)
                            map.set_image(plan.in_slot_site(ref), {{port, 1.0}});
                    }
                }
            }
            break;
        }
        case Stage::Mix: {
            for (int u = 0; u < topo.unit_count(); ++u) {
                std::string rails[4];
                for (int r = 0; r < 4; ++r)
                    rails[r] = plan.rail_site(u, static_cast<RailId>(r));
                for (int i = 0; i < 4; ++i) {
                    ModeMap::Image img;
                    for (int j = 0; j < 4; ++j)
                        img.push_back({rails[j], i == j ? -0.5 : 0.5});
                    map.set_image(rails[i], std::move(img));
                }
            }
            break;
        }
        case Stage::Exit: {
            for (int u = 0; u < topo.unit_count(); ++u) {
                for (SideId s : {SideId::Left, SideId::Right}) {
                    const cplx lower_amp =
                        std::exp(cplx(0.0, sched.lookup(u, s, tick))) * kInvSqrt2;
                    const std::string upper = plan.rail_site(u, upper_rail(s));
                    const std::string lower = plan.rail_site(u, lower_rail(s));
                    const std::string pe = plan.port_site({u, s, PortId::e});
                    const std::string pf = plan.port_site({u, s, PortId::f});
                    map.set_image(upper, {{pe, kInvSqrt2}, {pf, kInvSqrt2}});
                    map.set_image(lower, {{pe, -lower_amp}, {pf, lower_amp}});
                }
            }
            break;
        }
        case Stage::Hop: {
            for (const Link& l : topo.links()) {
                map.set_image(plan.port_site(l.a), {{plan.out_slot_site(l.a), 1.0}});
                map.set_image(plan.port_site(l.b), {{plan.out_slot_site(l.b), 1.0}});
            }
            break;
        }
    }
    return map;
}

namespace {

bool state_occupies_site(const PhotonState& state, const std::string& site) {
    for (const auto& [mono, amp] : state.terms())
        if (mono.occupies_site(site)) return true;
    return false;
}

std::set<std::string> occupied_port_sites(const PhotonState& state,
                                          const SitePlan& plan) {
    std::set<std::string> out;
    for (const auto& [mono, amp] : state.terms())
        for (const auto& [mode, count] : mono.factors())
            if (plan.info(mode.site).kind == SiteInfo::Kind::Port)
                out.insert(mode.site);
    return out;
}

void check_stage_consistency(const PhotonState& state, const SitePlan& plan,
                             int tick) {
    const Stage stage = stage_of(tick);
    const bool rails_must_be_empty = stage == Stage::Entry || stage == Stage::Hop;
    const bool slots_must_be_empty = stage != Stage::Entry;
    for (const auto& [mono, amp] : state.terms()) {
        for (const auto& [mode, count] : mono.factors()) {
            const SiteInfo& info = plan.info(mode.site);
            if (rails_must_be_empty && info.kind == SiteInfo::Kind::Rail)
                throw std::runtime_error("clock slip: rail " + mode.site +
                                         " occupied entering tick " +
                                         std::to_string(tick));
            if (slots_must_be_empty && info.kind == SiteInfo::Kind::Slot)
                throw std::runtime_error("clock slip: slot " + mode.site +
                                         " occupied entering tick " +
                                         std::to_string(tick));
        }
    }
}

// A photon about to land on a port that already holds one from an earlier
// cycle would merge two distinct departures into one label; refuse instead.
void check_landing_collisions(const PhotonState& state, const SitePlan& plan,
                              int tick) {
    for (const auto& [mono, amp] : state.terms()) {
        std::vector<std::string> occupied_ports;
        for (const auto& [mode, count] : mono.factors())
            if (plan.info(mode.site).kind == SiteInfo::Kind::Port)
                occupied_ports.push_back(mode.site);
        if (occupied_ports.empty()) continue;
        for (const auto& [mode, count] : mono.factors()) {
            const SiteInfo& info = plan.info(mode.site);
            if (info.kind != SiteInfo::Kind::Rail) continue;
            const std::string pe = plan.port_site({info.unit, info.side, PortId::e});
            const std::string pf = plan.port_site({info.unit, info.side, PortId::f});
            for (const std::string& port : occupied_ports) {
                if (port == pe || port == pf)
                    throw std::runtime_error(
                        "photon landing on occupied port " + port + " at tick " +
                        std::to_string(tick));
            }
        }
    }
}

void record_trace(Trace& trace, const PhotonState& state, int tick) {
    for (const auto& [mono, amp] : state.terms())
        for (const auto& [mode, count] : mono.factors())
            for (int k = 0; k < count; ++k)
                trace.records.push_back({tick, mode.site, mode.pol, amp});
    trace.norms.push_back({tick, state.norm()});
}

void apply_insertion(PhotonState& state, const Insertion& ins,
                     const SitePlan& plan, double& expected_norm) {
    for (PortRef p : ins.target_ports()) {
        const std::string site = plan.port_site(p);
        if (state_occupies_site(state, site))
            throw std::runtime_error("injection target port occupied: " + site);
    }
    PhotonState poly = insertion_poly(ins, plan);
    expected_norm *= poly.norm();
    state = state.times(poly);
}

void validate_insertions(const Topology& topo,
                         const std::vector<Insertion>& insertions,
                         int max_ticks) {
    std::set<std::pair<int, std::string>> claimed;  // (tick, port key)
    for (const Insertion& ins : insertions) {
        if (ins.unit < 0 || ins.unit >= topo.unit_count())
            throw std::invalid_argument("injection references unknown unit index " +
                                        std::to_string(ins.unit));
        if (ins.tick < 0 || ins.tick % 4 != 0)
            throw std::invalid_argument(
                "injections are allowed at hop ticks (multiples of 4) only");
        if (ins.tick > max_ticks)
            throw std::invalid_argument("injection tick exceeds the run length");
        for (PortRef p : ins.target_ports()) {
            if (!ins.tap && topo.is_linked(p))
                throw std::invalid_argument(
                    "injection targets a linked port (mark it as a tap): " +
                    topo.unit_name(p.unit) + "." + side_char(p.side) +
                    port_char(p.port));
            std::string key = std::to_string(p.unit) + ":" +
                              std::string(1, side_char(p.side)) + port_char(p.port);
            if (!claimed.insert({ins.tick, key}).second)
                throw std::invalid_argument(
                    "two injections claim the same port at tick " +
                    std::to_string(ins.tick));
        }
    }
}

}  // namespace

PhotonState step(const PhotonState& state, const SitePlan& plan,
                 const PhaseSchedule& sched, int tick) {
    std::set<std::string> armed;
    if (stage_of(tick) == Stage::Entry) armed = occupied_port_sites(state, plan);
    return apply_mode_map(state, stage_map(plan, sched, tick, armed));
}

SimResult simulate(const Topology& topo, const std::vector<Insertion>& insertions,
                   const PhaseSchedule& sched, int max_ticks) {
    if (max_ticks < 1) throw std::invalid_argument("run needs at least one tick");
    const SitePlan plan = SitePlan::build(topo);
    validate_insertions(topo, insertions, max_ticks);

    SimResult result;
    PhotonState state = PhotonState::vacuum();
    double expected_norm = 1.0;
    std::set<std::string> armed;  // ports populated at the previous tick

    auto insert_due = [&](int tick) {
        for (const Insertion& ins : insertions) {
            if (ins.tick != tick) continue;
            apply_insertion(state, ins, plan, expected_norm);
            for (PortRef p : ins.target_ports()) armed.insert(plan.port_site(p));
        }
    };

    insert_due(0);
    record_trace(result.trace, state, 0);

    for (int tick = 1; tick <= max_ticks; ++tick) {
        check_stage_consistency(state, plan, tick);
        if (stage_of(tick) == Stage::Exit) check_landing_collisions(state, plan, tick);

        state = apply_mode_map(state, stage_map(plan, sched, tick, armed));
        armed.clear();
        if (stage_of(tick) == Stage::Hop) insert_due(tick);

        const double norm = state.norm();
        if (std::abs(norm - expected_norm) > kNormDriftTol)
            throw std::runtime_error("norm drift at tick " + std::to_string(tick) +
                                     ": " + std::to_string(norm));
        record_trace(result.trace, state, tick);
    }
    result.final_state = canonicalize(state);
    return result;
}

std::map<BellKind, PhotonState> run_all_bell(const Topology& topo,
                                             const PhaseSchedule& sched,
                                             SideId side, int max_ticks) {
    std::map<BellKind, PhotonState> out;
    for (BellKind kind : {BellKind::PhiPlus, BellKind::PhiMinus, BellKind::PsiPlus,
                          BellKind::PsiMinus}) {
        SimResult r = simulate(topo, {Insertion::bell_pair(kind, 0, side, 0)},
                               sched, max_ticks);
        out[kind] = r.final_state;
    }
    return out;
}

}  // namespace dualrail
