#include "dualrail/planner.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <optional>

namespace dualrail {

namespace {

struct EntryState {
    int unit = -1;
    SideId side = SideId::Left;
    PortId port = PortId::e;

    friend bool operator==(const EntryState&, const EntryState&) = default;
    friend auto operator<=>(const EntryState&, const EntryState&) = default;
};

std::string port_label(const Topology& topo, PortRef p) {
    return topo.unit_name(p.unit) + "." + side_char(p.side) + port_char(p.port);
}

// Shifter value a traversal needs on its entry side: transmit wants the
// symmetric rail combination, which port e only reaches with a flip.
bool entry_bit_pi(const TraversalRec& r) {
    return r.outcome == McuOutcome::Transmit ? r.entry_port == PortId::e
                                             : r.entry_port == PortId::f;
}

// Shifter value on the exit side steering the landing port.
bool exit_bit_pi(const TraversalRec& r) {
    return r.outcome == McuOutcome::Transmit ? r.exit_port == PortId::e
                                             : r.exit_port == PortId::f;
}

TraversalRec make_rec(const EntryState& in, SideId exit_side, PortId exit_port) {
    TraversalRec rec;
    rec.unit = in.unit;
    rec.entry_side = in.side;
    rec.entry_port = in.port;
    rec.outcome = exit_side == in.side ? McuOutcome::Reflect : McuOutcome::Transmit;
    rec.exit_side = exit_side;
    rec.exit_port = exit_port;
    return rec;
}

// ---------- active regime: every exit choice is independently drivable ----------

std::optional<std::vector<TraversalRec>> active_route(const Topology& topo,
                                                      EntryState start,
                                                      PortRef target, int cap) {
    if (cap < 1) return std::nullopt;
    std::map<EntryState, std::pair<EntryState, TraversalRec>> parent;
    std::map<EntryState, int> depth{{start, 0}};
    std::deque<EntryState> queue{start};
    while (!queue.empty()) {
        EntryState cur = queue.front();
        queue.pop_front();
        const int d = depth.at(cur);
        for (SideId es : {SideId::Left, SideId::Right}) {
            for (PortId ep : {PortId::e, PortId::f}) {
                const PortRef exit{cur.unit, es, ep};
                const TraversalRec rec = make_rec(cur, es, ep);
                if (exit == target) {
                    std::vector<TraversalRec> recs{rec};
                    for (EntryState s = cur; !(s == start);) {
                        const auto& [prev, prev_rec] = parent.at(s);
                        recs.push_back(prev_rec);
                        s = prev;
                    }
                    std::reverse(recs.begin(), recs.end());
                    return recs;
                }
                if (!topo.is_linked(exit)) continue;
                const PortRef q = topo.peer(exit);
                const EntryState next{q.unit, q.side, q.port};
                if (depth.count(next) || d + 2 > cap) continue;
                depth[next] = d + 1;
                parent[next] = {cur, rec};
                queue.push_back(next);
            }
        }
    }
    return std::nullopt;
}

void active_flood(const Topology& topo, EntryState start, int cap,
                  std::set<PortRef>& out) {
    if (cap < 1) return;
    std::map<EntryState, int> depth{{start, 0}};
    std::deque<EntryState> queue{start};
    while (!queue.empty()) {
        EntryState cur = queue.front();
        queue.pop_front();
        const int d = depth.at(cur);
        for (SideId es : {SideId::Left, SideId::Right}) {
            for (PortId ep : {PortId::e, PortId::f}) {
                const PortRef exit{cur.unit, es, ep};
                if (!topo.is_linked(exit)) {
                    out.insert(exit);
                    continue;
                }
                const PortRef q = topo.peer(exit);
                const EntryState next{q.unit, q.side, q.port};
                if (depth.count(next) || d + 2 > cap) continue;
                depth[next] = d + 1;
                queue.push_back(next);
            }
        }
    }
}

// ---------- passive regime: one fixed bit per (unit, side) ----------

using Bindings = std::map<std::pair<int, int>, bool>;  // (unit, side) -> pi?

struct PassiveMove {
    TraversalRec rec;
    Bindings bindings;
};

// All traversals leaving one entry state that are consistent with the given
// bindings, extending them as needed.  Reflection with a fixed shifter always
// returns the photon through the port it entered; transmission lands on the
// far port selected by the far side's bit.
std::vector<PassiveMove> passive_moves(const EntryState& in, const Bindings& b) {
    std::vector<PassiveMove> out;
    for (bool pi : {false, true}) {
        auto it = b.find({in.unit, static_cast<int>(in.side)});
        if (it != b.end() && it->second != pi) continue;
        Bindings b1 = b;
        b1[{in.unit, static_cast<int>(in.side)}] = pi;
        const bool reflect = (in.port == PortId::e) ? !pi : pi;
        if (reflect) {
            out.push_back({make_rec(in, in.side, in.port), std::move(b1)});
            continue;
        }
        const SideId far = other_side(in.side);
        for (bool far_pi : {false, true}) {
            auto it2 = b1.find({in.unit, static_cast<int>(far)});
            if (it2 != b1.end() && it2->second != far_pi) continue;
            Bindings b2 = b1;
            b2[{in.unit, static_cast<int>(far)}] = far_pi;
            out.push_back(
                {make_rec(in, far, far_pi ? PortId::e : PortId::f), std::move(b2)});
        }
    }
    return out;
}

// Depth-first enumeration of loop-free routes of at most `remaining`
// traversals ending on `target`.  Invokes cb on each complete route; a true
// return stops the enumeration.  Routes revisiting an entry state are
// skipped: the loop only adds bindings, so a loop-free variant always works.
bool passive_enum(
    const Topology& topo, const EntryState& cur, PortRef target, int remaining,
    const Bindings& bindings, std::vector<EntryState>& path,
    std::vector<TraversalRec>& prefix,
    const std::function<bool(const std::vector<TraversalRec>&, const Bindings&)>& cb) {
    if (remaining < 1) return false;
    if (std::find(path.begin(), path.end(), cur) != path.end()) return false;
    path.push_back(cur);
    for (const PassiveMove& mv : passive_moves(cur, bindings)) {
        const PortRef exit{mv.rec.unit, mv.rec.exit_side, mv.rec.exit_port};
        prefix.push_back(mv.rec);
        if (exit == target) {
            if (cb(prefix, mv.bindings)) {
                prefix.pop_back();
                path.pop_back();
                return true;
            }
        } else if (topo.is_linked(exit)) {
            const PortRef q = topo.peer(exit);
            if (passive_enum(topo, {q.unit, q.side, q.port}, target, remaining - 1,
                             mv.bindings, path, prefix, cb)) {
                prefix.pop_back();
                path.pop_back();
                return true;
            }
        }
        prefix.pop_back();
    }
    path.pop_back();
    return false;
}

struct PassiveRoute {
    std::vector<TraversalRec> recs;
    Bindings bindings;
};

// Shortest passive route via iterative deepening; deterministic branch order.
std::optional<PassiveRoute> passive_route(const Topology& topo,
                                          const EntryState& start, PortRef target,
                                          const Bindings& initial, int cap) {
    for (int d = 1; d <= cap; ++d) {
        std::optional<PassiveRoute> found;
        std::vector<EntryState> path;
        std::vector<TraversalRec> prefix;
        passive_enum(topo, start, target, d, initial, path, prefix,
                     [&](const std::vector<TraversalRec>& recs, const Bindings& b) {
                         found = PassiveRoute{recs, b};
                         return true;
                     });
        if (found) return found;
    }
    return std::nullopt;
}

void passive_flood(const Topology& topo, const EntryState& cur, int remaining,
                   const Bindings& bindings, std::vector<EntryState>& path,
                   std::set<PortRef>& out) {
    if (remaining < 1) return;
    if (std::find(path.begin(), path.end(), cur) != path.end()) return;
    path.push_back(cur);
    for (const PassiveMove& mv : passive_moves(cur, bindings)) {
        const PortRef exit{mv.rec.unit, mv.rec.exit_side, mv.rec.exit_port};
        if (!topo.is_linked(exit)) {
            out.insert(exit);
            continue;
        }
        const PortRef q = topo.peer(exit);
        passive_flood(topo, {q.unit, q.side, q.port}, remaining - 1, mv.bindings,
                      path, out);
    }
    path.pop_back();
}

std::vector<EntryState> insertion_entries(const Insertion& ins) {
    std::vector<EntryState> out;
    for (PortRef p : ins.target_ports()) out.push_back({p.unit, p.side, p.port});
    return out;
}

void stamp_ticks(RoutePlan& plan, int first_entry_tick) {
    int tick = first_entry_tick;
    for (TraversalRec& rec : plan.traversals) {
        rec.entry_tick = tick;
        tick += 4;
    }
    plan.arrival_tick =
        plan.traversals.empty() ? first_entry_tick : tick - 4 + 3;
}

// Resource usages of a route for collision checks: the entry-side shifter one
// tick after entering, the exit-side shifter three ticks after, and the
// outgoing link four ticks after when the exit continues into a fiber.
// Encoded (kind, id1, id2, tick) with kind 0 = shifter, 1 = link.
std::set<std::tuple<int, int, int, int>> resource_uses(const Topology& topo,
                                                       const RoutePlan& plan,
                                                       bool skip_first) {
    std::set<std::tuple<int, int, int, int>> out;
    for (size_t k = skip_first ? 1 : 0; k < plan.traversals.size(); ++k) {
        const TraversalRec& r = plan.traversals[k];
        out.insert({0, r.unit, static_cast<int>(r.entry_side), r.entry_tick + 1});
        out.insert({0, r.unit, static_cast<int>(r.exit_side), r.entry_tick + 3});
        const int li = topo.link_index_at({r.unit, r.exit_side, r.exit_port});
        if (li >= 0) out.insert({1, li, 0, r.entry_tick + 4});
    }
    return out;
}

}  // namespace

UnreachableError::UnreachableError(PortRef target, const std::string& why)
    : std::runtime_error(why), target_(target) {}

std::set<PortRef> reachable_exits(const Topology& topo, const Insertion& ins,
                                  Regime regime, int hop_cap) {
    if (ins.unit < 0 || ins.unit >= topo.unit_count())
        throw std::invalid_argument("injection references unknown unit index " +
                                    std::to_string(ins.unit));
    std::set<PortRef> out;
    for (const EntryState& start : insertion_entries(ins)) {
        if (regime == Regime::Active) {
            active_flood(topo, start, hop_cap, out);
        } else {
            std::vector<EntryState> path;
            passive_flood(topo, start, hop_cap, {}, path, out);
        }
    }
    return out;
}

RoutePlan deconflict(const Topology& topo, const RoutePlan& fixed,
                     RoutePlan follower) {
    const bool exempt_first =
        fixed.joint_first && follower.joint_first &&
        !fixed.traversals.empty() && !follower.traversals.empty() &&
        fixed.traversals[0].unit == follower.traversals[0].unit &&
        fixed.traversals[0].entry_tick == follower.traversals[0].entry_tick;
    const auto fixed_uses = resource_uses(topo, fixed, false);
    int delay = 0;
    for (;;) {
        // Earliest traversal of the follower touching a resource of the
        // fixed route at the same tick.
        int conflict_at = -1;
        for (size_t k = exempt_first ? 1 : 0;
             k < follower.traversals.size() && conflict_at < 0; ++k) {
            RoutePlan one;
            one.traversals = {follower.traversals[k]};
            for (const auto& use : resource_uses(topo, one, false))
                if (fixed_uses.count(use)) {
                    conflict_at = static_cast<int>(k);
                    break;
                }
        }
        if (conflict_at < 0) break;
        if (delay + 8 > kDeconflictDelayCap)
            throw std::runtime_error("collision resolution exceeded the delay cap");
        if (conflict_at == 0 && follower.joint_first)
            throw std::runtime_error("cannot delay the shared source crossing");

        // Detour: cross toward the lowest-numbered neighbour, bounce off it,
        // and re-run the disputed traversal eight ticks later.
        const TraversalRec rec = follower.traversals[conflict_at];
        PortRef via{-1, SideId::Left, PortId::e};
        int best_neighbor = -1;
        for (PortRef p : unit_ports(rec.unit)) {
            if (!topo.is_linked(p)) continue;
            const int n = topo.peer(p).unit;
            if (best_neighbor < 0 || n < best_neighbor) {
                best_neighbor = n;
                via = p;
            }
        }
        if (best_neighbor < 0)
            throw std::runtime_error("no neighbour available for a detour");
        const PortRef back = topo.peer(via);

        TraversalRec out_rec = make_rec({rec.unit, rec.entry_side, rec.entry_port},
                                        via.side, via.port);
        out_rec.entry_tick = rec.entry_tick;
        TraversalRec bounce = make_rec({back.unit, back.side, back.port},
                                       back.side, back.port);
        bounce.entry_tick = rec.entry_tick + 4;
        TraversalRec redo = make_rec({rec.unit, via.side, via.port},
                                     rec.exit_side, rec.exit_port);
        redo.entry_tick = rec.entry_tick + 8;

        std::vector<TraversalRec> patched;
        for (int k = 0; k < conflict_at; ++k)
            patched.push_back(follower.traversals[k]);
        patched.push_back(out_rec);
        patched.push_back(bounce);
        patched.push_back(redo);
        for (size_t k = conflict_at + 1; k < follower.traversals.size(); ++k) {
            TraversalRec shifted = follower.traversals[k];
            shifted.entry_tick += 8;
            patched.push_back(shifted);
        }
        follower.traversals = std::move(patched);
        delay += 8;
    }
    if (!follower.traversals.empty())
        follower.arrival_tick = follower.traversals.back().entry_tick + 3;
    return follower;
}

PhaseSchedule schedule_from_plans(Regime regime,
                                  const std::vector<RoutePlan>& plans) {
    PhaseSchedule sched(regime);
    std::map<std::tuple<int, int, int>, bool> required;  // (unit, side, tick|-1)
    auto demand = [&](int unit, SideId side, int tick, bool pi) {
        const std::tuple<int, int, int> key{
            unit, static_cast<int>(side), regime == Regime::Active ? tick : -1};
        auto [it, inserted] = required.try_emplace(key, pi);
        if (!inserted && it->second != pi)
            throw std::runtime_error("routes demand conflicting shifter settings");
    };
    for (const RoutePlan& plan : plans) {
        for (const TraversalRec& rec : plan.traversals) {
            demand(rec.unit, rec.entry_side, rec.entry_tick + 1, entry_bit_pi(rec));
            demand(rec.unit, rec.exit_side, rec.entry_tick + 3, exit_bit_pi(rec));
        }
    }
    for (const auto& [key, pi] : required) {
        if (!pi) continue;  // 0 is the lookup default
        const auto& [unit, side, tick] = key;
        if (regime == Regime::Active)
            sched.set_at(unit, static_cast<SideId>(side), tick, kPi);
        else
            sched.set_wildcard(unit, static_cast<SideId>(side), kPi);
    }
    return sched;
}

PlanResult plan(const Topology& topo, const Insertion& ins,
                const std::vector<PortRef>& targets, Regime regime, int hop_cap) {
    const SitePlan site_plan = SitePlan::build(topo);  // validates the topology
    const std::vector<EntryState> entries = insertion_entries(ins);
    if (targets.size() != entries.size())
        throw std::invalid_argument("need exactly one target per injected photon");
    for (PortRef t : targets) {
        if (t.unit < 0 || t.unit >= topo.unit_count())
            throw std::invalid_argument("target references an unknown unit");
        if (topo.is_linked(t))
            throw UnreachableError(t, "target port " + port_label(topo, t) +
                                          " is linked, not an exit");
    }
    if (targets.size() == 2 && targets[0] == targets[1])
        throw std::invalid_argument("pair targets must be two distinct ports");

    PlanResult result;
    if (entries.size() == 1) {
        std::vector<TraversalRec> recs;
        if (regime == Regime::Active) {
            auto found = active_route(topo, entries[0], targets[0], hop_cap);
            if (!found)
                throw UnreachableError(targets[0],
                                       "no route to " + port_label(topo, targets[0]) +
                                           " under per-tick control");
            recs = std::move(*found);
        } else {
            auto found = passive_route(topo, entries[0], targets[0], {}, hop_cap);
            if (!found)
                throw UnreachableError(targets[0],
                                       "no route to " + port_label(topo, targets[0]) +
                                           " under fixed settings");
            recs = std::move(found->recs);
        }
        RoutePlan route;
        route.traversals = std::move(recs);
        route.target = targets[0];
        stamp_ticks(route, ins.tick);
        result.photons.push_back(std::move(route));
    } else if (regime == Regime::Active) {
        // The first crossing is shared: with the common entry shifter at its
        // default, the photon on port e reflects and the one on port f
        // transmits.  Enumerate their first exit ports and the photon-target
        // assignment; keep the cheapest pairing.
        std::optional<std::pair<RoutePlan, RoutePlan>> best;
        size_t best_total = 0;
        for (int assign = 0; assign < 2; ++assign) {
            const PortRef t0 = targets[assign];
            const PortRef t1 = targets[1 - assign];
            for (PortId p0 : {PortId::e, PortId::f}) {
                for (PortId p1 : {PortId::e, PortId::f}) {
                    const EntryState src = entries[0];
                    TraversalRec rec0 = make_rec(entries[0], src.side, p0);
                    TraversalRec rec1 = make_rec(entries[1], other_side(src.side), p1);
                    auto extend = [&](const TraversalRec& first, PortRef target)
                        -> std::optional<std::vector<TraversalRec>> {
                        const PortRef exit{first.unit, first.exit_side,
                                           first.exit_port};
                        std::vector<TraversalRec> recs{first};
                        if (exit == target) return recs;
                        if (!topo.is_linked(exit)) return std::nullopt;
                        const PortRef q = topo.peer(exit);
                        auto rest = active_route(topo, {q.unit, q.side, q.port},
                                                 target, hop_cap - 1);
                        if (!rest) return std::nullopt;
                        recs.insert(recs.end(), rest->begin(), rest->end());
                        return recs;
                    };
                    auto r0 = extend(rec0, t0);
                    auto r1 = extend(rec1, t1);
                    if (!r0 || !r1) continue;
                    const size_t total = r0->size() + r1->size();
                    if (best && total >= best_total) continue;
                    RoutePlan plan0, plan1;
                    plan0.traversals = std::move(*r0);
                    plan0.joint_first = true;
                    plan0.target = t0;
                    plan1.traversals = std::move(*r1);
                    plan1.joint_first = true;
                    plan1.target = t1;
                    best = {std::move(plan0), std::move(plan1)};
                    best_total = total;
                }
            }
        }
        if (!best)
            throw UnreachableError(targets[0],
                                   "no joint routing delivers both targets under "
                                   "per-tick control");
        stamp_ticks(best->first, ins.tick);
        stamp_ticks(best->second, ins.tick);
        best->second = deconflict(topo, best->first, best->second);
        result.photons.push_back(std::move(best->first));
        result.photons.push_back(std::move(best->second));
    } else {
        // Passive pair: one shared bit decides which photon reflects; search
        // both photons against one growing set of bindings, cheapest total.
        std::optional<std::pair<RoutePlan, RoutePlan>> best;
        for (int total_cap = 2; total_cap <= 2 * hop_cap && !best; ++total_cap) {
            for (int assign = 0; assign < 2 && !best; ++assign) {
                const PortRef t0 = targets[assign];
                const PortRef t1 = targets[1 - assign];
                for (bool src_pi : {false, true}) {
                    if (best) break;
                    Bindings seed{
                        {{entries[0].unit, static_cast<int>(entries[0].side)}, src_pi}};
                    std::vector<EntryState> path;
                    std::vector<TraversalRec> prefix;
                    passive_enum(
                        topo, entries[0], t0,
                        std::min(total_cap - 1, hop_cap), seed, path, prefix,
                        [&](const std::vector<TraversalRec>& r0, const Bindings& b0) {
                            const int rem = std::min(
                                total_cap - static_cast<int>(r0.size()), hop_cap);
                            auto r1 = passive_route(topo, entries[1], t1, b0, rem);
                            if (!r1) return false;
                            RoutePlan plan0, plan1;
                            plan0.traversals = r0;
                            plan0.joint_first = true;
                            plan0.target = t0;
                            plan1.traversals = std::move(r1->recs);
                            plan1.joint_first = true;
                            plan1.target = t1;
                            best = {std::move(plan0), std::move(plan1)};
                            return true;
                        });
                }
            }
        }
        if (!best)
            throw UnreachableError(
                targets[0], "no fixed-setting routing delivers both targets");
        stamp_ticks(best->first, ins.tick);
        stamp_ticks(best->second, ins.tick);
        result.photons.push_back(std::move(best->first));
        result.photons.push_back(std::move(best->second));
    }

    (void)site_plan;
    result.schedule = schedule_from_plans(regime, result.photons);
    return result;
}

}  // namespace dualrail
