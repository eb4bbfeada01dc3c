#include "dualrail/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace dualrail {

namespace {

[[noreturn]] void fail(int line_no, const std::string& msg) {
    throw std::invalid_argument("line " + std::to_string(line_no) + ": " + msg);
}

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

long parse_int(const std::string& tok, int line_no, const char* what) {
    char* end = nullptr;
    const long v = std::strtol(tok.c_str(), &end, 10);
    if (end == tok.c_str() || *end != '\0')
        fail(line_no, std::string("expected an integer ") + what + ", got '" + tok + "'");
    return v;
}

SideId parse_side(const std::string& tok, int line_no) {
    if (tok.size() == 1 && (tok[0] == 'L' || tok[0] == 'R'))
        return side_from_char(tok[0]);
    fail(line_no, "expected side L or R, got '" + tok + "'");
}

PortId parse_port(const std::string& tok, int line_no) {
    if (tok.size() == 1 && (tok[0] == 'e' || tok[0] == 'f'))
        return port_from_char(tok[0]);
    fail(line_no, "expected port e or f, got '" + tok + "'");
}

Pol parse_pol(char c, int line_no) {
    if (c == 'H') return Pol::H;
    if (c == 'V') return Pol::V;
    fail(line_no, std::string("expected polarization H or V, got '") + c + "'");
}

std::string port_label(const Topology& topo, PortRef p) {
    return topo.unit_name(p.unit) + "." + side_char(p.side) + port_char(p.port);
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
    Scenario s;
    bool saw_version = false, saw_id = false, saw_topology = false;
    bool saw_regime = false, saw_control = false, saw_max_ticks = false;
    bool saw_hop_cap = false, saw_seed = false;
    bool explicit_control = false;

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::vector<std::string> t = tokenize(raw);
        if (t.empty()) continue;
        const std::string& key = t[0];
        auto need = [&](size_t n) {
            if (t.size() != n)
                fail(line_no, "'" + key + "' expects " + std::to_string(n - 1) +
                                  " argument(s), got " + std::to_string(t.size() - 1));
        };
        auto once = [&](bool& seen) {
            if (seen) fail(line_no, "duplicate '" + key + "' line");
            seen = true;
        };
        if (key == "version") {
            need(2);
            once(saw_version);
            if (t[1] != "1") fail(line_no, "unsupported version '" + t[1] + "'");
            s.version = 1;
        } else if (key == "scenario_id") {
            need(2);
            once(saw_id);
            s.id = t[1];
        } else if (key == "topology") {
            need(3);
            once(saw_topology);
            if (t[1] != "layered") fail(line_no, "unknown topology kind '" + t[1] + "'");
            s.layered = true;
            s.layers = static_cast<int>(parse_int(t[2], line_no, "layer count"));
            if (s.layers < 1) fail(line_no, "layer count must be at least 1");
        } else if (key == "unit") {
            need(2);
            s.units.push_back(t[1]);
        } else if (key == "link") {
            need(7);
            Scenario::LinkSpec l;
            l.unit_a = t[1];
            l.side_a = parse_side(t[2], line_no);
            l.port_a = parse_port(t[3], line_no);
            l.unit_b = t[4];
            l.side_b = parse_side(t[5], line_no);
            l.port_b = parse_port(t[6], line_no);
            s.links.push_back(l);
        } else if (key == "insert") {
            if (t.size() < 2) fail(line_no, "'insert' expects a source kind");
            Scenario::InsertSpec ins;
            size_t tick_at = 0;
            if (t[1] == "bell") {
                if (t.size() != 7 && t.size() != 8)
                    fail(line_no, "'insert bell' expects: kind unit side tick <t> [tap]");
                ins.kind = Insertion::Kind::Bell;
                try {
                    ins.bell = bell_from_name(t[2]);
                } catch (const std::invalid_argument& e) {
                    fail(line_no, e.what());
                }
                ins.unit = t[3];
                ins.side = parse_side(t[4], line_no);
                tick_at = 5;
            } else if (t[1] == "product") {
                if (t.size() != 7 && t.size() != 8)
                    fail(line_no, "'insert product' expects: pols unit side tick <t> [tap]");
                ins.kind = Insertion::Kind::Product;
                if (t[2].size() != 2)
                    fail(line_no, "product polarizations must be two letters, e.g. HV");
                ins.pol0 = parse_pol(t[2][0], line_no);
                ins.pol1 = parse_pol(t[2][1], line_no);
                ins.unit = t[3];
                ins.side = parse_side(t[4], line_no);
                tick_at = 5;
            } else if (t[1] == "single") {
                if (t.size() != 8 && t.size() != 9)
                    fail(line_no, "'insert single' expects: pol unit side port tick <t> [tap]");
                ins.kind = Insertion::Kind::Single;
                if (t[2].size() != 1) fail(line_no, "single polarization must be H or V");
                ins.pol0 = ins.pol1 = parse_pol(t[2][0], line_no);
                ins.unit = t[3];
                ins.side = parse_side(t[4], line_no);
                ins.port = parse_port(t[5], line_no);
                tick_at = 6;
            } else {
                fail(line_no, "unknown source kind '" + t[1] + "'");
            }
            if (t[tick_at] != "tick") fail(line_no, "expected keyword 'tick'");
            ins.tick = static_cast<int>(parse_int(t[tick_at + 1], line_no, "tick"));
            if (ins.tick < 0) fail(line_no, "tick must be non-negative");
            if (t.size() == tick_at + 3) {
                if (t[tick_at + 2] != "tap")
                    fail(line_no, "unexpected trailing token '" + t[tick_at + 2] + "'");
                ins.tap = true;
            }
            s.inserts.push_back(ins);
        } else if (key == "regime") {
            need(2);
            once(saw_regime);
            if (t[1] == "passive")
                s.regime = Regime::Passive;
            else if (t[1] == "active")
                s.regime = Regime::Active;
            else
                fail(line_no, "regime must be passive or active");
        } else if (key == "control") {
            need(2);
            once(saw_control);
            explicit_control = true;
            if (t[1] == "schedule")
                s.control = Scenario::Control::Schedule;
            else if (t[1] == "targets")
                s.control = Scenario::Control::Targets;
            else
                fail(line_no, "control must be schedule or targets");
        } else if (key == "phase") {
            need(5);
            Scenario::PhaseSpec p;
            p.unit = t[1];
            p.side = parse_side(t[2], line_no);
            p.tick = t[3] == "*" ? -1
                                 : static_cast<int>(parse_int(t[3], line_no, "tick"));
            if (t[3] != "*" && p.tick < 0) fail(line_no, "phase tick must be non-negative");
            if (t[4] == "pi") {
                p.value = kPi;
            } else {
                char* end = nullptr;
                p.value = std::strtod(t[4].c_str(), &end);
                if (end == t[4].c_str() || *end != '\0')
                    fail(line_no, "expected a phase value or 'pi', got '" + t[4] + "'");
            }
            s.phases.push_back(p);
        } else if (key == "target") {
            need(4);
            Scenario::TargetSpec tg;
            tg.unit = t[1];
            tg.side = parse_side(t[2], line_no);
            tg.port = parse_port(t[3], line_no);
            s.targets.push_back(tg);
        } else if (key == "max_ticks") {
            need(2);
            once(saw_max_ticks);
            s.max_ticks = static_cast<int>(parse_int(t[1], line_no, "tick count"));
            if (s.max_ticks < 1) fail(line_no, "max_ticks must be at least 1");
        } else if (key == "hop_cap") {
            need(2);
            once(saw_hop_cap);
            s.hop_cap = static_cast<int>(parse_int(t[1], line_no, "hop cap"));
            if (s.hop_cap < 1) fail(line_no, "hop_cap must be at least 1");
        } else if (key == "seed") {
            need(2);
            once(saw_seed);
            const long v = parse_int(t[1], line_no, "seed");
            if (v < 0) fail(line_no, "seed must be non-negative");
            s.seed = static_cast<std::uint64_t>(v);
        } else {
            fail(line_no, "unknown directive '" + key + "'");
        }
    }

    if (!saw_version) throw std::invalid_argument("scenario is missing a version line");
    if (s.layered && (!s.units.empty() || !s.links.empty()))
        throw std::invalid_argument(
            "scenario mixes 'topology layered' with explicit unit/link lines");
    if (!s.layered && s.units.empty())
        throw std::invalid_argument("scenario defines no topology");
    if (!s.phases.empty() && !s.targets.empty())
        throw std::invalid_argument(
            "control section ambiguous: both phase and target lines present");
    if (explicit_control) {
        if (s.control == Scenario::Control::Schedule && !s.targets.empty())
            throw std::invalid_argument("control schedule excludes target lines");
        if (s.control == Scenario::Control::Targets && !s.phases.empty())
            throw std::invalid_argument("control targets excludes phase lines");
    } else {
        s.control = s.targets.empty() ? Scenario::Control::Schedule
                                      : Scenario::Control::Targets;
    }
    if (s.regime == Regime::Passive)
        for (const Scenario::PhaseSpec& p : s.phases)
            if (p.tick >= 0)
                throw std::invalid_argument(
                    "per-tick phase entries require the active regime");
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open scenario file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& s,
                               const std::vector<std::string>& header_comments) {
    std::ostringstream out;
    for (const std::string& c : header_comments) out << "# " << c << "\n";
    out << "version 1\n";
    out << "scenario_id " << s.id << "\n";
    if (s.layered) {
        out << "topology layered " << s.layers << "\n";
    } else {
        for (const std::string& u : s.units) out << "unit " << u << "\n";
        for (const Scenario::LinkSpec& l : s.links)
            out << "link " << l.unit_a << " " << side_char(l.side_a) << " "
                << port_char(l.port_a) << " " << l.unit_b << " "
                << side_char(l.side_b) << " " << port_char(l.port_b) << "\n";
    }
    for (const Scenario::InsertSpec& i : s.inserts) {
        out << "insert ";
        switch (i.kind) {
            case Insertion::Kind::Bell:
                out << "bell " << bell_name(i.bell) << " " << i.unit << " "
                    << side_char(i.side);
                break;
            case Insertion::Kind::Product:
                out << "product " << pol_char(i.pol0) << pol_char(i.pol1) << " "
                    << i.unit << " " << side_char(i.side);
                break;
            case Insertion::Kind::Single:
                out << "single " << pol_char(i.pol0) << " " << i.unit << " "
                    << side_char(i.side) << " " << port_char(i.port);
                break;
        }
        out << " tick " << i.tick;
        if (i.tap) out << " tap";
        out << "\n";
    }
    out << "regime " << (s.regime == Regime::Passive ? "passive" : "active") << "\n";
    out << "control "
        << (s.control == Scenario::Control::Targets ? "targets" : "schedule") << "\n";
    for (const Scenario::PhaseSpec& p : s.phases) {
        out << "phase " << p.unit << " " << side_char(p.side) << " ";
        if (p.tick < 0)
            out << "*";
        else
            out << p.tick;
        if (std::abs(p.value - kPi) <= kPhaseTol) {
            out << " pi\n";
        } else {
            char buf[40];
            std::snprintf(buf, sizeof buf, " %.17g\n", p.value);
            out << buf;
        }
    }
    for (const Scenario::TargetSpec& t : s.targets)
        out << "target " << t.unit << " " << side_char(t.side) << " "
            << port_char(t.port) << "\n";
    out << "max_ticks " << s.max_ticks << "\n";
    out << "hop_cap " << s.hop_cap << "\n";
    out << "seed " << s.seed << "\n";
    return out.str();
}

Topology make_topology(const Scenario& s) {
    if (s.layered) return Topology::layered_tree(s.layers);
    Topology topo;
    for (const std::string& u : s.units) topo.add_unit(u);
    for (const Scenario::LinkSpec& l : s.links) {
        const int a = topo.unit_index(l.unit_a);
        const int b = topo.unit_index(l.unit_b);
        if (a < 0) throw std::invalid_argument("link references unknown unit " + l.unit_a);
        if (b < 0) throw std::invalid_argument("link references unknown unit " + l.unit_b);
        topo.add_link({a, l.side_a, l.port_a}, {b, l.side_b, l.port_b});
    }
    const std::vector<std::string> errors = topo.validate();
    if (!errors.empty()) {
        std::string joined = "invalid topology:";
        for (const std::string& e : errors) joined += "\n  " + e;
        throw std::invalid_argument(joined);
    }
    return topo;
}

std::vector<Insertion> make_insertions(const Scenario& s, const Topology& topo) {
    std::vector<Insertion> out;
    for (const Scenario::InsertSpec& src : s.inserts) {
        const int unit = topo.unit_index(src.unit);
        if (unit < 0)
            throw std::invalid_argument("insert references unknown unit " + src.unit);
        switch (src.kind) {
            case Insertion::Kind::Bell:
                out.push_back(Insertion::bell_pair(src.bell, unit, src.side,
                                                   src.tick, src.tap));
                break;
            case Insertion::Kind::Product:
                out.push_back(Insertion::product_pair(src.pol0, src.pol1, unit,
                                                      src.side, src.tick, src.tap));
                break;
            case Insertion::Kind::Single:
                out.push_back(Insertion::single_photon(src.pol0, unit, src.side,
                                                       src.port, src.tick,
                                                       src.tap));
                break;
        }
    }
    return out;
}

PhaseSchedule make_schedule(const Scenario& s, const Topology& topo) {
    PhaseSchedule sched(s.regime);
    for (const Scenario::PhaseSpec& p : s.phases) {
        const int unit = topo.unit_index(p.unit);
        if (unit < 0)
            throw std::invalid_argument("phase references unknown unit " + p.unit);
        if (p.tick < 0)
            sched.set_wildcard(unit, p.side, p.value);
        else
            sched.set_at(unit, p.side, p.tick, p.value);
    }
    return sched;
}

std::vector<PortRef> make_targets(const Scenario& s, const Topology& topo) {
    std::vector<PortRef> out;
    for (const Scenario::TargetSpec& t : s.targets) {
        const int unit = topo.unit_index(t.unit);
        if (unit < 0)
            throw std::invalid_argument("target references unknown unit " + t.unit);
        out.push_back({unit, t.side, t.port});
    }
    return out;
}

std::string export_dot(const Topology& topo, const PlanResult* routes) {
    std::ostringstream out;
    out << "digraph network {\n";
    out << "  rankdir=LR;\n";
    out << "  node [shape=box, fontname=\"monospace\"];\n";
    for (int u = 0; u < topo.unit_count(); ++u) {
        std::string open;
        for (PortRef p : unit_ports(u)) {
            if (topo.is_linked(p)) continue;
            if (!open.empty()) open += " ";
            open += side_char(p.side);
            open += port_char(p.port);
        }
        out << "  \"" << topo.unit_name(u) << "\" [label=\"" << topo.unit_name(u);
        if (!open.empty()) out << "\\nopen: " << open;
        out << "\"];\n";
    }
    for (const Link& l : topo.links())
        out << "  \"" << topo.unit_name(l.a.unit) << "\" -> \""
            << topo.unit_name(l.b.unit) << "\" [dir=none, label=\""
            << side_char(l.a.side) << port_char(l.a.port) << "-"
            << side_char(l.b.side) << port_char(l.b.port) << "\"];\n";
    if (routes) {
        const char* colors[] = {"crimson", "royalblue", "darkgreen", "darkorange"};
        for (size_t i = 0; i < routes->photons.size(); ++i) {
            const RoutePlan& plan = routes->photons[i];
            const char* color = colors[i % 4];
            for (const TraversalRec& rec : plan.traversals) {
                const PortRef exit{rec.unit, rec.exit_side, rec.exit_port};
                if (!topo.is_linked(exit)) continue;
                const PortRef q = topo.peer(exit);
                out << "  \"" << topo.unit_name(rec.unit) << "\" -> \""
                    << topo.unit_name(q.unit) << "\" [color=" << color
                    << ", style=dashed, constraint=false, label=\"p" << i << " t"
                    << rec.entry_tick + 4 << "\"];\n";
            }
            out << "  \"" << topo.unit_name(plan.target.unit)
                << "\" [peripheries=2];\n";
        }
    }
    out << "}\n";
    return out.str();
}

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

int guard(const std::function<int()>& body) {
    try {
        return body();
    } catch (const UnreachableError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}

std::vector<std::string> route_comments(const Topology& topo,
                                        const PlanResult& result) {
    std::vector<std::string> lines;
    for (size_t i = 0; i < result.photons.size(); ++i) {
        const RoutePlan& plan = result.photons[i];
        lines.push_back("photon " + std::to_string(i) + " target " +
                        port_label(topo, plan.target) + " arrival tick " +
                        std::to_string(plan.arrival_tick));
        for (const TraversalRec& rec : plan.traversals) {
            const std::string entry = topo.unit_name(rec.unit) + "." +
                                      side_char(rec.entry_side) +
                                      port_char(rec.entry_port);
            const std::string exit = topo.unit_name(rec.unit) + "." +
                                     side_char(rec.exit_side) +
                                     port_char(rec.exit_port);
            lines.push_back(
                "  tick " + std::to_string(rec.entry_tick) + ": " + entry +
                (rec.outcome == McuOutcome::Transmit ? " =transmit=> " : " =reflect=> ") +
                exit);
        }
    }
    return lines;
}

}  // namespace

int cmd_simulate(const std::string& scenario_path, const std::string& trace_path,
                 const std::string& report_path,
                 std::optional<int> max_ticks_override) {
    return guard([&]() {
        Scenario sc = load_scenario(scenario_path);
        if (max_ticks_override) sc.max_ticks = *max_ticks_override;
        const Topology topo = make_topology(sc);
        const std::vector<Insertion> insertions = make_insertions(sc, topo);
        PhaseSchedule sched(sc.regime);
        int max_ticks = sc.max_ticks;
        if (sc.control == Scenario::Control::Targets) {
            if (insertions.size() != 1)
                throw std::invalid_argument(
                    "target-controlled runs need exactly one insert line");
            const PlanResult planned = plan(topo, insertions[0],
                                            make_targets(sc, topo), sc.regime,
                                            sc.hop_cap);
            sched = planned.schedule;
            for (const RoutePlan& p : planned.photons)
                max_ticks = std::max(max_ticks, p.arrival_tick + 1);
        } else {
            sched = make_schedule(sc, topo);
        }
        const SimResult result = simulate(topo, insertions, sched, max_ticks);
        const std::string report = make_report(sc.id, topo, insertions, result);
        if (!trace_path.empty()) write_file(trace_path, result.trace.to_file_string());
        if (!report_path.empty()) write_file(report_path, report);
        std::fputs(report.c_str(), stdout);
        return 0;
    });
}

int cmd_plan(const std::string& scenario_path, const std::string& out_path,
             std::optional<int> hop_cap_override) {
    return guard([&]() {
        Scenario sc = load_scenario(scenario_path);
        if (hop_cap_override) sc.hop_cap = *hop_cap_override;
        if (sc.control != Scenario::Control::Targets)
            throw std::invalid_argument("planning needs a scenario with target lines");
        const Topology topo = make_topology(sc);
        const std::vector<Insertion> insertions = make_insertions(sc, topo);
        if (insertions.size() != 1)
            throw std::invalid_argument("planning needs exactly one insert line");
        const PlanResult result = plan(topo, insertions[0], make_targets(sc, topo),
                                       sc.regime, sc.hop_cap);

        Scenario replay = sc;
        replay.control = Scenario::Control::Schedule;
        replay.targets.clear();
        replay.phases.clear();
        for (const auto& [key, value] : result.schedule.entries()) {
            const auto& [unit, side, tick] = key;
            replay.phases.push_back({topo.unit_name(unit),
                                     static_cast<SideId>(side), tick, value});
        }
        for (const RoutePlan& p : result.photons)
            replay.max_ticks = std::max(replay.max_ticks, p.arrival_tick + 1);

        const std::vector<std::string> comments = route_comments(topo, result);
        const std::string text = serialize_scenario(replay, comments);
        for (const std::string& line : comments) std::printf("%s\n", line.c_str());
        if (out_path.empty())
            std::fputs(text.c_str(), stdout);
        else
            write_file(out_path, text);
        return 0;
    });
}

int cmd_reach(const std::string& scenario_path,
              std::optional<int> hop_cap_override) {
    return guard([&]() {
        Scenario sc = load_scenario(scenario_path);
        if (hop_cap_override) sc.hop_cap = *hop_cap_override;
        const Topology topo = make_topology(sc);
        const std::vector<Insertion> insertions = make_insertions(sc, topo);
        if (insertions.empty())
            throw std::invalid_argument("reachability needs at least one insert line");
        for (size_t i = 0; i < insertions.size(); ++i) {
            for (Regime regime : {Regime::Passive, Regime::Active}) {
                const std::set<PortRef> exits =
                    reachable_exits(topo, insertions[i], regime, sc.hop_cap);
                std::printf("insert %zu %s %zu:", i,
                            regime == Regime::Passive ? "passive" : "active",
                            exits.size());
                for (PortRef p : exits)
                    std::printf(" %s", port_label(topo, p).c_str());
                std::printf("\n");
            }
        }
        return 0;
    });
}

int cmd_oracle_check(std::uint64_t seed, int trials) {
    return guard([&]() {
        const OracleCheckOutcome out = oracle_check(seed, trials);
        std::printf(
            "requested %d completed %d skipped %d max_amp_dev %.3g max_norm_dev %.3g\n",
            out.requested, out.completed, out.skipped, out.max_amp_dev,
            out.max_norm_dev);
        const bool ok = out.completed > 0 && out.max_amp_dev < kCompareTol &&
                        out.max_norm_dev < kCompareTol;
        return ok ? 0 : 3;
    });
}

int cmd_export_dot(const std::string& scenario_path, const std::string& out_path) {
    return guard([&]() {
        Scenario sc = load_scenario(scenario_path);
        const Topology topo = make_topology(sc);
        std::string dot;
        if (sc.control == Scenario::Control::Targets && sc.inserts.size() == 1) {
            const std::vector<Insertion> insertions = make_insertions(sc, topo);
            const PlanResult result = plan(topo, insertions[0],
                                           make_targets(sc, topo), sc.regime,
                                           sc.hop_cap);
            dot = export_dot(topo, &result);
        } else {
            dot = export_dot(topo);
        }
        if (out_path.empty())
            std::fputs(dot.c_str(), stdout);
        else
            write_file(out_path, dot);
        return 0;
    });
}

}  // namespace dualrail
