#include "dualrail/topology.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace dualrail {

std::vector<PortRef> unit_ports(int unit) {
    return {{unit, SideId::Left, PortId::e},
            {unit, SideId::Left, PortId::f},
            {unit, SideId::Right, PortId::e},
            {unit, SideId::Right, PortId::f}};
}

int Topology::add_unit(const std::string& name) {
    if (name.empty()) throw std::invalid_argument("unit name must not be empty");
    for (char c : name)
        if (c == '.' || c == '>' || std::isspace(static_cast<unsigned char>(c)))
            throw std::invalid_argument("unit name contains reserved character: " + name);
    if (index_.count(name)) throw std::invalid_argument("duplicate unit name: " + name);
    int idx = static_cast<int>(names_.size());
    names_.push_back(name);
    index_[name] = idx;
    return idx;
}

const std::string& Topology::unit_name(int u) const {
    if (u < 0 || u >= unit_count()) throw std::out_of_range("unit index out of range");
    return names_[u];
}

int Topology::unit_index(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? -1 : it->second;
}

void Topology::add_link(PortRef a, PortRef b) { links_.push_back({a, b}); }

std::vector<std::string> Topology::validate() const {
    std::vector<std::string> errors;
    auto port_str = [this](PortRef p) {
        std::string s = (p.unit >= 0 && p.unit < unit_count()) ? names_[p.unit]
                                                               : "#" + std::to_string(p.unit);
        return s + "." + side_char(p.side) + port_char(p.port);
    };
    std::map<PortRef, int> uses;
    for (const Link& l : links_) {
        for (PortRef p : {l.a, l.b}) {
            if (p.unit < 0 || p.unit >= unit_count())
                errors.push_back("link endpoint references unknown unit: " + port_str(p));
            ++uses[p];
        }
        if (l.a.unit == l.b.unit && l.a.side == l.b.side)
            errors.push_back("link joins two ports on the same side of " + port_str(l.a));
    }
    for (const auto& [p, n] : uses)
        if (n > 1) errors.push_back("port carries more than one link: " + port_str(p));
    return errors;
}

int Topology::link_index_at(PortRef p) const {
    for (size_t i = 0; i < links_.size(); ++i)
        if (links_[i].a == p || links_[i].b == p) return static_cast<int>(i);
    return -1;
}

PortRef Topology::peer(PortRef p) const {
    int li = link_index_at(p);
    if (li < 0) throw std::invalid_argument("port is not linked");
    const Link& l = links_[li];
    return l.a == p ? l.b : l.a;
}

std::vector<PortRef> Topology::free_ports() const {
    std::vector<PortRef> out;
    for (int u = 0; u < unit_count(); ++u)
        for (PortRef p : unit_ports(u))
            if (!is_linked(p)) out.push_back(p);
    std::sort(out.begin(), out.end());
    return out;
}

Topology Topology::layered_tree(int layers) {
    if (layers < 1) throw std::invalid_argument("layered tree needs at least one layer");
    Topology t;
    t.add_unit("n0");
    std::vector<int> frontier = {0};
    for (int layer = 2; layer <= layers; ++layer) {
        std::vector<int> next;
        for (int u : frontier) {
            for (PortRef p : unit_ports(u)) {
                if (t.is_linked(p)) continue;
                int child = t.add_unit("n" + std::to_string(t.unit_count()));
                t.add_link(p, {child, other_side(p.side), PortId::e});
                next.push_back(child);
            }
        }
        frontier = std::move(next);
    }
    return t;
}

char rail_char(RailId r) { return static_cast<char>('a' + static_cast<int>(r)); }

SideId rail_side(RailId r) {
    return (r == RailId::a || r == RailId::b) ? SideId::Left : SideId::Right;
}

RailId upper_rail(SideId s) { return s == SideId::Left ? RailId::a : RailId::c; }
RailId lower_rail(SideId s) { return s == SideId::Left ? RailId::b : RailId::d; }

SitePlan SitePlan::build(const Topology& topo) {
    std::vector<std::string> errors = topo.validate();
    if (!errors.empty()) {
        std::string joined = "invalid topology:";
        for (const std::string& e : errors) joined += "\n  " + e;
        throw std::invalid_argument(joined);
    }
    SitePlan plan;
    plan.topo_ = topo;
    auto put = [&plan](const std::string& site, const SiteInfo& info) {
        plan.sites_.push_back(site);
        plan.info_[site] = info;
    };
    for (int u = 0; u < topo.unit_count(); ++u) {
        for (PortRef p : unit_ports(u)) {
            SiteInfo info;
            info.kind = SiteInfo::Kind::Port;
            info.unit = u;
            info.side = p.side;
            info.port = p.port;
            info.free_port = !topo.is_linked(p);
            put(plan.port_site(p), info);
        }
        for (RailId r : {RailId::a, RailId::b, RailId::c, RailId::d}) {
            SiteInfo info;
            info.kind = SiteInfo::Kind::Rail;
            info.unit = u;
            info.side = rail_side(r);
            info.rail = r;
            put(plan.rail_site(u, r), info);
        }
    }
    for (size_t li = 0; li < topo.links().size(); ++li) {
        for (bool toward_b : {false, true}) {
            SiteInfo info;
            info.kind = SiteInfo::Kind::Slot;
            info.link = static_cast<int>(li);
            info.toward_b = toward_b;
            put(plan.slot_site(static_cast<int>(li), toward_b), info);
        }
    }
    return plan;
}

std::string SitePlan::port_site(PortRef p) const {
    return topo_.unit_name(p.unit) + "." + side_char(p.side) + port_char(p.port);
}

std::string SitePlan::rail_site(int unit, RailId r) const {
    return topo_.unit_name(unit) + "." + rail_char(r);
}

std::string SitePlan::slot_site(int link, bool toward_b) const {
    const Link& l = topo_.links().at(link);
    const PortRef& from = toward_b ? l.a : l.b;
    const PortRef& to = toward_b ? l.b : l.a;
    return port_site(from) + ">" + port_site(to);
}

std::string SitePlan::out_slot_site(PortRef p) const {
    int li = topo_.link_index_at(p);
    if (li < 0) throw std::invalid_argument("port is not linked: " + port_site(p));
    return slot_site(li, topo_.links()[li].a == p);
}

std::string SitePlan::in_slot_site(PortRef p) const {
    int li = topo_.link_index_at(p);
    if (li < 0) throw std::invalid_argument("port is not linked: " + port_site(p));
    return slot_site(li, topo_.links()[li].b == p);
}

const SiteInfo& SitePlan::info(const std::string& site) const {
    auto it = info_.find(site);
    if (it == info_.end()) throw std::invalid_argument("unknown site: " + site);
    return it->second;
}

bool SitePlan::is_free_port_site(const std::string& site) const {
    auto it = info_.find(site);
    return it != info_.end() && it->second.kind == SiteInfo::Kind::Port &&
           it->second.free_port;
}

SitePlan build_site_plan(const Topology& topo) { return SitePlan::build(topo); }

}  // namespace dualrail
