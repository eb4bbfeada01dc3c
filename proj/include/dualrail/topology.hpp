#pragma once
/*
 * Network description (units, ports, links) and the derived site plan: the
 * flat set of mode-site labels the simulator evolves (four edge ports and
 * four internal rails per unit, plus one directed slot per link direction).
 */

#include <map>
#include <string>
#include <vector>

#include "dualrail/elements.hpp"

namespace dualrail {

struct PortRef {
    int unit = -1;
    SideId side = SideId::Left;
    PortId port = PortId::e;

    friend bool operator==(const PortRef&, const PortRef&) = default;
    friend auto operator<=>(const PortRef&, const PortRef&) = default;
};

struct Link {
    PortRef a;
    PortRef b;
};

// The four ports of a unit in canonical order: Le, Lf, Re, Rf.
std::vector<PortRef> unit_ports(int unit);

class Topology {
public:
    // Returns the new unit's index.  Names must be unique, non-empty, and
    // free of '.', '>', and whitespace (they become site-label prefixes).
    int add_unit(const std::string& name);
    int unit_count() const { return static_cast<int>(names_.size()); }
    const std::string& unit_name(int u) const;
    int unit_index(const std::string& name) const;  // -1 if unknown

    // Permissive; problems surface via validate().
    void add_link(PortRef a, PortRef b);
    const std::vector<Link>& links() const { return links_; }

    // Empty means well-formed: every link endpoint names an existing unit,
    // no port carries more than one link, and no link joins two ports on the
    // same side of the same unit.
    std::vector<std::string> validate() const;

    int link_index_at(PortRef p) const;  // -1 if unlinked
    bool is_linked(PortRef p) const { return link_index_at(p) >= 0; }
    PortRef peer(PortRef p) const;       // throws if unlinked

    std::vector<PortRef> free_ports() const;  // sorted

    // Complete three-ary layered tree: one root unit, every free port of
    // layer k sprouting a child in layer k+1 up to `layers`.  A child hangs
    // by port e of the side facing its parent.  Units are named n0, n1, ...
    // in breadth-first order.
    static Topology layered_tree(int layers);

private:
    std::vector<std::string> names_;
    std::map<std::string, int> index_;
    std::vector<Link> links_;
};

// Internal rails of a unit: a/b enter from the left side (upper/lower),
// c/d from the right.
enum class RailId : int { a = 0, b = 1, c = 2, d = 3 };

char rail_char(RailId r);
SideId rail_side(RailId r);
RailId upper_rail(SideId s);
RailId lower_rail(SideId s);

struct SiteInfo {
    enum class Kind { Port, Rail, Slot };
    Kind kind = Kind::Port;
    int unit = -1;           // Port, Rail
    SideId side = SideId::Left;  // Port, Rail
    PortId port = PortId::e;     // Port
    RailId rail = RailId::a;     // Rail
    int link = -1;           // Slot
    bool toward_b = false;   // Slot: direction of travel along links()[link]
    bool free_port = false;  // Port: true when unlinked
};

// Assigns every mode site a stable label and carries lookups both ways.
// Port sites: "<unit>.<side><port>" (n0.Le); rail sites: "<unit>.<rail>"
// (n0.a); slot sites: "<from-port-site>><to-port-site>" (n0.Re>n1.Le).
class SitePlan {
public:
    // Throws std::invalid_argument when topo.validate() reports problems.
    static SitePlan build(const Topology& topo);

    const Topology& topology() const { return topo_; }

    std::string port_site(PortRef p) const;
    std::string rail_site(int unit, RailId r) const;
    std::string slot_site(int link, bool toward_b) const;
    // The slot a photon occupies after leaving through linked port `p`.
    std::string out_slot_site(PortRef p) const;
    // The slot feeding linked port `p` from its peer.
    std::string in_slot_site(PortRef p) const;

    const std::vector<std::string>& all_sites() const { return sites_; }
    const SiteInfo& info(const std::string& site) const;  // throws if unknown
    bool is_free_port_site(const std::string& site) const;

private:
    Topology topo_;
    std::vector<std::string> sites_;
    std::map<std::string, SiteInfo> info_;
};

SitePlan build_site_plan(const Topology& topo);

}  // namespace dualrail
