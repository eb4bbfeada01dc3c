/*
 * Network-description checks: layered-tree growth counts, attachment
 * orientation, validation of malformed networks, and the site plan's stable
 * labelling of ports, rails, and link slots.
 */

#include <set>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "dualrail/topology.hpp"

using namespace dualrail;

TEST_CASE("layered trees follow the tripling growth law") {
    int expected_units = 1;
    int frontier = 4;  // free ports of the current outermost layer
    for (int layers = 1; layers <= 5; ++layers) {
        const Topology t = Topology::layered_tree(layers);
        CHECK(t.unit_count() == expected_units);
        CHECK(static_cast<int>(t.free_ports().size()) == frontier);
        CHECK(static_cast<int>(t.links().size()) == expected_units - 1);
        CHECK(t.validate().empty());
        expected_units += frontier;
        frontier *= 3;
    }
    CHECK(Topology::layered_tree(5).unit_count() == 161);
    CHECK_THROWS_AS(Topology::layered_tree(0), std::invalid_argument);
}

TEST_CASE("children hang by the e port facing their parent") {
    const Topology t = Topology::layered_tree(2);
    CHECK(t.unit_count() == 5);
    for (int u = 0; u < 5; ++u) CHECK(t.unit_name(u) == "n" + std::to_string(u));

    // Root free ports in canonical order sprout n1..n4.
    CHECK(t.peer({0, SideId::Left, PortId::e}) == PortRef{1, SideId::Right, PortId::e});
    CHECK(t.peer({0, SideId::Left, PortId::f}) == PortRef{2, SideId::Right, PortId::e});
    CHECK(t.peer({0, SideId::Right, PortId::e}) == PortRef{3, SideId::Left, PortId::e});
    CHECK(t.peer({0, SideId::Right, PortId::f}) == PortRef{4, SideId::Left, PortId::e});
    CHECK(t.peer({3, SideId::Left, PortId::e}) == PortRef{0, SideId::Right, PortId::e});

    CHECK(t.is_linked({0, SideId::Left, PortId::e}));
    CHECK(!t.is_linked({1, SideId::Left, PortId::e}));
    CHECK(t.link_index_at({1, SideId::Left, PortId::e}) == -1);
    CHECK_THROWS_AS(t.peer({1, SideId::Left, PortId::e}), std::invalid_argument);

    // Free ports: both left-side ports of the left children, both right-side
    // ports of the right children, plus each child's sibling port.
    const auto free = t.free_ports();
    CHECK(free.size() == 12);
    const std::set<PortRef> free_set(free.begin(), free.end());
    CHECK(free_set.count({1, SideId::Left, PortId::e}) == 1);
    CHECK(free_set.count({1, SideId::Left, PortId::f}) == 1);
    CHECK(free_set.count({1, SideId::Right, PortId::f}) == 1);
    CHECK(free_set.count({4, SideId::Right, PortId::f}) == 1);
    CHECK(free_set.count({0, SideId::Left, PortId::e}) == 0);
}

TEST_CASE("unit ports come in canonical order") {
    const auto ports = unit_ports(7);
    REQUIRE(ports.size() == 4);
    CHECK(ports[0] == PortRef{7, SideId::Left, PortId::e});
    CHECK(ports[1] == PortRef{7, SideId::Left, PortId::f});
    CHECK(ports[2] == PortRef{7, SideId::Right, PortId::e});
    CHECK(ports[3] == PortRef{7, SideId::Right, PortId::f});
}

TEST_CASE("validation rejects malformed networks") {
    Topology t;
    t.add_unit("m0");
    t.add_unit("m1");
    t.add_link({0, SideId::Right, PortId::e}, {1, SideId::Left, PortId::e});
    CHECK(t.validate().empty());

    SUBCASE("unknown unit index") {
        t.add_link({5, SideId::Left, PortId::e}, {0, SideId::Left, PortId::f});
        CHECK(!t.validate().empty());
    }
    SUBCASE("a port may carry only one link") {
        t.add_link({0, SideId::Right, PortId::e}, {1, SideId::Left, PortId::f});
        CHECK(!t.validate().empty());
    }
    SUBCASE("no link may join two ports on one side of one unit") {
        t.add_link({0, SideId::Left, PortId::e}, {0, SideId::Left, PortId::f});
        CHECK(!t.validate().empty());
    }
}

TEST_CASE("unit names must be label-safe and unique") {
    Topology t;
    CHECK(t.add_unit("n0") == 0);
    CHECK(t.unit_index("n0") == 0);
    CHECK(t.unit_index("zz") == -1);
    CHECK_THROWS_AS(t.add_unit("n0"), std::invalid_argument);
    CHECK_THROWS_AS(t.add_unit(""), std::invalid_argument);
    CHECK_THROWS_AS(t.add_unit("a.b"), std::invalid_argument);
    CHECK_THROWS_AS(t.add_unit("a>b"), std::invalid_argument);
    CHECK_THROWS_AS(t.add_unit("a b"), std::invalid_argument);
    CHECK_THROWS_AS(t.unit_name(3), std::out_of_range);
}

TEST_CASE("site plans label every mode exactly once") {
    const Topology t = Topology::layered_tree(2);
    const SitePlan plan = SitePlan::build(t);

    // 5 units x (4 ports + 4 rails) + 4 links x 2 directed slots.
    CHECK(plan.all_sites().size() == 48);
    std::set<std::string> unique(plan.all_sites().begin(), plan.all_sites().end());
    CHECK(unique.size() == 48);

    CHECK(plan.port_site({0, SideId::Left, PortId::e}) == "n0.Le");
    CHECK(plan.port_site({4, SideId::Right, PortId::f}) == "n4.Rf");
    CHECK(plan.rail_site(0, RailId::a) == "n0.a");
    CHECK(plan.rail_site(3, RailId::d) == "n3.d");
    CHECK(plan.out_slot_site({0, SideId::Right, PortId::e}) == "n0.Re>n3.Le");
    CHECK(plan.in_slot_site({0, SideId::Right, PortId::e}) == "n3.Le>n0.Re");
    CHECK(plan.out_slot_site({3, SideId::Left, PortId::e}) == "n3.Le>n0.Re");

    const SiteInfo& port_info = plan.info("n0.Le");
    CHECK(port_info.kind == SiteInfo::Kind::Port);
    CHECK(port_info.unit == 0);
    CHECK(!port_info.free_port);
    CHECK(plan.info("n1.Lf").free_port);
    const SiteInfo& rail_info = plan.info("n2.c");
    CHECK(rail_info.kind == SiteInfo::Kind::Rail);
    CHECK(rail_info.rail == RailId::c);
    CHECK(rail_info.side == SideId::Right);
    const SiteInfo& slot_info = plan.info("n0.Re>n3.Le");
    CHECK(slot_info.kind == SiteInfo::Kind::Slot);
    CHECK(slot_info.link >= 0);

    CHECK(plan.is_free_port_site("n1.Lf"));
    CHECK(!plan.is_free_port_site("n0.Le"));
    CHECK(!plan.is_free_port_site("n0.a"));
    CHECK_THROWS_AS(plan.info("bogus"), std::invalid_argument);
    CHECK_THROWS_AS(plan.info("n9.Le"), std::invalid_argument);
}

TEST_CASE("site plans refuse invalid topologies") {
    Topology t;
    t.add_unit("m0");
    t.add_link({0, SideId::Left, PortId::e}, {0, SideId::Left, PortId::f});
    CHECK_THROWS_AS(SitePlan::build(t), std::invalid_argument);
}

TEST_CASE("rail helpers map sides consistently") {
    CHECK(rail_char(RailId::a) == 'a');
    CHECK(rail_char(RailId::d) == 'd');
    CHECK(rail_side(RailId::a) == SideId::Left);
    CHECK(rail_side(RailId::b) == SideId::Left);
    CHECK(rail_side(RailId::c) == SideId::Right);
    CHECK(rail_side(RailId::d) == SideId::Right);
    CHECK(upper_rail(SideId::Left) == RailId::a);
    CHECK(lower_rail(SideId::Left) == RailId::b);
    CHECK(upper_rail(SideId::Right) == RailId::c);
    CHECK(lower_rail(SideId::Right) == RailId::d);
}
