#include <doctest.h>

#include "oracles.hpp"

using namespace bitree;

TEST_CASE("tree counts and degenerate cases") {
    CHECK(make_tree(0).node_count() == 1);
    CHECK(make_tree(0).boundary_count() == 1);
    CHECK(make_tree(0).is_boundary(0));
    CHECK(make_tree(1).node_count() == 3);
    CHECK(make_tree(1).boundary_count() == 2);
    CHECK(make_tree(10).node_count() == 2047);
    CHECK(make_tree(10).boundary_count() == 1024);

    CHECK_THROWS_AS(make_tree(-1), SizeLimitError);
    CHECK_THROWS_AS(make_tree(21), SizeLimitError);
    CHECK_THROWS_AS(make_bitree(13, 13), SizeLimitError);
}

TEST_CASE("bi-tree counts and boundary indexing") {
    Geometry g = make_bitree(2, 3);
    CHECK(g.node_count() == 7 * 15);
    CHECK(g.boundary_count() == 4 * 8);
    for (BoundaryId b = 0; b < g.boundary_count(); ++b) {
        NodeId v = g.boundary_node(b);
        CHECK(g.is_boundary(v));
        CHECK(g.boundary_index(v) == b);
    }
}

TEST_CASE("parent and level arithmetic") {
    // parent(level k, index j) = (k-1, floor(j/2))
    for (int k = 1; k <= 4; ++k)
        for (std::int64_t j = 0; j < (std::int64_t{1} << k); ++j) {
            std::int64_t id = (std::int64_t{1} << k) - 1 + j;
            CHECK(TreeAxis::level(id) == k);
            CHECK(TreeAxis::parent(id) == (std::int64_t{1} << (k - 1)) - 1 + j / 2);
        }
}

TEST_CASE("order relation on trees and bi-trees") {
    Geometry t = make_tree(3);
    NodeId leaf = t.boundary_node(5);
    CHECK(t.order_relation(leaf, 0) == Order::below);
    CHECK(t.order_relation(0, leaf) == Order::above);
    CHECK(t.order_relation(leaf, leaf) == Order::equal);
    CHECK(t.order_relation(t.boundary_node(0), t.boundary_node(1)) == Order::incomparable);

    Geometry g = make_bitree(1, 1);
    NodeId a = g.node(1, 2);  // (left leaf, right leaf)
    NodeId b = g.node(2, 1);  // (right leaf, left leaf)
    CHECK(g.order_relation(a, b) == Order::incomparable);
    CHECK(g.order_relation(a, g.node(0, 0)) == Order::below);
    CHECK(g.order_relation(a, g.node(1, 0)) == Order::below);
    CHECK(g.order_relation(g.node(1, 0), a) == Order::above);
}

TEST_CASE("generation") {
    Geometry t = make_tree(4);
    CHECK(t.generation(0).x == 0);
    CHECK(t.generation(t.boundary_node(7)).x == 4);
    Geometry g = make_bitree(2, 3);
    Generation gen = g.generation(g.node(4, 10));
    CHECK(gen.x == 2);
    CHECK(gen.y == 3);
}

TEST_CASE("shadow downset matches brute force on small bi-trees") {
    Rng rng(41);
    for (int dx = 0; dx <= 2; ++dx)
        for (int dy = 0; dy <= 2; ++dy) {
            Geometry g = make_bitree(dx, dy);
            for (int rep = 0; rep < 20; ++rep) {
                BoundarySet E(g);
                for (BoundaryId b = 0; b < g.boundary_count(); ++b)
                    if (rng.bernoulli(0.5)) E.add(b);
                NodeSet fast = shadow_downset(E);
                NodeSet slow = oracles::brute_downset(E);
                CHECK(fast.indices() == slow.indices());
            }
        }
}

TEST_CASE("shadow downset worked examples") {
    Geometry g = make_bitree(1, 1);
    CHECK(shadow_downset(BoundarySet::full(g)).size() == g.node_count());
    BoundarySet single(g, {0});
    CHECK(shadow_downset(single).indices() == std::vector<NodeId>{g.boundary_node(0)});

    // Three squares out of four leave exactly the two covered halves plus the
    // squares themselves.
    BoundarySet three(g, {0, 1, 2});
    CHECK(shadow_downset(three).size() == 5);

    BoundarySet empty(g);
    CHECK(shadow_downset(empty).empty());
}

TEST_CASE("restrict_measure basics") {
    Geometry g = make_bitree(1, 1);
    BoundaryMeasure mu(g, Eigen::VectorXd::Constant(4, 0.25));
    CHECK(restrict_measure(mu, BoundarySet::full(g)).masses() == mu.masses());
    CHECK(restrict_measure(mu, BoundarySet(g)).total() == 0.0);
    BoundarySet half(g, {0, 3});
    CHECK(restrict_measure(mu, half).total() == doctest::Approx(0.5));

    // Idempotent and monotone.
    Rng rng(7);
    BoundaryMeasure nu = oracles::random_measure(g, rng);
    BoundarySet e(g, {1, 2});
    BoundarySet bigger(g, {0, 1, 2});
    BoundaryMeasure r1 = restrict_measure(nu, e);
    CHECK(restrict_measure(r1, e).masses() == r1.masses());
    BoundaryMeasure r2 = restrict_measure(nu, bigger);
    for (BoundaryId b = 0; b < 4; ++b) CHECK(r1.mass(b) <= r2.mass(b));
}

TEST_CASE("measure rejects negative and mismatched input") {
    Geometry g = make_tree(1);
    Eigen::VectorXd bad(2);
    bad << 1.0, -0.5;
    CHECK_THROWS_AS(BoundaryMeasure(g, bad), PreconditionError);
    CHECK_THROWS_AS(BoundaryMeasure(g, Eigen::VectorXd::Zero(3)), GeometryMismatchError);
}

TEST_CASE("stopping family structure") {
    Geometry g = make_tree(2);
    SUBCASE("antichain validation") {
        CHECK_THROWS_AS(StoppingFamily(g, {1, 3}), PreconditionError);  // 3 below 1
        StoppingFamily ok(g, {1, 6});
        CHECK(ok.o_count() == 2);  // root and node 2 stay outside
        CHECK(ok.in_w(4));
        CHECK(ok.member_above(4) == 1);
        CHECK(ok.member_above(0) == -1);
    }
    SUBCASE("W(S) is a down-set and partitions with O(S)") {
        StoppingFamily s(g, {1});
        for (NodeId v = 0; v < g.node_count(); ++v)
            if (s.in_w(v))
                for (NodeId w = 0; w < g.node_count(); ++w)
                    if (g.leq(w, v)) CHECK(s.in_w(w));
        CHECK(s.o_count() + 4 == g.node_count());
    }
    SUBCASE("nonempty complement contains the root") {
        StoppingFamily s(g, {3, 4, 2});
        CHECK_FALSE(s.o_empty());
        CHECK_FALSE(s.in_w(0));
        StoppingFamily all(g, {0});
        CHECK(all.o_empty());
    }
}

TEST_CASE("build_stopping_family picks maximal nodes") {
    Geometry g = make_tree(2);
    SUBCASE("nothing passes") {
        StoppingFamily s = build_stopping_family(g, Eigen::VectorXd::Zero(7), 1.0, Comparison::greater);
        CHECK(s.members().empty());
        CHECK(s.o_count() == 7);
    }
    SUBCASE("root passes") {
        Eigen::VectorXd h = Eigen::VectorXd::Constant(7, 2.0);
        StoppingFamily s = build_stopping_family(g, h, 1.0, Comparison::greater);
        CHECK(s.members() == std::vector<NodeId>{0});
        CHECK(s.o_empty());
    }
    SUBCASE("atom of mass 0.6 at depth 2") {
        Eigen::VectorXd m = Eigen::VectorXd::Zero(4);
        m[0] = 0.6;
        BoundaryMeasure sigma(g, m);
        Eigen::VectorXd h = potential(sigma).values;  // I(I* sigma)
        StoppingFamily s = build_stopping_family(g, h, 1.0, Comparison::greater);
        CHECK(s.members() == std::vector<NodeId>{1});
        CHECK(h[1] == doctest::Approx(1.2));
    }
}
