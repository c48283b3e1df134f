#pragma once

#include <bit>
#include <cstdint>
#include <utility>

#include "bitree/errors.hpp"

namespace bitree {

using NodeId = std::int64_t;
using BoundaryId = std::int64_t;

// One dyadic tree axis with heap (level-order) node ids: the node at level k
// with in-level index j has id 2^k - 1 + j.  Children of v are 2v+1, 2v+2.
struct TreeAxis {
    int depth = 0;

    std::int64_t node_count() const { return (std::int64_t{2} << depth) - 1; }
    std::int64_t leaf_count() const { return std::int64_t{1} << depth; }
    std::int64_t leaf_first() const { return (std::int64_t{1} << depth) - 1; }

    static int level(std::int64_t v) { return std::bit_width(static_cast<std::uint64_t>(v) + 1) - 1; }
    static std::int64_t parent(std::int64_t v) { return (v - 1) / 2; }
    static std::int64_t child(std::int64_t v, int side) { return 2 * v + 1 + side; }
    bool is_leaf(std::int64_t v) const { return v >= leaf_first(); }

    // Ancestor of v at level `lev` (lev <= level(v)).
    static std::int64_t ancestor_at(std::int64_t v, int lev) {
        return ((v + 1) >> (level(v) - lev)) - 1;
    }
    // True iff a lies in the subtree rooted at b (a <= b in the dyadic order).
    static bool is_descendant(std::int64_t a, std::int64_t b) {
        int la = level(a), lb = level(b);
        return la >= lb && ancestor_at(a, lb) == b;
    }
};

enum class Kind { tree, bitree };

enum class Order { below, above, equal, incomparable };

struct Generation {
    int x = 0;
    int y = 0;
};

// A finite dyadic tree or bi-tree.  A plain tree is represented as the
// product with a depth-0 second factor, which makes every product-order
// formula valid for both kinds.  Node id = x_node * |T_y| + y_node.
class Geometry {
  public:
    Geometry() = default;
    Geometry(Kind kind, int depth_x, int depth_y)
        : kind_(kind), x_{depth_x}, y_{depth_y} {}

    Kind kind() const { return kind_; }
    const TreeAxis& x() const { return x_; }
    const TreeAxis& y() const { return y_; }

    std::int64_t node_count() const { return x_.node_count() * y_.node_count(); }
    std::int64_t boundary_count() const { return x_.leaf_count() * y_.leaf_count(); }

    NodeId node(std::int64_t xv, std::int64_t yv) const { return xv * y_.node_count() + yv; }
    std::int64_t x_of(NodeId v) const { return v / y_.node_count(); }
    std::int64_t y_of(NodeId v) const { return v % y_.node_count(); }

    bool is_boundary(NodeId v) const {
        return x_.is_leaf(x_of(v)) && y_.is_leaf(y_of(v));
    }
    NodeId boundary_node(BoundaryId b) const {
        std::int64_t jx = b / y_.leaf_count(), jy = b % y_.leaf_count();
        return node(x_.leaf_first() + jx, y_.leaf_first() + jy);
    }
    BoundaryId boundary_index(NodeId v) const {
        return (x_of(v) - x_.leaf_first()) * y_.leaf_count() + (y_of(v) - y_.leaf_first());
    }

    Order order_relation(NodeId a, NodeId b) const {
        int ax = axis_cmp(x_of(a), x_of(b));
        int ay = axis_cmp(y_of(a), y_of(b));
        if (ax == 2 || ay == 2) return Order::incomparable;
        int lo = std::min(ax, ay), hi = std::max(ax, ay);
        if (lo == 0 && hi == 0) return Order::equal;
        if (lo >= 0 && hi >= 0) return Order::above;   // strictly bigger rectangle
        if (lo <= 0 && hi <= 0) return Order::below;
        return Order::incomparable;
    }
    bool leq(NodeId a, NodeId b) const {
        Order o = order_relation(a, b);
        return o == Order::below || o == Order::equal;
    }

    Generation generation(NodeId v) const {
        return {TreeAxis::level(x_of(v)), TreeAxis::level(y_of(v))};
    }

    bool operator==(const Geometry& o) const {
        return kind_ == o.kind_ && x_.depth == o.x_.depth && y_.depth == o.y_.depth;
    }
    bool operator!=(const Geometry& o) const { return !(*this == o); }

  private:
    // -1: a strictly below b, 0: equal, 1: strictly above, 2: incomparable.
    static int axis_cmp(std::int64_t a, std::int64_t b) {
        if (a == b) return 0;
        if (TreeAxis::is_descendant(a, b)) return -1;
        if (TreeAxis::is_descendant(b, a)) return 1;
        return 2;
    }

    Kind kind_ = Kind::tree;
    TreeAxis x_{0};
    TreeAxis y_{0};
};

struct GeometryLimits {
    int max_axis_depth = 20;
    std::int64_t max_nodes = std::int64_t{1} << 24;
};

Geometry make_tree(int depth, const GeometryLimits& limits = {});
Geometry make_bitree(int depth_x, int depth_y, const GeometryLimits& limits = {});

void require_same_geometry(const Geometry& a, const Geometry& b, const char* what);
void require_tree(const Geometry& g, const char* what);

}  // namespace bitree
