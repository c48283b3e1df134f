#include "bitree/geometry.hpp"

#include <string>

namespace bitree {

namespace {

void check_axis(int depth, const GeometryLimits& limits) {
    if (depth < 0)
        throw SizeLimitError("tree depth must be nonnegative, got " + std::to_string(depth));
    if (depth > limits.max_axis_depth)
        throw SizeLimitError("tree depth " + std::to_string(depth) + " exceeds the configured maximum " +
                             std::to_string(limits.max_axis_depth));
}

}  // namespace

Geometry make_tree(int depth, const GeometryLimits& limits) {
    check_axis(depth, limits);
    return Geometry(Kind::tree, depth, 0);
}

Geometry make_bitree(int depth_x, int depth_y, const GeometryLimits& limits) {
    check_axis(depth_x, limits);
    check_axis(depth_y, limits);
    Geometry g(Kind::bitree, depth_x, depth_y);
    if (g.node_count() > limits.max_nodes)
        throw SizeLimitError("bi-tree with " + std::to_string(g.node_count()) +
                             " nodes exceeds the configured maximum " + std::to_string(limits.max_nodes));
    return g;
}

void require_same_geometry(const Geometry& a, const Geometry& b, const char* what) {
    if (a != b) throw GeometryMismatchError(std::string(what) + ": mixed geometries");
}

void require_tree(const Geometry& g, const char* what) {
    if (g.kind() != Kind::tree)
        throw PreconditionError(std::string(what) + " is defined on a single tree only");
}

}  // namespace bitree
