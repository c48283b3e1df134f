#include "bitree/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace bitree {

BoundaryMeasure::BoundaryMeasure(Geometry geom, Eigen::VectorXd masses)
    : geom_(std::move(geom)), masses_(std::move(masses)) {
    if (masses_.size() != geom_.boundary_count())
        throw GeometryMismatchError("measure mass vector length does not match the boundary count");
    for (Eigen::Index i = 0; i < masses_.size(); ++i) {
        if (!std::isfinite(masses_[i]) || masses_[i] < 0.0)
            throw PreconditionError("measure masses must be finite and nonnegative", i);
    }
}

std::vector<BoundaryId> BoundaryMeasure::support() const {
    std::vector<BoundaryId> out;
    for (Eigen::Index i = 0; i < masses_.size(); ++i)
        if (masses_[i] > 0.0) out.push_back(i);
    return out;
}

BoundarySet::BoundarySet(Geometry geom, const std::vector<BoundaryId>& indices) : BoundarySet(std::move(geom)) {
    for (BoundaryId b : indices) {
        if (b < 0 || b >= geom_.boundary_count())
            throw PreconditionError("boundary index out of range", b);
        mask_[static_cast<std::size_t>(b)] = 1;
    }
}

std::int64_t BoundarySet::size() const {
    return std::accumulate(mask_.begin(), mask_.end(), std::int64_t{0});
}

std::vector<BoundaryId> BoundarySet::indices() const {
    std::vector<BoundaryId> out;
    for (std::size_t i = 0; i < mask_.size(); ++i)
        if (mask_[i]) out.push_back(static_cast<BoundaryId>(i));
    return out;
}

BoundarySet BoundarySet::intersect(const BoundarySet& other) const {
    require_same_geometry(geom_, other.geom_, "BoundarySet::intersect");
    BoundarySet out(geom_);
    for (std::size_t i = 0; i < mask_.size(); ++i) out.mask_[i] = mask_[i] & other.mask_[i];
    return out;
}

std::int64_t NodeSet::size() const {
    return std::accumulate(mask_.begin(), mask_.end(), std::int64_t{0});
}

std::vector<NodeId> NodeSet::indices() const {
    std::vector<NodeId> out;
    for (std::size_t i = 0; i < mask_.size(); ++i)
        if (mask_[i]) out.push_back(static_cast<NodeId>(i));
    return out;
}

NodeSet shadow_downset(const BoundarySet& E) {
    const Geometry& g = E.geometry();
    const std::int64_t nx = g.x().node_count(), ny = g.y().node_count();

    // Count boundary atoms of E under every node with two bottom-up sweeps,
    // then compare against the full shadow size 2^(Nx-kx) * 2^(Ny-ky).
    std::vector<std::int64_t> cnt(static_cast<std::size_t>(g.node_count()), 0);
    for (BoundaryId b = 0; b < g.boundary_count(); ++b)
        if (E.contains(b)) cnt[static_cast<std::size_t>(g.boundary_node(b))] = 1;

    const std::int64_t y_leaf_first = g.y().leaf_first();
    const std::int64_t x_leaf_first = g.x().leaf_first();
    for (std::int64_t xv = 0; xv < nx; ++xv)
        for (std::int64_t yv = y_leaf_first - 1; yv >= 0; --yv)
            cnt[g.node(xv, yv)] = cnt[g.node(xv, 2 * yv + 1)] + cnt[g.node(xv, 2 * yv + 2)];
    for (std::int64_t xv = x_leaf_first - 1; xv >= 0; --xv)
        for (std::int64_t yv = 0; yv < ny; ++yv)
            cnt[g.node(xv, yv)] = cnt[g.node(2 * xv + 1, yv)] + cnt[g.node(2 * xv + 2, yv)];

    NodeSet R(g);
    for (std::int64_t xv = 0; xv < nx; ++xv) {
        std::int64_t shadow_x = std::int64_t{1} << (g.x().depth - TreeAxis::level(xv));
        for (std::int64_t yv = 0; yv < ny; ++yv) {
            std::int64_t shadow = shadow_x * (std::int64_t{1} << (g.y().depth - TreeAxis::level(yv)));
            NodeId v = g.node(xv, yv);
            if (cnt[static_cast<std::size_t>(v)] == shadow) R.add(v);
        }
    }
    return R;
}

BoundaryMeasure restrict_measure(const BoundaryMeasure& mu, const BoundarySet& E) {
    require_same_geometry(mu.geometry(), E.geometry(), "restrict_measure");
    Eigen::VectorXd m = mu.masses();
    for (Eigen::Index b = 0; b < m.size(); ++b)
        if (!E.contains(b)) m[b] = 0.0;
    return BoundaryMeasure(mu.geometry(), std::move(m));
}

StoppingFamily::StoppingFamily(Geometry geom, std::vector<NodeId> members)
    : geom_(std::move(geom)), members_(std::move(members)) {
    require_tree(geom_, "StoppingFamily");
    std::sort(members_.begin(), members_.end());
    if (std::adjacent_find(members_.begin(), members_.end()) != members_.end())
        throw PreconditionError("stopping family members must be distinct");
    // Two tree nodes are comparable iff one is an ancestor of the other, so
    // walking each member's ancestor chain detects every violation.
    std::vector<std::uint8_t> is_member(static_cast<std::size_t>(geom_.node_count()), 0);
    for (NodeId m : members_) is_member[static_cast<std::size_t>(m)] = 1;
    for (NodeId m : members_)
        for (NodeId a = m; a != 0;) {
            a = TreeAxis::parent(a);
            if (is_member[static_cast<std::size_t>(a)])
                throw PreconditionError("stopping family members must be pairwise incomparable", m);
        }

    const std::int64_t n = geom_.node_count();
    w_mask_.assign(static_cast<std::size_t>(n), 0);
    member_.assign(static_cast<std::size_t>(n), -1);
    for (NodeId m : members_) {
        // Mark the whole subtree below m; the heap layout visits children
        // after parents, so a simple stack walk suffices.
        std::vector<NodeId> stack{m};
        while (!stack.empty()) {
            NodeId v = stack.back();
            stack.pop_back();
            w_mask_[static_cast<std::size_t>(v)] = 1;
            member_[static_cast<std::size_t>(v)] = m;
            if (!geom_.x().is_leaf(v)) {
                stack.push_back(TreeAxis::child(v, 0));
                stack.push_back(TreeAxis::child(v, 1));
            }
        }
    }
    o_count_ = n - std::accumulate(w_mask_.begin(), w_mask_.end(), std::int64_t{0});
}

StoppingFamily build_stopping_family(const Geometry& geom, const Eigen::VectorXd& h,
                                     double threshold, Comparison cmp) {
    require_tree(geom, "build_stopping_family");
    if (h.size() != geom.node_count())
        throw GeometryMismatchError("stopping function length does not match the node count");

    auto passes = [&](NodeId v) {
        return cmp == Comparison::greater ? h[v] > threshold : h[v] >= threshold;
    };

    std::vector<NodeId> members;
    std::vector<NodeId> stack{0};
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        if (passes(v)) {
            members.push_back(v);
        } else if (!geom.x().is_leaf(v)) {
            stack.push_back(TreeAxis::child(v, 0));
            stack.push_back(TreeAxis::child(v, 1));
        }
    }
    return StoppingFamily(geom, std::move(members));
}

}  // namespace bitree
