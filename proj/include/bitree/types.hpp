#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "bitree/geometry.hpp"

namespace bitree {

// Nonnegative masses on boundary nodes.  All measures live on the boundary;
// interior nodes carry no mass.
class BoundaryMeasure {
  public:
    BoundaryMeasure() = default;
    BoundaryMeasure(Geometry geom, Eigen::VectorXd masses);

    static BoundaryMeasure zero(const Geometry& geom) {
        return BoundaryMeasure(geom, Eigen::VectorXd::Zero(geom.boundary_count()));
    }

    const Geometry& geometry() const { return geom_; }
    const Eigen::VectorXd& masses() const { return masses_; }
    double mass(BoundaryId b) const { return masses_[b]; }
    double total() const { return masses_.sum(); }
    bool is_zero() const { return (masses_.array() > 0.0).count() == 0; }

    std::vector<BoundaryId> support() const;

    BoundaryMeasure scaled(double c) const { return BoundaryMeasure(geom_, masses_ * c); }

  private:
    Geometry geom_;
    Eigen::VectorXd masses_;
};

// Subset of the boundary, stored as a membership mask over boundary ids.
class BoundarySet {
  public:
    BoundarySet() = default;
    explicit BoundarySet(Geometry geom)
        : geom_(std::move(geom)), mask_(static_cast<std::size_t>(geom_.boundary_count()), 0) {}
    BoundarySet(Geometry geom, const std::vector<BoundaryId>& indices);

    static BoundarySet full(const Geometry& geom) {
        BoundarySet s(geom);
        std::fill(s.mask_.begin(), s.mask_.end(), 1);
        return s;
    }

    const Geometry& geometry() const { return geom_; }
    bool contains(BoundaryId b) const { return mask_[static_cast<std::size_t>(b)] != 0; }
    void add(BoundaryId b) { mask_[static_cast<std::size_t>(b)] = 1; }
    std::int64_t size() const;
    bool empty() const { return size() == 0; }
    std::vector<BoundaryId> indices() const;  // sorted

    BoundarySet intersect(const BoundarySet& other) const;

  private:
    Geometry geom_;
    std::vector<std::uint8_t> mask_;
};

// Subset of all nodes.
class NodeSet {
  public:
    NodeSet() = default;
    explicit NodeSet(Geometry geom)
        : geom_(std::move(geom)), mask_(static_cast<std::size_t>(geom_.node_count()), 0) {}

    const Geometry& geometry() const { return geom_; }
    bool contains(NodeId v) const { return mask_[static_cast<std::size_t>(v)] != 0; }
    void add(NodeId v) { mask_[static_cast<std::size_t>(v)] = 1; }
    std::int64_t size() const;
    bool empty() const { return size() == 0; }
    std::vector<NodeId> indices() const;  // sorted

    const std::vector<std::uint8_t>& mask() const { return mask_; }

  private:
    Geometry geom_;
    std::vector<std::uint8_t> mask_;
};

// The down-set R_E of a boundary set E: all nodes whose boundary shadow lies
// entirely inside E.  U_E itself is represented by E (its atoms); every use
// reduces to containment tests against R_E.
NodeSet shadow_downset(const BoundarySet& E);

BoundaryMeasure restrict_measure(const BoundaryMeasure& mu, const BoundarySet& E);

// An antichain S of tree nodes together with the derived split of the tree
// into W(S) (nodes below some member) and its complement O(S).
class StoppingFamily {
  public:
    StoppingFamily() = default;
    // Validates that `members` is an antichain.
    StoppingFamily(Geometry geom, std::vector<NodeId> members);

    const Geometry& geometry() const { return geom_; }
    const std::vector<NodeId>& members() const { return members_; }
    bool in_w(NodeId v) const { return w_mask_[static_cast<std::size_t>(v)] != 0; }
    bool o_empty() const { return o_count_ == 0; }
    std::int64_t o_count() const { return o_count_; }
    // Unique member above-or-equal v, or -1 when v is in O(S).
    NodeId member_above(NodeId v) const { return member_[static_cast<std::size_t>(v)]; }

  private:
    Geometry geom_;
    std::vector<NodeId> members_;
    std::vector<std::uint8_t> w_mask_;
    std::vector<NodeId> member_;
    std::int64_t o_count_ = 0;
};

enum class Comparison { greater, greater_equal };

// Maximal (highest) tree nodes whose h-value passes the threshold test; no
// strict ancestor of a member passes it.
StoppingFamily build_stopping_family(const Geometry& geom, const Eigen::VectorXd& h,
                                     double threshold, Comparison cmp);

}  // namespace bitree
