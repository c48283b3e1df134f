#pragma once

#include <optional>

#include <Eigen/Dense>

#include "bitree/types.hpp"

namespace bitree {

// Hardy operator: (If)(a) = sum of f over all nodes above-or-equal a.  On a
// bi-tree the ancestor set factorizes over the two axes, so a single
// parents-first sweep with inclusion-exclusion over (parent_x, parent_y)
// computes it in linear time.
Eigen::VectorXd hardy_sum(const Geometry& geom, const Eigen::VectorXd& f);

// Adjoint (I*f)(a) = sum of f over all nodes below-or-equal a, one bottom-up
// sweep per axis.
Eigen::VectorXd adjoint_sum(const Geometry& geom, const Eigen::VectorXd& f);

// I*mu as a node function: the rectangle-mass function a -> mu(R_a).
Eigen::VectorXd adjoint_sum(const BoundaryMeasure& mu);

// Hardy sum along one axis only: sums over ancestors in y (resp. x) with the
// other coordinate fixed.  These are the per-slice aggregates of the bi-tree
// constructions.
Eigen::VectorXd hardy_sum_y(const Geometry& geom, const Eigen::VectorXd& f);
Eigen::VectorXd hardy_sum_x(const Geometry& geom, const Eigen::VectorXd& f);

struct PotentialField {
    Eigen::VectorXd values;            // V on all nodes
    std::optional<double> delta;       // set when truncated
};

// V^mu = I(I*mu).
PotentialField potential(const BoundaryMeasure& mu);

// Nodes where V^mu < delta.
NodeSet truncation_set(const BoundaryMeasure& mu, double delta);

// V_delta^mu: Hardy sum of I*mu masked to the truncation set, i.e. the
// potential accumulated only through ancestors where V^mu < delta.
PotentialField truncated_potential(const BoundaryMeasure& mu, double delta);

struct EnergyOptions {
    std::optional<BoundarySet> E;
    std::optional<double> delta;
};

struct EnergyReport {
    double total = 0.0;
    std::optional<double> local;       // over R_E only
    std::optional<double> restricted;  // energy of mu|E
    std::optional<double> truncated;   // over the truncation set
};

// total = sum_a mu(R_a)^2 = int V^mu dmu; local/restricted/truncated are
// filled when the corresponding option is present.
EnergyReport energy(const BoundaryMeasure& mu, const EnergyOptions& opts = {});

double total_energy(const BoundaryMeasure& mu);

// int V^(mu|E) d(mu|F), symmetric in E and F.
double mutual_energy(const BoundaryMeasure& mu, const BoundarySet& E, const BoundarySet& F);

// Number of common ancestors of two boundary nodes; on a bi-tree the product
// of the per-axis counts.  Satisfies V^rho(w) = sum_w' K(w, w') rho(w').
double boundary_kernel(const Geometry& geom, BoundaryId a, BoundaryId b);

// Dense kernel matrix over the given boundary indices; guarded to 4096 rows.
Eigen::MatrixXd boundary_kernel_matrix(const Geometry& geom, const std::vector<BoundaryId>& idx);

// Integral of a boundary function against a measure; compensated summation
// beyond 2^20 terms.
double integrate_boundary(const Eigen::VectorXd& boundary_values, const BoundaryMeasure& mu);

// mu{ V >= lambda } over boundary atoms.
double mass_above(const BoundaryMeasure& mu, const Eigen::VectorXd& node_values, double lambda);

}  // namespace bitree
