#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "bitree/hardy.hpp"
#include "bitree/types.hpp"

namespace bitree {

// Gate for the bi-tree constructions: the per-slice majorant runs at a third
// of lambda and needs that to stay at least 3.
inline constexpr double kMinBitreeLambda = 9.0;

// Slack added to the per-slice stopping threshold.  Measures normalized to
// potential exactly one on the support put slice values right at the
// threshold, and rounding noise there would otherwise admit members whose
// rectangles still touch the support.
inline constexpr double kStoppingSlack = 1e-9;

struct SliceInfo {
    NodeId alpha_y = 0;                   // the y-node of the slice
    std::vector<NodeId> stopping_members; // x-tree nodes
    std::vector<BoundaryId> f_slice;      // x-boundary indices of F_{alpha_y}
};

struct MajorantResult {
    Eigen::VectorXd phi;         // nonnegative, zero outside the construction
    double certified_lower = 0;  // guaranteed min of the Hardy sum on F
    double norm_sq = 0;          // ||phi||^2
    double lambda = 0;
    std::vector<std::int64_t> f_echo;        // F as given (boundary ids)
    std::vector<SliceInfo> slices;           // bi-tree builders only
    std::map<BoundaryId, NodeId> cut_levels; // omega -> alpha(omega), bi-tree only
    double norm_bound = 0;       // the asserted upper bound on norm_sq
    bool rescaled = false;
};

// Majorant with small norm on a single tree.  Given an antichain S with
// nonempty complement, a nonnegative f vanishing on W(S), a boundary set
// F inside W(S), and a measure sigma whose potential is >= lambda on F and
// < 1 on O(S), produces Phi >= 0 supported in W(S) with
//   I Phi >= ((lambda-1)/lambda) I f   on F,     ||Phi||^2 <= (8/lambda) ||f||^2.
// Both bounds are re-verified on the output and a failure throws.
MajorantResult build_phi_majorant(const BoundaryMeasure& sigma, const StoppingFamily& S,
                                  const Eigen::VectorXd& f, const BoundarySet& F, double lambda);

struct MajorantOptions {
    bool rescale = false;             // multiply phi so the lower bound is lambda itself
    bool relax_preconditions = false; // skip the global potential gates (test mode);
                                      // per-slice hypotheses are still enforced
};

// Bi-tree majorant: slices the measure along y, builds a stopping family and
// a tree majorant per slice, and assembles phi(x, y) from the slices.
// Requires V^mu <= 1 on supp(mu), V^mu >= lambda on F and lambda >= 9 (so the
// per-slice construction runs at lambda/3 >= 3).  Guarantees
//   I phi >= 4 lambda / 9 on F,   ||phi||^2 * lambda <= 24 E[mu].
MajorantResult build_embedding_majorant(const BoundaryMeasure& mu, const BoundarySet& F,
                                        double lambda, const MajorantOptions& opts = {});

// Truncated variant: hypotheses on the delta-truncated potential only.
// Requires V_delta^mu >= lambda on F with delta in (0,1]; internally rescales
// mu by 1/delta and works against the set where the rescaled potential is
// below 1.  Guarantees I phi >= 4 lambda / 9 on F and
// ||phi||^2 * lambda <= 24 delta E_delta[mu].
MajorantResult build_truncated_majorant(const BoundaryMeasure& mu, const BoundarySet& F,
                                        double lambda, double delta,
                                        const MajorantOptions& opts = {});

struct PeelingResult {
    std::vector<BoundarySet> layer_sets;         // E_0, E_1, ... (nonempty ones)
    std::vector<BoundaryMeasure> layer_measures; // sigma_j = nu | E_j
    BoundarySet residual_set;                    // E_infinity
    BoundaryMeasure residual;                    // nu | E_infinity
    double energy_before = 0;
    double energy_after = 0;
    double constant = 0;  // the C the guarantees refer to
};

// Measure peeling: strips layers of low potential until the remainder
// satisfies V^residual >= C/3 on its support and keeps at least a sixth of
// the energy.  Requires E[nu] >= C |nu|; internally rescaled to the C = 3
// normalization.  The layers plus the residual recompose nu exactly.
PeelingResult peel_measure(const BoundaryMeasure& nu, double C);

// Equilibrium measure of a boundary set F on a single tree: rho >= 0
// supported in F with V^rho = 1 on supp rho and V^rho >= 1 on F (within
// tolerance).  Dense kernel solve with an active-set guard up to 4096 atoms,
// projected gradient beyond.
BoundaryMeasure equilibrium_measure(const Geometry& geom, const BoundarySet& F,
                                    double tolerance = 1e-9);

struct MinPrincipleResult {
    bool holds = true;
    NodeId good_vertex = -1;
    std::vector<NodeId> descent_path;  // from the good vertex down to the boundary
    BoundaryId boundary_witness = -1;
};

// Two-point minimum principle: g two-point super-harmonic, G two-point
// harmonic, both nonnegative.  If IG <= Ig on P = {w : G(w) > 0} then
// IG <= Ig on the whole tree; otherwise returns the constructive descent
// witness ending at a boundary node of P where Ig < IG.
MinPrincipleResult min_principle_check(const Geometry& geom, const Eigen::VectorXd& g,
                                       const Eigen::VectorXd& G);

enum class Harmonicity { two_point, three_point };

struct HarmonicityReport {
    bool holds = true;
    NodeId violating_node = -1;
};

// two_point: h(t) >= h(t1) + h(t2) at every interior node.  three_point:
// h(t) >= (h(t1) + h(t2) + h(parent)) / 3 at every node with both.
HarmonicityReport superharmonicity_check(const Geometry& geom, const Eigen::VectorXd& h,
                                         Harmonicity kind, double tol = 1e-12);

// Per-slice aggregates of the truncated construction, exposed for testing:
// g1(tau) sums the rectangle masses of mu over y-ancestors of alpha_y masked
// to `mask`, and f1 is the slice of the masked rectangle-mass function.
Eigen::VectorXd slice_g1(const BoundaryMeasure& mu, const NodeSet& mask, NodeId alpha_y);
Eigen::VectorXd slice_f1(const BoundaryMeasure& mu, const NodeSet& mask, NodeId alpha_y);

}  // namespace bitree
