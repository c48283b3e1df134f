#include "bitree/constructive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>

namespace bitree {

namespace {

Eigen::VectorXd slice_x(const Geometry& geom, const Eigen::VectorXd& f, NodeId alpha_y) {
    const std::int64_t nx = geom.x().node_count();
    Eigen::VectorXd out(nx);
    for (std::int64_t xv = 0; xv < nx; ++xv) out[xv] = f[geom.node(xv, alpha_y)];
    return out;
}

struct PhiCoreOptions {
    double precondition_slack = 1e-12;
    bool strict_lambda_gate = true;      // require lambda > 3 (else >= 3)
    bool strict_complement_bound = true; // require V < 1 on O(S) (else <= 1)
    std::int64_t slice_context = -1;
};

MajorantResult phi_majorant_core(const BoundaryMeasure& sigma, const StoppingFamily& S,
                                 const Eigen::VectorXd& f, const BoundarySet& F, double lambda,
                                 const PhiCoreOptions& opts) {
    const Geometry& g = sigma.geometry();
    require_tree(g, "build_phi_majorant");
    require_same_geometry(g, S.geometry(), "build_phi_majorant");
    require_same_geometry(g, F.geometry(), "build_phi_majorant");
    if (f.size() != g.node_count())
        throw GeometryMismatchError("build_phi_majorant: f length does not match the node count");

    const double slack = opts.precondition_slack;
    if (opts.strict_lambda_gate ? !(lambda > 3.0) : !(lambda >= 3.0 - slack))
        throw PreconditionError("lambda must exceed 3", -1, opts.slice_context);
    if (S.o_empty())
        throw PreconditionError("stopping family must leave the complement nonempty", -1,
                                opts.slice_context);
    for (NodeId v = 0; v < f.size(); ++v) {
        if (f[v] < 0.0)
            throw PreconditionError("f must be nonnegative", v, opts.slice_context);
        if (S.in_w(v) && f[v] != 0.0)
            throw PreconditionError("f must vanish on the stopping region", v, opts.slice_context);
    }
    for (BoundaryId b : F.indices()) {
        NodeId v = g.boundary_node(b);
        if (!S.in_w(v))
            throw PreconditionError("F must lie inside the stopping region", v, opts.slice_context);
    }

    Eigen::VectorXd V = potential(sigma).values;
    for (BoundaryId b : F.indices()) {
        NodeId v = g.boundary_node(b);
        if (!(V[v] >= lambda * (1.0 - slack)))
            throw PreconditionError("potential must be at least lambda on F", v, opts.slice_context);
    }
    const double complement_cap = opts.strict_complement_bound ? 1.0 : 1.0 + slack;
    for (NodeId v = 0; v < V.size(); ++v) {
        if (S.in_w(v)) continue;
        bool ok = opts.strict_complement_bound ? V[v] < complement_cap : V[v] <= complement_cap;
        if (!ok)
            throw PreconditionError("potential must stay below one off the stopping region", v,
                                    opts.slice_context);
    }

    Eigen::VectorXd A = adjoint_sum(sigma);
    Eigen::VectorXd If = hardy_sum(g, f);
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(g.node_count());

    // phi(a) = If(beta)/lambda * I*sigma(a) below each member beta, cut off
    // once the partial ancestor sum of I*sigma along the branch passes lambda
    // (the cutoff is inclusive at lambda).
    for (NodeId beta : S.members()) {
        const double c = If[beta] / lambda;
        if (c == 0.0) continue;
        std::vector<std::pair<NodeId, double>> stack{{beta, A[beta]}};
        while (!stack.empty()) {
            auto [v, partial] = stack.back();
            stack.pop_back();
            if (partial <= lambda) phi[v] = c * A[v];
            if (!g.x().is_leaf(v)) {
                NodeId c0 = TreeAxis::child(v, 0), c1 = TreeAxis::child(v, 1);
                stack.push_back({c0, partial + A[c0]});
                stack.push_back({c1, partial + A[c1]});
            }
        }
    }

    MajorantResult res;
    res.phi = phi;
    res.lambda = lambda;
    res.norm_sq = phi.squaredNorm();
    res.f_echo = F.indices();

    const double factor = (lambda - 1.0) / lambda;
    const double tol = std::max(slack, 1e-12);
    Eigen::VectorXd Iphi = hardy_sum(g, phi);
    double lower = std::numeric_limits<double>::infinity();
    for (BoundaryId b : F.indices()) {
        NodeId v = g.boundary_node(b);
        double target = factor * If[v];
        if (!(Iphi[v] >= target - tol * std::max(1.0, target)))
            throw CertificateError("majorant lower bound failed at boundary node " + std::to_string(v));
        lower = std::min(lower, target);
    }
    res.certified_lower = F.empty() ? 0.0 : lower;

    const double fnorm = f.squaredNorm();
    res.norm_bound = 8.0 / lambda * fnorm;
    if (!(res.norm_sq <= res.norm_bound * (1.0 + 1e-12) + 1e-300))
        throw CertificateError("majorant norm bound failed: " + std::to_string(res.norm_sq) + " > " +
                               std::to_string(res.norm_bound));
    return res;
}

struct SliceDecomposition {
    std::map<NodeId, std::vector<BoundaryId>> f_slices;  // alpha_y -> x-boundary ids
    std::map<BoundaryId, NodeId> cuts;                   // omega -> alpha(omega)
};

// For every omega in F, find alpha(omega): the first y-ancestor from the top
// where the reference potential at (omega_x, alpha) reaches `level`, then
// collect omega_x into F_{alpha_y} for all alpha_y between omega_y and the
// cut.
SliceDecomposition decompose_target(const Geometry& g, const Eigen::VectorXd& Vref,
                                    const BoundarySet& F, double level, double slack) {
    SliceDecomposition out;
    const std::int64_t ly = g.y().leaf_count();
    for (BoundaryId b : F.indices()) {
        std::int64_t jx = b / ly, jy = b % ly;
        std::int64_t x_leaf = g.x().leaf_first() + jx;
        std::int64_t y_leaf = g.y().leaf_first() + jy;
        NodeId cut = -1;
        for (int lev = 0; lev <= g.y().depth; ++lev) {
            NodeId ya = TreeAxis::ancestor_at(y_leaf, lev);
            if (Vref[g.node(x_leaf, ya)] >= level * (1.0 - slack)) {
                cut = ya;
                break;
            }
        }
        if (cut < 0)
            throw PreconditionError("no y-ancestor reaches the slicing level", g.node(x_leaf, y_leaf));
        out.cuts[b] = cut;
        int cut_level = TreeAxis::level(cut);
        for (int lev = cut_level; lev <= g.y().depth; ++lev) {
            NodeId ya = TreeAxis::ancestor_at(y_leaf, lev);
            auto& vec = out.f_slices[ya];
            if (std::find(vec.begin(), vec.end(), jx) == vec.end()) vec.push_back(jx);
        }
    }
    for (auto& [ya, vec] : out.f_slices) std::sort(vec.begin(), vec.end());
    return out;
}

void verify_assembled(const Geometry& g, MajorantResult& res, const BoundarySet& F,
                      double lower_target, double norm_bound, double tol) {
    Eigen::VectorXd Iphi = hardy_sum(g, res.phi);
    for (BoundaryId b : F.indices()) {
        NodeId v = g.boundary_node(b);
        if (!(Iphi[v] >= lower_target * (1.0 - tol)))
            throw CertificateError("assembled majorant lower bound failed at boundary node " +
                                   std::to_string(v) + ": " + std::to_string(Iphi[v]) + " < " +
                                   std::to_string(lower_target));
    }
    res.norm_sq = res.phi.squaredNorm();
    res.norm_bound = norm_bound;
    res.certified_lower = lower_target;
    if (!(res.norm_sq <= norm_bound * (1.0 + 1e-12) + 1e-300))
        throw CertificateError("assembled majorant norm bound failed: " + std::to_string(res.norm_sq) +
                               " > " + std::to_string(norm_bound));
}

void apply_rescale(MajorantResult& res, double factor) {
    res.phi *= factor;
    res.norm_sq *= factor * factor;
    res.norm_bound *= factor * factor;
    res.certified_lower *= factor;
    res.rescaled = true;
}

}  // namespace

MajorantResult build_phi_majorant(const BoundaryMeasure& sigma, const StoppingFamily& S,
                                  const Eigen::VectorXd& f, const BoundarySet& F, double lambda) {
    return phi_majorant_core(sigma, S, f, F, lambda, PhiCoreOptions{});
}

MajorantResult build_embedding_majorant(const BoundaryMeasure& mu, const BoundarySet& F,
                                        double lambda, const MajorantOptions& opts) {
    const Geometry& g = mu.geometry();
    if (g.kind() != Kind::bitree)
        throw PreconditionError("bi-tree majorant requires a bi-tree measure");
    require_same_geometry(g, F.geometry(), "build_embedding_majorant");

    if (!opts.relax_preconditions && !(lambda >= kMinBitreeLambda))
        throw PreconditionError("lambda must be at least 9 for the bi-tree construction");

    Eigen::VectorXd A = adjoint_sum(mu);
    Eigen::VectorXd V = hardy_sum(g, A);

    if (!opts.relax_preconditions) {
        for (BoundaryId b = 0; b < g.boundary_count(); ++b)
            if (mu.mass(b) > 0.0 && !(V[g.boundary_node(b)] <= 1.0 + 1e-12))
                throw PreconditionError("potential must not exceed one on the support",
                                        g.boundary_node(b));
    }
    for (BoundaryId b : F.indices())
        if (!(V[g.boundary_node(b)] >= lambda * (1.0 - 1e-12)))
            throw PreconditionError("potential must be at least lambda on F", g.boundary_node(b));

    // Per-slice column aggregate G^{alpha_y}(x) = sum over y-ancestors of the
    // rectangle masses; bounded by one whenever the support hypothesis holds.
    Eigen::VectorXd G = hardy_sum_y(g, A);
    if (!opts.relax_preconditions) {
        for (NodeId v = 0; v < G.size(); ++v)
            if (!(G[v] <= 1.0 + 1e-12))
                throw CertificateError("slice aggregate exceeded one at node " + std::to_string(v));
    }

    SliceDecomposition dec = decompose_target(g, V, F, lambda / 3.0, 1e-12);

    Geometry tree_x = Geometry(Kind::tree, g.x().depth, 0);
    MajorantResult res;
    res.phi = Eigen::VectorXd::Zero(g.node_count());
    res.lambda = lambda;
    res.f_echo = F.indices();
    res.cut_levels = dec.cuts;

    for (const auto& [alpha_y, fx] : dec.f_slices) {
        Eigen::VectorXd v_slice = slice_x(g, V, alpha_y);
        Eigen::VectorXd f_slice = slice_x(g, A, alpha_y);
        Eigen::VectorXd sigma_masses(tree_x.boundary_count());
        for (BoundaryId jx = 0; jx < tree_x.boundary_count(); ++jx)
            sigma_masses[jx] = G[g.node(g.x().leaf_first() + jx, alpha_y)];

        StoppingFamily S = build_stopping_family(tree_x, v_slice, 1.0, Comparison::greater);
        if (S.o_empty()) {
            if (f_slice.isZero())
                continue;  // massless slice contributes nothing either way
            throw PreconditionError("slice stopping family covers the whole tree", -1, alpha_y);
        }
        for (NodeId beta : S.members())
            if (!(v_slice[beta] <= 2.0 + 1e-12))
                throw PreconditionError("stopping member potential bound failed", beta, alpha_y);

        BoundaryMeasure sigma(tree_x, sigma_masses);
        BoundarySet f_set(tree_x, fx);
        PhiCoreOptions core;
        core.precondition_slack = 1e-10;
        core.strict_lambda_gate = false;
        core.strict_complement_bound = false;
        core.slice_context = alpha_y;
        MajorantResult slice = phi_majorant_core(sigma, S, f_slice, f_set, lambda / 3.0, core);

        for (std::int64_t xv = 0; xv < tree_x.node_count(); ++xv)
            res.phi[g.node(xv, alpha_y)] = slice.phi[xv];
        res.slices.push_back({alpha_y, S.members(), fx});
    }

    double energy = A.squaredNorm();
    verify_assembled(g, res, F, 4.0 * lambda / 9.0, 24.0 / lambda * energy, 1e-12);
    if (opts.rescale) apply_rescale(res, 9.0 / 4.0);
    return res;
}

MajorantResult build_truncated_majorant(const BoundaryMeasure& mu, const BoundarySet& F,
                                        double lambda, double delta, const MajorantOptions& opts) {
    const Geometry& g = mu.geometry();
    if (g.kind() != Kind::bitree)
        throw PreconditionError("bi-tree majorant requires a bi-tree measure");
    require_same_geometry(g, F.geometry(), "build_truncated_majorant");
    if (!(delta > 0.0) || delta > 1.0)
        throw PreconditionError("delta must lie in (0, 1]");
    if (!(lambda >= 1.0))
        throw PreconditionError("lambda must be at least 1");

    Eigen::VectorXd Vdelta = truncated_potential(mu, delta).values;
    for (BoundaryId b : F.indices())
        if (!(Vdelta[g.boundary_node(b)] >= lambda * (1.0 - 1e-12)))
            throw PreconditionError("truncated potential must be at least lambda on F",
                                    g.boundary_node(b));

    MajorantResult res;
    res.phi = Eigen::VectorXd::Zero(g.node_count());
    res.lambda = lambda;
    res.f_echo = F.indices();

    NodeSet mask = truncation_set(mu, delta);
    // Rescaled problem: mu' = mu/delta, lambda' = lambda/delta, and the mask
    // is exactly where the rescaled potential stays below one.
    const double lambda_p = lambda / delta;
    BoundaryMeasure mu_p = mu.scaled(1.0 / delta);
    Eigen::VectorXd Ap = adjoint_sum(mu_p);
    Eigen::VectorXd M = Ap;
    for (NodeId v = 0; v < M.size(); ++v)
        if (!mask.contains(v)) M[v] = 0.0;
    const double energy_trunc_p = M.squaredNorm();  // E_1[mu'] = E_delta[mu]/delta^2

    if (mask.empty() || F.empty()) {
        // Nothing below the truncation level (then F is empty by the
        // precondition) or no target: the zero majorant settles it.
        res.norm_bound = 24.0 * delta / lambda * (delta * delta * energy_trunc_p);
        res.certified_lower = 4.0 * lambda / 9.0;
        if (opts.rescale) apply_rescale(res, 9.0 / 4.0);
        return res;
    }

    if (!opts.relax_preconditions && !(lambda_p >= 9.0))
        throw PreconditionError("lambda/delta must be at least 9 for the truncated construction");

    Eigen::VectorXd g1 = hardy_sum_y(g, M);
    Eigen::VectorXd V1 = hardy_sum(g, M);
    for (NodeId v = 0; v < g1.size(); ++v)
        if (!(g1[v] <= 1.0 + 1e-12))
            throw CertificateError("truncated slice aggregate exceeded one at node " +
                                   std::to_string(v));

    SliceDecomposition dec = decompose_target(g, V1, F, lambda_p / 3.0, 1e-12);
    Geometry tree_x = Geometry(Kind::tree, g.x().depth, 0);
    res.cut_levels = dec.cuts;

    for (const auto& [alpha_y, fx] : dec.f_slices) {
        Eigen::VectorXd g1_slice = slice_x(g, g1, alpha_y);
        Eigen::VectorXd f1_slice = slice_x(g, M, alpha_y);
        Eigen::VectorXd v1_slice = slice_x(g, V1, alpha_y);

        auto superadd = superharmonicity_check(tree_x, g1_slice, Harmonicity::two_point);
        if (!superadd.holds)
            throw CertificateError("slice aggregate lost superadditivity at node " +
                                   std::to_string(superadd.violating_node) + " in slice " +
                                   std::to_string(alpha_y));

        StoppingFamily S = build_stopping_family(tree_x, v1_slice, 1.0, Comparison::greater_equal);
        if (S.o_empty()) {
            if (f1_slice.isZero()) continue;
            throw PreconditionError("slice stopping family covers the whole tree", -1, alpha_y);
        }

        BoundarySet f_set(tree_x, fx);
        BoundaryMeasure rho = equilibrium_measure(tree_x, f_set, 1e-10);
        BoundaryMeasure sigma = rho.scaled(lambda_p / 3.0);

        // The equilibrium potential matches the slice aggregate on the target
        // set, so the two-point minimum principle dominates it everywhere;
        // that is what makes sigma admissible for the tree majorant.
        Eigen::VectorXd G_node = adjoint_sum(sigma);
        auto mp = min_principle_check(tree_x, g1_slice, G_node);
        if (!mp.holds)
            throw PreconditionError("minimum principle hypothesis failed",
                                    mp.boundary_witness, alpha_y);

        PhiCoreOptions core;
        core.precondition_slack = 1e-7;
        core.strict_lambda_gate = false;
        core.strict_complement_bound = false;
        core.slice_context = alpha_y;
        MajorantResult slice = phi_majorant_core(sigma, S, f1_slice, f_set, lambda_p / 3.0, core);

        for (std::int64_t xv = 0; xv < tree_x.node_count(); ++xv)
            res.phi[g.node(xv, alpha_y)] = slice.phi[xv];
        res.slices.push_back({alpha_y, S.members(), fx});
    }

    // Verify at the rescaled level, then return delta * phi so the bounds
    // read against the original measure.
    verify_assembled(g, res, F, 4.0 * lambda_p / 9.0, 24.0 / lambda_p * energy_trunc_p, 1e-7);
    apply_rescale(res, delta);
    res.rescaled = false;  // the delta factor is part of the construction
    if (opts.rescale) apply_rescale(res, 9.0 / 4.0);
    return res;
}

PeelingResult peel_measure(const BoundaryMeasure& nu, double C) {
    if (!(C > 0.0)) throw PreconditionError("peeling constant must be positive");
    const Geometry& g = nu.geometry();

    PeelingResult res;
    res.constant = C;
    res.residual_set = BoundarySet(g);
    res.residual = BoundaryMeasure::zero(g);
    if (nu.is_zero()) return res;

    res.energy_before = total_energy(nu);
    if (!(res.energy_before >= C * nu.total() * (1.0 - 1e-12)))
        throw PreconditionError("energy must be at least C times the total mass");

    // Normalize to the C = 3 case and strip layers of potential <= 1.
    const double scale = 3.0 / C;
    Eigen::VectorXd work = nu.masses() * scale;
    std::vector<std::uint8_t> remaining(static_cast<std::size_t>(g.boundary_count()), 0);
    for (BoundaryId b = 0; b < g.boundary_count(); ++b)
        if (nu.mass(b) > 0.0) remaining[b] = 1;

    while (true) {
        Eigen::VectorXd V = potential(BoundaryMeasure(g, work)).values;
        BoundarySet layer(g);
        bool any = false;
        for (BoundaryId b = 0; b < g.boundary_count(); ++b) {
            if (remaining[b] && V[g.boundary_node(b)] <= 1.0) {
                layer.add(b);
                any = true;
            }
        }
        if (!any) break;
        res.layer_sets.push_back(layer);
        res.layer_measures.push_back(restrict_measure(nu, layer));
        for (BoundaryId b : layer.indices()) {
            remaining[b] = 0;
            work[b] = 0.0;
        }
    }

    BoundarySet tail(g);
    for (BoundaryId b = 0; b < g.boundary_count(); ++b)
        if (remaining[b]) tail.add(b);
    res.residual_set = tail;
    res.residual = restrict_measure(nu, tail);
    res.energy_after = total_energy(res.residual);

    Eigen::VectorXd Vres = potential(res.residual).values;
    for (BoundaryId b : tail.indices())
        if (!(Vres[g.boundary_node(b)] >= C / 3.0 * (1.0 - 1e-12)))
            throw CertificateError("peeled residual potential below C/3 at boundary node " +
                                   std::to_string(b));
    if (!(res.energy_after >= res.energy_before / 6.0 * (1.0 - 1e-12)))
        throw CertificateError("peeled residual kept less than a sixth of the energy");
    return res;
}

BoundaryMeasure equilibrium_measure(const Geometry& geom, const BoundarySet& F, double tolerance) {
    require_tree(geom, "equilibrium_measure");
    require_same_geometry(geom, F.geometry(), "equilibrium_measure");
    if (F.empty()) throw PreconditionError("equilibrium measure needs a nonempty set");

    auto idx = F.indices();
    const Eigen::Index n = static_cast<Eigen::Index>(idx.size());
    Eigen::VectorXd rho_f = Eigen::VectorXd::Zero(n);

    if (n <= 4096) {
        Eigen::MatrixXd K = boundary_kernel_matrix(geom, idx);
        std::vector<Eigen::Index> active(n);
        for (Eigen::Index i = 0; i < n; ++i) active[i] = i;

        // The unconstrained solve is expected to land nonnegative for tree
        // kernels; the loop below only runs when it does not.
        for (int guard = 0; guard < 4 * static_cast<int>(n) + 16; ++guard) {
            const Eigen::Index m = static_cast<Eigen::Index>(active.size());
            Eigen::MatrixXd Ka(m, m);
            for (Eigen::Index i = 0; i < m; ++i)
                for (Eigen::Index j = 0; j < m; ++j) Ka(i, j) = K(active[i], active[j]);
            Eigen::VectorXd x = Ka.ldlt().solve(Eigen::VectorXd::Ones(m));

            Eigen::Index worst = -1;
            for (Eigen::Index i = 0; i < m; ++i)
                if (x[i] < -1e-13 && (worst < 0 || x[i] < x[worst])) worst = i;
            if (worst >= 0) {
                active.erase(active.begin() + worst);
                if (active.empty())
                    throw ConvergenceError("equilibrium active set emptied", 0.0, rho_f);
                continue;
            }

            rho_f.setZero();
            for (Eigen::Index i = 0; i < m; ++i) rho_f[active[i]] = std::max(0.0, x[i]);
            Eigen::VectorXd v = K * rho_f;
            Eigen::Index add = -1;
            double worst_gap = tolerance;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (rho_f[i] > 0.0) continue;
                double gap = 1.0 - v[i];
                if (gap > worst_gap) {
                    worst_gap = gap;
                    add = i;
                }
            }
            if (add < 0) break;
            active.push_back(add);
            std::sort(active.begin(), active.end());
        }
    } else {
        // Projected gradient with a Lipschitz step from the kernel row sums;
        // every iterate stays nonnegative and the fixed point is the KKT
        // point of the energy functional.
        Eigen::VectorXd ones = Eigen::VectorXd::Zero(geom.boundary_count());
        for (BoundaryId b : idx) ones[b] = 1.0;
        Eigen::VectorXd rowsum = potential(BoundaryMeasure(geom, ones)).values;
        double L = 0.0;
        for (BoundaryId b : idx) L = std::max(L, rowsum[geom.boundary_node(b)]);
        const double step = 1.0 / L;
        rho_f.setConstant(1.0 / L);
        for (int it = 0; it < 500000; ++it) {
            Eigen::VectorXd masses = Eigen::VectorXd::Zero(geom.boundary_count());
            for (Eigen::Index i = 0; i < n; ++i) masses[idx[i]] = rho_f[i];
            Eigen::VectorXd V = potential(BoundaryMeasure(geom, masses)).values;
            double res_primal = 0.0, res_dual = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                double v = V[geom.boundary_node(idx[i])];
                res_primal = std::max(res_primal, 1.0 - v);
                if (rho_f[i] > 0.0) res_dual = std::max(res_dual, std::abs(v - 1.0));
            }
            if (res_primal <= tolerance && res_dual <= tolerance) break;
            for (Eigen::Index i = 0; i < n; ++i)
                rho_f[i] = std::max(0.0, rho_f[i] - step * (V[geom.boundary_node(idx[i])] - 1.0));
        }
    }

    Eigen::VectorXd masses = Eigen::VectorXd::Zero(geom.boundary_count());
    for (Eigen::Index i = 0; i < n; ++i) masses[idx[i]] = rho_f[i];
    BoundaryMeasure rho(geom, masses);

    // KKT certificate against the sweep-computed potential, which is an
    // independent route from the dense kernel solve.
    Eigen::VectorXd V = potential(rho).values;
    double res_f = 0.0, res_supp = 0.0;
    for (BoundaryId b : idx) {
        double v = V[geom.boundary_node(b)];
        res_f = std::max(res_f, 1.0 - v);
        if (rho.mass(b) > 0.0) res_supp = std::max(res_supp, std::abs(v - 1.0));
    }
    if (res_f > tolerance || res_supp > tolerance)
        throw ConvergenceError("equilibrium KKT residuals " + std::to_string(res_f) + " / " +
                                   std::to_string(res_supp) + " exceed tolerance",
                               std::max(res_f, res_supp), rho_f);
    return rho;
}

MinPrincipleResult min_principle_check(const Geometry& geom, const Eigen::VectorXd& g,
                                       const Eigen::VectorXd& G) {
    require_tree(geom, "min_principle_check");
    if (g.size() != geom.node_count() || G.size() != geom.node_count())
        throw GeometryMismatchError("min_principle_check: function length does not match");

    const double scale = std::max({1.0, g.cwiseAbs().maxCoeff(), G.cwiseAbs().maxCoeff()});
    const double tol = 1e-12 * scale;
    for (NodeId v = 0; v < g.size(); ++v) {
        if (g[v] < -tol) throw PreconditionError("g must be nonnegative", v);
        if (G[v] < -tol) throw PreconditionError("G must be nonnegative", v);
    }
    for (NodeId v = 0; v < g.size(); ++v) {
        if (geom.x().is_leaf(v)) continue;
        NodeId c0 = TreeAxis::child(v, 0), c1 = TreeAxis::child(v, 1);
        if (g[v] < g[c0] + g[c1] - tol)
            throw PreconditionError("g must be two-point super-harmonic", v);
        if (std::abs(G[v] - G[c0] - G[c1]) > tol)
            throw PreconditionError("G must be two-point harmonic", v);
    }

    Eigen::VectorXd Ig = hardy_sum(geom, g);
    Eigen::VectorXd IG = hardy_sum(geom, G);
    const double itol = 1e-12 * std::max({1.0, Ig.cwiseAbs().maxCoeff(), IG.cwiseAbs().maxCoeff()});

    MinPrincipleResult res;
    NodeId bad = -1;
    for (NodeId v = 0; v < Ig.size(); ++v) {
        if (Ig[v] < IG[v] - itol) {
            bad = v;
            break;
        }
    }
    if (bad < 0) return res;

    res.holds = false;
    // Walk up to a vertex where the pointwise inequality also fails, then
    // descend through children that keep failing it; the walk must end at a
    // boundary node of P with Ig < IG.
    NodeId v = bad;
    while (g[v] >= G[v] && v != 0) v = TreeAxis::parent(v);
    res.good_vertex = v;
    res.descent_path.push_back(v);
    while (!geom.x().is_leaf(v)) {
        NodeId c0 = TreeAxis::child(v, 0), c1 = TreeAxis::child(v, 1);
        v = (g[c0] - G[c0] <= g[c1] - G[c1]) ? c0 : c1;
        res.descent_path.push_back(v);
    }
    res.boundary_witness = geom.boundary_index(v);
    return res;
}

HarmonicityReport superharmonicity_check(const Geometry& geom, const Eigen::VectorXd& h,
                                         Harmonicity kind, double tol) {
    require_tree(geom, "superharmonicity_check");
    if (h.size() != geom.node_count())
        throw GeometryMismatchError("superharmonicity_check: function length does not match");
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());

    HarmonicityReport rep;
    for (NodeId v = 0; v < h.size(); ++v) {
        if (geom.x().is_leaf(v)) continue;
        NodeId c0 = TreeAxis::child(v, 0), c1 = TreeAxis::child(v, 1);
        if (kind == Harmonicity::two_point) {
            if (h[v] < h[c0] + h[c1] - tol * scale) {
                rep.holds = false;
                rep.violating_node = v;
                return rep;
            }
        } else if (v != 0) {
            double avg = (h[c0] + h[c1] + h[TreeAxis::parent(v)]) / 3.0;
            if (h[v] < avg - tol * scale) {
                rep.holds = false;
                rep.violating_node = v;
                return rep;
            }
        }
    }
    return rep;
}

Eigen::VectorXd slice_g1(const BoundaryMeasure& mu, const NodeSet& mask, NodeId alpha_y) {
    const Geometry& g = mu.geometry();
    require_same_geometry(g, mask.geometry(), "slice_g1");
    Eigen::VectorXd M = adjoint_sum(mu);
    for (NodeId v = 0; v < M.size(); ++v)
        if (!mask.contains(v)) M[v] = 0.0;
    return slice_x(g, hardy_sum_y(g, M), alpha_y);
}

Eigen::VectorXd slice_f1(const BoundaryMeasure& mu, const NodeSet& mask, NodeId alpha_y) {
    const Geometry& g = mu.geometry();
    require_same_geometry(g, mask.geometry(), "slice_f1");
    Eigen::VectorXd M = adjoint_sum(mu);
    for (NodeId v = 0; v < M.size(); ++v)
        if (!mask.contains(v)) M[v] = 0.0;
    return slice_x(g, M, alpha_y);
}

}  // namespace bitree
