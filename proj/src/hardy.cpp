#include "bitree/hardy.hpp"

#include <bit>
#include <cmath>
#include <string>

namespace bitree {

namespace {

constexpr std::int64_t kCompensatedThreshold = std::int64_t{1} << 20;

// Neumaier-compensated sum; plain accumulation loses too much headroom on
// boundary sums past ~2^20 terms and the inequality checks need ~1e-10 slack.
double compensated_sum(const double* v, std::int64_t n) {
    double s = 0.0, c = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        double t = s + v[i];
        if (std::abs(s) >= std::abs(v[i]))
            c += (s - t) + v[i];
        else
            c += (v[i] - t) + s;
        s = t;
    }
    return s + c;
}

void check_length(const Geometry& geom, const Eigen::VectorXd& f, const char* what) {
    if (f.size() != geom.node_count())
        throw GeometryMismatchError(std::string(what) + ": node function length does not match");
}

}  // namespace

Eigen::VectorXd hardy_sum(const Geometry& geom, const Eigen::VectorXd& f) {
    check_length(geom, f, "hardy_sum");
    const std::int64_t nx = geom.x().node_count(), ny = geom.y().node_count();
    Eigen::VectorXd s(f.size());
    for (std::int64_t xv = 0; xv < nx; ++xv) {
        const std::int64_t px = xv > 0 ? TreeAxis::parent(xv) : -1;
        for (std::int64_t yv = 0; yv < ny; ++yv) {
            double v = f[geom.node(xv, yv)];
            if (px >= 0) v += s[geom.node(px, yv)];
            if (yv > 0) {
                const std::int64_t py = TreeAxis::parent(yv);
                v += s[geom.node(xv, py)];
                if (px >= 0) v -= s[geom.node(px, py)];
            }
            s[geom.node(xv, yv)] = v;
        }
    }
    return s;
}

Eigen::VectorXd adjoint_sum(const Geometry& geom, const Eigen::VectorXd& f) {
    check_length(geom, f, "adjoint_sum");
    const std::int64_t nx = geom.x().node_count(), ny = geom.y().node_count();
    Eigen::VectorXd a = f;
    for (std::int64_t xv = 0; xv < nx; ++xv)
        for (std::int64_t yv = geom.y().leaf_first() - 1; yv >= 0; --yv)
            a[geom.node(xv, yv)] += a[geom.node(xv, 2 * yv + 1)] + a[geom.node(xv, 2 * yv + 2)];
    for (std::int64_t xv = geom.x().leaf_first() - 1; xv >= 0; --xv)
        for (std::int64_t yv = 0; yv < ny; ++yv)
            a[geom.node(xv, yv)] += a[geom.node(2 * xv + 1, yv)] + a[geom.node(2 * xv + 2, yv)];
    return a;
}

Eigen::VectorXd adjoint_sum(const BoundaryMeasure& mu) {
    const Geometry& g = mu.geometry();
    Eigen::VectorXd f = Eigen::VectorXd::Zero(g.node_count());
    for (BoundaryId b = 0; b < g.boundary_count(); ++b) f[g.boundary_node(b)] = mu.mass(b);
    return adjoint_sum(g, f);
}

Eigen::VectorXd hardy_sum_y(const Geometry& geom, const Eigen::VectorXd& f) {
    check_length(geom, f, "hardy_sum_y");
    const std::int64_t nx = geom.x().node_count(), ny = geom.y().node_count();
    Eigen::VectorXd s = f;
    for (std::int64_t xv = 0; xv < nx; ++xv)
        for (std::int64_t yv = 1; yv < ny; ++yv)
            s[geom.node(xv, yv)] += s[geom.node(xv, TreeAxis::parent(yv))];
    return s;
}

Eigen::VectorXd hardy_sum_x(const Geometry& geom, const Eigen::VectorXd& f) {
    check_length(geom, f, "hardy_sum_x");
    const std::int64_t nx = geom.x().node_count(), ny = geom.y().node_count();
    Eigen::VectorXd s = f;
    for (std::int64_t xv = 1; xv < nx; ++xv) {
        const std::int64_t px = TreeAxis::parent(xv);
        for (std::int64_t yv = 0; yv < ny; ++yv)
            s[geom.node(xv, yv)] += s[geom.node(px, yv)];
    }
    return s;
}

PotentialField potential(const BoundaryMeasure& mu) {
    return {hardy_sum(mu.geometry(), adjoint_sum(mu)), std::nullopt};
}

NodeSet truncation_set(const BoundaryMeasure& mu, double delta) {
    if (!(delta > 0.0) || delta > 1.0)
        throw PreconditionError("truncation level must lie in (0, 1]");
    Eigen::VectorXd v = potential(mu).values;
    NodeSet E(mu.geometry());
    for (NodeId a = 0; a < v.size(); ++a)
        if (v[a] < delta) E.add(a);
    return E;
}

PotentialField truncated_potential(const BoundaryMeasure& mu, double delta) {
    NodeSet E = truncation_set(mu, delta);
    Eigen::VectorXd a = adjoint_sum(mu);
    for (NodeId v = 0; v < a.size(); ++v)
        if (!E.contains(v)) a[v] = 0.0;
    return {hardy_sum(mu.geometry(), a), delta};
}

EnergyReport energy(const BoundaryMeasure& mu, const EnergyOptions& opts) {
    EnergyReport rep;
    Eigen::VectorXd a = adjoint_sum(mu);
    Eigen::VectorXd sq = a.array().square();
    rep.total = a.size() >= kCompensatedThreshold ? compensated_sum(sq.data(), sq.size()) : sq.sum();

    if (opts.E) {
        require_same_geometry(mu.geometry(), opts.E->geometry(), "energy");
        NodeSet R = shadow_downset(*opts.E);
        double local = 0.0;
        for (NodeId v = 0; v < a.size(); ++v)
            if (R.contains(v)) local += sq[v];
        rep.local = local;
        rep.restricted = total_energy(restrict_measure(mu, *opts.E));
    }
    if (opts.delta) {
        NodeSet Ed = truncation_set(mu, *opts.delta);
        double tr = 0.0;
        for (NodeId v = 0; v < a.size(); ++v)
            if (Ed.contains(v)) tr += sq[v];
        rep.truncated = tr;
    }
    return rep;
}

double total_energy(const BoundaryMeasure& mu) {
    Eigen::VectorXd a = adjoint_sum(mu);
    Eigen::VectorXd sq = a.array().square();
    return a.size() >= kCompensatedThreshold ? compensated_sum(sq.data(), sq.size()) : sq.sum();
}

double mutual_energy(const BoundaryMeasure& mu, const BoundarySet& E, const BoundarySet& F) {
    require_same_geometry(mu.geometry(), E.geometry(), "mutual_energy");
    require_same_geometry(mu.geometry(), F.geometry(), "mutual_energy");
    Eigen::VectorXd ae = adjoint_sum(restrict_measure(mu, E));
    Eigen::VectorXd af = adjoint_sum(restrict_measure(mu, F));
    Eigen::VectorXd prod = ae.cwiseProduct(af);
    return prod.size() >= kCompensatedThreshold ? compensated_sum(prod.data(), prod.size())
                                                : prod.sum();
}

double boundary_kernel(const Geometry& geom, BoundaryId a, BoundaryId b) {
    const std::int64_t ax = a / geom.y().leaf_count(), ay = a % geom.y().leaf_count();
    const std::int64_t bx = b / geom.y().leaf_count(), by = b % geom.y().leaf_count();
    auto axis_common = [](std::int64_t i, std::int64_t j, int depth) {
        const int diff = std::bit_width(static_cast<std::uint64_t>(i ^ j));
        return static_cast<double>(depth - diff + 1);
    };
    return axis_common(ax, bx, geom.x().depth) * axis_common(ay, by, geom.y().depth);
}

Eigen::MatrixXd boundary_kernel_matrix(const Geometry& geom, const std::vector<BoundaryId>& idx) {
    if (idx.size() > 4096)
        throw SizeLimitError("dense kernel matrix is guarded to 4096 boundary nodes, got " +
                             std::to_string(idx.size()));
    const Eigen::Index n = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j)
            K(i, j) = K(j, i) = boundary_kernel(geom, idx[i], idx[j]);
    return K;
}

double integrate_boundary(const Eigen::VectorXd& boundary_values, const BoundaryMeasure& mu) {
    if (boundary_values.size() != mu.geometry().boundary_count())
        throw GeometryMismatchError("integrate_boundary: length does not match boundary count");
    Eigen::VectorXd prod = boundary_values.cwiseProduct(mu.masses());
    return prod.size() >= kCompensatedThreshold ? compensated_sum(prod.data(), prod.size())
                                                : prod.sum();
}

double mass_above(const BoundaryMeasure& mu, const Eigen::VectorXd& node_values, double lambda) {
    const Geometry& g = mu.geometry();
    double m = 0.0;
    for (BoundaryId b = 0; b < g.boundary_count(); ++b)
        if (node_values[g.boundary_node(b)] >= lambda) m += mu.mass(b);
    return m;
}

}  // namespace bitree
