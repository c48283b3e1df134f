#include "bitree/constants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bitree/rng.hpp"

namespace bitree {

std::string to_string(ConstantKind k) {
    switch (k) {
        case ConstantKind::box: return "box";
        case ConstantKind::carleson: return "carleson";
        case ConstantKind::rec: return "rec";
        case ConstantKind::hereditary: return "hereditary";
        case ConstantKind::embedding: return "embedding";
    }
    return "?";
}

std::string to_string(Method m) {
    switch (m) {
        case Method::exhaustive: return "exhaustive";
        case Method::local_search: return "local_search";
        case Method::spectral: return "spectral";
    }
    return "?";
}

namespace {

using Selection = std::vector<std::uint8_t>;

// Shared scratch for the subset maximizations: per-node support counts, the
// squared rectangle masses, and reusable sweep buffers.
class SupportWorkspace {
  public:
    explicit SupportWorkspace(const BoundaryMeasure& mu)
        : geom_(mu.geometry()), mu_(mu), supp_(mu.support()) {
        const std::int64_t n = geom_.node_count();
        sqA_ = adjoint_sum(mu).array().square();
        cnt_supp_.assign(n, 0.0);
        buf_.assign(n, 0.0);
        buf2_.assign(n, 0.0);
        for (BoundaryId b : supp_) cnt_supp_[geom_.boundary_node(b)] = 1.0;
        sweep_bottom_up(cnt_supp_.data());
        supp_nodes_.reserve(supp_.size());
        for (BoundaryId b : supp_) supp_nodes_.push_back(geom_.boundary_node(b));
    }

    const std::vector<BoundaryId>& support() const { return supp_; }
    const Geometry& geometry() const { return geom_; }

    double selected_mass(const Selection& sel) const {
        double m = 0.0;
        for (std::size_t i = 0; i < sel.size(); ++i)
            if (sel[i]) m += mu_.mass(supp_[i]);
        return m;
    }

    // sum_{R in R_{E u Z}} mu(R)^2 / mu(E): massless squares are folded into
    // E, so a node belongs to the rectangle family iff every support atom in
    // its shadow is selected.
    double carleson_objective(const Selection& sel) {
        double me = selected_mass(sel);
        if (me <= 0.0) return 0.0;
        count_sweep(sel);
        double num = 0.0;
        for (std::int64_t v = 0; v < geom_.node_count(); ++v)
            if (buf_[v] == cnt_supp_[v]) num += sqA_[v];
        return num / me;
    }

    // E[mu|E] / mu(E).
    double rec_objective(const Selection& sel) {
        double me = selected_mass(sel);
        if (me <= 0.0) return 0.0;
        mass_sweep(sel, buf_.data());
        double num = 0.0;
        for (std::int64_t v = 0; v < geom_.node_count(); ++v) num += buf_[v] * buf_[v];
        return num / me;
    }

    // sum_{R in R_{F u Z}} mu(R cap U_E)^2 / mu(E cap F).  Only E cap F
    // matters in the numerator, so callers pass G = E cap F directly.
    double hereditary_objective(const Selection& selG, const Selection& selF) {
        double mg = selected_mass(selG);
        if (mg <= 0.0) return 0.0;
        count_sweep(selF);
        mass_sweep(selG, buf2_.data());
        double num = 0.0;
        for (std::int64_t v = 0; v < geom_.node_count(); ++v)
            if (buf_[v] == cnt_supp_[v]) num += buf2_[v] * buf2_[v];
        return num / mg;
    }

    // Boundary siblings of a support atom that complete its dyadic 2x2 block,
    // reported as support positions.
    std::vector<std::size_t> block_siblings(std::size_t i) const {
        std::vector<std::size_t> out;
        const std::int64_t ly = geom_.y().leaf_count();
        std::int64_t jx = supp_[i] / ly, jy = supp_[i] % ly;
        for (int dx = 0; dx < 2; ++dx)
            for (int dy = 0; dy < 2; ++dy) {
                if (dx == 0 && dy == 0) continue;
                std::int64_t sx = dx ? (jx ^ 1) : jx;
                std::int64_t sy = dy ? (jy ^ 1) : jy;
                if (geom_.kind() == Kind::tree && dy) continue;
                auto it = std::lower_bound(supp_.begin(), supp_.end(), sx * ly + sy);
                if (it != supp_.end() && *it == sx * ly + sy)
                    out.push_back(static_cast<std::size_t>(it - supp_.begin()));
            }
        return out;
    }

  private:
    void sweep_bottom_up(double* a) const {
        const std::int64_t nx = geom_.x().node_count(), ny = geom_.y().node_count();
        for (std::int64_t xv = 0; xv < nx; ++xv)
            for (std::int64_t yv = geom_.y().leaf_first() - 1; yv >= 0; --yv)
                a[geom_.node(xv, yv)] = a[geom_.node(xv, 2 * yv + 1)] + a[geom_.node(xv, 2 * yv + 2)];
        for (std::int64_t xv = geom_.x().leaf_first() - 1; xv >= 0; --xv)
            for (std::int64_t yv = 0; yv < ny; ++yv)
                a[geom_.node(xv, yv)] = a[geom_.node(2 * xv + 1, yv)] + a[geom_.node(2 * xv + 2, yv)];
    }

    void count_sweep(const Selection& sel) {
        std::fill(buf_.begin(), buf_.end(), 0.0);
        for (std::size_t i = 0; i < sel.size(); ++i)
            if (sel[i]) buf_[supp_nodes_[i]] = 1.0;
        sweep_bottom_up(buf_.data());
    }

    void mass_sweep(const Selection& sel, double* out) {
        std::fill(out, out + geom_.node_count(), 0.0);
        for (std::size_t i = 0; i < sel.size(); ++i)
            if (sel[i]) out[supp_nodes_[i]] = mu_.mass(supp_[i]);
        sweep_bottom_up(out);
    }

    Geometry geom_;
    const BoundaryMeasure& mu_;
    std::vector<BoundaryId> supp_;
    std::vector<NodeId> supp_nodes_;
    Eigen::VectorXd sqA_;
    std::vector<double> cnt_supp_;
    std::vector<double> buf_;
    std::vector<double> buf2_;
};

std::vector<BoundaryId> selection_indices(const SupportWorkspace& ws, const Selection& sel) {
    std::vector<BoundaryId> out;
    for (std::size_t i = 0; i < sel.size(); ++i)
        if (sel[i]) out.push_back(ws.support()[i]);
    return out;
}

Selection selection_from_mask(std::size_t s, std::uint32_t mask) {
    Selection sel(s, 0);
    for (std::size_t i = 0; i < s; ++i)
        if (mask & (1u << i)) sel[i] = 1;
    return sel;
}

// Ties in the argmax are broken by smallest cardinality, then lexicographic
// order of the sorted index list, for determinism.
bool witness_preferred(const std::vector<BoundaryId>& a, const std::vector<BoundaryId>& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
}

using Objective = double (SupportWorkspace::*)(const Selection&);

ConstantReport subset_max_exhaustive(const BoundaryMeasure& mu, ConstantKind kind, Objective obj,
                                     const SearchStrategy& strategy) {
    SupportWorkspace ws(mu);
    const std::size_t s = ws.support().size();
    if (static_cast<int>(s) > strategy.max_exhaustive_support)
        throw SizeLimitError("exhaustive scan over " + std::to_string(s) +
                             " support atoms exceeds the limit " +
                             std::to_string(strategy.max_exhaustive_support));

    ConstantReport rep;
    rep.kind = kind;
    rep.method = Method::exhaustive;
    if (s == 0) return rep;

    for (std::uint32_t mask = 1; mask < (1u << s); ++mask) {
        Selection sel = selection_from_mask(s, mask);
        double v = (ws.*obj)(sel);
        ++rep.iterations;
        if (v > rep.value) {
            rep.value = v;
            rep.witness_e = selection_indices(ws, sel);
        } else if (v == rep.value && rep.value > 0.0) {
            auto idx = selection_indices(ws, sel);
            if (witness_preferred(idx, rep.witness_e)) rep.witness_e = std::move(idx);
        }
    }
    return rep;
}

// Bit-flip hill climbing with random restarts plus a block-completion move:
// pure flips stall on rectangle-completion cliffs because R_E only grows when
// a whole dyadic block enters E.
ConstantReport subset_max_search(const BoundaryMeasure& mu, ConstantKind kind, Objective obj,
                                 const SearchStrategy& strategy) {
    SupportWorkspace ws(mu);
    const std::size_t s = ws.support().size();
    ConstantReport rep;
    rep.kind = kind;
    rep.method = Method::local_search;
    rep.lower_bound_only = true;
    rep.restarts = strategy.restarts;
    if (s == 0) return rep;

    Rng rng(derive_seed(strategy.seed, "subset_search", static_cast<std::uint64_t>(kind)));

    for (int r = 0; r < std::max(1, strategy.restarts); ++r) {
        Selection sel(s, 1);
        if (r > 0) {
            do {
                for (auto& b : sel) b = rng.bernoulli(0.5) ? 1 : 0;
            } while (ws.selected_mass(sel) <= 0.0);
        }
        double cur = (ws.*obj)(sel);
        bool improved = true;
        while (improved) {
            improved = false;
            Selection best_sel;
            double best_val = cur;
            for (std::size_t i = 0; i < s; ++i) {
                Selection cand = sel;
                cand[i] ^= 1;
                if (ws.selected_mass(cand) <= 0.0) continue;
                double v = (ws.*obj)(cand);
                ++rep.iterations;
                if (v > best_val) {
                    best_val = v;
                    best_sel = std::move(cand);
                }
            }
            for (std::size_t i = 0; i < s; ++i) {
                if (!sel[i]) continue;
                auto sibs = ws.block_siblings(i);
                if (sibs.empty()) continue;
                Selection cand = sel;
                bool changed = false;
                for (std::size_t j : sibs)
                    if (!cand[j]) cand[j] = 1, changed = true;
                if (!changed) continue;
                double v = (ws.*obj)(cand);
                ++rep.iterations;
                if (v > best_val) {
                    best_val = v;
                    best_sel = std::move(cand);
                }
            }
            if (best_val > cur) {
                cur = best_val;
                sel = std::move(best_sel);
                improved = true;
            }
        }
        if (cur > rep.value) {
            rep.value = cur;
            rep.witness_e = selection_indices(ws, sel);
        }
    }
    return rep;
}

}  // namespace

ConstantReport box_constant(const BoundaryMeasure& mu) {
    const Geometry& g = mu.geometry();
    Eigen::VectorXd a = adjoint_sum(mu);
    Eigen::VectorXd s = adjoint_sum(g, Eigen::VectorXd(a.array().square()));
    ConstantReport rep;
    rep.kind = ConstantKind::box;
    rep.method = Method::exhaustive;
    for (NodeId v = 0; v < a.size(); ++v) {
        if (a[v] <= 0.0) continue;
        double ratio = s[v] / a[v];
        if (ratio > rep.value) {
            rep.value = ratio;
            rep.witness_e = {v};
        }
    }
    return rep;
}

ConstantReport carleson_constant(const BoundaryMeasure& mu, const SearchStrategy& strategy) {
    return strategy.exhaustive
               ? subset_max_exhaustive(mu, ConstantKind::carleson, &SupportWorkspace::carleson_objective, strategy)
               : subset_max_search(mu, ConstantKind::carleson, &SupportWorkspace::carleson_objective, strategy);
}

ConstantReport rec_constant(const BoundaryMeasure& mu, const SearchStrategy& strategy) {
    return strategy.exhaustive
               ? subset_max_exhaustive(mu, ConstantKind::rec, &SupportWorkspace::rec_objective, strategy)
               : subset_max_search(mu, ConstantKind::rec, &SupportWorkspace::rec_objective, strategy);
}

ConstantReport hereditary_constant(const BoundaryMeasure& mu, const SearchStrategy& strategy) {
    SupportWorkspace ws(mu);
    const std::size_t s = ws.support().size();
    ConstantReport rep;
    rep.kind = ConstantKind::hereditary;
    if (s == 0) {
        rep.method = strategy.exhaustive ? Method::exhaustive : Method::local_search;
        return rep;
    }

    if (strategy.exhaustive) {
        if (static_cast<int>(s) > strategy.max_exhaustive_support ||
            std::pow(3.0, static_cast<double>(s)) > 2e8)
            throw SizeLimitError("exhaustive pair scan over " + std::to_string(s) +
                                 " support atoms is too large");
        rep.method = Method::exhaustive;
        for (std::uint32_t f = 1; f < (1u << s); ++f) {
            Selection selF = selection_from_mask(s, f);
            for (std::uint32_t gmask = f;; gmask = (gmask - 1) & f) {
                if (gmask) {
                    Selection selG = selection_from_mask(s, gmask);
                    double v = ws.hereditary_objective(selG, selF);
                    ++rep.iterations;
                    if (v > rep.value) {
                        rep.value = v;
                        rep.witness_e = selection_indices(ws, selG);
                        rep.witness_f = selection_indices(ws, selF);
                    }
                }
                if (gmask == 0) break;
            }
        }
        return rep;
    }

    // Alternating maximization: hill-climb E with F fixed, then F with E
    // fixed, until neither side improves.
    rep.method = Method::local_search;
    rep.lower_bound_only = true;
    rep.restarts = strategy.restarts;
    Rng rng(derive_seed(strategy.seed, "hereditary_search"));
    for (int r = 0; r < std::max(1, strategy.restarts); ++r) {
        Selection selE(s, 1), selF(s, 1);
        if (r > 0) {
            do {
                for (auto& b : selF) b = rng.bernoulli(0.5) ? 1 : 0;
                for (std::size_t i = 0; i < s; ++i) selE[i] = selF[i] && rng.bernoulli(0.75);
            } while (ws.selected_mass(selE) <= 0.0);
        }
        double cur = ws.hereditary_objective(selE, selF);
        bool any = true;
        while (any) {
            any = false;
            for (Selection* side : {&selE, &selF}) {
                bool improved = true;
                while (improved) {
                    improved = false;
                    for (std::size_t i = 0; i < s; ++i) {
                        (*side)[i] ^= 1;
                        Selection g(s);
                        for (std::size_t j = 0; j < s; ++j) g[j] = selE[j] & selF[j];
                        double v = ws.selected_mass(g) > 0.0 ? ws.hereditary_objective(g, selF) : 0.0;
                        ++rep.iterations;
                        if (v > cur) {
                            cur = v;
                            improved = true;
                            any = true;
                        } else {
                            (*side)[i] ^= 1;
                        }
                    }
                }
            }
        }
        if (cur > rep.value) {
            rep.value = cur;
            Selection g(s);
            for (std::size_t j = 0; j < s; ++j) g[j] = selE[j] & selF[j];
            rep.witness_e = selection_indices(ws, g);
            rep.witness_f = selection_indices(ws, selF);
        }
    }
    return rep;
}

ConstantReport embedding_constant(const BoundaryMeasure& mu, double tolerance,
                                  std::int64_t max_iterations) {
    if (!(tolerance > 0.0)) throw PreconditionError("spectral tolerance must be positive");
    const Geometry& g = mu.geometry();
    auto supp = mu.support();
    ConstantReport rep;
    rep.kind = ConstantKind::embedding;
    rep.method = Method::spectral;
    if (supp.empty()) return rep;

    const std::size_t s = supp.size();
    Eigen::VectorXd w(s);
    for (std::size_t i = 0; i < s; ++i) w[i] = mu.mass(supp[i]);

    Eigen::VectorXd psi = Eigen::VectorXd::Ones(s);
    Eigen::VectorXd node_buf(g.node_count());

    auto weighted_norm_sq = [&](const Eigen::VectorXd& v) { return v.cwiseProduct(v).dot(w); };

    psi /= std::sqrt(weighted_norm_sq(psi));
    double rayleigh = 0.0;
    int stable = 0;
    std::int64_t it = 0;
    for (; it < max_iterations; ++it) {
        node_buf.setZero();
        for (std::size_t i = 0; i < s; ++i) node_buf[g.boundary_node(supp[i])] = psi[i] * w[i];
        Eigen::VectorXd a = adjoint_sum(g, node_buf);
        double rq = a.squaredNorm();  // = <B psi, psi>_mu for unit psi
        Eigen::VectorXd b = hardy_sum(g, a);
        Eigen::VectorXd next(s);
        for (std::size_t i = 0; i < s; ++i) next[i] = b[g.boundary_node(supp[i])];

        double change = std::abs(rq - rayleigh);
        rayleigh = rq;
        if (change <= tolerance * std::max(rq, std::numeric_limits<double>::min())) {
            if (++stable >= 3) {
                ++it;
                break;
            }
        } else {
            stable = 0;
        }
        double nn = weighted_norm_sq(next);
        if (nn <= 0.0) break;  // measure-null iterate: operator is zero
        psi = next / std::sqrt(nn);
    }
    if (stable < 3 && rayleigh > 0.0 && it >= max_iterations)
        throw ConvergenceError("power iteration did not converge in " + std::to_string(max_iterations) +
                                   " iterations",
                               rayleigh, psi);
    rep.value = rayleigh;
    rep.witness_psi = psi;
    for (BoundaryId b : supp) rep.witness_e.push_back(b);
    rep.iterations = it;
    return rep;
}

double evaluate_witness(const BoundaryMeasure& mu, const ConstantReport& report) {
    if (report.kind == ConstantKind::box) {
        if (report.witness_e.empty()) return 0.0;
        NodeId v = report.witness_e.front();
        Eigen::VectorXd a = adjoint_sum(mu);
        Eigen::VectorXd s = adjoint_sum(mu.geometry(), Eigen::VectorXd(a.array().square()));
        return a[v] > 0.0 ? s[v] / a[v] : 0.0;
    }
    if (report.kind == ConstantKind::embedding) {
        if (report.witness_psi.size() == 0) return 0.0;
        const Geometry& g = mu.geometry();
        Eigen::VectorXd node_buf = Eigen::VectorXd::Zero(g.node_count());
        double denom = 0.0;
        for (std::size_t i = 0; i < report.witness_e.size(); ++i) {
            BoundaryId b = report.witness_e[i];
            node_buf[g.boundary_node(b)] = report.witness_psi[i] * mu.mass(b);
            denom += report.witness_psi[i] * report.witness_psi[i] * mu.mass(b);
        }
        if (denom <= 0.0) return 0.0;
        return adjoint_sum(g, node_buf).squaredNorm() / denom;
    }

    SupportWorkspace ws(mu);
    const auto& supp = ws.support();
    auto to_selection = [&](const std::vector<BoundaryId>& idx) {
        Selection sel(supp.size(), 0);
        for (BoundaryId b : idx) {
            auto it = std::lower_bound(supp.begin(), supp.end(), b);
            if (it != supp.end() && *it == b) sel[static_cast<std::size_t>(it - supp.begin())] = 1;
        }
        return sel;
    };
    Selection e = to_selection(report.witness_e);
    switch (report.kind) {
        case ConstantKind::carleson: return ws.carleson_objective(e);
        case ConstantKind::rec: return ws.rec_objective(e);
        case ConstantKind::hereditary: {
            Selection f = to_selection(report.witness_f);
            return ws.hereditary_objective(e, f);
        }
        default: return 0.0;
    }
}

OrderingReport ordering_report(const BoundaryMeasure& mu, const SearchStrategy& strategy,
                               double spectral_tol) {
    OrderingReport rep;
    rep.box = box_constant(mu);
    rep.carleson = carleson_constant(mu, strategy);
    rep.rec = rec_constant(mu, strategy);
    rep.hereditary = hereditary_constant(mu, strategy);
    rep.embedding = embedding_constant(mu, spectral_tol);
    rep.all_exhaustive = strategy.exhaustive;

    if (rep.all_exhaustive) {
        auto leq = [](double a, double b) { return a <= b * (1.0 + 1e-9) + 1e-15; };
        auto record = [&](double a, double b, const char* name) {
            if (!leq(a, b) && rep.orderings_hold) {
                rep.orderings_hold = false;
                rep.violation = name;
            }
        };
        record(rep.box.value, rep.carleson.value, "box <= carleson");
        record(rep.carleson.value, rep.rec.value, "carleson <= rec");
        record(rep.rec.value, rep.embedding.value, "rec <= embedding");
        record(rep.rec.value, rep.hereditary.value, "rec <= hereditary");
        record(rep.hereditary.value, rep.embedding.value, "hereditary <= embedding");
    }

    if (mu.geometry().kind() == Kind::tree && rep.all_exhaustive &&
        rep.carleson.value <= 1.0 + 1e-9) {
        Eigen::VectorXd a = adjoint_sum(mu);
        double stat = 0.0;
        for (NodeId v = 0; v < a.size(); ++v)
            if (a[v] > 0.0)
                stat = std::max(stat, a[v] * (mu.geometry().generation(v).x + 1));
        rep.tree_generation_statistic = stat;
    }
    return rep;
}

}  // namespace bitree
