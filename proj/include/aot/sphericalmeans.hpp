#pragma once

#include "aot/acoustics.hpp"
#include "aot/grid.hpp"
#include "aot/helmholtz.hpp"
#include "aot/pcg.hpp"

namespace aot {

// Discrete circular means transform on the lattice Y x radii with n_theta
// angular quadrature nodes. The operator is matrix-free: each (center, radius)
// row is generated on demand from the bilinear sampling weights.
struct RadonOperator {
    Grid grid;
    std::vector<Point> centers;
    std::vector<double> radii;
    int n_theta = 720;
    SubdomainMask support; // inversion support D
    std::vector<double> cos_t, sin_t;

    RadonOperator(const Grid& g, std::vector<Point> centers_, std::vector<double> radii_,
                  int n_theta_, SubdomainMask support_)
        : grid(g), centers(std::move(centers_)), radii(std::move(radii_)), n_theta(n_theta_),
          support(std::move(support_)) {
        require(n_theta >= 8, "radon: n_theta too small");
        require(!centers.empty() && !radii.empty(), "radon: empty lattice");
        require(g.same_layout(support.grid), "radon: support mask grid mismatch");
        cos_t.resize(static_cast<std::size_t>(n_theta));
        sin_t.resize(static_cast<std::size_t>(n_theta));
        const double pi = 3.14159265358979323846;
        for (int q = 0; q < n_theta; ++q) {
            const double t = 2.0 * pi * q / n_theta;
            cos_t[static_cast<std::size_t>(q)] = std::cos(t);
            sin_t[static_cast<std::size_t>(q)] = std::sin(t);
        }
    }

    double dtheta() const { return 2.0 * 3.14159265358979323846 / n_theta; }
};

inline RadonOperator make_radon_operator(const Grid& g, const std::vector<Point>& centers,
                                         const std::vector<double>& radii, int n_theta,
                                         const SubdomainMask& support) {
    return RadonOperator(g, centers, radii, n_theta, support);
}

// R[f](y, r) = sum_theta f(y + r xi_theta) dtheta, bilinear sampling, zero
// extension outside the grid.
inline std::vector<double> radon_profile(const ScalarField& f, const RadonOperator& op, Point y,
                                         const std::vector<double>& rs) {
    std::vector<double> out(rs.size(), 0.0);
    for (std::size_t k = 0; k < rs.size(); ++k) {
        double sum = 0.0;
        for (int q = 0; q < op.n_theta; ++q)
            sum += bilinear_sample(f, y.x + rs[k] * op.cos_t[static_cast<std::size_t>(q)],
                                   y.y + rs[k] * op.sin_t[static_cast<std::size_t>(q)]);
        out[k] = sum * op.dtheta();
    }
    return out;
}

inline Sinogram radon_apply(const ScalarField& f, const RadonOperator& op) {
    check_finite(f, "radon_apply");
    Sinogram out(op.centers, op.radii);
    parallel_for(static_cast<std::int64_t>(op.centers.size()), [&](std::int64_t c) {
        const std::vector<double> row =
            radon_profile(f, op, op.centers[static_cast<std::size_t>(c)], op.radii);
        for (std::size_t r = 0; r < op.radii.size(); ++r)
            out.at(static_cast<std::size_t>(c), r) = row[r];
    });
    return out;
}

// Flow transform: the radial component integrated over the circle.
inline std::vector<double> flow_profile(const VectorField& F, const RadonOperator& op, Point y,
                                        const std::vector<double>& rs) {
    ScalarField fx(F.grid), fy(F.grid);
    fx.v = F.ux;
    fy.v = F.uy;
    std::vector<double> out(rs.size(), 0.0);
    for (std::size_t k = 0; k < rs.size(); ++k) {
        double sum = 0.0;
        for (int q = 0; q < op.n_theta; ++q) {
            const double cx = op.cos_t[static_cast<std::size_t>(q)];
            const double sy = op.sin_t[static_cast<std::size_t>(q)];
            const double px = y.x + rs[k] * cx;
            const double py = y.y + rs[k] * sy;
            sum += bilinear_sample(fx, px, py) * cx + bilinear_sample(fy, px, py) * sy;
        }
        out[k] = sum * op.dtheta();
    }
    return out;
}

inline Sinogram flow_apply(const VectorField& F, const RadonOperator& op) {
    check_finite(F, "flow_apply");
    Sinogram out(op.centers, op.radii);
    parallel_for(static_cast<std::int64_t>(op.centers.size()), [&](std::int64_t c) {
        const std::vector<double> row =
            flow_profile(F, op, op.centers[static_cast<std::size_t>(c)], op.radii);
        for (std::size_t r = 0; r < op.radii.size(); ++r)
            out.at(static_cast<std::size_t>(c), r) = row[r];
    });
    return out;
}

// Euclidean adjoint of radon_apply: bilinear scatter with the same weights.
// Sequential so the summation order is fixed.
inline ScalarField radon_adjoint(const Sinogram& s, const RadonOperator& op) {
    const Grid& g = op.grid;
    ScalarField out(g, 0.0);
    const double dt = op.dtheta();
    for (std::size_t c = 0; c < op.centers.size(); ++c) {
        const Point y = op.centers[c];
        for (std::size_t r = 0; r < op.radii.size(); ++r) {
            const double w = s.at(c, r) * dt;
            if (w == 0.0) continue;
            for (int q = 0; q < op.n_theta; ++q) {
                const double px = y.x + s.radii[r] * op.cos_t[static_cast<std::size_t>(q)];
                const double py = y.y + s.radii[r] * op.sin_t[static_cast<std::size_t>(q)];
                const double sx = (px - g.x0) / g.hx();
                const double sy = (py - g.y0) / g.hy();
                if (sx < 0.0 || sy < 0.0 || sx > g.nx - 1 || sy > g.ny - 1) continue;
                int i = static_cast<int>(sx);
                int j = static_cast<int>(sy);
                if (i >= g.nx - 1) i = g.nx - 2;
                if (j >= g.ny - 1) j = g.ny - 2;
                const double tx = sx - i;
                const double ty = sy - j;
                out(i, j) += w * (1 - tx) * (1 - ty);
                out(i + 1, j) += w * tx * (1 - ty);
                out(i, j + 1) += w * (1 - tx) * ty;
                out(i + 1, j + 1) += w * tx * ty;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Differential identity checks (validation).

// Relative L2(Sigma) discrepancy between flow(grad u) and d_r R[u], compared
// on interior radius samples.
inline double radon_gradient_identity_check(const ScalarField& u, const RadonOperator& op) {
    const Sinogram S = radon_apply(u, op);
    const Sinogram F = flow_apply(gradient(u), op);
    double num = 0.0, den = 0.0;
    const std::vector<double> wc = S.arc_weights();
    for (std::size_t c = 0; c < S.n_centers(); ++c)
        for (std::size_t r = 1; r + 1 < S.n_radii(); ++r) {
            const double dr = S.radii[r + 1] - S.radii[r - 1];
            const double ds = (S.at(c, r + 1) - S.at(c, r - 1)) / dr;
            const double w = wc[c] * 0.5 * dr;
            num += w * (F.at(c, r) - ds) * (F.at(c, r) - ds);
            den += w * ds * ds;
        }
    return std::sqrt(num / std::max(den, 1e-300));
}

// Relative L2(Sigma) discrepancy between R[lap u] and (1/r) d_r (r d_r R[u]).
inline double radon_laplacian_identity_check(const ScalarField& u, const RadonOperator& op) {
    const Sinogram L = radon_apply(divergence(gradient(u)), op);
    const Sinogram S = radon_apply(u, op);
    double num = 0.0, den = 0.0;
    const std::vector<double> wc = S.arc_weights();
    const std::size_t m = S.n_radii();
    for (std::size_t c = 0; c < S.n_centers(); ++c) {
        // r d_r R[u] at midpoints of the radius lattice, then d_r again.
        for (std::size_t r = 2; r + 2 < m; ++r) {
            const double rp = 0.5 * (S.radii[r + 1] + S.radii[r]);
            const double rm = 0.5 * (S.radii[r] + S.radii[r - 1]);
            const double dp = (S.at(c, r + 1) - S.at(c, r)) / (S.radii[r + 1] - S.radii[r]);
            const double dm = (S.at(c, r) - S.at(c, r - 1)) / (S.radii[r] - S.radii[r - 1]);
            const double rhs =
                (rp * dp - rm * dm) / (0.5 * (S.radii[r + 1] - S.radii[r - 1])) / S.radii[r];
            const double w = wc[c] * 0.5 * (S.radii[r + 1] - S.radii[r - 1]);
            num += w * (L.at(c, r) - rhs) * (L.at(c, r) - rhs);
            den += w * L.at(c, r) * L.at(c, r);
        }
    }
    return std::sqrt(num / std::max(den, 1e-300));
}

// ---------------------------------------------------------------------------
// Tikhonov-regularized CGLS inversion of the circular means transform with
// support constrained to D.

struct CglsResult {
    ScalarField f;
    std::vector<double> residual_history; // ||A^T r|| / ||A^T b||
    int iterations = 0;
};

namespace detail {

// Gradient-penalty edges between adjacent inside nodes.
struct MaskEdges {
    std::vector<std::pair<std::int32_t, std::int32_t>> pairs; // unknown indices
    std::vector<double> weight;
};

} // namespace detail

// Mean of diag(A^T A): accumulate squared scatter weights.
inline double radon_diag_scale(const RadonOperator& op) {
    const Grid& g = op.grid;
    std::vector<double> diag(g.size(), 0.0);
    const double dt = op.dtheta();
    for (std::size_t c = 0; c < op.centers.size(); ++c)
        for (std::size_t r = 0; r < op.radii.size(); ++r)
            for (int q = 0; q < op.n_theta; ++q) {
                const double px = op.centers[c].x + op.radii[r] * op.cos_t[static_cast<std::size_t>(q)];
                const double py = op.centers[c].y + op.radii[r] * op.sin_t[static_cast<std::size_t>(q)];
                const double sx = (px - g.x0) / g.hx();
                const double sy = (py - g.y0) / g.hy();
                if (sx < 0.0 || sy < 0.0 || sx > g.nx - 1 || sy > g.ny - 1) continue;
                int i = static_cast<int>(sx);
                int j = static_cast<int>(sy);
                if (i >= g.nx - 1) i = g.nx - 2;
                if (j >= g.ny - 1) j = g.ny - 2;
                const double tx = sx - i;
                const double ty = sy - j;
                diag[g.idx(i, j)] += dt * dt * (1 - tx) * (1 - tx) * (1 - ty) * (1 - ty);
                diag[g.idx(i + 1, j)] += dt * dt * tx * tx * (1 - ty) * (1 - ty);
                diag[g.idx(i, j + 1)] += dt * dt * (1 - tx) * (1 - tx) * ty * ty;
                diag[g.idx(i + 1, j + 1)] += dt * dt * tx * tx * ty * ty;
            }
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < g.size(); ++k)
        if (op.support.inside[k]) {
            sum += diag[k];
            ++count;
        }
    return count ? sum / count : 1.0;
}

namespace detail {

// Remove the per-center mean over radii (orthogonal projector; the transform
// data determines R[f] only up to a function of the center).
inline void remove_center_means(Sinogram& s) {
    for (std::size_t c = 0; c < s.n_centers(); ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < s.n_radii(); ++r) mean += s.at(c, r);
        mean /= static_cast<double>(s.n_radii());
        for (std::size_t r = 0; r < s.n_radii(); ++r) s.at(c, r) -= mean;
    }
}

} // namespace detail

inline CglsResult radon_invert(const Sinogram& s, const RadonOperator& op, double reg,
                               int max_iter = 500, double tol = 1e-8,
                               bool modulo_center_offsets = false) {
    require(s.n_centers() == op.centers.size() && s.n_radii() == op.radii.size(),
            "radon_invert: sinogram lattice does not match operator");
    const Grid& g = op.grid;

    std::vector<std::int32_t> unknown_of_node(g.size(), -1);
    std::vector<std::size_t> node_of_unknown;
    for (std::size_t k = 0; k < g.size(); ++k)
        if (op.support.inside[k]) {
            unknown_of_node[k] = static_cast<std::int32_t>(node_of_unknown.size());
            node_of_unknown.push_back(k);
        }
    const std::size_t n = node_of_unknown.size();
    require(n > 0, "radon_invert: empty support");

    detail::MaskEdges edges;
    const double wx = std::sqrt(g.hx() * g.hy()) / g.hx();
    const double wy = std::sqrt(g.hx() * g.hy()) / g.hy();
    for (std::size_t u = 0; u < n; ++u) {
        const std::size_t k = node_of_unknown[u];
        if ((k % g.nx) + 1 < static_cast<std::size_t>(g.nx) && unknown_of_node[k + 1] >= 0) {
            edges.pairs.emplace_back(static_cast<std::int32_t>(u), unknown_of_node[k + 1]);
            edges.weight.push_back(wx);
        }
        if (k + g.nx < g.size() && unknown_of_node[k + g.nx] >= 0) {
            edges.pairs.emplace_back(static_cast<std::int32_t>(u), unknown_of_node[k + g.nx]);
            edges.weight.push_back(wy);
        }
    }

    const double lam = reg * radon_diag_scale(op);
    const double sqrt_lam = std::sqrt(std::max(lam, 0.0));

    ScalarField work(g, 0.0);
    auto fwd = [&](const std::vector<double>& x, Sinogram& out_s, std::vector<double>& out_l) {
        std::fill(work.v.begin(), work.v.end(), 0.0);
        for (std::size_t u = 0; u < n; ++u) work.v[node_of_unknown[u]] = x[u];
        out_s = radon_apply(work, op);
        if (modulo_center_offsets) detail::remove_center_means(out_s);
        out_l.assign(edges.pairs.size(), 0.0);
        for (std::size_t e = 0; e < edges.pairs.size(); ++e)
            out_l[e] = sqrt_lam * edges.weight[e] *
                       (x[static_cast<std::size_t>(edges.pairs[e].first)] -
                        x[static_cast<std::size_t>(edges.pairs[e].second)]);
    };
    auto adj = [&](const Sinogram& rs, const std::vector<double>& rl, std::vector<double>& out) {
        const ScalarField grid_adj = radon_adjoint(rs, op);
        out.assign(n, 0.0);
        for (std::size_t u = 0; u < n; ++u) out[u] = grid_adj.v[node_of_unknown[u]];
        for (std::size_t e = 0; e < edges.pairs.size(); ++e) {
            const double v = sqrt_lam * edges.weight[e] * rl[e];
            out[static_cast<std::size_t>(edges.pairs[e].first)] += v;
            out[static_cast<std::size_t>(edges.pairs[e].second)] -= v;
        }
    };

    CglsResult result;
    result.f = ScalarField(g, 0.0);
    if (norm2(s.values) == 0.0) return result; // unique minimizer of the strictly convex functional

    std::vector<double> x(n, 0.0);
    Sinogram rs = s; // residual, sinogram block
    if (modulo_center_offsets) detail::remove_center_means(rs);
    std::vector<double> rl(edges.pairs.size(), 0.0);
    std::vector<double> grad(n), p(n);
    adj(rs, rl, grad);
    const double g0 = norm2(grad);
    p = grad;
    double gamma = g0 * g0;
    Sinogram qs(op.centers, op.radii);
    std::vector<double> ql;
    int it = 0;
    for (; it < max_iter; ++it) {
        result.residual_history.push_back(norm2(grad) / g0);
        if (result.residual_history.back() <= tol) break;
        fwd(p, qs, ql);
        const double qq = dot(qs.values, qs.values) + dot(ql, ql);
        if (qq == 0.0) break;
        const double alpha = gamma / qq;
        for (std::size_t u = 0; u < n; ++u) x[u] += alpha * p[u];
        for (std::size_t k = 0; k < rs.values.size(); ++k) rs.values[k] -= alpha * qs.values[k];
        for (std::size_t e = 0; e < rl.size(); ++e) rl[e] -= alpha * ql[e];
        adj(rs, rl, grad);
        const double gn = dot(grad, grad);
        const double beta = gn / gamma;
        gamma = gn;
        for (std::size_t u = 0; u < n; ++u) p[u] = grad[u] + beta * p[u];
    }
    result.iterations = it;
    if (!result.residual_history.empty() && result.residual_history.back() > 0.9 && it >= max_iter)
        throw numerical_error("radon_invert: CGLS stagnated, normal residual " +
                              std::to_string(result.residual_history.back()));

    for (std::size_t u = 0; u < n; ++u) result.f.v[node_of_unknown[u]] = x[u];
    check_finite(result.f, "radon_invert");
    return result;
}

// Internal data from a measurement sinogram: P -> regularized inversion ->
// harmonic correction. P[M] approximates R[Psi] only up to a function of the
// center, so the inversion runs modulo per-center offsets and the harmonic
// correction restores the Psi|_Y = 0 gauge. Output supported in D with zero
// boundary trace. correction_norm, when given, receives the L2(D) size of the
// gauge correction (the coarse-mask boundary trace offset is visible there).
inline ScalarField internal_data(const Sinogram& m, const RadonOperator& op, double reg,
                                 int max_iter = 500, double tol = 1e-8,
                                 double* correction_norm = nullptr) {
    const Sinogram pm = p_transform(m);
    const CglsResult inv = radon_invert(pm, op, reg, max_iter, tol, true);
    ScalarField out = harmonic_correction(inv.f, op.support);
    if (correction_norm) {
        ScalarField h(out.grid, 0.0);
        for (std::size_t k = 0; k < h.v.size(); ++k)
            if (op.support.inside[k]) h.v[k] = out.v[k] - inv.f.v[k];
        *correction_norm = l2_norm(h, op.support);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Radial convolution against w_eta, used by the ideal-measurement identities.

// values(c, rho) given per center on the fine lattice `rho`; returns
// -(1/r) [ (rho * values) * w_eta ](r) on the evaluation radii.
inline Sinogram convolve_radial(const std::vector<Point>& centers,
                                const std::vector<double>& rho,
                                const std::vector<std::vector<double>>& values,
                                const WaveShape& wave, double eta,
                                const std::vector<double>& eval_radii) {
    Sinogram out(centers, eval_radii);
    const double drho = rho.size() > 1 ? rho[1] - rho[0] : 1.0;
    for (std::size_t c = 0; c < centers.size(); ++c) {
        for (std::size_t k = 0; k < eval_radii.size(); ++k) {
            const double r = eval_radii[k];
            double sum = 0.0;
            for (std::size_t q = 0; q < rho.size(); ++q) {
                const double t = (rho[q] - r) / eta;
                if (std::abs(t) >= 1.0) continue;
                sum += rho[q] * values[c][q] * wave(t) / eta * drho;
            }
            out.at(c, k) = -sum / r;
        }
    }
    return out;
}

// Ideal measurement via the convolution identity, evaluated from the flow
// transform of Phi^2 grad_h a.
inline Sinogram ideal_from_flow(const AbsorptionField& a, const ScalarField& phi,
                                const RadonOperator& op, const WaveShape& wave, double eta,
                                double fine_step_factor = 6.0) {
    const Grid& g = a.field.grid;
    const VectorField da = gradient(a.field);
    VectorField U(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double p2 = phi.v[k] * phi.v[k];
        U.ux[k] = p2 * da.ux[k];
        U.uy[k] = p2 * da.uy[k];
    }
    const double lo = std::max(0.25 * g.hx(), op.radii.front() - 1.5 * eta);
    const double hi = op.radii.back() + 1.5 * eta;
    const int m = static_cast<int>(std::ceil((hi - lo) / (eta / fine_step_factor))) + 1;
    const std::vector<double> rho = linspace(lo, hi, m);
    std::vector<std::vector<double>> profiles(op.centers.size());
    parallel_for(static_cast<std::int64_t>(op.centers.size()), [&](std::int64_t c) {
        profiles[static_cast<std::size_t>(c)] =
            flow_profile(U, op, op.centers[static_cast<std::size_t>(c)], rho);
    });
    return convolve_radial(op.centers, rho, profiles, wave, eta, op.radii);
}

// Ideal measurement synthesized from a known internal-data map Psi via
// d_r R[Psi] (the closed-loop oracle route).
inline Sinogram ideal_from_psi(const ScalarField& psi, const RadonOperator& op,
                               const WaveShape& wave, double eta,
                               double fine_step_factor = 6.0) {
    const Grid& g = psi.grid;
    const double lo = std::max(0.25 * g.hx(), op.radii.front() - 1.5 * eta);
    const double hi = op.radii.back() + 1.5 * eta;
    const double step = eta / fine_step_factor;
    const int m = static_cast<int>(std::ceil((hi - lo) / step)) + 3;
    const std::vector<double> rho_ext = linspace(lo - step, hi + step, m + 2);
    std::vector<std::vector<double>> dprofiles(op.centers.size());
    parallel_for(static_cast<std::int64_t>(op.centers.size()), [&](std::int64_t c) {
        const std::vector<double> s =
            radon_profile(psi, op, op.centers[static_cast<std::size_t>(c)], rho_ext);
        std::vector<double> d(rho_ext.size() - 2, 0.0);
        for (std::size_t q = 1; q + 1 < rho_ext.size(); ++q)
            d[q - 1] = (s[q + 1] - s[q - 1]) / (rho_ext[q + 1] - rho_ext[q - 1]);
        dprofiles[static_cast<std::size_t>(c)] = std::move(d);
    });
    std::vector<double> rho(rho_ext.begin() + 1, rho_ext.end() - 1);
    return convolve_radial(op.centers, rho, dprofiles, wave, eta, op.radii);
}

// Relative L2(Sigma) discrepancy between the grid-quadrature ideal measurement
// and its convolution form (validation).
inline double convolution_identity_check(const AbsorptionField& a, const ScalarField& phi,
                                         const AcousticConfig& cfg, const RadonOperator& op) {
    AcousticConfig lattice = cfg;
    lattice.centers = op.centers;
    lattice.radii = op.radii;
    const Sinogram lhs = sweep_ideal(a, phi, lattice);
    const Sinogram rhs = ideal_from_flow(a, phi, op, cfg.wave, cfg.eta);
    const double den = lhs.l2_sigma();
    return (lhs - rhs).l2_sigma() / std::max(den, 1e-300);
}

} // namespace aot
