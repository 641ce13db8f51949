#pragma once

#include <functional>
#include <vector>

#include "aot/common.hpp"
#include "aot/grid.hpp"

namespace aot {

struct PcgResult {
    int iterations = 0;
    double relative_residual = 0.0;
};

// Preconditioned conjugate gradients for an SPD operator given as a matvec
// closure, with Jacobi preconditioning. Stops at ||b - Ax|| <= tol * ||b||.
// b = 0 returns the exact zero vector without iterating.
inline PcgResult pcg(const std::function<void(const std::vector<double>&, std::vector<double>&)>& apply,
                     const std::vector<double>& diag, const std::vector<double>& b,
                     std::vector<double>& x, double tol, int max_iter) {
    const std::size_t n = b.size();
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        x.assign(n, 0.0);
        return {0, 0.0};
    }
    std::vector<double> r(n), z(n), p(n), ap(n);
    if (x.size() != n) x.assign(n, 0.0);
    apply(x, ap);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    p = z;
    double rz = dot(r, z);
    double rnorm = norm2(r);
    int it = 0;
    while (rnorm > tol * bnorm && it < max_iter) {
        apply(p, ap);
        const double pap = dot(p, ap);
        if (pap <= 0.0) throw numerical_error("pcg: operator lost positive definiteness");
        const double alpha = rz / pap;
        for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
        for (std::size_t i = 0; i < n; ++i) r[i] -= alpha * ap[i];
        for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        rnorm = norm2(r);
        ++it;
    }
    return {it, rnorm / bnorm};
}

// Vertex-centered finite-volume discretization of -lap(u) + a*u on the full
// grid with Robin closure l*du/dnu + u = g. Boundary rows carry half-cell
// (quarter at corners) weights, which keeps the matrix symmetric positive
// definite and an M-matrix for a > 0.
struct RobinSystem {
    Grid grid;
    std::vector<double> diag; // a-dependent part plus flux and Robin diagonal
    double l = 0.0;
    double cw = 0.0, ce = 0.0; // horizontal flux coefficient per unit transverse width
    double cs = 0.0, cn = 0.0;

    RobinSystem(const Grid& g, const std::vector<double>& a, double l_) : grid(g), l(l_) {
        require(l > 0.0, "fluence: extrapolation length l must be positive");
        const double hx = g.hx(), hy = g.hy();
        diag.assign(g.size(), 0.0);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const std::size_t k = g.idx(i, j);
                const double ty = ((j == 0 || j == g.ny - 1) ? 0.5 : 1.0) * hy;
                const double tx = ((i == 0 || i == g.nx - 1) ? 0.5 : 1.0) * hx;
                double d = trapezoid_weight(g, i, j) * a[k];
                if (i > 0) d += ty / hx;
                if (i < g.nx - 1) d += ty / hx;
                if (j > 0) d += tx / hy;
                if (j < g.ny - 1) d += tx / hy;
                if (i == 0 || i == g.nx - 1) d += ty / l;
                if (j == 0 || j == g.ny - 1) d += tx / l;
                diag[k] = d;
            }
    }

    void apply(const std::vector<double>& u, std::vector<double>& out) const {
        const Grid& g = grid;
        const double hx = g.hx(), hy = g.hy();
        for (int j = 0; j < g.ny; ++j) {
            const double ty = ((j == 0 || j == g.ny - 1) ? 0.5 : 1.0) * hy;
            for (int i = 0; i < g.nx; ++i) {
                const std::size_t k = g.idx(i, j);
                const double tx = ((i == 0 || i == g.nx - 1) ? 0.5 : 1.0) * hx;
                double s = diag[k] * u[k];
                if (i > 0) s -= (ty / hx) * u[k - 1];
                if (i < g.nx - 1) s -= (ty / hx) * u[k + 1];
                if (j > 0) s -= (tx / hy) * u[k - g.nx];
                if (j < g.ny - 1) s -= (tx / hy) * u[k + g.nx];
                out[k] = s;
            }
        }
    }

    // Right-hand side from the boundary data (per-node values; corners may
    // carry distinct values for their vertical and horizontal faces).
    std::vector<double> rhs(const std::vector<double>& g_xface,
                            const std::vector<double>& g_yface) const {
        const Grid& g = grid;
        std::vector<double> b(g.size(), 0.0);
        const double hx = g.hx(), hy = g.hy();
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                if (i != 0 && i != g.nx - 1 && j != 0 && j != g.ny - 1) continue;
                const std::size_t k = g.idx(i, j);
                const double ty = ((j == 0 || j == g.ny - 1) ? 0.5 : 1.0) * hy;
                const double tx = ((i == 0 || i == g.nx - 1) ? 0.5 : 1.0) * hx;
                double s = 0.0;
                if (i == 0 || i == g.nx - 1) s += (ty / l) * g_xface[k];
                if (j == 0 || j == g.ny - 1) s += (tx / l) * g_yface[k];
                b[k] = s;
            }
        return b;
    }
};

// Divergence-form operator -div(c grad u) restricted to the strict interior of
// a mask, with Dirichlet values on the mask's discrete boundary ring (and on
// any outside node, should a stencil reach one). Face coefficients are the
// harmonic mean of the nodal coefficient field.
struct MaskedDivSystem {
    Grid grid;
    std::vector<std::int32_t> unknown_of_node; // -1 where not an unknown
    std::vector<std::size_t> node_of_unknown;
    std::vector<double> diag;
    // Per-unknown face coefficients (transverse width / spacing * harmonic mean c).
    std::vector<double> cW, cE, cS, cN;

    static double face_coef(double ca, double cb) {
        if (ca <= 0.0 || cb <= 0.0) throw numerical_error("divergence-form solve: nonpositive coefficient");
        return 2.0 * ca * cb / (ca + cb);
    }

    MaskedDivSystem(const SubdomainMask& mask, const std::vector<std::uint8_t>& is_unknown,
                    const std::vector<double>& coef) {
        grid = mask.grid;
        const Grid& g = grid;
        unknown_of_node.assign(g.size(), -1);
        for (std::size_t k = 0; k < g.size(); ++k)
            if (is_unknown[k]) {
                unknown_of_node[k] = static_cast<std::int32_t>(node_of_unknown.size());
                node_of_unknown.push_back(k);
            }
        const std::size_t n = node_of_unknown.size();
        diag.assign(n, 0.0);
        cW.assign(n, 0.0);
        cE.assign(n, 0.0);
        cS.assign(n, 0.0);
        cN.assign(n, 0.0);
        const double hx = g.hx(), hy = g.hy();
        for (std::size_t u = 0; u < n; ++u) {
            const std::size_t k = node_of_unknown[u];
            const int i = static_cast<int>(k % g.nx);
            const int j = static_cast<int>(k / g.nx);
            cW[u] = (hy / hx) * face_coef(coef[k], coef[g.idx(i - 1, j)]);
            cE[u] = (hy / hx) * face_coef(coef[k], coef[g.idx(i + 1, j)]);
            cS[u] = (hx / hy) * face_coef(coef[k], coef[g.idx(i, j - 1)]);
            cN[u] = (hx / hy) * face_coef(coef[k], coef[g.idx(i, j + 1)]);
            diag[u] = cW[u] + cE[u] + cS[u] + cN[u];
        }
    }

    std::size_t size() const { return node_of_unknown.size(); }

    void apply(const std::vector<double>& u, std::vector<double>& out) const {
        const Grid& g = grid;
        for (std::size_t q = 0; q < node_of_unknown.size(); ++q) {
            const std::size_t k = node_of_unknown[q];
            double s = diag[q] * u[q];
            const std::int32_t w = unknown_of_node[k - 1];
            const std::int32_t e = unknown_of_node[k + 1];
            const std::int32_t so = unknown_of_node[k - g.nx];
            const std::int32_t no = unknown_of_node[k + g.nx];
            if (w >= 0) s -= cW[q] * u[w];
            if (e >= 0) s -= cE[q] * u[e];
            if (so >= 0) s -= cS[q] * u[so];
            if (no >= 0) s -= cN[q] * u[no];
            out[q] = s;
        }
    }

    // Dirichlet contribution: for stencil neighbors that are not unknowns,
    // move c_f * value to the right-hand side.
    void add_dirichlet_rhs(const std::vector<double>& dirichlet, std::vector<double>& b) const {
        const Grid& g = grid;
        for (std::size_t q = 0; q < node_of_unknown.size(); ++q) {
            const std::size_t k = node_of_unknown[q];
            if (unknown_of_node[k - 1] < 0) b[q] += cW[q] * dirichlet[k - 1];
            if (unknown_of_node[k + 1] < 0) b[q] += cE[q] * dirichlet[k + 1];
            if (unknown_of_node[k - g.nx] < 0) b[q] += cS[q] * dirichlet[k - g.nx];
            if (unknown_of_node[k + g.nx] < 0) b[q] += cN[q] * dirichlet[k + g.nx];
        }
    }
};

// Nodes of the mask that have all four neighbors inside (the solve set) and
// the remaining inside nodes (the discrete boundary ring).
inline std::vector<std::uint8_t> strict_interior(const SubdomainMask& mask) {
    const Grid& g = mask.grid;
    std::vector<std::uint8_t> out(g.size(), 0);
    for (int j = 1; j < g.ny - 1; ++j)
        for (int i = 1; i < g.nx - 1; ++i) {
            const std::size_t k = g.idx(i, j);
            if (mask.inside[k] && mask.inside[k - 1] && mask.inside[k + 1] &&
                mask.inside[k - g.nx] && mask.inside[k + g.nx])
                out[k] = 1;
        }
    return out;
}

inline std::vector<std::uint8_t> boundary_ring(const SubdomainMask& mask) {
    const std::vector<std::uint8_t> strict = strict_interior(mask);
    std::vector<std::uint8_t> ring(mask.inside.size(), 0);
    for (std::size_t k = 0; k < ring.size(); ++k) ring[k] = mask.inside[k] && !strict[k];
    return ring;
}

} // namespace aot
