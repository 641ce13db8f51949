#pragma once

#include <functional>

#include "aot/grid.hpp"
#include "aot/pcg.hpp"
#include "aot/phantom.hpp"

namespace aot {

// Robin boundary data l*du/dnu + u = g. Values of g are stored grid-wide for
// simple indexing; only boundary nodes are read. Corner nodes belong to two
// faces; g_xface/g_yface allow face-resolved values there (manufactured
// solutions need this for full second order), defaulting to g.
struct BoundaryData {
    double l = 0.1;
    std::vector<double> g;
    std::vector<double> g_xface; // empty -> use g
    std::vector<double> g_yface;

    const std::vector<double>& xface() const { return g_xface.empty() ? g : g_xface; }
    const std::vector<double>& yface() const { return g_yface.empty() ? g : g_yface; }

    static BoundaryData constant(const Grid& grid, double l, double g0) {
        require(l > 0.0, "boundary: l must be positive");
        require(g0 >= 0.0, "boundary: g must be nonnegative");
        require(g0 > 0.0, "boundary: g must not vanish identically");
        BoundaryData bc;
        bc.l = l;
        bc.g.assign(grid.size(), g0);
        return bc;
    }

    static BoundaryData from_function(const Grid& grid, double l,
                                      const std::function<double(double, double)>& fn) {
        require(l > 0.0, "boundary: l must be positive");
        BoundaryData bc;
        bc.l = l;
        bc.g.assign(grid.size(), 0.0);
        double gmax = 0.0;
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i < grid.nx; ++i) {
                if (i != 0 && i != grid.nx - 1 && j != 0 && j != grid.ny - 1) continue;
                const double val = fn(grid.x(i), grid.y(j));
                require(val >= 0.0, "boundary: g must be nonnegative");
                bc.g[grid.idx(i, j)] = val;
                gmax = std::max(gmax, val);
            }
        require(gmax > 0.0, "boundary: g must not vanish identically");
        return bc;
    }

    // Face-resolved data: fn(x, y, nu_x, nu_y) evaluated once per face.
    static BoundaryData from_face_function(
        const Grid& grid, double l,
        const std::function<double(double, double, double, double)>& fn) {
        require(l > 0.0, "boundary: l must be positive");
        BoundaryData bc;
        bc.l = l;
        bc.g.assign(grid.size(), 0.0);
        bc.g_xface.assign(grid.size(), 0.0);
        bc.g_yface.assign(grid.size(), 0.0);
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i < grid.nx; ++i) {
                if (i != 0 && i != grid.nx - 1 && j != 0 && j != grid.ny - 1) continue;
                const std::size_t k = grid.idx(i, j);
                const double x = grid.x(i), y = grid.y(j);
                if (i == 0) bc.g_xface[k] = fn(x, y, -1.0, 0.0);
                if (i == grid.nx - 1) bc.g_xface[k] = fn(x, y, 1.0, 0.0);
                if (j == 0) bc.g_yface[k] = fn(x, y, 0.0, -1.0);
                if (j == grid.ny - 1) bc.g_yface[k] = fn(x, y, 0.0, 1.0);
                bc.g[k] = std::max(bc.g_xface[k], bc.g_yface[k]);
            }
        return bc;
    }

    double max_g() const {
        double m = 0.0;
        for (double v : xface()) m = std::max(m, v);
        for (double v : yface()) m = std::max(m, v);
        return m;
    }
};

struct FluenceSolution {
    ScalarField phi;
    double residual_norm = 0.0;
    int iterations = 0;
};

constexpr double kFluenceTolDefault = 1e-10;

// Solve -lap(phi) + a*phi = 0 with l*dphi/dnu + phi = g by conjugate gradients
// on the symmetric finite-volume system. An optional warm start accelerates
// nearby re-solves (the right-hand side depends only on g, so the residual
// contract is unchanged).
inline FluenceSolution solve_fluence(const ScalarField& a, const BoundaryData& bc,
                                     double tol = kFluenceTolDefault,
                                     const ScalarField* warm_start = nullptr) {
    const Grid& g = a.grid;
    require(tol > 0.0, "fluence: tol must be positive");
    for (double v : a.v)
        require(v > 0.0, "fluence: absorption must be positive everywhere");

    RobinSystem sys(g, a.v, bc.l);
    const std::vector<double> b = sys.rhs(bc.xface(), bc.yface());

    FluenceSolution sol;
    sol.phi = warm_start && warm_start->grid.same_layout(g) ? *warm_start : ScalarField(g, 0.0);
    const int cap = 50 * (g.nx + g.ny);
    const PcgResult res =
        pcg([&sys](const std::vector<double>& x, std::vector<double>& y) { sys.apply(x, y); },
            sys.diag, b, sol.phi.v, tol, cap);
    sol.iterations = res.iterations;
    sol.residual_norm = res.relative_residual;
    if (sol.residual_norm > tol)
        throw numerical_error("fluence: conjugate gradients stalled, relative residual " +
                              std::to_string(sol.residual_norm));

    // Discrete maximum principle: 0 < phi <= max g.
    const double gmax = bc.max_g();
    double pmin = sol.phi.v[0], pmax = sol.phi.v[0];
    for (double v : sol.phi.v) {
        pmin = std::min(pmin, v);
        pmax = std::max(pmax, v);
    }
    if (!(pmin > 0.0))
        throw numerical_error("fluence: positivity violated, min phi = " + std::to_string(pmin));
    if (pmax > gmax * (1.0 + 1e-8))
        throw numerical_error("fluence: maximum principle violated, max phi = " +
                              std::to_string(pmax));
    return sol;
}

inline FluenceSolution solve_fluence(const AbsorptionField& a, const BoundaryData& bc,
                                     double tol = kFluenceTolDefault,
                                     const ScalarField* warm_start = nullptr) {
    return solve_fluence(a.field, bc, tol, warm_start);
}

// Discrete H1 norm: sqrt(||f||_L2^2 + ||grad f||_L2^2).
inline double h1_norm(const ScalarField& f) {
    const double l2 = l2_norm(f);
    const double g2 = l2_norm(gradient(f));
    return std::sqrt(l2 * l2 + g2 * g2);
}

// ||F[a] - F[a']||_H1 / ||a - a'||_L2; returns 0 for identical inputs.
inline double fluence_lipschitz_probe(const ScalarField& a, const ScalarField& a_perturbed,
                                      const BoundaryData& bc, double tol = kFluenceTolDefault) {
    ScalarField diff_a(a.grid);
    for (std::size_t k = 0; k < a.v.size(); ++k) diff_a.v[k] = a_perturbed.v[k] - a.v[k];
    const double denom = l2_norm(diff_a);
    if (denom == 0.0) return 0.0;
    const FluenceSolution s0 = solve_fluence(a, bc, tol);
    const FluenceSolution s1 = solve_fluence(a_perturbed, bc, tol, &s0.phi);
    ScalarField diff_phi(a.grid);
    for (std::size_t k = 0; k < a.v.size(); ++k) diff_phi.v[k] = s1.phi.v[k] - s0.phi.v[k];
    return h1_norm(diff_phi) / denom;
}

} // namespace aot
