#pragma once

#include "aot/fluence.hpp"
#include "aot/grid.hpp"
#include "aot/pcg.hpp"
#include "aot/phantom.hpp"

namespace aot {

enum class BoundaryMode {
    theory,  // a_tilde = 0 on the discrete boundary of D
    numeric, // a_tilde = -Psi / Phi^2 on the discrete boundary of D
};

struct ReconstructConfig {
    double a_lower = 1.0;
    double a_upper = 1.98;
    double a0 = 1.0;
    int max_iters = 10;
    double fp_tol = 1e-6;
    double elliptic_tol = 1e-10;
    BoundaryMode boundary_mode = BoundaryMode::numeric;

    void validate() const {
        require(a_lower > 0.0 && a_lower <= a0 && a0 <= a_upper,
                "reconstruct: bounds must satisfy 0 < a_lower <= a0 <= a_upper");
        require(max_iters >= 1, "reconstruct: max_iters must be >= 1");
        require(fp_tol > 0.0 && elliptic_tol > 0.0, "reconstruct: tolerances must be positive");
    }
};

struct FixedPointIterate {
    double diff_l2 = 0.0;
    double phi_min = 0.0;
    double phi_max = 0.0;
    double elliptic_residual = 0.0;
};

struct FixedPointTrace {
    std::vector<FixedPointIterate> iterates;
    bool converged = false;
};

inline void write_trace_csv(const FixedPointTrace& trace, const std::string& path) {
    std::ofstream os(path);
    require(os.good(), "trace: cannot open for writing: " + path);
    os << "iter,diff_l2,phi_min,phi_max,residual\n";
    char line[160];
    for (std::size_t k = 0; k < trace.iterates.size(); ++k) {
        const FixedPointIterate& it = trace.iterates[k];
        std::snprintf(line, sizeof(line), "%zu,%.17g,%.17g,%.17g,%.17g\n", k + 1, it.diff_l2,
                      it.phi_min, it.phi_max, it.elliptic_residual);
        os << line;
    }
}

// Pointwise clamp to [a_lower, a_upper].
inline ScalarField truncate(const ScalarField& a, const ReconstructConfig& cfg) {
    ScalarField out = a;
    for (double& v : out.v) v = std::max(std::min(v, cfg.a_upper), cfg.a_lower);
    return out;
}

// Solve div(Phi^2 grad a_tilde) = div(2 Psi grad log Phi) on the strict
// interior of D with Dirichlet data on the discrete boundary ring. The right
// side is assembled in flux form (face fluxes of 2 Psi grad log Phi), so Psi
// itself is never differentiated.
inline ScalarField elliptic_tilde_solve(const ScalarField& phi, const ScalarField& psi,
                                        const SubdomainMask& mask, const ReconstructConfig& cfg,
                                        double* residual_out = nullptr) {
    const Grid& g = phi.grid;
    require(g.same_layout(psi.grid) && g.same_layout(mask.grid), "elliptic: grid mismatch");
    for (std::size_t k = 0; k < g.size(); ++k)
        if (mask.inside[k] && !(phi.v[k] > 0.0))
            throw validation_error("elliptic: Phi must be strictly positive on D");

    const std::vector<std::uint8_t> interior = strict_interior(mask);
    std::vector<double> phi2(g.size(), 1.0);
    std::vector<double> logphi(g.size(), 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (phi.v[k] > 0.0) {
            phi2[k] = phi.v[k] * phi.v[k];
            logphi[k] = std::log(phi.v[k]);
        }
    }
    MaskedDivSystem sys(mask, interior, phi2);

    // Dirichlet values on every non-unknown node a stencil can reach.
    std::vector<double> dirichlet(g.size(), 0.0);
    if (cfg.boundary_mode == BoundaryMode::numeric) {
        for (std::size_t k = 0; k < g.size(); ++k)
            if (mask.inside[k] && !interior[k]) dirichlet[k] = -psi.v[k] / phi2[k];
    }

    // b = -(net outflux of q) per unknown cell, q = 2 Psi grad log Phi with
    // arithmetic face averages of Psi.
    const double hx = g.hx(), hy = g.hy();
    std::vector<double> b(sys.size(), 0.0);
    bool rhs_nonzero = false;
    for (std::size_t u = 0; u < sys.size(); ++u) {
        const std::size_t k = sys.node_of_unknown[u];
        const double qe = (psi.v[k] + psi.v[k + 1]) * (logphi[k + 1] - logphi[k]) / hx;
        const double qw = (psi.v[k - 1] + psi.v[k]) * (logphi[k] - logphi[k - 1]) / hx;
        const double qn = (psi.v[k] + psi.v[k + g.nx]) * (logphi[k + g.nx] - logphi[k]) / hy;
        const double qs = (psi.v[k - g.nx] + psi.v[k]) * (logphi[k] - logphi[k - g.nx]) / hy;
        b[u] = -(hy * (qe - qw) + hx * (qn - qs));
        if (b[u] != 0.0) rhs_nonzero = true;
    }
    sys.add_dirichlet_rhs(dirichlet, b);
    if (!rhs_nonzero) {
        bool dir_zero = true;
        for (double v : dirichlet)
            if (v != 0.0) dir_zero = false;
        if (dir_zero) {
            if (residual_out) *residual_out = 0.0;
            return ScalarField(g, 0.0); // homogeneous problem, zero data
        }
    }

    std::vector<double> x(sys.size(), 0.0);
    const PcgResult res =
        pcg([&sys](const std::vector<double>& q, std::vector<double>& y) { sys.apply(q, y); },
            sys.diag, b, x, cfg.elliptic_tol, 50 * (g.nx + g.ny));
    if (res.relative_residual > cfg.elliptic_tol)
        throw numerical_error("elliptic: solve stalled, relative residual " +
                              std::to_string(res.relative_residual));
    if (residual_out) *residual_out = res.relative_residual;

    ScalarField out(g, 0.0);
    for (std::size_t u = 0; u < sys.size(); ++u) out.v[sys.node_of_unknown[u]] = x[u];
    for (std::size_t k = 0; k < g.size(); ++k)
        if (mask.inside[k] && !interior[k]) out.v[k] = dirichlet[k];
    check_finite(out, "elliptic_tilde_solve");
    return out;
}

struct ReconstructionResult {
    AbsorptionField a;
    FixedPointTrace trace;
};

// Truncated fixed-point iteration: Phi_n = F[a_n], then the elliptic
// correction, then a_{n+1} = T[a0 + Psi/Phi_n^2 + a_tilde] in D, a0 outside.
inline ReconstructionResult fixed_point_reconstruct(const ScalarField& psi,
                                                    const BoundaryData& bc,
                                                    const SubdomainMask& mask,
                                                    const ReconstructConfig& cfg) {
    cfg.validate();
    const Grid& g = psi.grid;
    require(g.same_layout(mask.grid), "reconstruct: grid mismatch");

    ReconstructionResult result;
    result.a.spec.a0 = cfg.a0;
    result.a.spec.a_lower = cfg.a_lower;
    result.a.spec.a_upper = cfg.a_upper;
    result.a.support = mask;
    ScalarField a(g, cfg.a0);
    const ScalarField* warm = nullptr;
    FluenceSolution phi;

    bool psi_zero = true;
    for (double v : psi.v)
        if (v != 0.0) psi_zero = false;

    int growing = 0;
    double prev_diff = -1.0;
    for (int n = 0; n < cfg.max_iters; ++n) {
        phi = solve_fluence(a, bc, cfg.elliptic_tol, warm);
        warm = &phi.phi;
        double elliptic_residual = 0.0;
        const ScalarField atilde = elliptic_tilde_solve(phi.phi, psi, mask, cfg, &elliptic_residual);

        ScalarField next(g, cfg.a0);
        if (!psi_zero || cfg.boundary_mode == BoundaryMode::numeric) {
            for (std::size_t k = 0; k < g.size(); ++k) {
                if (!mask.inside[k]) continue;
                const double p2 = phi.phi.v[k] * phi.phi.v[k];
                double v = cfg.a0 + psi.v[k] / p2 + atilde.v[k];
                next.v[k] = std::max(std::min(v, cfg.a_upper), cfg.a_lower);
            }
        }

        ScalarField diff(g);
        for (std::size_t k = 0; k < g.size(); ++k) diff.v[k] = next.v[k] - a.v[k];
        const double diff_l2 = l2_norm(diff);
        double pmin = phi.phi.v[0], pmax = phi.phi.v[0];
        for (double v : phi.phi.v) {
            pmin = std::min(pmin, v);
            pmax = std::max(pmax, v);
        }
        result.trace.iterates.push_back({diff_l2, pmin, pmax, elliptic_residual});
        a = next;

        const double scale = l2_norm(a);
        if (diff_l2 <= cfg.fp_tol * std::max(scale, 1e-300)) {
            result.trace.converged = true;
            break;
        }
        if (prev_diff >= 0.0 && diff_l2 > prev_diff)
            ++growing;
        else
            growing = 0;
        if (growing >= 3)
            throw numerical_error("reconstruct: fixed point diverging, successive differences "
                                  "grew for 3 iterations (last " +
                                  std::to_string(diff_l2) + ")");
        prev_diff = diff_l2;
    }

    result.a.field = a;
    check_finite(result.a.field, "fixed_point_reconstruct");
    return result;
}

// ||I[Psi] - I[Psi + delta]|| / ||delta|| on D.
inline double stability_probe(const ScalarField& psi, const ScalarField& delta,
                              const BoundaryData& bc, const SubdomainMask& mask,
                              const ReconstructConfig& cfg) {
    const double dn = l2_norm(delta, mask);
    if (dn == 0.0) return 0.0;
    ScalarField psi2 = psi;
    for (std::size_t k = 0; k < psi.v.size(); ++k) psi2.v[k] += delta.v[k];
    const ReconstructionResult r1 = fixed_point_reconstruct(psi, bc, mask, cfg);
    const ReconstructionResult r2 = fixed_point_reconstruct(psi2, bc, mask, cfg);
    ScalarField diff(psi.grid);
    for (std::size_t k = 0; k < psi.v.size(); ++k)
        diff.v[k] = r2.a.field.v[k] - r1.a.field.v[k];
    return l2_norm(diff, mask) / dn;
}

} // namespace aot
