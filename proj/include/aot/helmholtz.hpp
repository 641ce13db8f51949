#pragma once

#include "aot/acoustics.hpp"
#include "aot/fft.hpp"
#include "aot/grid.hpp"
#include "aot/pcg.hpp"

namespace aot {

// Spectral workspace for compactly supported fields: the grid is embedded in
// a periodic box padded to the next power of two >= 2x the node count per
// axis, so wraparound of compact fields stays below roundoff.
struct SpectralWorkspace {
    Grid grid;
    std::size_t px = 0; // padded dimensions
    std::size_t py = 0;

    explicit SpectralWorkspace(const Grid& g) : grid(g) {
        px = next_pow2(2 * static_cast<std::size_t>(g.nx));
        py = next_pow2(2 * static_cast<std::size_t>(g.ny));
    }

    Fft2 embed(const std::vector<double>& v) const {
        Fft2 f(px, py);
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i < grid.nx; ++i)
                f.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
                    cplx(v[grid.idx(i, j)], 0.0);
        return f;
    }

    std::vector<double> crop(const Fft2& f) const {
        std::vector<double> out(grid.size());
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i < grid.nx; ++i)
                out[grid.idx(i, j)] =
                    f.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)).real();
        return out;
    }

    // Angular frequency of bin (kx, ky); Nyquist rows/columns are treated as
    // zero by the multipliers to keep real fields real.
    double xi_x(std::size_t k) const { return 2.0 * 3.14159265358979323846 * freq_index(k, px) / (px * grid.hx()); }
    double xi_y(std::size_t k) const { return 2.0 * 3.14159265358979323846 * freq_index(k, py) / (py * grid.hy()); }
    bool nyquist(std::size_t kx, std::size_t ky) const { return kx == px / 2 || ky == py / 2; }
};

// Enforce the compact-support precondition: a zero collar of at least
// `collar` nodes around the grid edge.
inline void require_compact_support(const VectorField& U, int collar, double tol_rel) {
    const Grid& g = U.grid;
    double maxmag = 0.0;
    for (std::size_t k = 0; k < U.ux.size(); ++k)
        maxmag = std::max(maxmag, std::max(std::abs(U.ux[k]), std::abs(U.uy[k])));
    const double tol = tol_rel * std::max(maxmag, 1e-300);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (i >= collar && i < g.nx - collar && j >= collar && j < g.ny - collar) continue;
            const std::size_t k = g.idx(i, j);
            require(std::abs(U.ux[k]) <= tol && std::abs(U.uy[k]) <= tol,
                    "helmholtz: field is not compactly supported (nonzero boundary collar)");
        }
}

struct HelmholtzParts {
    ScalarField psi;    // gradient potential, zero-mean gauge
    ScalarField g_curl; // curl potential: U = grad psi + perp-grad g_curl
};

// Everything the decomposition produces, kept on the padded torus where the
// split is exact mode by mode. Vectors are row-major px*py.
struct PaddedDecomposition {
    std::size_t px = 0, py = 0;
    std::vector<double> ux, uy;       // embedded input
    std::vector<double> psi, g_curl;  // potentials
    std::vector<double> gpx, gpy;     // spectral grad psi
    std::vector<double> gcx, gcy;     // spectral perp-grad g_curl
};

inline PaddedDecomposition helmholtz_decompose_padded(const VectorField& U) {
    require_compact_support(U, 4, 1e-13);
    const SpectralWorkspace ws(U.grid);
    Fft2 fx = ws.embed(U.ux);
    Fft2 fy = ws.embed(U.uy);
    fx.forward();
    fy.forward();
    Fft2 psi_hat(ws.px, ws.py), a_hat(ws.px, ws.py);
    Fft2 gpx(ws.px, ws.py), gpy(ws.px, ws.py), gcx(ws.px, ws.py), gcy(ws.px, ws.py);
    const cplx minus_i(0.0, -1.0);
    const cplx iunit(0.0, 1.0);
    // Nyquist modes keep the positive frequency convention: the two projections
    // then sum to the identity at every mode except xi = 0, so the round trip
    // is exact up to the (zeroed) mean; their non-Hermitian dust is discarded
    // by the real part and only touches the orthogonality at the level of the
    // Nyquist energy of U.
    for (std::size_t ky = 0; ky < ws.py; ++ky)
        for (std::size_t kx = 0; kx < ws.px; ++kx) {
            if (kx == 0 && ky == 0) continue;
            const double xx = ws.xi_x(kx);
            const double yy = ws.xi_y(ky);
            const double inv = 1.0 / (xx * xx + yy * yy);
            const cplx ux = fx.at(kx, ky);
            const cplx uy = fy.at(kx, ky);
            const cplx ph = minus_i * (ux * xx + uy * yy) * inv;
            const cplx ah = minus_i * (uy * xx - ux * yy) * inv;
            psi_hat.at(kx, ky) = ph;
            a_hat.at(kx, ky) = ah;
            gpx.at(kx, ky) = iunit * xx * ph;
            gpy.at(kx, ky) = iunit * yy * ph;
            gcx.at(kx, ky) = -iunit * yy * ah; // perp-grad = (-d/dy, d/dx)
            gcy.at(kx, ky) = iunit * xx * ah;
        }
    psi_hat.inverse();
    a_hat.inverse();
    gpx.inverse();
    gpy.inverse();
    gcx.inverse();
    gcy.inverse();

    PaddedDecomposition out;
    out.px = ws.px;
    out.py = ws.py;
    const std::size_t n = ws.px * ws.py;
    out.ux.assign(n, 0.0);
    out.uy.assign(n, 0.0);
    for (int j = 0; j < U.grid.ny; ++j)
        for (int i = 0; i < U.grid.nx; ++i) {
            out.ux[static_cast<std::size_t>(j) * ws.px + i] = U.ux[U.grid.idx(i, j)];
            out.uy[static_cast<std::size_t>(j) * ws.px + i] = U.uy[U.grid.idx(i, j)];
        }
    auto take_real = [n](const Fft2& f) {
        std::vector<double> v(n);
        for (std::size_t k = 0; k < n; ++k) v[k] = f.a[k].real();
        return v;
    };
    out.psi = take_real(psi_hat);
    out.g_curl = take_real(a_hat);
    out.gpx = take_real(gpx);
    out.gpy = take_real(gpy);
    out.gcx = take_real(gcx);
    out.gcy = take_real(gcy);
    return out;
}

// Fourier-multiplier Helmholtz split: psi_hat = (U_hat . xi) / (i |xi|^2),
// A_hat = (xi_x U_hat_y - xi_y U_hat_x) / (i |xi|^2), with the xi = 0 mode
// gauged to zero. perp-grad = (-d/dy, d/dx).
inline HelmholtzParts helmholtz_decompose(const VectorField& U) {
    const PaddedDecomposition full = helmholtz_decompose_padded(U);
    HelmholtzParts out;
    out.psi = ScalarField(U.grid);
    out.g_curl = ScalarField(U.grid);
    for (int j = 0; j < U.grid.ny; ++j)
        for (int i = 0; i < U.grid.nx; ++i) {
            out.psi.v[U.grid.idx(i, j)] = full.psi[static_cast<std::size_t>(j) * full.px + i];
            out.g_curl.v[U.grid.idx(i, j)] = full.g_curl[static_cast<std::size_t>(j) * full.px + i];
        }
    check_finite(out.psi, "helmholtz_decompose");
    check_finite(out.g_curl, "helmholtz_decompose");
    return out;
}

// Spectral gradient of a field treated as compactly supported on the padded
// box (used by the decomposition tests).
inline VectorField spectral_gradient(const ScalarField& f) {
    const SpectralWorkspace ws(f.grid);
    Fft2 fh = ws.embed(f.v);
    fh.forward();
    Fft2 gx(ws.px, ws.py), gy(ws.px, ws.py);
    const cplx iunit(0.0, 1.0);
    for (std::size_t ky = 0; ky < ws.py; ++ky)
        for (std::size_t kx = 0; kx < ws.px; ++kx) {
            if (ws.nyquist(kx, ky)) continue;
            gx.at(kx, ky) = iunit * ws.xi_x(kx) * fh.at(kx, ky);
            gy.at(kx, ky) = iunit * ws.xi_y(ky) * fh.at(kx, ky);
        }
    gx.inverse();
    gy.inverse();
    VectorField out(f.grid);
    out.ux = ws.crop(gx);
    out.uy = ws.crop(gy);
    return out;
}

// ---------------------------------------------------------------------------
// Harmonic correction: solve lap(h) = 0 in D with h = -candidate on the
// discrete boundary ring of D, return candidate + h (zero trace, zero outside).

inline ScalarField harmonic_correction(const ScalarField& candidate, const SubdomainMask& mask,
                                       double tol = 1e-10) {
    const Grid& g = candidate.grid;
    require(g.same_layout(mask.grid), "harmonic_correction: grid mismatch");
    const std::vector<std::uint8_t> interior = strict_interior(mask);
    const std::vector<double> ones(g.size(), 1.0);
    MaskedDivSystem sys(mask, interior, ones);

    std::vector<double> dirichlet(g.size(), 0.0);
    for (std::size_t k = 0; k < g.size(); ++k)
        if (mask.inside[k] && !interior[k]) dirichlet[k] = -candidate.v[k];

    std::vector<double> b(sys.size(), 0.0);
    sys.add_dirichlet_rhs(dirichlet, b);
    std::vector<double> h(sys.size(), 0.0);
    const PcgResult res =
        pcg([&sys](const std::vector<double>& x, std::vector<double>& y) { sys.apply(x, y); },
            sys.diag, b, h, tol, 50 * (g.nx + g.ny));
    if (res.relative_residual > tol)
        throw numerical_error("harmonic_correction: Dirichlet solve stalled, residual " +
                              std::to_string(res.relative_residual));

    ScalarField out(g, 0.0);
    for (std::size_t u = 0; u < sys.size(); ++u) {
        const std::size_t k = sys.node_of_unknown[u];
        out.v[k] = candidate.v[k] + h[u];
    }
    // ring nodes: candidate + (-candidate) = 0 exactly; outside stays 0
    return out;
}

// Ground-truth internal data: decompose Phi^2 grad_h a and pin the gauge with
// the harmonic correction so the output vanishes on the discrete boundary of D.
inline ScalarField ground_truth_internal_data(const AbsorptionField& a, const ScalarField& phi,
                                              double tol = 1e-10) {
    const Grid& g = a.field.grid;
    const VectorField da = gradient(a.field);
    VectorField U(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double p2 = phi.v[k] * phi.v[k];
        U.ux[k] = p2 * da.ux[k];
        U.uy[k] = p2 * da.uy[k];
    }
    const HelmholtzParts parts = helmholtz_decompose(U);
    return harmonic_correction(parts.psi, a.support, tol);
}

// ---------------------------------------------------------------------------
// Appendix-style empirical rate checks for the mollifier operator
// T_eta f = f * w_eta acting on the first variable (validation only).

// Log-log slope of ||T_eta f - f||_L2 against eta. `kinked` selects a test
// function with a crease orthogonal to the convolution axis.
inline double mollifier_rate_check(bool kinked, const WaveShape& wave) {
    const int n = 1024;
    const double L = 2.0;
    const double h = L / n;
    std::vector<double> f(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double x = -1.0 + i * h;
        const double smooth = std::exp(-18.0 * x * x);
        f[static_cast<std::size_t>(i)] = kinked ? std::max(0.0, 1.0 - 4.0 * std::abs(x)) : smooth;
    }
    std::vector<double> etas = {0.16, 0.08, 0.04, 0.02};
    std::vector<double> errs;
    for (double eta : etas) {
        double err2 = 0.0;
        const int half = static_cast<int>(std::ceil(eta / h)) + 1;
        for (int i = 0; i < n; ++i) {
            double conv = 0.0;
            for (int q = -half; q <= half; ++q) {
                const int s = i - q;
                const double fv = (s >= 0 && s < n) ? f[static_cast<std::size_t>(s)] : 0.0;
                conv += fv * wave(q * h / eta) / eta * h;
            }
            const double d = conv - f[static_cast<std::size_t>(i)];
            err2 += d * d * h;
        }
        errs.push_back(std::sqrt(err2));
    }
    return loglog_slope(etas, errs);
}

// Monte-Carlo check of ||T[f]||_L2 <= ||theta||_L2 ||f||_L2 for the kernel
// operator T[f](x) = int f(t, x2) theta(t, x1) dt on a periodic grid.
// Returns the maximum ratio over `trials` random draws.
inline double kernel_operator_bound_check(int trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int n = 48;
    const double h = 1.0 / n;
    double worst = 0.0;
    std::vector<double> theta(static_cast<std::size_t>(n) * n);
    std::vector<double> f(static_cast<std::size_t>(n) * n);
    for (int trial = 0; trial < trials; ++trial) {
        for (auto& v : theta) v = gauss(rng);
        for (auto& v : f) v = gauss(rng);
        // T[f](x1, x2) = sum_t f(t, x2) theta(t, x1) h
        double tf2 = 0.0;
        for (int x2 = 0; x2 < n; ++x2)
            for (int x1 = 0; x1 < n; ++x1) {
                double s = 0.0;
                for (int t = 0; t < n; ++t)
                    s += f[static_cast<std::size_t>(x2) * n + t] *
                         theta[static_cast<std::size_t>(x1) * n + t];
                s *= h;
                tf2 += s * s * h * h;
            }
        double th2 = 0.0, f2 = 0.0;
        for (double v : theta) th2 += v * v * h * h;
        for (double v : f) f2 += v * v * h * h;
        const double ratio = std::sqrt(tf2) / (std::sqrt(th2) * std::sqrt(f2));
        worst = std::max(worst, ratio);
    }
    return worst;
}

} // namespace aot
