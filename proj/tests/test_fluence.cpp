#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "aot/fluence.hpp"

using namespace aot;

namespace {

double manufactured_error(int nx, int ny, double k, int* iters = nullptr) {
    const Grid g(nx, ny, 0.0, 0.0, 1.6, 1.0);
    const double l = 0.1;
    ScalarField a(g, k * k);
    // g = l dnu(e^{kx}) + e^{kx}, resolved per boundary face
    const BoundaryData bc =
        BoundaryData::from_face_function(g, l, [&](double x, double, double nux, double) {
            const double phi = std::exp(k * x);
            return l * nux * k * phi + phi;
        });
    const FluenceSolution s = solve_fluence(a, bc, 1e-12);
    if (iters) *iters = s.iterations;
    double num = 0.0, den = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double exact = std::exp(k * g.x(i));
            const double w = trapezoid_weight(g, i, j);
            num += w * (s.phi(i, j) - exact) * (s.phi(i, j) - exact);
            den += w * exact * exact;
        }
    return std::sqrt(num / den);
}

} // namespace

TEST_CASE("manufactured solution: accuracy and convergence order") {
    const double e_coarse = manufactured_error(128, 80, 1.0);
    const double e_fine = manufactured_error(256, 160, 1.0);
    CHECK(e_fine <= 1e-3);
    const double h1 = 1.6 / 127, h2 = 1.6 / 255;
    CHECK(std::log(e_coarse / e_fine) / std::log(h1 / h2) >= 1.9);
}

TEST_CASE("maximum principle: a = 1, g = 1 gives 0 < phi <= 1") {
    const Grid g(128, 80, 0.0, 0.0, 1.6, 1.0);
    const ScalarField a(g, 1.0);
    const FluenceSolution s = solve_fluence(a, BoundaryData::constant(g, 0.1, 1.0), 1e-10);
    for (double v : s.phi.v) {
        CHECK(v > 0.0);
        CHECK(v <= 1.0 + 1e-12);
    }
    CHECK(s.residual_norm <= 1e-10);
}

TEST_CASE("comparison principle: larger absorption gives smaller fluence") {
    const Grid g(96, 64, 0.0, 0.0, 1.6, 1.0);
    const BoundaryData bc = BoundaryData::constant(g, 0.1, 1.0);
    const FluenceSolution lo = solve_fluence(ScalarField(g, 1.0), bc, 1e-11);
    const FluenceSolution hi = solve_fluence(ScalarField(g, 2.0), bc, 1e-11);
    for (std::size_t k = 0; k < lo.phi.v.size(); ++k) CHECK(hi.phi.v[k] <= lo.phi.v[k] + 1e-10);
}

TEST_CASE("nonpositive absorption is rejected") {
    const Grid g(32, 20, 0.0, 0.0, 1.6, 1.0);
    ScalarField a(g, 1.0);
    a(5, 5) = 0.0;
    CHECK_THROWS_AS(solve_fluence(a, BoundaryData::constant(g, 0.1, 1.0)), validation_error);
    CHECK_THROWS_AS(BoundaryData::constant(g, 0.1, 0.0), validation_error);
    CHECK_THROWS_AS(BoundaryData::constant(g, -0.1, 1.0), validation_error);
}

TEST_CASE("lipschitz probe: zero for identical inputs, first-order in the perturbation") {
    const Grid g(128, 80, 0.0, 0.0, 1.6, 1.0);
    const BoundaryData bc = BoundaryData::constant(g, 0.1, 1.0);
    ScalarField a(g, 1.0);
    CHECK(fluence_lipschitz_probe(a, a, bc) == 0.0);

    auto perturbed = [&](double amp) {
        ScalarField p = a;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double d = std::hypot(g.x(i) - 0.8, g.y(j) - 0.5);
                if (d < 0.2) p(i, j) += amp;
            }
        return p;
    };
    const double r_full = fluence_lipschitz_probe(a, perturbed(0.2), bc);
    const double r_half = fluence_lipschitz_probe(a, perturbed(0.1), bc);
    CHECK(r_half / r_full >= 0.8);
    CHECK(r_half / r_full <= 1.2);
}

TEST_CASE("lipschitz probe: ratio bounded across random disc perturbations") {
    const Grid g(96, 64, 0.0, 0.0, 1.6, 1.0);
    const BoundaryData bc = BoundaryData::constant(g, 0.1, 1.0);
    const ScalarField a(g, 1.0);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double lo = 1e300, hi = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const double cx = 0.4 + 0.8 * uni(rng);
        const double cy = 0.25 + 0.5 * uni(rng);
        const double rad = 0.05 + 0.15 * uni(rng);
        const double amp = 0.05 + 0.4 * uni(rng);
        ScalarField p = a;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                if (std::hypot(g.x(i) - cx, g.y(j) - cy) < rad) p(i, j) += amp;
        const double ratio = fluence_lipschitz_probe(a, p, bc);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    CHECK(hi / lo <= 5.0);
}
