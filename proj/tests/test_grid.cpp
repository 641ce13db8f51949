#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <random>

#include "aot/grid.hpp"

using namespace aot;

namespace {

const double kPi = 3.14159265358979323846;

Grid paper_grid(int nx = 256, int ny = 160) { return Grid(nx, ny, 0.0, 0.0, 1.6, 1.0); }

ScalarField fill(const Grid& g, const std::function<double(double, double)>& fn) {
    ScalarField f(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) f(i, j) = fn(g.x(i), g.y(j));
    return f;
}

double max_gradient_error(const Grid& g) {
    const ScalarField f = fill(g, [](double x, double y) { return std::sin(kPi * x) * std::sin(kPi * y); });
    const VectorField grad = gradient(f);
    double err = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double gx = kPi * std::cos(kPi * g.x(i)) * std::sin(kPi * g.y(j));
            const double gy = kPi * std::sin(kPi * g.x(i)) * std::cos(kPi * g.y(j));
            const std::size_t k = g.idx(i, j);
            err = std::max(err, std::max(std::abs(grad.ux[k] - gx), std::abs(grad.uy[k] - gy)));
        }
    return err;
}

} // namespace

TEST_CASE("grid invariants") {
    CHECK_THROWS_AS(Grid(2, 10, 0, 0, 1, 1), validation_error);
    CHECK_THROWS_AS(Grid(10, 10, 0, 0, -1, 1), validation_error);
    const Grid g = paper_grid();
    CHECK(g.hx() == doctest::Approx(1.6 / 255));
    CHECK(g.hy() == doctest::Approx(1.0 / 159));
}

TEST_CASE("gradient of constant and affine fields") {
    const Grid g = paper_grid(64, 40);
    const VectorField gc = gradient(fill(g, [](double, double) { return 3.5; }));
    for (double v : gc.ux) CHECK(v == doctest::Approx(0.0).epsilon(1e-13));
    for (double v : gc.uy) CHECK(v == doctest::Approx(0.0).epsilon(1e-13));

    const VectorField gx = gradient(fill(g, [](double x, double) { return x; }));
    for (double v : gx.ux) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    for (double v : gx.uy) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("gradient second-order refinement study") {
    const Grid coarse = paper_grid(128, 80);
    const Grid fine = paper_grid(256, 160);
    const double e1 = max_gradient_error(coarse);
    const double e2 = max_gradient_error(fine);
    const double order = std::log(e1 / e2) / std::log(coarse.hx() / fine.hx());
    CHECK(order >= 1.9);
    // C h^2 bound with a generous constant
    CHECK(e2 <= 20.0 * fine.hx() * fine.hx());
}

TEST_CASE("divergence of affine fields") {
    const Grid g = paper_grid(64, 40);
    VectorField F(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            F.ux[g.idx(i, j)] = g.x(i);
            F.uy[g.idx(i, j)] = g.y(j);
        }
    const ScalarField d = divergence(F);
    for (double v : d.v) CHECK(v == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("divergence of gradient matches analytic laplacian") {
    const Grid g = paper_grid();
    const double cx = 0.8, cy = 0.5, s = 0.08;
    const ScalarField f = fill(g, [&](double x, double y) {
        return std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (2 * s * s));
    });
    const ScalarField lap = divergence(gradient(f));
    double num = 0.0, den = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double dx = g.x(i) - cx;
            const double dy = g.y(j) - cy;
            const double r2 = dx * dx + dy * dy;
            const double exact = f(i, j) * (r2 / (s * s * s * s) - 2.0 / (s * s));
            const double w = trapezoid_weight(g, i, j);
            num += w * (lap(i, j) - exact) * (lap(i, j) - exact);
            den += w * exact * exact;
        }
    CHECK(std::sqrt(num / den) <= 1e-2);
}

TEST_CASE("integrate: area, linearity, monotonicity") {
    const Grid g = paper_grid();
    CHECK(integrate(fill(g, [](double, double) { return 1.0; })) == doctest::Approx(1.6).epsilon(1e-12));
    CHECK(integrate(ScalarField(g, 0.0)) == 0.0);

    // smoothed disc indicator, radius 0.3: area within 1%
    const double r0 = 0.3, w = 2.5 * g.hx();
    const ScalarField disc = fill(g, [&](double x, double y) {
        const double d = std::hypot(x - 0.8, y - 0.5) - r0;
        if (d <= -w) return 1.0;
        if (d >= w) return 0.0;
        const double t = (d + w) / (2 * w);
        return 1.0 - t * t * (3 - 2 * t);
    });
    CHECK(integrate(disc) == doctest::Approx(kPi * 0.09).epsilon(0.01));

    // monotonicity: f <= g pointwise implies integrate(f) <= integrate(g)
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    ScalarField lo(g), hi(g);
    for (std::size_t k = 0; k < lo.v.size(); ++k) {
        lo.v[k] = uni(rng);
        hi.v[k] = lo.v[k] + uni(rng);
    }
    CHECK(integrate(lo) <= integrate(hi));
}

TEST_CASE("gradient/divergence adjointness for compact fields") {
    const Grid g = paper_grid(96, 64);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    ScalarField f(g);
    for (double& v : f.v) v = uni(rng);
    // smooth compact bump for F, zero within a wide boundary collar
    VectorField F(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double x = g.x(i), y = g.y(j);
            const double b = std::exp(-80.0 * ((x - 0.8) * (x - 0.8) + (y - 0.5) * (y - 0.5)));
            const double cut = (i < 4 || j < 4 || i >= g.nx - 4 || j >= g.ny - 4) ? 0.0 : 1.0;
            F.ux[g.idx(i, j)] = cut * b * (0.3 + 0.1 * std::sin(5 * x));
            F.uy[g.idx(i, j)] = cut * b * (0.7 - 0.2 * std::cos(4 * y));
        }
    const VectorField gf = gradient(f);
    const ScalarField dF = divergence(F);
    const double cell = g.hx() * g.hy();
    double lhs = 0.0;
    for (std::size_t k = 0; k < f.v.size(); ++k)
        lhs += cell * (gf.ux[k] * F.ux[k] + gf.uy[k] * F.uy[k] + f.v[k] * dF.v[k]);
    const double scale = l2_norm(f) * l2_norm(F);
    CHECK(std::abs(lhs) <= 1e-10 * scale);
}

TEST_CASE("masked integration counts inside nodes") {
    const Grid g = paper_grid(128, 80);
    const SubdomainMask m = disc_mask(g, {0.8, 0.5}, 0.3);
    const ScalarField one(g, 1.0);
    CHECK(integrate(one, m) == doctest::Approx(kPi * 0.09).epsilon(0.03));
}

TEST_CASE("mask must be strictly interior") {
    const Grid g = paper_grid(64, 40);
    CHECK_THROWS_AS(disc_mask(g, {0.0, 0.5}, 0.2), validation_error);
}

TEST_CASE("AOTF round trip is bit exact") {
    const Grid g = paper_grid(17, 9);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(-5.0, 5.0);
    ScalarField f(g);
    for (double& v : f.v) v = uni(rng);
    const std::string path = "test_roundtrip.aotf";
    write_aotf(f, path);
    const ScalarField back = read_aotf(path);
    CHECK(back.grid.same_layout(g));
    for (std::size_t k = 0; k < f.v.size(); ++k) CHECK(back.v[k] == f.v[k]);
    std::remove(path.c_str());
}

TEST_CASE("bilinear sampling: nodes exact, outside zero") {
    const Grid g = paper_grid(32, 20);
    ScalarField f(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) f(i, j) = 2.0 * g.x(i) - g.y(j);
    CHECK(bilinear_sample(f, g.x(7), g.y(3)) == doctest::Approx(f(7, 3)));
    CHECK(bilinear_sample(f, 0.71, 0.37) == doctest::Approx(2.0 * 0.71 - 0.37).epsilon(1e-12));
    CHECK(bilinear_sample(f, -0.1, 0.5) == 0.0);
    CHECK(bilinear_sample(f, 0.5, 1.2) == 0.0);
}
