#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>

#include "aot/acoustics.hpp"

using namespace aot;

namespace {

AbsorptionField disc_phantom(const Grid& g, Point dc, double d_radius, Point ic, double i_radius,
                             double value) {
    const SubdomainMask mask = disc_mask(g, dc, d_radius);
    AbsorptionSpec spec;
    spec.a0 = 1.0;
    spec.a_lower = 1.0;
    spec.a_upper = 1.98;
    spec.inclusions.push_back(DiscInclusion{ic, i_radius, value});
    return rasterize(spec, mask);
}

} // namespace

TEST_CASE("wave shape: mass, support, derivative floor") {
    const WaveShape wr = WaveShape::make(false);
    const WaveShape wn = WaveShape::make(true);
    CHECK(wr.raw_integral() == doctest::Approx(0.443994).epsilon(1e-4));
    CHECK(wn.l1_mass() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(wr(0.0) == doctest::Approx(std::exp(-1.0)));
    CHECK(wn(0.0) == doctest::Approx(std::exp(-1.0) / 0.443994).epsilon(1e-4));
    CHECK(wr(1.0) == 0.0);
    CHECK(wr(-1.2) == 0.0);
    for (double t : {-0.9, -0.5, 0.0, 0.3, 0.99}) CHECK(wn(t) >= 0.0);
    // raw profile satisfies w' > -1; the normalized one does not
    CHECK(wr.min_deriv() > -1.0);
    CHECK(wn.min_deriv() < -1.0);
    CHECK(wr.r_min() == doctest::Approx(1.05 * 0.7984).epsilon(1e-2));
    CHECK(wn.r_min() == doctest::Approx(wr.r_min() / 0.443994).epsilon(1e-3));
}

TEST_CASE("displacement field: values on and off the shell") {
    const Grid g(161, 161, 0.0, 0.0, 4.0, 4.0);
    const WaveShape wave = WaveShape::make(true);
    const double eta = 0.1, r = 2.0;
    const Point y{0.0, 2.0};
    const VectorField v = displacement(g, wave, eta, y, r);
    // node exactly at distance r: magnitude (eta/r) w(0), radial direction
    const std::size_t k_on = g.idx(80, 80); // (2.0, 2.0), distance 2.0 from y
    CHECK(std::hypot(v.ux[k_on], v.uy[k_on]) ==
          doctest::Approx(eta / r * wave(0.0)).epsilon(1e-12));
    CHECK(v.uy[k_on] == doctest::Approx(0.0));
    CHECK(v.ux[k_on] > 0.0);
    // node far outside the shell
    const std::size_t k_off = g.idx(80, 20);
    CHECK(v.ux[k_off] == 0.0);
    CHECK(v.uy[k_off] == 0.0);

    // halving eta halves the largest magnitude
    const VectorField v2 = displacement(g, wave, eta / 2, y, r);
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t k = 0; k < v.ux.size(); ++k) {
        m1 = std::max(m1, std::hypot(v.ux[k], v.uy[k]));
        m2 = std::max(m2, std::hypot(v2.ux[k], v2.uy[k]));
    }
    CHECK(m2 / m1 == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("displaced absorption: identity cases and the monotonicity floor") {
    const Grid g(241, 241, 0.0, 0.0, 6.0, 6.0);
    const WaveShape wave = WaveShape::make(true);
    const AbsorptionField a = disc_phantom(g, {3.0, 3.0}, 2.2, {3.0, 3.0}, 0.4, 1.5);

    // constant field is invariant
    ScalarField c(g, 2.5);
    const ScalarField cv = displace_absorption(c, wave, 0.05, {0.5, 3.0}, 2.0);
    for (std::size_t k = 0; k < c.v.size(); ++k) CHECK(cv.v[k] == 2.5);

    // shell missing the support of (a - a0) leaves a untouched
    const ScalarField av = displace_absorption(a.field, wave, 0.05, {0.5, 3.0}, 5.5);
    for (std::size_t k = 0; k < a.field.v.size(); ++k) CHECK(av.v[k] == a.field.v[k]);

    // below the monotonicity floor the radial map folds -> rejection
    CHECK_THROWS_AS(displace_absorption(a.field, wave, 0.05, {0.5, 3.0}, 1.2), validation_error);
}

TEST_CASE("L1 shift halves when eta halves (aligned front)") {
    const Grid g(601, 601, 0.0, 0.0, 6.0, 6.0);
    const WaveShape wave = WaveShape::make(true);
    const Point dc{3.0, 3.0};
    const AbsorptionField a = disc_phantom(g, dc, 2.2, dc, 2.0, 1.5);
    auto l1_shift = [&](double eta) {
        const ScalarField av = displace_absorption(a.field, wave, eta, dc, 2.0);
        ScalarField diff(g);
        for (std::size_t k = 0; k < diff.v.size(); ++k) diff.v[k] = av.v[k] - a.field.v[k];
        return l1_norm(diff);
    };
    const double n1 = l1_shift(0.08);
    const double n2 = l1_shift(0.04);
    CHECK(n2 / n1 >= 0.4);
    CHECK(n2 / n1 <= 0.6);
}

TEST_CASE("measurement vanishes when nothing moves") {
    const Grid g(121, 121, 0.0, 0.0, 2.4, 2.4);
    const WaveShape wave = WaveShape::make(false);
    const BoundaryData bc = BoundaryData::constant(g, 0.1, 1.0);
    const SubdomainMask mask = disc_mask(g, {1.2, 1.2}, 0.3);
    AbsorptionSpec spec;
    spec.a0 = 1.0;
    spec.a_lower = 1.0;
    spec.a_upper = 1.98;
    const AbsorptionField constant_a = rasterize(spec, mask);
    const Measurement m = measure(constant_a, bc, wave, 0.05, {0.2, 1.2}, 1.0);
    CHECK(m.value == 0.0);
    CHECK(m.boundary_value == 0.0);

    // shell missing the inclusion support
    const AbsorptionField a = disc_phantom(g, {1.2, 1.2}, 0.3, {1.2, 1.2}, 0.15, 1.5);
    const Measurement m2 = measure(a, bc, wave, 0.05, {0.2, 1.2}, 2.2);
    CHECK(m2.value == 0.0);
}

TEST_CASE("volume and boundary measurement forms agree") {
    const Grid g(181, 181, 0.0, 0.0, 2.4, 2.4);
    const WaveShape wave = WaveShape::make(false);
    const BoundaryData bc = BoundaryData::constant(g, 0.1, 1.0);
    const AbsorptionField a = disc_phantom(g, {1.2, 1.2}, 0.3, {1.2, 1.2}, 0.2, 1.5);
    const Measurement m = measure(a, bc, wave, 0.05, {0.2, 1.2}, 1.0, 1e-11);
    CHECK(m.value != 0.0);
    CHECK(std::abs(m.value - m.boundary_value) <=
          1e-2 * std::max(std::abs(m.value), std::abs(m.boundary_value)));
}

TEST_CASE("ideal measurement: zero cases and sweep structure") {
    const Grid g(181, 181, 0.0, 0.0, 2.4, 2.4);
    const BoundaryData bc = BoundaryData::constant(g, 0.1, 1.0);
    const AbsorptionField a = disc_phantom(g, {1.2, 1.2}, 0.3, {1.2, 1.2}, 0.2, 1.5);
    const FluenceSolution phi = solve_fluence(a, bc, 1e-10);

    AcousticConfig cfg;
    cfg.wave = WaveShape::make(true);
    cfg.eta = 0.05;
    cfg.centers = circle_centers({1.2, 1.2}, 1.0, 8);
    cfg.radii = linspace(0.3, 2.3, 12);
    const Sinogram s = sweep_ideal(a, phi.phi, cfg);

    // radii beyond every distance from the center to the inclusion are zero
    for (std::size_t c = 0; c < s.n_centers(); ++c) CHECK(s.at(c, 11) == 0.0);
    // some shell crossing the inclusion produces signal
    double peak = 0.0;
    for (double v : s.values) peak = std::max(peak, std::abs(v));
    CHECK(peak > 1e-4);

    // constant absorption sweeps to all zeros
    AbsorptionSpec spec;
    spec.a0 = 1.0;
    spec.a_lower = 1.0;
    spec.a_upper = 1.98;
    const AbsorptionField constant_a = rasterize(spec, disc_mask(g, {1.2, 1.2}, 0.3));
    const Sinogram z = sweep_ideal(constant_a, phi.phi, cfg);
    for (double v : z.values) CHECK(v == 0.0);
}

TEST_CASE("physical sweep is independent of the thread cap") {
    const Grid g(121, 121, 0.0, 0.0, 2.4, 2.4);
    const BoundaryData bc = BoundaryData::constant(g, 0.1, 1.0);
    const AbsorptionField a = disc_phantom(g, {1.2, 1.2}, 0.3, {1.2, 1.2}, 0.2, 1.5);
    AcousticConfig cfg;
    cfg.wave = WaveShape::make(false);
    cfg.eta = 0.06;
    cfg.centers = circle_centers({1.2, 1.2}, 1.0, 4);
    cfg.radii = linspace(0.9, 1.1, 3);
    set_thread_cap(1);
    const Sinogram s1 = sweep_measurements(a, bc, cfg, 1e-10);
    set_thread_cap(2);
    const Sinogram s2 = sweep_measurements(a, bc, cfg, 1e-10);
    set_thread_cap(1);
    for (std::size_t k = 0; k < s1.values.size(); ++k) CHECK(s1.values[k] == s2.values[k]);
}

TEST_CASE("acoustic config validation") {
    AcousticConfig cfg;
    cfg.wave = WaveShape::make(true);
    cfg.eta = 0.05;
    cfg.centers = circle_centers({1.2, 1.2}, 1.0, 4);
    cfg.radii = {0.5, 0.4}; // not increasing
    CHECK_THROWS_AS(cfg.validate(), validation_error);
    cfg.radii = {0.04, 0.5}; // below eta
    CHECK_THROWS_AS(cfg.validate(), validation_error);
    cfg.radii = {0.5, 1.0}; // fine for ideal ops, below r_min for displacement
    cfg.validate();
    CHECK_THROWS_AS(cfg.validate_for_displacement(), validation_error);
}

TEST_CASE("p-transform: constants, antiderivative, fundamental theorem") {
    std::vector<Point> centers = {{0.0, 0.0}, {1.0, 0.0}};
    const std::vector<double> radii = linspace(0.1, 0.9, 2001);
    Sinogram zero(centers, radii);
    const Sinogram pz = p_transform(zero);
    for (double v : pz.values) CHECK(v == 0.0);

    // phi = c maps to -c (r - r_start)
    Sinogram c(centers, radii);
    for (double& v : c.values) v = 2.5;
    const Sinogram pc = p_transform(c);
    for (std::size_t q = 0; q < centers.size(); ++q)
        for (std::size_t r = 0; r < radii.size(); ++r)
            CHECK(pc.at(q, r) == doctest::Approx(-2.5 * (radii[r] - radii[0])).epsilon(1e-12));

    // P applied to the analytic derivative recovers -(phi - phi(r_start))
    Sinogram dphi(centers, radii);
    auto fn = [](double r) { return std::sin(3.0 * r) + r * r; };
    auto dfn = [](double r) { return 3.0 * std::cos(3.0 * r) + 2.0 * r; };
    for (std::size_t q = 0; q < centers.size(); ++q)
        for (std::size_t r = 0; r < radii.size(); ++r) dphi.at(q, r) = dfn(radii[r]);
    const Sinogram pd = p_transform(dphi);
    for (std::size_t r = 0; r < radii.size(); ++r)
        CHECK(pd.at(0, r) == doctest::Approx(-(fn(radii[r]) - fn(radii[0]))).epsilon(1e-6));
}

TEST_CASE("AOTS round trip is bit exact and CSV has the documented header") {
    Sinogram s(circle_centers({1.0, 1.0}, 0.5, 5), linspace(0.1, 0.8, 7));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (double& v : s.values) v = uni(rng);
    write_aots(s, "test_roundtrip.aots");
    const Sinogram back = read_aots("test_roundtrip.aots");
    CHECK(back.same_lattice(s));
    for (std::size_t k = 0; k < s.values.size(); ++k) CHECK(back.values[k] == s.values[k]);
    std::remove("test_roundtrip.aots");

    write_sinogram_csv(s, "test_sino.csv");
    std::ifstream is("test_sino.csv");
    std::string header;
    std::getline(is, header);
    CHECK(header == "center_index,radius,value");
    std::remove("test_sino.csv");
}

TEST_CASE("density profile: zero for constants, peaks at tangency radii") {
    const Grid g(256, 160, 0.0, 0.0, 1.6, 1.0);
    const Point dc{0.8, 0.5};
    AcousticConfig cfg;
    cfg.wave = WaveShape::make(true);
    cfg.eta = 0.04;
    cfg.centers = {{0.8, 0.02}}; // a single center on the boundary of D
    cfg.radii = linspace(0.1, 0.9, 161);

    AbsorptionSpec spec;
    spec.a0 = 1.0;
    spec.a_lower = 1.0;
    spec.a_upper = 1.98;
    const SubdomainMask mask = disc_mask(g, dc, 0.48);
    const AbsorptionField constant_a = rasterize(spec, mask);
    const Sinogram z = density_profile(constant_a, cfg);
    for (double v : z.values) CHECK(v == 0.0);

    spec.inclusions.push_back(DiscInclusion{{0.8, 0.5}, 0.25, 1.5});
    const AbsorptionField a = rasterize(spec, mask);
    const Sinogram prof = density_profile(a, cfg);
    // tangency radii: distance from the center to the inclusion edge circle
    const double dist = 0.48; // |(0.8, 0.02) - (0.8, 0.5)|
    const double near_t = dist - 0.25, far_t = dist + 0.25;
    // the profile must peak within 2 eta of one of the tangency radii
    std::size_t argmax = 0;
    for (std::size_t r = 0; r < prof.n_radii(); ++r)
        if (prof.at(0, r) > prof.at(0, argmax)) argmax = r;
    const double rpk = prof.radii[argmax];
    const bool near_peak = std::abs(rpk - near_t) <= 2 * cfg.eta || std::abs(rpk - far_t) <= 2 * cfg.eta;
    CHECK(near_peak);
}
