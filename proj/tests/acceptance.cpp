// Acceptance suite: one criterion per invocation (argv[1] in 1..9), or all
// when no argument is given. Prints one [PASS]/[FAIL] line per criterion
// check and exits nonzero on any failure.

#include <cstdio>
#include <cstring>
#include <filesystem>

#include "aot/pipeline.hpp"
#include "aot/suites.hpp"

using namespace aot;

namespace {

int g_failures = 0;

void report(const CheckResult& c) {
    std::printf("[%s] %s: value %.6g vs threshold %s %.6g\n", c.pass ? "PASS" : "FAIL",
                c.name.c_str(), c.value, c.cmp == CheckResult::Cmp::le ? "<=" : ">=", c.threshold);
    if (!c.pass) ++g_failures;
}

void report(const std::vector<CheckResult>& checks) {
    for (const CheckResult& c : checks) report(c);
}

// --------------------------------------------------------------------------
// Criterion 1: cross-correlation identity (volume vs boundary form) on a
// two-disc phantom, 20 spot-checked (y, r) pairs, shrinking under refinement.

double corr_identity_worst(int nx, int ny, double* worst_value) {
    const Grid g(nx, ny, 0.0, 0.0, 1.6, 1.0);
    const Point dc{1.05, 0.5};
    const SubdomainMask mask = disc_mask(g, dc, 0.35);
    AbsorptionSpec spec;
    spec.a0 = 1.0;
    spec.a_lower = 1.0;
    spec.a_upper = 1.98;
    spec.inclusions.push_back(DiscInclusion{{1.0, 0.42}, 0.10, 1.5});
    spec.inclusions.push_back(DiscInclusion{{1.15, 0.62}, 0.09, 1.8});
    const AbsorptionField a = rasterize(spec, mask);
    const BoundaryData bc = BoundaryData::constant(g, 0.1, 1.0);
    const WaveShape wave = WaveShape::make(false); // radii below ~1.9 need the verbatim shape
    const double eta = 0.03;

    const FluenceSolution phi = solve_fluence(a, bc, 1e-11);
    const std::vector<Point> ys = {{0.10, 0.30}, {0.10, 0.45}, {0.10, 0.55}, {0.10, 0.70},
                                   {0.14, 0.42}};
    const std::vector<double> rs = {0.87, 0.95, 1.03, 1.08};
    std::vector<Measurement> ms;
    double biggest = 0.0;
    for (const Point& y : ys)
        for (double r : rs) {
            ms.push_back(measure_with(a, bc, phi, wave, eta, y, r, 1e-11));
            biggest = std::max(biggest, std::abs(ms.back().value));
        }
    // the identity is spot-checked where the measurement is non-negligible
    double worst = 0.0;
    int checked = 0;
    for (const Measurement& m : ms) {
        if (std::abs(m.value) < 1e-4 * biggest) continue;
        ++checked;
        worst = std::max(worst, std::abs(m.value - m.boundary_value) /
                                    std::max(std::abs(m.value), std::abs(m.boundary_value)));
    }
    if (checked < 18) worst = 1.0; // the pair set must actually exercise the identity
    if (worst_value) *worst_value = biggest;
    return worst;
}

void criterion_1() {
    double big1 = 0.0;
    const double worst_coarse = corr_identity_worst(256, 160, &big1);
    report(check_ge("corr-identity: largest |M| among the 20 pairs", big1, 1e-6));
    report(check_le("corr-identity: worst rel discrepancy at 256x160 over 20 pairs", worst_coarse,
                    1e-2));
    const double worst_fine = corr_identity_worst(512, 320, nullptr);
    report(check_le("corr-identity: worst rel discrepancy at 512x320", worst_fine, worst_coarse));
}

// --------------------------------------------------------------------------
// Criterion 5: internal-data closed loop through the convolution identity.

void criterion_5() {
    const Grid g(256, 160, 0.0, 0.0, 1.6, 1.0);
    const Point dc{0.8, 0.5};
    const SubdomainMask mask = disc_mask(g, dc, 0.44);
    AbsorptionSpec spec;
    spec.a0 = 1.0;
    spec.a_lower = 1.0;
    spec.a_upper = 1.98;
    spec.inclusions.push_back(DiscInclusion{{0.75, 0.45}, 0.16, 1.3});
    spec.inclusions.push_back(DiscInclusion{{0.9, 0.6}, 0.10, 1.6});
    AbsorptionField a = rasterize(spec, mask);
    for (int p = 0; p < 4; ++p) a.field = binomial_smooth(a.field);
    const BoundaryData bc = BoundaryData::constant(g, 0.1, 1.0);
    const FluenceSolution phi = solve_fluence(a, bc, 1e-10);
    const ScalarField psi = ground_truth_internal_data(a, phi.phi);

    const WaveShape wave = WaveShape::make(true);
    const double eta = 0.013;
    const RadonOperator op(g, circle_centers(dc, 0.44, 96), linspace(0.03, 0.92, 96), 720, mask);
    const Sinogram m = ideal_from_psi(psi, op, wave, eta, 8.0);
    const ScalarField rec = internal_data(m, op, 1e-6, 350);

    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < psi.v.size(); ++k)
        if (mask.inside[k]) {
            num += (rec.v[k] - psi.v[k]) * (rec.v[k] - psi.v[k]);
            den += psi.v[k] * psi.v[k];
        }
    report(check_le("internal-data closed loop: rel L2(D) error", std::sqrt(num / den), 0.10));

    // zero measurements invert to exactly zero internal data
    Sinogram zero(op.centers, op.radii);
    const ScalarField z = internal_data(zero, op, 1e-6, 50);
    report(check_le("internal-data: psi from zero sinogram", norm2(z.v), 0.0));
}

// --------------------------------------------------------------------------
// Criterion 6: fixed-point reconstruction (a) exact background, (b) small
// contrast quantitative loop, (c) full-contrast vessel phantom.

PolygonInclusion vessel(Point from, Point to, double width, double value) {
    const double dx = to.x - from.x, dy = to.y - from.y;
    const double len = std::hypot(dx, dy);
    const double nx = -dy / len * width / 2, ny = dx / len * width / 2;
    PolygonInclusion p;
    p.value = value;
    p.vertices = {{from.x + nx, from.y + ny},
                  {to.x + nx, to.y + ny},
                  {to.x - nx, to.y - ny},
                  {from.x - nx, from.y - ny}};
    return p;
}

AbsorptionSpec vessel_spec() {
    AbsorptionSpec spec;
    spec.a0 = 1.0;
    spec.a_lower = 1.0;
    spec.a_upper = 1.98;
    // elongated high-contrast structures spanning D, endpoints close to its
    // boundary (the margin hypothesis of the theory is deliberately thin here,
    // matching the paper's own experiment)
    auto on_d = [](double deg, double rad) {
        const double t = deg * 3.14159265358979323846 / 180.0;
        return Point{0.8 + rad * std::cos(t), 0.5 + rad * std::sin(t)};
    };
    spec.inclusions.push_back(vessel(on_d(195, 0.45), on_d(25, 0.45), 0.050, 1.9));
    spec.inclusions.push_back(vessel(on_d(140, 0.44), on_d(327, 0.45), 0.040, 1.7));
    spec.inclusions.push_back(vessel(on_d(262, 0.44), on_d(80, 0.44), 0.035, 1.98));
    spec.inclusions.push_back(vessel({0.55, 0.52}, {1.05, 0.60}, 0.030, 1.5));
    spec.inclusions.push_back(DiscInclusion{{0.66, 0.38}, 0.06, 1.8});
    return spec;
}

// Mean-square error density over structure nodes (a_true above background),
// split into the boundary collar and the interior of D.
std::pair<double, double> structure_error_split(const ScalarField& rec, const ScalarField& truth,
                                                Point dc, double d_radius, double collar) {
    const Grid& g = rec.grid;
    double num_in = 0.0, num_col = 0.0;
    std::size_t cnt_in = 0, cnt_col = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double dx = g.x(i) - dc.x, dy = g.y(j) - dc.y;
            const double d2 = dx * dx + dy * dy;
            if (d2 > d_radius * d_radius) continue;
            const std::size_t k = g.idx(i, j);
            if (truth.v[k] < 1.2) continue;
            const double e2 = (rec.v[k] - truth.v[k]) * (rec.v[k] - truth.v[k]);
            if (d2 > (d_radius - collar) * (d_radius - collar)) {
                num_col += e2;
                ++cnt_col;
            } else {
                num_in += e2;
                ++cnt_in;
            }
        }
    return {cnt_in ? num_in / cnt_in : 0.0, cnt_col ? num_col / cnt_col : 0.0};
}

void criterion_6() {
    // (a) + (b): exact background and small-contrast diagnostics
    report(suite_contraction(1));

    // (c) vessel phantom with contrast up to 1.98, driven through the
    // measurement-style chain (synthesized ideal sinogram -> P -> inversion ->
    // harmonic correction) over the radius window of the reference experiment,
    // so the near-boundary information loss is part of the loop
    ClosedLoopSetup setup(256, 160, 0.48, vessel_spec());
    {
        AbsorptionField a2 = setup.a;
        a2.field = binomial_smooth(binomial_smooth(a2.field));
        setup.a = a2;
        setup.phi = solve_fluence(setup.a, setup.bc, 1e-10);
        setup.psi = ground_truth_internal_data(setup.a, setup.phi.phi);
    }
    const WaveShape wave = WaveShape::make(true);
    const RadonOperator op(setup.grid, circle_centers(setup.d_center, setup.d_radius, 96),
                           linspace(0.05, 0.80, 88), 720, setup.mask);
    const Sinogram m = ideal_from_psi(setup.psi, op, wave, 0.013, 8.0);
    const ScalarField psi_rec = internal_data(m, op, 1e-6, 350);
    ReconstructConfig rcfg;
    rcfg.a_lower = 1.0;
    rcfg.a_upper = 1.98;
    rcfg.a0 = 1.0;
    rcfg.max_iters = 10;
    rcfg.fp_tol = 1e-8;
    const ReconstructionResult rec = fixed_point_reconstruct(psi_rec, setup.bc, setup.mask, rcfg);
    write_field_pgm(setup.a.field, "acceptance_vessels_true.pgm", 1.0, 1.98);
    write_field_pgm(rec.a.field, "acceptance_vessels_rec.pgm", 1.0, 1.98);
    report(check_le("vessels: trace length within max_iters",
                    static_cast<double>(rec.trace.iterates.size()), 10.0));
    const double err = interior_relative_error(rec.a.field, setup.a.field, setup.d_center,
                                               setup.d_radius, 0.1);
    report(check_le("vessels: interior relative L2 error (0.1 collar excluded)", err, 0.25));
    // vessel-resolving: the reconstructed contrast correlates with the truth
    double dot_rt = 0.0, n_r = 0.0, n_t = 0.0;
    for (std::size_t k = 0; k < setup.a.field.v.size(); ++k) {
        if (!setup.mask.inside[k]) continue;
        const double tr = setup.a.field.v[k] - 1.0;
        const double rc = rec.a.field.v[k] - 1.0;
        dot_rt += tr * rc;
        n_r += rc * rc;
        n_t += tr * tr;
    }
    report(check_ge("vessels: contrast correlation with the truth",
                    dot_rt / std::sqrt(std::max(n_r * n_t, 1e-300)), 0.7));
    const auto [in_density, col_density] =
        structure_error_split(rec.a.field, setup.a.field, setup.d_center, setup.d_radius, 0.1);
    report(check_ge("vessels: collar/interior structure error ratio (boundary attenuation)",
                    col_density / std::max(in_density, 1e-300), 1.2));
}

// --------------------------------------------------------------------------
// Criterion 7: L1 shift bound across the eta ladder.

void criterion_7() {
    const Grid g(1201, 1201, 0.0, 0.0, 6.0, 6.0);
    const Point dc{3.0, 3.0};
    const SubdomainMask mask = disc_mask(g, dc, 2.2);
    AbsorptionSpec spec;
    spec.a0 = 1.0;
    spec.a_lower = 1.0;
    spec.a_upper = 1.98;
    spec.inclusions.push_back(DiscInclusion{dc, 2.0, 1.5});
    const AbsorptionField a = rasterize(spec, mask);
    const WaveShape wave = WaveShape::make(true);

    const std::vector<double> etas = {0.04, 0.02, 0.01};
    // aligned front: the wave shell is concentric with the jump circle, where
    // the linear rate of the shift bound is attained
    std::vector<double> ratios;
    for (double eta : etas) {
        const ScalarField av = displace_absorption(a.field, wave, eta, dc, 2.0);
        ScalarField diff(g);
        for (std::size_t k = 0; k < diff.v.size(); ++k) diff.v[k] = av.v[k] - a.field.v[k];
        ratios.push_back(l1_norm(diff) / eta);
    }
    const double lo = *std::min_element(ratios.begin(), ratios.end());
    const double hi = *std::max_element(ratios.begin(), ratios.end());
    report(check_le("shift bound: max/min of ||a_v - a||_L1 / eta over the ladder", hi / lo, 1.5));
    report(check_ge("shift bound: shifts are nonzero", lo, 1e-6));

    // transversal front: the ratio may fall but must never grow
    std::vector<double> trans;
    for (double eta : etas) {
        const ScalarField av = displace_absorption(a.field, wave, eta, {0.3, 3.0}, 2.7);
        ScalarField diff(g);
        for (std::size_t k = 0; k < diff.v.size(); ++k) diff.v[k] = av.v[k] - a.field.v[k];
        trans.push_back(l1_norm(diff) / eta);
    }
    report(check_le("shift bound: transversal L1/eta stays bounded by its largest-eta value",
                    *std::max_element(trans.begin(), trans.end()), trans.front() * 1.05));
}

// --------------------------------------------------------------------------
// Criterion 9: pipeline determinism.

PipelineConfig determinism_config() {
    PipelineConfig cfg;
    cfg.grid = Grid(128, 128, 0.0, 0.0, 2.4, 2.4);
    cfg.d_center = {1.2, 1.2};
    cfg.d_radius = 0.3;
    cfg.phantom.a0 = 1.0;
    cfg.phantom.a_lower = 1.0;
    cfg.phantom.a_upper = 1.98;
    cfg.phantom.inclusions.push_back(DiscInclusion{{1.2, 1.2}, 0.2, 1.5});
    cfg.boundary_l = 0.1;
    cfg.boundary_g = 1.0;
    cfg.eta = 0.05;
    cfg.wave_normalized = false;
    cfg.curve.kind = CurveSpec::Kind::circle;
    cfg.curve.center = {1.2, 1.2};
    cfg.curve.ax = 1.0;
    cfg.n_centers = 8;
    cfg.n_radii = 6;
    cfg.r_first = 0.88;
    cfg.r_last = 1.12;
    cfg.n_theta = 360;
    cfg.cgls_max_iter = 200;
    cfg.reconstruct.a_lower = 1.0;
    cfg.reconstruct.a_upper = 1.98;
    cfg.reconstruct.a0 = 1.0;
    cfg.threads = 2;
    return cfg;
}

bool same_bytes(const std::string& p1, const std::string& p2) {
    std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
    if (!f1.good() || !f2.good()) return false;
    std::stringstream b1, b2;
    b1 << f1.rdbuf();
    b2 << f2.rdbuf();
    return b1.str() == b2.str();
}

void criterion_9() {
    const PipelineConfig cfg = determinism_config();
    set_thread_cap(cfg.threads);
    namespace fs = std::filesystem;
    const std::string d1 = "acceptance_det_run1", d2 = "acceptance_det_run2";
    const std::string echo = serialize_config(cfg);
    run_pipeline(cfg, d1, echo);
    run_pipeline(cfg, d2, echo);
    for (const char* name :
         {"a_true.aotf", "phi.aotf", "measurements.aots", "psi.aotf", "a_rec.aotf"}) {
        const bool same = same_bytes((fs::path(d1) / name).string(), (fs::path(d2) / name).string());
        report(check_ge(std::string("determinism: byte-identical ") + name, same ? 1.0 : 0.0, 1.0));
    }
    fs::remove_all(d1);
    fs::remove_all(d2);
}

void run_criterion(int crit) {
    StageTimer t;
    std::printf("--- criterion %d ---\n", crit);
    switch (crit) {
    case 1:
        criterion_1();
        break;
    case 2:
        report(suite_measurement_rate(1));
        break;
    case 3:
        report(suite_radon(1));
        break;
    case 4:
        report(suite_helmholtz(1));
        break;
    case 5:
        criterion_5();
        break;
    case 6:
        criterion_6();
        break;
    case 7:
        criterion_7();
        break;
    case 8:
        report(suite_density(1));
        report(suite_mollifier(1));
        break;
    case 9:
        criterion_9();
        break;
    default:
        std::fprintf(stderr, "unknown criterion %d\n", crit);
        ++g_failures;
    }
    std::printf("--- criterion %d done in %.1fs ---\n", crit, t.seconds());
}

} // namespace

int main(int argc, char** argv) {
    set_thread_cap(2);
    if (argc > 1) {
        run_criterion(std::atoi(argv[1]));
    } else {
        for (int crit = 1; crit <= 9; ++crit) run_criterion(crit);
    }
    if (g_failures) {
        std::printf("ACCEPTANCE: %d check(s) failed\n", g_failures);
        return 1;
    }
    std::printf("ACCEPTANCE: all checks passed\n");
    return 0;
}
