#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "aot/config.hpp"

using namespace aot;

namespace {

const char* kSample = R"(
# sample pipeline configuration
grid.nx = 96
grid.ny = 64
grid.x0 = 0
grid.y0 = 0
grid.lx = 1.6
grid.ly = 1.0
domain.d_cx = 0.8
domain.d_cy = 0.5
domain.d_r = 0.35

phantom.a0 = 1.0
phantom.a_lower = 1.0
phantom.a_upper = 1.98
phantom.inclusion.0 = disc 0.8 0.5 0.12 1.5
phantom.inclusion.1 = polygon 1.7 0.7 0.45 0.9 0.45 0.9 0.55 0.7 0.55

boundary.l = 0.1
boundary.g = 1.0

acoustics.eta = 0.04
acoustics.wave_normalized = false
acoustics.curve = ellipse 0.8 0.5 0.7 0.4
acoustics.n_centers = 12
acoustics.n_radii = 8
acoustics.r_first = 0.9
acoustics.r_last = 1.2

inversion.reg = 1e-6
inversion.n_theta = 360

reconstruct.a_lower = 1.0
reconstruct.a_upper = 1.98
reconstruct.a0 = 1.0
reconstruct.max_iters = 10
reconstruct.fp_tol = 1e-6
reconstruct.boundary_mode = numeric

solver.tol = 1e-10
seed = 42
threads = 2
)";

} // namespace

TEST_CASE("parse and serialize round trip exactly") {
    const PipelineConfig cfg = parse_config_text(kSample);
    CHECK(cfg.grid.nx == 96);
    CHECK(cfg.grid.lx == 1.6);
    CHECK(cfg.d_radius == 0.35);
    CHECK(cfg.phantom.inclusions.size() == 2);
    CHECK(std::holds_alternative<DiscInclusion>(cfg.phantom.inclusions[0]));
    CHECK(std::holds_alternative<PolygonInclusion>(cfg.phantom.inclusions[1]));
    CHECK(cfg.eta == 0.04);
    CHECK(cfg.wave_normalized == false);
    CHECK(cfg.curve.kind == CurveSpec::Kind::ellipse);
    CHECK(cfg.n_centers == 12);
    CHECK(cfg.seed == 42);

    const std::string text1 = serialize_config(cfg);
    const PipelineConfig cfg2 = parse_config_text(text1);
    const std::string text2 = serialize_config(cfg2);
    CHECK(text1 == text2); // value-exact round trip
}

TEST_CASE("unknown keys and malformed values are rejected with diagnostics") {
    CHECK_THROWS_WITH_AS(parse_config_text("grid.sizes = 12\n"),
                         doctest::Contains("unknown key"), validation_error);
    CHECK_THROWS_AS(parse_config_text("grid.nx = twelve\n"), validation_error);
    CHECK_THROWS_AS(parse_config_text("grid.nx 12\n"), validation_error);
    CHECK_THROWS_AS(parse_config_text("phantom.inclusion.0 = blob 1 2 3\n"), validation_error);
    CHECK_THROWS_AS(parse_config_text("acoustics.curve = circle 1 2\n"), validation_error);
    CHECK_THROWS_AS(parse_config_text("reconstruct.boundary_mode = magic\n"), validation_error);
    // invalid bounds surface through validation
    CHECK_THROWS_AS(parse_config_text("phantom.a_lower = 2.0\nphantom.a_upper = 1.5\n"),
                    validation_error);
}

TEST_CASE("config materializes geometry objects") {
    const PipelineConfig cfg = parse_config_text(kSample);
    const SubdomainMask mask = cfg.make_mask();
    CHECK(mask.grid.nx == 96);
    const std::vector<Point> centers = cfg.make_centers();
    CHECK(centers.size() == 12);
    // ellipse extremes
    CHECK(centers[0].x == doctest::Approx(0.8 + 0.7));
    CHECK(centers[0].y == doctest::Approx(0.5));
    const AcousticConfig ac = cfg.make_acoustics();
    CHECK(ac.radii.size() == 8);
    CHECK(ac.radii.front() == 0.9);
    CHECK(ac.radii.back() == 1.2);
    CHECK(ac.wave.normalized() == false);
}

TEST_CASE("boundary_d curve places centers on the boundary of D") {
    PipelineConfig cfg = parse_config_text(kSample);
    cfg.curve.kind = CurveSpec::Kind::boundary_d;
    const std::vector<Point> centers = cfg.make_centers();
    for (const Point& y : centers)
        CHECK(std::hypot(y.x - 0.8, y.y - 0.5) == doctest::Approx(0.35).epsilon(1e-12));
}

TEST_CASE("file round trip") {
    const PipelineConfig cfg = parse_config_text(kSample);
    {
        std::ofstream os("test_cfg.cfg");
        os << serialize_config(cfg);
    }
    const PipelineConfig back = load_config("test_cfg.cfg");
    CHECK(serialize_config(back) == serialize_config(cfg));
    std::remove("test_cfg.cfg");
    CHECK_THROWS_AS(load_config("missing_file.cfg"), validation_error);
}
