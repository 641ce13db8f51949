// Command-line driver for the acousto-optic tomography pipeline.
//
// Subcommands: phantom, fluence, forward, internal, reconstruct, pipeline,
// validate. Exit codes: 0 success, 1 numerical failure, 2 usage or
// validation error.

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"

#include "aot/pipeline.hpp"
#include "aot/suites.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    aot::require(is.good(), "cannot open: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

struct Options {
    std::string config_path;
    std::string out;
    std::string outdir = "out";
    std::string in;
    std::string trace;
    std::string suite;
    int threads = 0;
    long seed = -1;
};

aot::PipelineConfig load(const Options& opt) {
    aot::require(!opt.config_path.empty(), "missing --config");
    aot::PipelineConfig cfg = aot::load_config(opt.config_path);
    if (opt.threads > 0) cfg.threads = opt.threads;
    if (opt.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opt.seed);
    aot::set_thread_cap(cfg.threads);
    return cfg;
}

void check_grid_match(const aot::Grid& a, const aot::Grid& b, const char* what) {
    aot::require(a.same_layout(b), std::string("grid mismatch between config and ") + what);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"2D acousto-optic tomography laboratory"};
    app.require_subcommand(1);

    Options opt;
    auto add_common = [&opt](CLI::App* cmd) {
        cmd->add_option("--config", opt.config_path, "pipeline config file");
        cmd->add_option("--threads", opt.threads, "worker thread cap");
        cmd->add_option("--seed", opt.seed, "override the config seed");
    };

    CLI::App* c_phantom = app.add_subcommand("phantom", "rasterize the absorption map");
    add_common(c_phantom);
    c_phantom->add_option("--out", opt.out, "output AOTF path")->required();

    CLI::App* c_fluence = app.add_subcommand("fluence", "solve the light fluence");
    add_common(c_fluence);
    c_fluence->add_option("--in", opt.in, "absorption AOTF path")->required();
    c_fluence->add_option("--out", opt.out, "output AOTF path")->required();

    CLI::App* c_forward = app.add_subcommand("forward", "sweep the acousto-optic measurements");
    add_common(c_forward);
    c_forward->add_option("--in", opt.in, "absorption AOTF path")->required();
    c_forward->add_option("--out", opt.out, "output AOTS path")->required();

    CLI::App* c_internal = app.add_subcommand("internal", "recover the internal data map");
    add_common(c_internal);
    c_internal->add_option("--in", opt.in, "measurement AOTS path")->required();
    c_internal->add_option("--out", opt.out, "output AOTF path")->required();

    CLI::App* c_rec = app.add_subcommand("reconstruct", "fixed-point absorption reconstruction");
    add_common(c_rec);
    c_rec->add_option("--in", opt.in, "internal data AOTF path")->required();
    c_rec->add_option("--out", opt.out, "output AOTF path")->required();
    c_rec->add_option("--trace", opt.trace, "fixed-point trace CSV path");

    CLI::App* c_pipe = app.add_subcommand("pipeline", "run all stages end to end");
    add_common(c_pipe);
    c_pipe->add_option("--outdir", opt.outdir, "output directory");

    CLI::App* c_val = app.add_subcommand("validate", "run a named validation suite");
    add_common(c_val);
    c_val->add_option("suite", opt.suite,
                      "one of: radon, helmholtz, mollifier, density, measurement-rate, contraction")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    }

    try {
        if (*c_phantom) {
            const aot::PipelineConfig cfg = load(opt);
            const aot::AbsorptionField a = aot::run_phantom(cfg);
            aot::write_aotf(a.field, opt.out);
        } else if (*c_fluence) {
            const aot::PipelineConfig cfg = load(opt);
            const aot::ScalarField a = aot::read_aotf(opt.in);
            check_grid_match(cfg.grid, a.grid, "absorption field");
            const aot::FluenceSolution phi = aot::solve_fluence(a, cfg.make_boundary(), cfg.solver_tol);
            aot::write_aotf(phi.phi, opt.out);
        } else if (*c_forward) {
            const aot::PipelineConfig cfg = load(opt);
            const aot::ScalarField af = aot::read_aotf(opt.in);
            check_grid_match(cfg.grid, af.grid, "absorption field");
            aot::AbsorptionField a;
            a.field = af;
            a.spec = cfg.phantom;
            a.support = cfg.make_mask();
            const aot::Sinogram m = aot::run_forward(cfg, a);
            aot::write_aots(m, opt.out);
        } else if (*c_internal) {
            const aot::PipelineConfig cfg = load(opt);
            const aot::Sinogram m = aot::read_aots(opt.in);
            aot::require(m.n_centers() == static_cast<std::size_t>(cfg.n_centers),
                         "sinogram center count does not match config");
            const aot::ScalarField psi = aot::run_internal(cfg, m);
            aot::write_aotf(psi, opt.out);
        } else if (*c_rec) {
            const aot::PipelineConfig cfg = load(opt);
            const aot::ScalarField psi = aot::read_aotf(opt.in);
            check_grid_match(cfg.grid, psi.grid, "internal data field");
            const aot::ReconstructionResult rec = aot::run_reconstruct(cfg, psi);
            aot::write_aotf(rec.a.field, opt.out);
            if (!opt.trace.empty()) aot::write_trace_csv(rec.trace, opt.trace);
        } else if (*c_pipe) {
            const aot::PipelineConfig cfg = load(opt);
            const std::string echo = read_file(opt.config_path);
            const aot::RunReport report = aot::run_pipeline(cfg, opt.outdir, echo);
            for (const auto& [k, v] : report.entries) std::cout << k << " = " << v << "\n";
        } else if (*c_val) {
            aot::set_thread_cap(opt.threads > 0 ? opt.threads : 2);
            const std::uint64_t seed = opt.seed >= 0 ? static_cast<std::uint64_t>(opt.seed) : 1;
            const std::vector<aot::CheckResult> checks = aot::run_suite(opt.suite, seed);
            bool ok = true;
            for (const aot::CheckResult& c : checks) {
                std::printf("[%s] %s: value %.6g vs threshold %s %.6g\n", c.pass ? "PASS" : "FAIL",
                            c.name.c_str(), c.value, c.cmp == aot::CheckResult::Cmp::le ? "<=" : ">=",
                            c.threshold);
                ok = ok && c.pass;
            }
            if (!ok) return 1;
        }
    } catch (const aot::validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const aot::numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
