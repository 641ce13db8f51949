#pragma once

#include <chrono>
#include <filesystem>

#include "aot/config.hpp"
#include "aot/reconstruct.hpp"
#include "aot/sphericalmeans.hpp"

namespace aot {

struct RunReport {
    std::vector<std::pair<std::string, std::string>> entries;

    void add(const std::string& key, const std::string& value) { entries.emplace_back(key, value); }
    void add(const std::string& key, double value) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", value);
        entries.emplace_back(key, buf);
    }

    void write(const std::string& path) const {
        std::ofstream os(path);
        require(os.good(), "report: cannot open for writing: " + path);
        for (const auto& [k, v] : entries) os << k << " = " << v << "\n";
    }
};

class StageTimer {
  public:
    StageTimer() : t0_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        const auto t1 = std::chrono::steady_clock::now();
        return std::chrono::duration<double>(t1 - t0_).count();
    }

  private:
    std::chrono::steady_clock::time_point t0_;
};

inline AbsorptionField run_phantom(const PipelineConfig& cfg) {
    return rasterize(cfg.phantom, cfg.make_mask());
}

inline FluenceSolution run_fluence(const PipelineConfig& cfg, const AbsorptionField& a) {
    return solve_fluence(a, cfg.make_boundary(), cfg.solver_tol);
}

inline Sinogram run_forward(const PipelineConfig& cfg, const AbsorptionField& a) {
    return sweep_measurements(a, cfg.make_boundary(), cfg.make_acoustics(), cfg.solver_tol);
}

inline RadonOperator make_operator(const PipelineConfig& cfg, const std::vector<Point>& centers,
                                   const std::vector<double>& radii) {
    return RadonOperator(cfg.grid, centers, radii, cfg.n_theta, cfg.make_mask());
}

inline ScalarField run_internal(const PipelineConfig& cfg, const Sinogram& m,
                                double* correction_norm = nullptr) {
    const RadonOperator op = make_operator(cfg, m.centers, m.radii);
    return internal_data(m, op, cfg.reg, cfg.cgls_max_iter, 1e-8, correction_norm);
}

inline ReconstructionResult run_reconstruct(const PipelineConfig& cfg, const ScalarField& psi) {
    return fixed_point_reconstruct(psi, cfg.make_boundary(), cfg.make_mask(), cfg.reconstruct);
}

// Relative L2 error on the interior of D with a boundary collar excluded.
inline double interior_relative_error(const ScalarField& rec, const ScalarField& truth,
                                      Point d_center, double d_radius, double collar) {
    const Grid& g = rec.grid;
    double num = 0.0, den = 0.0;
    const double rr = (d_radius - collar) * (d_radius - collar);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double dx = g.x(i) - d_center.x;
            const double dy = g.y(j) - d_center.y;
            if (dx * dx + dy * dy > rr) continue;
            const std::size_t k = g.idx(i, j);
            num += (rec.v[k] - truth.v[k]) * (rec.v[k] - truth.v[k]);
            den += truth.v[k] * truth.v[k];
        }
    return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

// Mean-square error density in the collar vs the interior, for the
// boundary-attenuation diagnostic.
inline std::pair<double, double> collar_error_split(const ScalarField& rec,
                                                    const ScalarField& truth, Point d_center,
                                                    double d_radius, double collar) {
    const Grid& g = rec.grid;
    double num_in = 0.0, num_col = 0.0;
    std::size_t cnt_in = 0, cnt_col = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double dx = g.x(i) - d_center.x;
            const double dy = g.y(j) - d_center.y;
            const double d2 = dx * dx + dy * dy;
            if (d2 > d_radius * d_radius) continue;
            const std::size_t k = g.idx(i, j);
            const double e2 = (rec.v[k] - truth.v[k]) * (rec.v[k] - truth.v[k]);
            if (d2 > (d_radius - collar) * (d_radius - collar)) {
                num_col += e2;
                ++cnt_col;
            } else {
                num_in += e2;
                ++cnt_in;
            }
        }
    const double in_density = cnt_in ? num_in / cnt_in : 0.0;
    const double col_density = cnt_col ? num_col / cnt_col : 0.0;
    return {in_density, col_density};
}

// Full pipeline: phantom -> fluence -> forward sweep -> internal data ->
// fixed-point reconstruction, with all artifacts written under outdir.
inline RunReport run_pipeline(const PipelineConfig& cfg, const std::string& outdir,
                              const std::string& config_echo) {
    namespace fs = std::filesystem;
    fs::create_directories(outdir);
    RunReport report;
    auto path = [&outdir](const char* name) { return (fs::path(outdir) / name).string(); };

    {
        std::ofstream os(path("config.cfg"), std::ios::binary);
        os << config_echo;
    }

    StageTimer t_phantom;
    const AbsorptionField a = run_phantom(cfg);
    write_aotf(a.field, path("a_true.aotf"));
    write_field_pgm(a.field, path("a_true.pgm"));
    report.add("time_phantom_s", t_phantom.seconds());

    StageTimer t_flu;
    const FluenceSolution phi = run_fluence(cfg, a);
    write_aotf(phi.phi, path("phi.aotf"));
    report.add("time_fluence_s", t_flu.seconds());
    report.add("fluence_iterations", static_cast<double>(phi.iterations));
    report.add("fluence_residual", phi.residual_norm);

    StageTimer t_fwd;
    const Sinogram m = run_forward(cfg, a);
    write_aots(m, path("measurements.aots"));
    write_sinogram_csv(m, path("measurements.csv"));
    report.add("time_forward_s", t_fwd.seconds());
    report.add("norm_M_l2_sigma", m.l2_sigma());

    StageTimer t_int;
    double gauge_correction = 0.0;
    const ScalarField psi = run_internal(cfg, m, &gauge_correction);
    write_aotf(psi, path("psi.aotf"));
    write_field_pgm(psi, path("psi.pgm"));
    report.add("time_internal_s", t_int.seconds());
    report.add("norm_psi_l2", l2_norm(psi));
    report.add("gauge_correction_l2", gauge_correction);

    StageTimer t_rec;
    const ReconstructionResult rec = run_reconstruct(cfg, psi);
    write_aotf(rec.a.field, path("a_rec.aotf"));
    write_field_pgm(rec.a.field, path("a_rec.pgm"));
    write_field_csv(rec.a.field, path("a_rec.csv"));
    write_trace_csv(rec.trace, path("trace.csv"));
    report.add("time_reconstruct_s", t_rec.seconds());
    report.add("fp_iterations", static_cast<double>(rec.trace.iterates.size()));
    report.add("fp_converged", rec.trace.converged ? 1.0 : 0.0);

    ScalarField diff(cfg.grid);
    for (std::size_t k = 0; k < diff.v.size(); ++k)
        diff.v[k] = rec.a.field.v[k] - a.field.v[k];
    report.add("err_l2", l2_norm(diff) / l2_norm(a.field));
    report.add("err_l2_interior", interior_relative_error(rec.a.field, a.field, cfg.d_center,
                                                          cfg.d_radius, 0.1));
    report.write(path("report.txt"));
    return report;
}

} // namespace aot
