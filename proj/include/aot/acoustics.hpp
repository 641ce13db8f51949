#pragma once

#include <algorithm>
#include <numeric>

#include "aot/fluence.hpp"
#include "aot/grid.hpp"
#include "aot/phantom.hpp"

namespace aot {

// ---------------------------------------------------------------------------
// Wave shape: the compactly supported bump t -> exp(1/(t^2-1)) on ]-1,1[,
// optionally scaled to unit L1 mass. The raw profile satisfies w' > -1; the
// normalized one does not (min w' ~ -1.80), which is what makes the r_min
// floor below a real constraint instead of a formality.

class WaveShape {
  public:
    static WaveShape make(bool normalized) {
        WaveShape w;
        w.normalized_ = normalized;
        // Simpson quadrature of the raw profile.
        const int n = 1 << 14; // intervals
        const double h = 2.0 / n;
        double acc = raw(-1.0) + raw(1.0);
        for (int i = 1; i < n; ++i) acc += raw(-1.0 + i * h) * ((i % 2) ? 4.0 : 2.0);
        w.integral_raw_ = acc * h / 3.0;
        w.scale_ = normalized ? 1.0 / w.integral_raw_ : 1.0;

        const int m = 1 << 12;
        w.tab_.resize(m + 1);
        double min_raw_deriv = 0.0, min_deriv = 0.0;
        for (int i = 0; i <= m; ++i) {
            const double t = -1.0 + 2.0 * i / m;
            w.tab_[i] = w.scale_ * raw(t);
            const double d = raw_deriv(t);
            min_raw_deriv = std::min(min_raw_deriv, d);
            min_deriv = std::min(min_deriv, w.scale_ * d);
        }
        w.min_deriv_ = min_deriv;
        if (!(min_raw_deriv > -1.0))
            throw numerical_error("wave shape: raw profile violates w' > -1");
        return w;
    }

    double operator()(double t) const { return scale_ * raw(t); }
    double deriv(double t) const { return scale_ * raw_deriv(t); }

    bool normalized() const { return normalized_; }
    double l1_mass() const { return scale_ * integral_raw_; }
    double raw_integral() const { return integral_raw_; }
    double max_value() const { return scale_ * std::exp(-1.0); }
    double min_deriv() const { return min_deriv_; }
    const std::vector<double>& tabulation() const { return tab_; }

    // Monotonicity floor for the radial map rho -> rho + (eta/r) w((rho-r)/eta),
    // whose derivative is 1 + w'/r.
    double r_min() const { return 1.05 * std::max(0.0, -min_deriv_); }

  private:
    static double raw(double t) {
        if (std::abs(t) >= 1.0 - 1e-12) return 0.0;
        return std::exp(1.0 / (t * t - 1.0));
    }
    static double raw_deriv(double t) {
        if (std::abs(t) >= 1.0 - 1e-12) return 0.0;
        const double q = t * t - 1.0;
        return raw(t) * (-2.0 * t) / (q * q);
    }

    bool normalized_ = true;
    double scale_ = 1.0;
    double integral_raw_ = 0.0;
    double min_deriv_ = 0.0;
    std::vector<double> tab_;
};

// ---------------------------------------------------------------------------

struct AcousticConfig {
    WaveShape wave = WaveShape::make(true);
    double eta = 0.02;
    std::vector<Point> centers; // arc-length ordered on the closed curve Y
    std::vector<double> radii;  // strictly increasing

    void validate() const {
        require(eta > 0.0, "acoustics: eta must be positive");
        require(!centers.empty(), "acoustics: no centers");
        require(!radii.empty(), "acoustics: no radii");
        for (std::size_t k = 0; k + 1 < radii.size(); ++k)
            require(radii[k] < radii[k + 1], "acoustics: radii must be strictly increasing");
        require(radii.front() > eta, "acoustics: radii must exceed eta");
    }

    // Additional floor required whenever the displaced absorption (and thus the
    // inverse of Id+v) is evaluated.
    void validate_for_displacement() const {
        validate();
        require(radii.front() > wave.r_min(),
                "acoustics: first radius " + std::to_string(radii.front()) +
                    " is below the monotonicity floor r_min = " + std::to_string(wave.r_min()));
    }
};

inline std::vector<Point> circle_centers(Point c, double radius, int n) {
    require(n >= 1 && radius > 0.0, "acoustics: bad center curve");
    std::vector<Point> out(static_cast<std::size_t>(n));
    const double pi = 3.14159265358979323846;
    for (int k = 0; k < n; ++k) {
        const double t = 2.0 * pi * k / n;
        out[static_cast<std::size_t>(k)] = {c.x + radius * std::cos(t), c.y + radius * std::sin(t)};
    }
    return out;
}

inline std::vector<Point> ellipse_centers(Point c, double ax, double ay, int n) {
    require(n >= 1 && ax > 0.0 && ay > 0.0, "acoustics: bad center curve");
    std::vector<Point> out(static_cast<std::size_t>(n));
    const double pi = 3.14159265358979323846;
    for (int k = 0; k < n; ++k) {
        const double t = 2.0 * pi * k / n;
        out[static_cast<std::size_t>(k)] = {c.x + ax * std::cos(t), c.y + ay * std::sin(t)};
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sinogram on the lattice Y x radii, center-major storage.

struct Sinogram {
    std::vector<Point> centers;
    std::vector<double> radii;
    std::vector<double> values;

    Sinogram() = default;
    Sinogram(std::vector<Point> c, std::vector<double> r)
        : centers(std::move(c)), radii(std::move(r)),
          values(centers.size() * radii.size(), 0.0) {}

    std::size_t n_centers() const { return centers.size(); }
    std::size_t n_radii() const { return radii.size(); }
    double& at(std::size_t c, std::size_t r) { return values[c * radii.size() + r]; }
    double at(std::size_t c, std::size_t r) const { return values[c * radii.size() + r]; }

    bool same_lattice(const Sinogram& o) const {
        if (centers.size() != o.centers.size() || radii.size() != o.radii.size()) return false;
        for (std::size_t k = 0; k < centers.size(); ++k)
            if (centers[k].x != o.centers[k].x || centers[k].y != o.centers[k].y) return false;
        for (std::size_t k = 0; k < radii.size(); ++k)
            if (radii[k] != o.radii[k]) return false;
        return true;
    }

    // Arc-length weight per center along the closed curve.
    std::vector<double> arc_weights() const {
        const std::size_t n = centers.size();
        std::vector<double> w(n, 1.0);
        if (n < 2) return w;
        for (std::size_t k = 0; k < n; ++k) {
            const Point& prev = centers[(k + n - 1) % n];
            const Point& next = centers[(k + 1) % n];
            w[k] = 0.5 * (dist(prev, centers[k]) + dist(centers[k], next));
        }
        return w;
    }

    std::vector<double> radius_weights() const {
        const std::size_t m = radii.size();
        std::vector<double> w(m, 1.0);
        if (m < 2) return w;
        for (std::size_t k = 0; k < m; ++k) {
            const double left = k == 0 ? radii[0] : radii[k - 1];
            const double right = k == m - 1 ? radii[m - 1] : radii[k + 1];
            w[k] = 0.5 * (right - left);
        }
        return w;
    }

    // L2(Sigma) norm with arc-length x radius quadrature weights.
    double l2_sigma() const {
        const std::vector<double> wc = arc_weights();
        const std::vector<double> wr = radius_weights();
        double sum = 0.0;
        for (std::size_t c = 0; c < centers.size(); ++c)
            for (std::size_t r = 0; r < radii.size(); ++r)
                sum += wc[c] * wr[r] * at(c, r) * at(c, r);
        return std::sqrt(sum);
    }
};

inline Sinogram operator-(const Sinogram& a, const Sinogram& b) {
    require(a.same_lattice(b), "sinogram: lattice mismatch");
    Sinogram out = a;
    for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] -= b.values[k];
    return out;
}

// Sinogram file format "AOTS": magic `AOTS`, u32 n_centers, u32 n_radii,
// center coordinates (2 f64 each), radii (f64), values center-major f64, LE.
inline void write_aots(const Sinogram& s, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    require(os.good(), "aots: cannot open for writing: " + path);
    os.write("AOTS", 4);
    detail::put_u32(os, static_cast<std::uint32_t>(s.n_centers()));
    detail::put_u32(os, static_cast<std::uint32_t>(s.n_radii()));
    for (const Point& p : s.centers) {
        detail::put_f64(os, p.x);
        detail::put_f64(os, p.y);
    }
    for (double r : s.radii) detail::put_f64(os, r);
    for (double v : s.values) detail::put_f64(os, v);
    require(os.good(), "aots: write failed: " + path);
}

inline Sinogram read_aots(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), "aots: cannot open: " + path);
    char magic[4];
    is.read(magic, 4);
    require(is.good() && std::memcmp(magic, "AOTS", 4) == 0, "aots: bad magic in " + path);
    const std::size_t nc = detail::get_u32(is);
    const std::size_t nr = detail::get_u32(is);
    require(is.good() && nc > 0 && nr > 0, "aots: bad header in " + path);
    Sinogram s;
    s.centers.resize(nc);
    s.radii.resize(nr);
    for (Point& p : s.centers) {
        p.x = detail::get_f64(is);
        p.y = detail::get_f64(is);
    }
    for (double& r : s.radii) r = detail::get_f64(is);
    s.values.resize(nc * nr);
    for (double& v : s.values) v = detail::get_f64(is);
    require(is.good(), "aots: truncated file " + path);
    return s;
}

inline void write_sinogram_csv(const Sinogram& s, const std::string& path) {
    std::ofstream os(path);
    require(os.good(), "csv: cannot open for writing: " + path);
    os << "center_index,radius,value\n";
    char line[96];
    for (std::size_t c = 0; c < s.n_centers(); ++c)
        for (std::size_t r = 0; r < s.n_radii(); ++r) {
            std::snprintf(line, sizeof(line), "%zu,%.17g,%.17g\n", c, s.radii[r], s.at(c, r));
            os << line;
        }
}

// ---------------------------------------------------------------------------
// Spherical displacement field v_{y,r,eta}(x) = (eta/r) w((|x-y|-r)/eta) xi.

inline VectorField displacement(const Grid& grid, const WaveShape& wave, double eta, Point y,
                                double r) {
    require(r > eta, "displacement: r must exceed eta");
    VectorField v(grid);
    const double amp = eta / r;
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            const double dx = grid.x(i) - y.x;
            const double dy = grid.y(j) - y.y;
            const double rho = std::hypot(dx, dy);
            if (rho == 0.0) continue; // v undefined at the center; support never reaches it
            if (std::abs(rho - r) >= eta) continue;
            const double mag = amp * wave((rho - r) / eta);
            const std::size_t k = grid.idx(i, j);
            v.ux[k] = mag * dx / rho;
            v.uy[k] = mag * dy / rho;
        }
    return v;
}

// Radial preimage: solve m(rho') = rho' + (eta/r) w((rho'-r)/eta) = rho by
// safeguarded Newton/bisection. Requires r >= r_min so m is increasing.
inline double radial_preimage(const WaveShape& wave, double eta, double r, double rho,
                              double tol) {
    const double amp = eta / r;
    auto m = [&](double rp) { return rp + amp * wave((rp - r) / eta); };
    double lo = std::max(rho - amp * wave.max_value(), 0.0);
    double hi = rho;
    if (m(lo) > rho || m(hi) < rho) return rho;
    double rp = std::clamp(rho - amp * wave((rho - r) / eta), lo, hi);
    for (int it = 0; it < 100; ++it) {
        const double f = m(rp) - rho;
        if (std::abs(f) <= tol) break;
        if (f > 0.0)
            hi = rp;
        else
            lo = rp;
        const double df = 1.0 + wave.deriv((rp - r) / eta) / r;
        double next = df > 0.0 ? rp - f / df : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        rp = next;
    }
    return rp;
}

// Displaced absorption a_v = a o (Id+v)^{-1}: per node, invert the radial map
// rho' + (eta/r) w((rho'-r)/eta) = rho by safeguarded Newton/bisection, then
// sample a bilinearly at the preimage. Nodes outside the shell keep their
// exact value.
inline ScalarField displace_absorption(const ScalarField& a, const WaveShape& wave, double eta,
                                       Point y, double r) {
    require(r > eta, "displace_absorption: r must exceed eta");
    if (r < wave.r_min())
        throw validation_error("displace_absorption: radial map not monotone, r = " +
                               std::to_string(r) + " < r_min = " + std::to_string(wave.r_min()));
    const Grid& g = a.grid;
    ScalarField out = a;
    const double amp = eta / r;
    const double vmax = amp * wave.max_value();
    const double tol = 1e-12 * eta;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double px = g.x(i), py = g.y(j);
            const double dx = px - y.x;
            const double dy = py - y.y;
            const double rho = std::hypot(dx, dy);
            if (rho == 0.0 || std::abs(rho - r) >= eta + vmax) continue;
            const double rp = radial_preimage(wave, eta, r, rho, tol);
            if (std::abs(rp - rho) == 0.0) continue;
            const double qx = y.x + rp * dx / rho;
            const double qy = y.y + rp * dy / rho;
            out(i, j) = bilinear_sample(a, qx, qy);
        }
    check_finite(out, "displace_absorption");
    return out;
}

// ---------------------------------------------------------------------------
// Measurements.

struct Measurement {
    double value = 0.0;          // eta^{-2} int (a_v - a) Phi Phi_v
    double boundary_value = 0.0; // eta^{-2} l^{-1} int_bdy (Phi - Phi_v) g
};

namespace detail {

// Composite Simpson along one line of samples with uniform spacing h; falls
// back to Simpson 3/8 for the trailing segment when the interval count is odd.
inline double simpson_line(const std::vector<double>& f, double h) {
    const std::size_t n = f.size();
    if (n < 2) return 0.0;
    if (n == 2) return 0.5 * h * (f[0] + f[1]);
    std::size_t m = n - 1; // intervals
    double sum = 0.0;
    std::size_t even_end = (m % 2 == 0) ? m : m - 3;
    for (std::size_t k = 0; k + 2 <= even_end; k += 2)
        sum += h / 3.0 * (f[k] + 4.0 * f[k + 1] + f[k + 2]);
    if (m % 2 != 0) {
        const std::size_t s = even_end;
        sum += 3.0 * h / 8.0 * (f[s] + 3.0 * f[s + 1] + 3.0 * f[s + 2] + f[s + 3]);
    }
    return sum;
}

inline double boundary_integral_simpson(const Grid& g, const std::function<double(int, int)>& f) {
    std::vector<double> south(g.nx), north(g.nx), west(g.ny), east(g.ny);
    for (int i = 0; i < g.nx; ++i) {
        south[i] = f(i, 0);
        north[i] = f(i, g.ny - 1);
    }
    for (int j = 0; j < g.ny; ++j) {
        west[j] = f(0, j);
        east[j] = f(g.nx - 1, j);
    }
    return simpson_line(south, g.hx()) + simpson_line(north, g.hx()) +
           simpson_line(west, g.hy()) + simpson_line(east, g.hy());
}

} // namespace detail

// Single measurement given the already-solved background fluence.
inline Measurement measure_with(const AbsorptionField& a, const BoundaryData& bc,
                                const FluenceSolution& phi, const WaveShape& wave, double eta,
                                Point y, double r, double tol = kFluenceTolDefault) {
    const Grid& g = a.field.grid;
    const ScalarField av = displace_absorption(a.field, wave, eta, y, r);
    bool same = true;
    for (std::size_t k = 0; k < av.v.size(); ++k)
        if (av.v[k] != a.field.v[k]) {
            same = false;
            break;
        }
    if (same) return {0.0, 0.0};

    const FluenceSolution phiv = solve_fluence(av, bc, tol, &phi.phi);
    const double inv_eta2 = 1.0 / (eta * eta);
    double vol = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.idx(i, j);
            vol += trapezoid_weight(g, i, j) * (av.v[k] - a.field.v[k]) * phi.phi.v[k] *
                   phiv.phi.v[k];
        }
    const double bnd = detail::boundary_integral_simpson(g, [&](int i, int j) {
        const std::size_t k = g.idx(i, j);
        return (phi.phi.v[k] - phiv.phi.v[k]) * bc.g[k];
    });
    return {inv_eta2 * vol, inv_eta2 * bnd / bc.l};
}

inline Measurement measure(const AbsorptionField& a, const BoundaryData& bc, const WaveShape& wave,
                           double eta, Point y, double r, double tol = kFluenceTolDefault) {
    const FluenceSolution phi = solve_fluence(a, bc, tol);
    return measure_with(a, bc, phi, wave, eta, y, r, tol);
}

// Ideal measurement -eta^{-2} <Phi^2 grad_h a, v>; the discrete gradient acts
// as the measure Da.
inline double measure_ideal(const AbsorptionField& a, const ScalarField& phi,
                            const WaveShape& wave, double eta, Point y, double r) {
    const Grid& g = a.field.grid;
    const VectorField da = gradient(a.field);
    const VectorField v = displacement(g, wave, eta, y, r);
    double sum = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.idx(i, j);
            const double p2 = phi.v[k] * phi.v[k];
            sum += trapezoid_weight(g, i, j) * p2 * (da.ux[k] * v.ux[k] + da.uy[k] * v.uy[k]);
        }
    return -sum / (eta * eta);
}

// Shell-resolving polar quadrature of the volume measurement form
// eta^{-2} int (a_v - a) Phi Phi_v, given both solved fluences. The node-grid
// trapezoid aliases the thin shell once eta approaches the spacing; this
// midpoint rule in (rho, theta) resolves the wave profile at any eta.
inline double measure_volume_polar(const ScalarField& a, const ScalarField& phi,
                                   const ScalarField& phiv, const WaveShape& wave, double eta,
                                   Point y, double r, int n_theta = 2048, int n_rho = 48) {
    const double pi = 3.14159265358979323846;
    const double amp = eta / r;
    const double vmax = amp * wave.max_value();
    const double tol = 1e-12 * eta;
    double sum = 0.0;
    for (int q = 0; q < n_theta; ++q) {
        const double th = 2.0 * pi * q / n_theta;
        const double cx = std::cos(th), sy = std::sin(th);
        for (int p = 0; p < n_rho; ++p) {
            const double rho = r - eta - vmax + (2.0 * eta + vmax) * (p + 0.5) / n_rho;
            if (rho <= 0.0) continue;
            const double px = y.x + rho * cx, py = y.y + rho * sy;
            const double rp = radial_preimage(wave, eta, r, rho, tol);
            const double a_here = bilinear_sample(a, px, py);
            const double av_here =
                rp == rho ? a_here : bilinear_sample(a, y.x + rp * cx, y.y + rp * sy);
            if (av_here == a_here) continue;
            const double cell = rho * ((2.0 * eta + vmax) / n_rho) * (2.0 * pi / n_theta);
            sum += (av_here - a_here) * bilinear_sample(phi, px, py) *
                   bilinear_sample(phiv, px, py) * cell;
        }
    }
    return sum / (eta * eta);
}

// Matching polar quadrature of the ideal form -eta^{-2} int Phi^2 v . grad a,
// with the precomputed gradient components sampled bilinearly.
inline double measure_ideal_polar(const ScalarField& dax, const ScalarField& day,
                                  const ScalarField& phi, const WaveShape& wave, double eta,
                                  Point y, double r, int n_theta = 2048, int n_rho = 48) {
    const double pi = 3.14159265358979323846;
    const double amp = eta / r;
    double sum = 0.0;
    for (int q = 0; q < n_theta; ++q) {
        const double th = 2.0 * pi * q / n_theta;
        const double cx = std::cos(th), sy = std::sin(th);
        for (int p = 0; p < n_rho; ++p) {
            const double rho = r - eta + (2.0 * eta) * (p + 0.5) / n_rho;
            if (rho <= 0.0) continue;
            const double px = y.x + rho * cx, py = y.y + rho * sy;
            const double ph = bilinear_sample(phi, px, py);
            const double radial = bilinear_sample(dax, px, py) * cx +
                                  bilinear_sample(day, px, py) * sy;
            const double vmag = amp * wave((rho - r) / eta);
            const double cell = rho * (2.0 * eta / n_rho) * (2.0 * pi / n_theta);
            sum += ph * ph * radial * vmag * cell;
        }
    }
    return -sum / (eta * eta);
}

// Per-center node ordering by distance, for shell-localized sweeps.
struct RadialBuckets {
    std::vector<std::size_t> order; // node indices sorted by distance
    std::vector<double> rho;        // distances in the same order

    RadialBuckets(const Grid& g, Point y) {
        order.resize(g.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        rho.resize(g.size());
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                rho[g.idx(i, j)] = std::hypot(g.x(i) - y.x, g.y(j) - y.y);
        std::sort(order.begin(), order.end(),
                  [this](std::size_t a, std::size_t b) { return rho[a] < rho[b]; });
        std::sort(rho.begin(), rho.end());
    }

    // [first, last) positions with rho in (lo, hi)
    std::pair<std::size_t, std::size_t> window(double lo, double hi) const {
        const auto a = std::upper_bound(rho.begin(), rho.end(), lo) - rho.begin();
        const auto b = std::lower_bound(rho.begin(), rho.end(), hi) - rho.begin();
        return {static_cast<std::size_t>(a), static_cast<std::size_t>(b)};
    }
};

// Ideal-measurement sweep over the whole lattice (no fluence re-solves).
inline Sinogram sweep_ideal(const AbsorptionField& a, const ScalarField& phi,
                            const AcousticConfig& cfg) {
    cfg.validate();
    const Grid& g = a.field.grid;
    const VectorField da = gradient(a.field);
    std::vector<double> weighted_p2(g.size());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.idx(i, j);
            weighted_p2[k] = trapezoid_weight(g, i, j) * phi.v[k] * phi.v[k];
        }
    Sinogram out(cfg.centers, cfg.radii);
    parallel_for(static_cast<std::int64_t>(cfg.centers.size()), [&](std::int64_t c) {
        const Point y = cfg.centers[static_cast<std::size_t>(c)];
        const RadialBuckets buckets(g, y);
        for (std::size_t ri = 0; ri < cfg.radii.size(); ++ri) {
            const double r = cfg.radii[ri];
            const double amp = cfg.eta / r;
            const auto [lo, hi] = buckets.window(r - cfg.eta, r + cfg.eta);
            double sum = 0.0;
            for (std::size_t q = lo; q < hi; ++q) {
                const std::size_t k = buckets.order[q];
                const double rho = buckets.rho[q];
                if (rho == 0.0) continue;
                const double mag = amp * cfg.wave((rho - r) / cfg.eta) / rho;
                const double dx = g.x(static_cast<int>(k % g.nx)) - y.x;
                const double dy = g.y(static_cast<int>(k / g.nx)) - y.y;
                sum += weighted_p2[k] * mag * (da.ux[k] * dx + da.uy[k] * dy);
            }
            out.at(static_cast<std::size_t>(c), ri) = -sum / (cfg.eta * cfg.eta);
        }
    });
    if (!all_finite(out.values)) throw numerical_error("sweep_ideal: non-finite sinogram values");
    return out;
}

// Physical measurement sweep: one fluence solve for a, one warm-started solve
// per (y, r). Volume and boundary forms are cross-checked at the largest
// entries (the eq_corr4 reciprocity assertion).
inline Sinogram sweep_measurements(const AbsorptionField& a, const BoundaryData& bc,
                                   const AcousticConfig& cfg, double tol = kFluenceTolDefault,
                                   double reciprocity_tol = 1e-2) {
    cfg.validate_for_displacement();
    const FluenceSolution phi = solve_fluence(a, bc, tol);
    Sinogram out(cfg.centers, cfg.radii);
    Sinogram bnd(cfg.centers, cfg.radii);
    const std::int64_t n_pairs = static_cast<std::int64_t>(cfg.centers.size() * cfg.radii.size());
    std::vector<std::string> failures(static_cast<std::size_t>(n_pairs));
    parallel_for(n_pairs, [&](std::int64_t q) {
        const std::size_t c = static_cast<std::size_t>(q) / cfg.radii.size();
        const std::size_t ri = static_cast<std::size_t>(q) % cfg.radii.size();
        try {
            const Measurement m =
                measure_with(a, bc, phi, cfg.wave, cfg.eta, cfg.centers[c], cfg.radii[ri], tol);
            out.at(c, ri) = m.value;
            bnd.at(c, ri) = m.boundary_value;
        } catch (const std::exception& e) {
            failures[static_cast<std::size_t>(q)] =
                "sweep: failure at center " + std::to_string(c) + ", radius " +
                std::to_string(cfg.radii[ri]) + ": " + e.what();
        }
    });
    for (const std::string& f : failures)
        if (!f.empty()) throw numerical_error(f);

    // Spot-check reciprocity on the largest measurements.
    std::vector<std::size_t> idx(out.values.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t u, std::size_t v) {
        return std::abs(out.values[u]) > std::abs(out.values[v]);
    });
    const std::size_t n_check = std::min<std::size_t>(16, idx.size());
    for (std::size_t q = 0; q < n_check; ++q) {
        const double vol = out.values[idx[q]];
        const double bd = bnd.values[idx[q]];
        if (vol == 0.0) break;
        const double rel = std::abs(vol - bd) / std::max(std::abs(vol), std::abs(bd));
        if (rel > reciprocity_tol)
            throw numerical_error("sweep: volume/boundary measurement forms disagree (rel " +
                                  std::to_string(rel) + ") at flat index " +
                                  std::to_string(idx[q]));
    }
    return out;
}

// P-operator: cumulative trapezoidal integral in r, negated (in 2D the
// radius weight rho^{d-2} is 1). Integration starts at the first radius
// sample; the per-center constant this drops is absorbed downstream by the
// harmonic correction.
inline Sinogram p_transform(const Sinogram& m) {
    Sinogram out(m.centers, m.radii);
    for (std::size_t c = 0; c < m.n_centers(); ++c) {
        double acc = 0.0;
        out.at(c, 0) = 0.0;
        for (std::size_t r = 1; r < m.n_radii(); ++r) {
            acc -= 0.5 * (m.at(c, r - 1) + m.at(c, r)) * (m.radii[r] - m.radii[r - 1]);
            out.at(c, r) = acc;
        }
    }
    return out;
}

// Spherical density of |Da|: phi_eta(y, r) = int w_eta(|x-y|-r) |Da|(dx) with
// |Da| taken as the cell-weighted discrete TV measure. Validation only.
inline Sinogram density_profile(const AbsorptionField& a, const AcousticConfig& cfg) {
    cfg.validate();
    const Grid& g = a.field.grid;
    const ScalarField tvd = tv_density(a.field);
    const double cell = g.hx() * g.hy();
    Sinogram out(cfg.centers, cfg.radii);
    parallel_for(static_cast<std::int64_t>(cfg.centers.size()), [&](std::int64_t c) {
        const RadialBuckets buckets(g, cfg.centers[static_cast<std::size_t>(c)]);
        for (std::size_t ri = 0; ri < cfg.radii.size(); ++ri) {
            const double r = cfg.radii[ri];
            const auto [lo, hi] = buckets.window(r - cfg.eta, r + cfg.eta);
            double sum = 0.0;
            for (std::size_t q = lo; q < hi; ++q) {
                const std::size_t k = buckets.order[q];
                sum += cfg.wave((buckets.rho[q] - r) / cfg.eta) / cfg.eta * tvd.v[k] * cell;
            }
            out.at(static_cast<std::size_t>(c), ri) = sum;
        }
    });
    return out;
}

} // namespace aot
