#pragma once

#include <map>
#include <sstream>

#include "aot/acoustics.hpp"
#include "aot/grid.hpp"
#include "aot/phantom.hpp"
#include "aot/reconstruct.hpp"

namespace aot {

// Center-curve description for Y.
struct CurveSpec {
    enum class Kind { circle, ellipse, boundary_d } kind = Kind::boundary_d;
    Point center;
    double ax = 0.0; // radius, or ellipse semi-axes
    double ay = 0.0;
};

struct PipelineConfig {
    Grid grid{256, 160, 0.0, 0.0, 1.6, 1.0};
    Point d_center{0.8, 0.5};
    double d_radius = 0.48;

    AbsorptionSpec phantom;

    double boundary_l = 0.1;
    double boundary_g = 1.0;

    double eta = 0.02;
    bool wave_normalized = true;
    CurveSpec curve;
    int n_centers = 128;
    int n_radii = 64;
    double r_first = 0.05;
    double r_last = 0.96;

    double reg = 1e-6;
    int n_theta = 720;
    int cgls_max_iter = 400;

    ReconstructConfig reconstruct;

    double solver_tol = 1e-10;
    std::uint64_t seed = 1;
    int threads = 1;

    SubdomainMask make_mask() const { return disc_mask(grid, d_center, d_radius); }

    std::vector<Point> make_centers() const {
        switch (curve.kind) {
        case CurveSpec::Kind::circle:
            return circle_centers(curve.center, curve.ax, n_centers);
        case CurveSpec::Kind::ellipse:
            return ellipse_centers(curve.center, curve.ax, curve.ay, n_centers);
        case CurveSpec::Kind::boundary_d:
        default:
            return circle_centers(d_center, d_radius, n_centers);
        }
    }

    AcousticConfig make_acoustics() const {
        AcousticConfig ac;
        ac.wave = WaveShape::make(wave_normalized);
        ac.eta = eta;
        ac.centers = make_centers();
        ac.radii = linspace(r_first, r_last, n_radii);
        return ac;
    }

    BoundaryData make_boundary() const { return BoundaryData::constant(grid, boundary_l, boundary_g); }

    void validate() const {
        phantom.validate();
        reconstruct.validate();
        require(eta > 0.0, "config: acoustics.eta must be positive");
        require(n_centers >= 1 && n_radii >= 2, "config: acoustics lattice too small");
        require(r_first > 0.0 && r_first < r_last, "config: acoustics radii range invalid");
        require(reg >= 0.0, "config: inversion.reg must be nonnegative");
        require(n_theta >= 8, "config: inversion.n_theta too small");
        require(solver_tol > 0.0, "config: solver.tol must be positive");
        require(threads >= 1, "config: threads must be >= 1");
        require(d_radius > 0.0, "config: domain.d_r must be positive");
        // centers must lie in the closure of Omega and outside the open disc D
        for (const Point& y : make_centers()) {
            require(y.x >= grid.x0 - 1e-12 && y.x <= grid.x0 + grid.lx + 1e-12 &&
                        y.y >= grid.y0 - 1e-12 && y.y <= grid.y0 + grid.ly + 1e-12,
                    "config: acoustic center escapes the domain");
            require(dist(y, d_center) >= d_radius - 1e-12,
                    "config: acoustic center lies inside the subdomain D");
        }
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    std::size_t b = s.find_last_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& s) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        require(pos == s.size(), "config: trailing characters in value of " + key);
        return v;
    } catch (const validation_error&) {
        throw;
    } catch (...) {
        throw validation_error("config: cannot parse number for key " + key + ": '" + s + "'");
    }
}

inline long parse_int(const std::string& key, const std::string& s) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(s, &pos);
        require(pos == s.size(), "config: trailing characters in value of " + key);
        return v;
    } catch (const validation_error&) {
        throw;
    } catch (...) {
        throw validation_error("config: cannot parse integer for key " + key + ": '" + s + "'");
    }
}

inline std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

} // namespace detail

// Flat dotted-key text format, e.g. `grid.nx = 256`. Lines starting with '#'
// and blank lines are ignored. Inclusions are indexed keys:
//   phantom.inclusion.0 = disc <cx> <cy> <radius> <value>
//   phantom.inclusion.1 = polygon <value> <x1> <y1> <x2> <y2> <x3> <y3> ...
//   phantom.inclusion.2 = image <path> <value_min> <value_max>
inline PipelineConfig parse_config_text(const std::string& text) {
    PipelineConfig cfg;
    std::map<int, Inclusion> inclusions;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const std::size_t eq = t.find('=');
        require(eq != std::string::npos,
                "config: line " + std::to_string(lineno) + " is not 'key = value'");
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string val = detail::trim(t.substr(eq + 1));
        require(!key.empty() && !val.empty(),
                "config: empty key or value at line " + std::to_string(lineno));

        if (key == "grid.nx")
            cfg.grid.nx = static_cast<int>(detail::parse_int(key, val));
        else if (key == "grid.ny")
            cfg.grid.ny = static_cast<int>(detail::parse_int(key, val));
        else if (key == "grid.x0")
            cfg.grid.x0 = detail::parse_double(key, val);
        else if (key == "grid.y0")
            cfg.grid.y0 = detail::parse_double(key, val);
        else if (key == "grid.lx")
            cfg.grid.lx = detail::parse_double(key, val);
        else if (key == "grid.ly")
            cfg.grid.ly = detail::parse_double(key, val);
        else if (key == "domain.d_cx")
            cfg.d_center.x = detail::parse_double(key, val);
        else if (key == "domain.d_cy")
            cfg.d_center.y = detail::parse_double(key, val);
        else if (key == "domain.d_r")
            cfg.d_radius = detail::parse_double(key, val);
        else if (key == "phantom.a0")
            cfg.phantom.a0 = detail::parse_double(key, val);
        else if (key == "phantom.a_lower")
            cfg.phantom.a_lower = detail::parse_double(key, val);
        else if (key == "phantom.a_upper")
            cfg.phantom.a_upper = detail::parse_double(key, val);
        else if (key.rfind("phantom.inclusion.", 0) == 0) {
            const int index = static_cast<int>(
                detail::parse_int(key, key.substr(std::string("phantom.inclusion.").size())));
            const std::vector<std::string> tok = detail::split_ws(val);
            require(!tok.empty(), "config: empty inclusion in " + key);
            if (tok[0] == "disc") {
                require(tok.size() == 5, "config: disc inclusion needs 'disc cx cy r value' in " + key);
                DiscInclusion d;
                d.center = {detail::parse_double(key, tok[1]), detail::parse_double(key, tok[2])};
                d.radius = detail::parse_double(key, tok[3]);
                d.value = detail::parse_double(key, tok[4]);
                inclusions[index] = d;
            } else if (tok[0] == "polygon") {
                require(tok.size() >= 8 && tok.size() % 2 == 0,
                        "config: polygon inclusion needs 'polygon value x1 y1 x2 y2 x3 y3 ...' in " + key);
                PolygonInclusion p;
                p.value = detail::parse_double(key, tok[1]);
                for (std::size_t q = 2; q + 1 < tok.size(); q += 2)
                    p.vertices.push_back({detail::parse_double(key, tok[q]),
                                          detail::parse_double(key, tok[q + 1])});
                inclusions[index] = p;
            } else if (tok[0] == "image") {
                require(tok.size() == 4, "config: image inclusion needs 'image path vmin vmax' in " + key);
                ImageInclusion im;
                im.path = tok[1];
                im.value_min = detail::parse_double(key, tok[2]);
                im.value_max = detail::parse_double(key, tok[3]);
                inclusions[index] = im;
            } else {
                throw validation_error("config: unknown inclusion type '" + tok[0] + "' in " + key);
            }
        } else if (key == "boundary.l")
            cfg.boundary_l = detail::parse_double(key, val);
        else if (key == "boundary.g")
            cfg.boundary_g = detail::parse_double(key, val);
        else if (key == "acoustics.eta")
            cfg.eta = detail::parse_double(key, val);
        else if (key == "acoustics.wave_normalized")
            cfg.wave_normalized = (val == "true" || val == "1");
        else if (key == "acoustics.curve") {
            const std::vector<std::string> tok = detail::split_ws(val);
            if (tok.size() == 1 && tok[0] == "boundary_d") {
                cfg.curve.kind = CurveSpec::Kind::boundary_d;
            } else if (tok.size() == 4 && tok[0] == "circle") {
                cfg.curve.kind = CurveSpec::Kind::circle;
                cfg.curve.center = {detail::parse_double(key, tok[1]),
                                    detail::parse_double(key, tok[2])};
                cfg.curve.ax = detail::parse_double(key, tok[3]);
            } else if (tok.size() == 5 && tok[0] == "ellipse") {
                cfg.curve.kind = CurveSpec::Kind::ellipse;
                cfg.curve.center = {detail::parse_double(key, tok[1]),
                                    detail::parse_double(key, tok[2])};
                cfg.curve.ax = detail::parse_double(key, tok[3]);
                cfg.curve.ay = detail::parse_double(key, tok[4]);
            } else {
                throw validation_error("config: acoustics.curve must be 'boundary_d', "
                                       "'circle cx cy r' or 'ellipse cx cy ax ay'");
            }
        } else if (key == "acoustics.n_centers")
            cfg.n_centers = static_cast<int>(detail::parse_int(key, val));
        else if (key == "acoustics.n_radii")
            cfg.n_radii = static_cast<int>(detail::parse_int(key, val));
        else if (key == "acoustics.r_first")
            cfg.r_first = detail::parse_double(key, val);
        else if (key == "acoustics.r_last")
            cfg.r_last = detail::parse_double(key, val);
        else if (key == "inversion.reg")
            cfg.reg = detail::parse_double(key, val);
        else if (key == "inversion.n_theta")
            cfg.n_theta = static_cast<int>(detail::parse_int(key, val));
        else if (key == "inversion.cgls_max_iter")
            cfg.cgls_max_iter = static_cast<int>(detail::parse_int(key, val));
        else if (key == "reconstruct.a_lower")
            cfg.reconstruct.a_lower = detail::parse_double(key, val);
        else if (key == "reconstruct.a_upper")
            cfg.reconstruct.a_upper = detail::parse_double(key, val);
        else if (key == "reconstruct.a0")
            cfg.reconstruct.a0 = detail::parse_double(key, val);
        else if (key == "reconstruct.max_iters")
            cfg.reconstruct.max_iters = static_cast<int>(detail::parse_int(key, val));
        else if (key == "reconstruct.fp_tol")
            cfg.reconstruct.fp_tol = detail::parse_double(key, val);
        else if (key == "reconstruct.elliptic_tol")
            cfg.reconstruct.elliptic_tol = detail::parse_double(key, val);
        else if (key == "reconstruct.boundary_mode") {
            if (val == "numeric")
                cfg.reconstruct.boundary_mode = BoundaryMode::numeric;
            else if (val == "theory")
                cfg.reconstruct.boundary_mode = BoundaryMode::theory;
            else
                throw validation_error("config: reconstruct.boundary_mode must be numeric|theory");
        } else if (key == "solver.tol")
            cfg.solver_tol = detail::parse_double(key, val);
        else if (key == "seed")
            cfg.seed = static_cast<std::uint64_t>(detail::parse_int(key, val));
        else if (key == "threads")
            cfg.threads = static_cast<int>(detail::parse_int(key, val));
        else
            throw validation_error("config: unknown key '" + key + "'");
    }
    for (auto& [index, inc] : inclusions) cfg.phantom.inclusions.push_back(std::move(inc));
    cfg.grid = Grid(cfg.grid.nx, cfg.grid.ny, cfg.grid.x0, cfg.grid.y0, cfg.grid.lx, cfg.grid.ly);
    cfg.validate();
    return cfg;
}

inline PipelineConfig load_config(const std::string& path) {
    std::ifstream is(path);
    require(is.good(), "config: cannot open: " + path);
    std::stringstream buf;
    buf << is.rdbuf();
    return parse_config_text(buf.str());
}

inline std::string serialize_config(const PipelineConfig& cfg) {
    std::ostringstream os;
    char buf[512];
    auto put_d = [&](const char* key, double v) {
        std::snprintf(buf, sizeof(buf), "%s = %.17g\n", key, v);
        os << buf;
    };
    auto put_i = [&](const char* key, long v) {
        std::snprintf(buf, sizeof(buf), "%s = %ld\n", key, v);
        os << buf;
    };
    put_i("grid.nx", cfg.grid.nx);
    put_i("grid.ny", cfg.grid.ny);
    put_d("grid.x0", cfg.grid.x0);
    put_d("grid.y0", cfg.grid.y0);
    put_d("grid.lx", cfg.grid.lx);
    put_d("grid.ly", cfg.grid.ly);
    put_d("domain.d_cx", cfg.d_center.x);
    put_d("domain.d_cy", cfg.d_center.y);
    put_d("domain.d_r", cfg.d_radius);
    put_d("phantom.a0", cfg.phantom.a0);
    put_d("phantom.a_lower", cfg.phantom.a_lower);
    put_d("phantom.a_upper", cfg.phantom.a_upper);
    for (std::size_t q = 0; q < cfg.phantom.inclusions.size(); ++q) {
        const Inclusion& inc = cfg.phantom.inclusions[q];
        if (const auto* d = std::get_if<DiscInclusion>(&inc)) {
            std::snprintf(buf, sizeof(buf), "phantom.inclusion.%zu = disc %.17g %.17g %.17g %.17g\n",
                          q, d->center.x, d->center.y, d->radius, d->value);
            os << buf;
        } else if (const auto* p = std::get_if<PolygonInclusion>(&inc)) {
            std::snprintf(buf, sizeof(buf), "phantom.inclusion.%zu = polygon %.17g", q, p->value);
            os << buf;
            for (const Point& v : p->vertices) {
                std::snprintf(buf, sizeof(buf), " %.17g %.17g", v.x, v.y);
                os << buf;
            }
            os << "\n";
        } else if (const auto* im = std::get_if<ImageInclusion>(&inc)) {
            std::snprintf(buf, sizeof(buf), "phantom.inclusion.%zu = image %s %.17g %.17g\n", q,
                          im->path.c_str(), im->value_min, im->value_max);
            os << buf;
        }
    }
    put_d("boundary.l", cfg.boundary_l);
    put_d("boundary.g", cfg.boundary_g);
    put_d("acoustics.eta", cfg.eta);
    os << "acoustics.wave_normalized = " << (cfg.wave_normalized ? "true" : "false") << "\n";
    switch (cfg.curve.kind) {
    case CurveSpec::Kind::boundary_d:
        os << "acoustics.curve = boundary_d\n";
        break;
    case CurveSpec::Kind::circle:
        std::snprintf(buf, sizeof(buf), "acoustics.curve = circle %.17g %.17g %.17g\n",
                      cfg.curve.center.x, cfg.curve.center.y, cfg.curve.ax);
        os << buf;
        break;
    case CurveSpec::Kind::ellipse:
        std::snprintf(buf, sizeof(buf), "acoustics.curve = ellipse %.17g %.17g %.17g %.17g\n",
                      cfg.curve.center.x, cfg.curve.center.y, cfg.curve.ax, cfg.curve.ay);
        os << buf;
        break;
    }
    put_i("acoustics.n_centers", cfg.n_centers);
    put_i("acoustics.n_radii", cfg.n_radii);
    put_d("acoustics.r_first", cfg.r_first);
    put_d("acoustics.r_last", cfg.r_last);
    put_d("inversion.reg", cfg.reg);
    put_i("inversion.n_theta", cfg.n_theta);
    put_i("inversion.cgls_max_iter", cfg.cgls_max_iter);
    put_d("reconstruct.a_lower", cfg.reconstruct.a_lower);
    put_d("reconstruct.a_upper", cfg.reconstruct.a_upper);
    put_d("reconstruct.a0", cfg.reconstruct.a0);
    put_i("reconstruct.max_iters", cfg.reconstruct.max_iters);
    put_d("reconstruct.fp_tol", cfg.reconstruct.fp_tol);
    put_d("reconstruct.elliptic_tol", cfg.reconstruct.elliptic_tol);
    os << "reconstruct.boundary_mode = "
       << (cfg.reconstruct.boundary_mode == BoundaryMode::numeric ? "numeric" : "theory") << "\n";
    put_d("solver.tol", cfg.solver_tol);
    put_i("seed", static_cast<long>(cfg.seed));
    put_i("threads", cfg.threads);
    return os.str();
}

} // namespace aot
