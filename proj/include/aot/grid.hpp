#pragma once

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "aot/common.hpp"

namespace aot {

// Uniform node-centered grid over the rectangle [x0, x0+lx] x [y0, y0+ly].
// Node (i, j) sits at (x0 + i*hx, y0 + j*hy); fields are stored row-major
// with i fastest.
struct Grid {
    int nx = 0;
    int ny = 0;
    double x0 = 0.0;
    double y0 = 0.0;
    double lx = 0.0;
    double ly = 0.0;

    Grid() = default;
    Grid(int nx_, int ny_, double x0_, double y0_, double lx_, double ly_)
        : nx(nx_), ny(ny_), x0(x0_), y0(y0_), lx(lx_), ly(ly_) {
        require(nx >= 3 && ny >= 3, "grid: nx and ny must be >= 3");
        require(lx > 0.0 && ly > 0.0, "grid: lx and ly must be positive");
    }

    double hx() const { return lx / (nx - 1); }
    double hy() const { return ly / (ny - 1); }
    std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
    double x(int i) const { return x0 + i * hx(); }
    double y(int j) const { return y0 + j * hy(); }
    bool same_layout(const Grid& o) const {
        return nx == o.nx && ny == o.ny && x0 == o.x0 && y0 == o.y0 && lx == o.lx && ly == o.ly;
    }
};

struct ScalarField {
    Grid grid;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const Grid& g, double fill = 0.0) : grid(g), v(g.size(), fill) {}

    double& operator()(int i, int j) { return v[grid.idx(i, j)]; }
    double operator()(int i, int j) const { return v[grid.idx(i, j)]; }
};

struct VectorField {
    Grid grid;
    std::vector<double> ux;
    std::vector<double> uy;

    VectorField() = default;
    explicit VectorField(const Grid& g) : grid(g), ux(g.size(), 0.0), uy(g.size(), 0.0) {}
};

inline bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline void check_finite(const ScalarField& f, const std::string& who) {
    if (!all_finite(f.v)) throw numerical_error(who + ": field contains non-finite values");
}

inline void check_finite(const VectorField& f, const std::string& who) {
    if (!all_finite(f.ux) || !all_finite(f.uy))
        throw numerical_error(who + ": vector field contains non-finite values");
}

// Boolean node mask describing a subdomain D strictly inside the grid.
struct SubdomainMask {
    Grid grid;
    std::vector<std::uint8_t> inside;
    std::string description;

    bool at(int i, int j) const { return inside[grid.idx(i, j)] != 0; }
};

inline SubdomainMask disc_mask(const Grid& g, Point center, double radius) {
    require(radius > 0.0, "mask: disc radius must be positive");
    SubdomainMask m;
    m.grid = g;
    m.inside.assign(g.size(), 0);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "disc(%.17g,%.17g,%.17g)", center.x, center.y, radius);
    m.description = buf;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double dx = g.x(i) - center.x;
            const double dy = g.y(j) - center.y;
            if (dx * dx + dy * dy <= radius * radius) {
                require(i > 0 && i < g.nx - 1 && j > 0 && j < g.ny - 1,
                        "mask: subdomain must be strictly interior to the grid");
                m.inside[g.idx(i, j)] = 1;
            }
        }
    return m;
}

// Central differences in the interior, second-order one-sided stencils at the
// boundary. Exact for affine fields everywhere.
inline VectorField gradient(const ScalarField& f) {
    const Grid& g = f.grid;
    VectorField out(g);
    const double hx = g.hx(), hy = g.hy();
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.idx(i, j);
            if (i == 0)
                out.ux[k] = (-3.0 * f(0, j) + 4.0 * f(1, j) - f(2, j)) / (2.0 * hx);
            else if (i == g.nx - 1)
                out.ux[k] = (3.0 * f(i, j) - 4.0 * f(i - 1, j) + f(i - 2, j)) / (2.0 * hx);
            else
                out.ux[k] = (f(i + 1, j) - f(i - 1, j)) / (2.0 * hx);
            if (j == 0)
                out.uy[k] = (-3.0 * f(i, 0) + 4.0 * f(i, 1) - f(i, 2)) / (2.0 * hy);
            else if (j == g.ny - 1)
                out.uy[k] = (3.0 * f(i, j) - 4.0 * f(i, j - 1) + f(i, j - 2)) / (2.0 * hy);
            else
                out.uy[k] = (f(i, j + 1) - f(i, j - 1)) / (2.0 * hy);
        }
    }
    check_finite(out, "gradient");
    return out;
}

inline ScalarField divergence(const VectorField& F) {
    const Grid& g = F.grid;
    ScalarField out(g);
    const double hx = g.hx(), hy = g.hy();
    auto UX = [&](int i, int j) { return F.ux[g.idx(i, j)]; };
    auto UY = [&](int i, int j) { return F.uy[g.idx(i, j)]; };
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            double dxu, dyv;
            if (i == 0)
                dxu = (-3.0 * UX(0, j) + 4.0 * UX(1, j) - UX(2, j)) / (2.0 * hx);
            else if (i == g.nx - 1)
                dxu = (3.0 * UX(i, j) - 4.0 * UX(i - 1, j) + UX(i - 2, j)) / (2.0 * hx);
            else
                dxu = (UX(i + 1, j) - UX(i - 1, j)) / (2.0 * hx);
            if (j == 0)
                dyv = (-3.0 * UY(i, 0) + 4.0 * UY(i, 1) - UY(i, 2)) / (2.0 * hy);
            else if (j == g.ny - 1)
                dyv = (3.0 * UY(i, j) - 4.0 * UY(i, j - 1) + UY(i, j - 2)) / (2.0 * hy);
            else
                dyv = (UY(i, j + 1) - UY(i, j - 1)) / (2.0 * hy);
            out(i, j) = dxu + dyv;
        }
    }
    check_finite(out, "divergence");
    return out;
}

// Trapezoidal node weight: 1 interior, 1/2 edges, 1/4 corners (times cell area).
inline double trapezoid_weight(const Grid& g, int i, int j) {
    const double wx = (i == 0 || i == g.nx - 1) ? 0.5 : 1.0;
    const double wy = (j == 0 || j == g.ny - 1) ? 0.5 : 1.0;
    return wx * wy * g.hx() * g.hy();
}

inline double integrate(const ScalarField& f) {
    const Grid& g = f.grid;
    double sum = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) sum += trapezoid_weight(g, i, j) * f(i, j);
    return sum;
}

// Masked integration counts inside nodes with full cell-area weight.
inline double integrate(const ScalarField& f, const SubdomainMask& mask) {
    const Grid& g = f.grid;
    require(g.same_layout(mask.grid), "integrate: field and mask live on different grids");
    const double cell = g.hx() * g.hy();
    double sum = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
        if (mask.inside[k]) sum += f.v[k] * cell;
    return sum;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

// L2 norm with trapezoidal quadrature weights.
inline double l2_norm(const ScalarField& f) {
    const Grid& g = f.grid;
    double sum = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) sum += trapezoid_weight(g, i, j) * f(i, j) * f(i, j);
    return std::sqrt(sum);
}

inline double l2_norm(const ScalarField& f, const SubdomainMask& mask) {
    const double cell = f.grid.hx() * f.grid.hy();
    double sum = 0.0;
    for (std::size_t k = 0; k < f.v.size(); ++k)
        if (mask.inside[k]) sum += cell * f.v[k] * f.v[k];
    return std::sqrt(sum);
}

inline double l1_norm(const ScalarField& f) {
    const Grid& g = f.grid;
    double sum = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) sum += trapezoid_weight(g, i, j) * std::abs(f(i, j));
    return sum;
}

inline double l2_norm(const VectorField& F) {
    const Grid& g = F.grid;
    double sum = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.idx(i, j);
            sum += trapezoid_weight(g, i, j) * (F.ux[k] * F.ux[k] + F.uy[k] * F.uy[k]);
        }
    return std::sqrt(sum);
}

// Bilinear interpolation; points outside the grid rectangle evaluate to zero.
inline double bilinear_sample(const ScalarField& f, double px, double py) {
    const Grid& g = f.grid;
    const double sx = (px - g.x0) / g.hx();
    const double sy = (py - g.y0) / g.hy();
    if (sx < 0.0 || sy < 0.0 || sx > g.nx - 1 || sy > g.ny - 1) return 0.0;
    int i = static_cast<int>(sx);
    int j = static_cast<int>(sy);
    if (i >= g.nx - 1) i = g.nx - 2;
    if (j >= g.ny - 1) j = g.ny - 2;
    const double tx = sx - i;
    const double ty = sy - j;
    const double f00 = f(i, j), f10 = f(i + 1, j), f01 = f(i, j + 1), f11 = f(i + 1, j + 1);
    // locally constant data reproduces exactly (the weights only sum to 1 up
    // to rounding)
    if (f00 == f10 && f00 == f01 && f00 == f11) return f00;
    return (1 - tx) * (1 - ty) * f00 + tx * (1 - ty) * f10 + (1 - tx) * ty * f01 + tx * ty * f11;
}

// ---------------------------------------------------------------------------
// Field file format "AOTF": magic `AOTF`, u32 nx, u32 ny, f64 x0, y0, lx, ly,
// then nx*ny f64 values row-major, all little-endian.

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void put_f64(std::ostream& os, double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    unsigned char b[8];
    for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>((u >> (8 * k)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

inline double get_f64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t u = 0;
    for (int k = 0; k < 8; ++k) u |= static_cast<std::uint64_t>(b[k]) << (8 * k);
    double v;
    std::memcpy(&v, &u, 8);
    return v;
}

} // namespace detail

inline void write_aotf(const ScalarField& f, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    require(os.good(), "aotf: cannot open for writing: " + path);
    os.write("AOTF", 4);
    detail::put_u32(os, static_cast<std::uint32_t>(f.grid.nx));
    detail::put_u32(os, static_cast<std::uint32_t>(f.grid.ny));
    detail::put_f64(os, f.grid.x0);
    detail::put_f64(os, f.grid.y0);
    detail::put_f64(os, f.grid.lx);
    detail::put_f64(os, f.grid.ly);
    for (double x : f.v) detail::put_f64(os, x);
    require(os.good(), "aotf: write failed: " + path);
}

inline ScalarField read_aotf(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), "aotf: cannot open: " + path);
    char magic[4];
    is.read(magic, 4);
    require(is.good() && std::memcmp(magic, "AOTF", 4) == 0, "aotf: bad magic in " + path);
    const int nx = static_cast<int>(detail::get_u32(is));
    const int ny = static_cast<int>(detail::get_u32(is));
    const double x0 = detail::get_f64(is);
    const double y0 = detail::get_f64(is);
    const double lx = detail::get_f64(is);
    const double ly = detail::get_f64(is);
    require(is.good() && nx >= 3 && ny >= 3 && lx > 0 && ly > 0, "aotf: bad header in " + path);
    ScalarField f(Grid(nx, ny, x0, y0, lx, ly));
    for (double& x : f.v) x = detail::get_f64(is);
    require(is.good(), "aotf: truncated file " + path);
    return f;
}

inline void write_field_csv(const ScalarField& f, const std::string& path) {
    std::ofstream os(path);
    require(os.good(), "csv: cannot open for writing: " + path);
    os << "x,y,value\n";
    char line[128];
    for (int j = 0; j < f.grid.ny; ++j)
        for (int i = 0; i < f.grid.nx; ++i) {
            std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g\n", f.grid.x(i), f.grid.y(j),
                          f(i, j));
            os << line;
        }
}

// 8-bit binary PGM (P5) render of a field, linearly mapped to [0, 255].
inline void write_field_pgm(const ScalarField& f, const std::string& path,
                            std::optional<double> vmin = std::nullopt,
                            std::optional<double> vmax = std::nullopt) {
    double lo = vmin ? *vmin : *std::min_element(f.v.begin(), f.v.end());
    double hi = vmax ? *vmax : *std::max_element(f.v.begin(), f.v.end());
    if (hi <= lo) hi = lo + 1.0;
    std::ofstream os(path, std::ios::binary);
    require(os.good(), "pgm: cannot open for writing: " + path);
    os << "P5\n" << f.grid.nx << " " << f.grid.ny << "\n255\n";
    // Top image row = largest y so the render is not upside down.
    for (int j = f.grid.ny - 1; j >= 0; --j)
        for (int i = 0; i < f.grid.nx; ++i) {
            double t = (f(i, j) - lo) / (hi - lo);
            t = std::clamp(t, 0.0, 1.0);
            const unsigned char px = static_cast<unsigned char>(std::lround(t * 255.0));
            os.write(reinterpret_cast<const char*>(&px), 1);
        }
}

} // namespace aot
