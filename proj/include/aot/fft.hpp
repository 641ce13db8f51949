#pragma once

#include <complex>
#include <vector>

#include "aot/common.hpp"

namespace aot {

using cplx = std::complex<double>;

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// In-place iterative radix-2 Cooley-Tukey transform. sign = -1 forward,
// sign = +1 inverse (unscaled; callers divide by n after the inverse).
inline void fft_inplace(cplx* data, std::size_t n, int sign) {
    if (!is_pow2(n)) throw validation_error("fft: length must be a power of two");
    // bit reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }
    const double pi = 3.14159265358979323846;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * pi / static_cast<double>(len);
        const cplx wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cplx u = data[i + k];
                const cplx v = data[i + k + len / 2] * w;
                data[i + k] = u + v;
                data[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

// 2D complex array, row-major, with power-of-two dimensions.
struct Fft2 {
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::vector<cplx> a;

    Fft2() = default;
    Fft2(std::size_t nx_, std::size_t ny_) : nx(nx_), ny(ny_), a(nx_ * ny_, cplx(0.0, 0.0)) {
        require(is_pow2(nx) && is_pow2(ny), "fft2: dimensions must be powers of two");
    }

    cplx& at(std::size_t i, std::size_t j) { return a[j * nx + i]; }
    const cplx& at(std::size_t i, std::size_t j) const { return a[j * nx + i]; }

    void transform(int sign) {
        // rows
        for (std::size_t j = 0; j < ny; ++j) fft_inplace(a.data() + j * nx, nx, sign);
        // columns via a scratch line
        std::vector<cplx> col(ny);
        for (std::size_t i = 0; i < nx; ++i) {
            for (std::size_t j = 0; j < ny; ++j) col[j] = a[j * nx + i];
            fft_inplace(col.data(), ny, sign);
            for (std::size_t j = 0; j < ny; ++j) a[j * nx + i] = col[j];
        }
    }

    void forward() { transform(-1); }

    void inverse() {
        transform(+1);
        const double scale = 1.0 / (static_cast<double>(nx) * static_cast<double>(ny));
        for (auto& z : a) z *= scale;
    }
};

// Signed frequency index for bin k of an n-point transform.
inline double freq_index(std::size_t k, std::size_t n) {
    return (k <= n / 2) ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
}

} // namespace aot
