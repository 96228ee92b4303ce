#include "kbits/toeplitz.hpp"

#include "kbits/rng.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <stdexcept>

namespace kbits {

namespace {
// FFTW planning is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

void check_args(const BitVec& x, std::size_t r, const BitVec& seed_bits) {
    if (x.empty()) throw std::invalid_argument("toeplitz: empty input");
    if (r == 0) throw std::invalid_argument("toeplitz: output length must be positive");
    if (seed_bits.size() != x.size() + r - 1)
        throw std::invalid_argument("toeplitz: seed must have n + r - 1 bits");
}
}  // namespace

BitVec toeplitz_seed_bits(std::size_t count, const std::array<std::uint8_t, 16>& seed) {
    Rng rng(seed);
    BitVec out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = static_cast<std::uint8_t>(rng.next_bit());
    return out;
}

BitVec toeplitz_hash_naive(const BitVec& x, std::size_t r, const BitVec& seed_bits) {
    check_args(x, r, seed_bits);
    const std::size_t n = x.size();
    BitVec y(r, 0);
    for (std::size_t i = 0; i < r; ++i) {
        std::uint8_t acc = 0;
        for (std::size_t j = 0; j < n; ++j) acc ^= seed_bits[i + n - 1 - j] & x[j];
        y[i] = acc;
    }
    return y;
}

BitVec toeplitz_hash(const BitVec& x, std::size_t r, const BitVec& seed_bits) {
    check_args(x, r, seed_bits);
    const std::size_t n = x.size();
    const std::size_t s_len = seed_bits.size();
    const std::size_t conv_len = n + s_len - 1;

    // linear convolution via zero-padded cyclic FFT; counts are exact
    // integers <= n, far inside double precision for any feasible n
    std::size_t fft_len = 1;
    while (fft_len < conv_len) fft_len <<= 1;
    const std::size_t spec_len = fft_len / 2 + 1;

    double* buf = fftw_alloc_real(fft_len);
    fftw_complex* spec_s = fftw_alloc_complex(spec_len);
    fftw_complex* spec_x = fftw_alloc_complex(spec_len);
    if (!buf || !spec_s || !spec_x) {
        fftw_free(buf);
        fftw_free(spec_s);
        fftw_free(spec_x);
        throw std::bad_alloc();
    }

    fftw_plan fwd, inv;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fwd = fftw_plan_dft_r2c_1d(static_cast<int>(fft_len), buf, spec_s, FFTW_ESTIMATE);
        inv = fftw_plan_dft_c2r_1d(static_cast<int>(fft_len), spec_x, buf, FFTW_ESTIMATE);
    }

    for (std::size_t i = 0; i < fft_len; ++i) buf[i] = i < s_len ? seed_bits[i] : 0.0;
    fftw_execute(fwd);
    for (std::size_t i = 0; i < fft_len; ++i) buf[i] = i < n ? x[i] : 0.0;
    fftw_execute_dft_r2c(fwd, buf, spec_x);

    const double scale = 1.0 / static_cast<double>(fft_len);
    for (std::size_t i = 0; i < spec_len; ++i) {
        const std::complex<double> a(spec_s[i][0], spec_s[i][1]);
        const std::complex<double> b(spec_x[i][0], spec_x[i][1]);
        const std::complex<double> c = a * b * scale;
        spec_x[i][0] = c.real();
        spec_x[i][1] = c.imag();
    }
    fftw_execute(inv);

    BitVec y(r);
    bool drift = false;
    for (std::size_t i = 0; i < r; ++i) {
        const double v = buf[i + n - 1];
        const long long count = std::llround(v);
        if (std::fabs(v - static_cast<double>(count)) > 0.25) drift = true;
        y[i] = static_cast<std::uint8_t>(count & 1);
    }

    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(inv);
    }
    fftw_free(buf);
    fftw_free(spec_s);
    fftw_free(spec_x);
    if (drift) throw std::runtime_error("toeplitz: fft drift exceeded rounding margin");
    return y;
}

}  // namespace kbits
