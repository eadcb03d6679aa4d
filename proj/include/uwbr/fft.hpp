#pragma once

// Thin RAII layer over FFTW plus the three spectral operations the rest of
// the library needs: band-limited upsampling, the ramp (|f|) filter and the
// analytic signal. All transforms zero-pad to a power of two >= 2n so that
// circular wrap-around never touches the returned samples.

#include <complex>
#include <cstddef>
#include <mutex>
#include <span>
#include <vector>

#include <fftw3.h>

#include "uwbr/core.hpp"

namespace uwbr::fft {

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

/// Padded transform length used for a sequence of n samples.
inline std::size_t padded_size(std::size_t n) { return std::max<std::size_t>(2, next_pow2(2 * n)); }

namespace detail {

// The FFTW planner is not re-entrant; execution is.
inline std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

template <typename T>
struct FftwBuffer {
    explicit FftwBuffer(std::size_t n) : ptr(static_cast<T*>(fftw_malloc(sizeof(T) * n))), size(n) {
        if (!ptr) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(ptr); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    T* ptr;
    std::size_t size;
};

}  // namespace detail

/// Real <-> half-complex transform pair of fixed even length n.
/// Unnormalized: inverse(forward(x)) == n * x.
class RealFft {
public:
    explicit RealFft(std::size_t n) : n_(n), real_(n), spec_(n / 2 + 1) {
        require(n >= 2 && n % 2 == 0, "RealFft length must be even and >= 2");
        std::lock_guard lock(detail::planner_mutex());
        forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_.ptr, spec_.ptr, FFTW_ESTIMATE);
        inverse_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec_.ptr, real_.ptr, FFTW_ESTIMATE);
    }
    ~RealFft() {
        std::lock_guard lock(detail::planner_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(inverse_);
    }
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    std::size_t size() const noexcept { return n_; }
    std::span<double> real() noexcept { return {real_.ptr, n_}; }
    std::span<std::complex<double>> spectrum() noexcept {
        return {reinterpret_cast<std::complex<double>*>(spec_.ptr), n_ / 2 + 1};
    }

    /// Loads `x` zero-padded into the real buffer.
    void load(std::span<const double> x) {
        auto r = real();
        std::fill(r.begin(), r.end(), 0.0);
        std::copy(x.begin(), x.begin() + std::min(x.size(), n_), r.begin());
    }

    void forward() { fftw_execute(forward_); }
    // c2r destroys its input; callers rebuild the spectrum before each call.
    void inverse() { fftw_execute(inverse_); }

private:
    std::size_t n_;
    detail::FftwBuffer<double> real_;
    detail::FftwBuffer<fftw_complex> spec_;
    fftw_plan forward_ = nullptr;
    fftw_plan inverse_ = nullptr;
};

/// In-place complex transform of fixed length n (backward = e^{+i...}).
class ComplexFft {
public:
    explicit ComplexFft(std::size_t n) : n_(n), buf_(n) {
        std::lock_guard lock(detail::planner_mutex());
        forward_ = fftw_plan_dft_1d(static_cast<int>(n), buf_.ptr, buf_.ptr, FFTW_FORWARD, FFTW_ESTIMATE);
        backward_ = fftw_plan_dft_1d(static_cast<int>(n), buf_.ptr, buf_.ptr, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~ComplexFft() {
        std::lock_guard lock(detail::planner_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
    }
    ComplexFft(const ComplexFft&) = delete;
    ComplexFft& operator=(const ComplexFft&) = delete;

    std::span<std::complex<double>> data() noexcept {
        return {reinterpret_cast<std::complex<double>*>(buf_.ptr), n_};
    }
    void forward() { fftw_execute(forward_); }
    void backward() { fftw_execute(backward_); }

private:
    std::size_t n_;
    detail::FftwBuffer<fftw_complex> buf_;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

/// Applies `response(frequency_hz)` to x (sample spacing dt) and returns the
/// result resampled on a grid `factor` times finer: output has
/// factor*(n-1)+1 samples with out[factor*i] aligned to x[i]. With a unit
/// response this is band-limited (sinc) interpolation.
template <typename Response>
std::vector<double> filter_and_upsample(std::span<const double> x, double dt, std::size_t factor,
                                        Response&& response) {
    require(factor >= 1, "upsample factor must be >= 1");
    const std::size_t n = x.size();
    if (n == 0) return {};
    const std::size_t padded = padded_size(n);
    RealFft coarse(padded);
    coarse.load(x);
    coarse.forward();
    auto spec = coarse.spectrum();
    const std::size_t half = padded / 2;
    const double df = 1.0 / (static_cast<double>(padded) * dt);
    for (std::size_t k = 0; k <= half; ++k) spec[k] *= response(static_cast<double>(k) * df);

    std::vector<double> out(factor * (n - 1) + 1);
    if (factor == 1) {
        coarse.inverse();
        auto r = coarse.real();
        for (std::size_t i = 0; i < n; ++i) out[i] = r[i] / static_cast<double>(padded);
        return out;
    }
    RealFft fine(padded * factor);
    auto fine_spec = fine.spectrum();
    std::fill(fine_spec.begin(), fine_spec.end(), std::complex<double>{});
    for (std::size_t k = 0; k < half; ++k) fine_spec[k] = spec[k];
    // The coarse Nyquist bin is shared between +half and -half once the
    // spectrum is embedded in a longer transform.
    fine_spec[half] = 0.5 * spec[half];
    fine.inverse();
    auto r = fine.real();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = r[i] / static_cast<double>(padded);
    return out;
}

/// Band-limited upsampling by an integer factor (identity when factor == 1).
inline std::vector<double> upsample(std::span<const double> x, std::size_t factor) {
    if (factor == 1) return {x.begin(), x.end()};
    return filter_and_upsample(x, 1.0, factor, [](double) { return 1.0; });
}

/// Analytic signal x + i*H{x}, computed by zeroing negative frequencies.
inline std::vector<std::complex<double>> analytic_signal(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    const std::size_t padded = padded_size(n);
    ComplexFft t(padded);
    auto d = t.data();
    std::fill(d.begin(), d.end(), std::complex<double>{});
    for (std::size_t i = 0; i < n; ++i) d[i] = x[i];
    t.forward();
    const std::size_t half = padded / 2;
    for (std::size_t k = 1; k < half; ++k) d[k] *= 2.0;
    for (std::size_t k = half + 1; k < padded; ++k) d[k] = 0.0;
    t.backward();
    std::vector<std::complex<double>> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = d[i] / static_cast<double>(padded);
    return out;
}

/// Magnitude of the analytic signal.
inline std::vector<double> envelope(std::span<const double> x) {
    auto z = analytic_signal(x);
    std::vector<double> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = std::abs(z[i]);
    return out;
}

}  // namespace uwbr::fft
