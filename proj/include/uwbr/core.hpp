#pragma once

// Shared building blocks: physical constants, uniform axes, a dense
// row-major matrix, the error hierarchy and a small parallel loop helper.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace uwbr {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input to a grid or config parser; carries the 1-based line.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

inline void require(bool condition, const char* message) {
    if (!condition) throw std::invalid_argument(message);
}

// ---------------------------------------------------------------------------
// UniformAxis
// ---------------------------------------------------------------------------

/// A uniformly sampled axis: value(i) = start + i * step.
struct UniformAxis {
    double start = 0.0;
    double step = 1.0;
    std::size_t size = 0;

    double operator[](std::size_t i) const { return start + static_cast<double>(i) * step; }
    double front() const { return start; }
    double back() const { return (*this)[size - 1]; }
    bool empty() const { return size == 0; }

    /// Fractional index of `value` on this axis.
    double position(double value) const { return (value - start) / step; }

    /// `count` points evenly spanning [lo, hi] inclusive.
    static UniformAxis linspace(double lo, double hi, std::size_t count) {
        require(count >= 2 && hi > lo, "linspace needs count >= 2 and hi > lo");
        return {lo, (hi - lo) / static_cast<double>(count - 1), count};
    }

    std::vector<double> values() const {
        std::vector<double> out(size);
        for (std::size_t i = 0; i < size; ++i) out[i] = (*this)[i];
        return out;
    }
};

inline bool operator==(const UniformAxis& a, const UniformAxis& b) {
    return a.start == b.start && a.step == b.step && a.size == b.size;
}

/// Default slowness axis: `count` points over [-1/c, +1/c].
inline UniformAxis default_slowness_axis(std::size_t count = 501) {
    return UniformAxis::linspace(-1.0 / kSpeedOfLight, 1.0 / kSpeedOfLight, count);
}

// ---------------------------------------------------------------------------
// Matrix
// ---------------------------------------------------------------------------

template <typename T = double>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<T> data() noexcept { return data_; }
    std::span<const T> data() const noexcept { return data_; }

    std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<T> column(std::size_t c) const {
        std::vector<T> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
        return out;
    }

    void set_column(std::size_t c, std::span<const T> values) {
        for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = values[r];
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

// ---------------------------------------------------------------------------
// parallel_for
// ---------------------------------------------------------------------------

/// Runs body(i) for i in [0, count) across hardware threads. Iterations must
/// be independent; results never depend on the thread count.
template <typename Body>
void parallel_for(std::size_t count, Body&& body) {
    const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers = std::min<std::size_t>(hw, count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < count; i += workers) body(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace uwbr
