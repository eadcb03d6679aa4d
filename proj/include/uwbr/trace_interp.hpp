#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "uwbr/core.hpp"
#include "uwbr/fft.hpp"
#include "uwbr/wavefield.hpp"

namespace uwbr {

/// Default band-limited refinement applied before linear interpolation.
/// A factor of 1 gives plain linear interpolation on the recorded samples.
inline constexpr std::size_t kDefaultUpsample = 8;

/// Evaluates traces at arbitrary times: each trace is refined by
/// band-limited (FFT) upsampling, then linearly interpolated on the fine
/// grid. Times outside the recorded window report "outside" and read as 0.
///
/// Every slant stack in the library (Radon transform, TTD sum, semblance,
/// hyperbolic stack) reads data through this one interpolant.
class TraceInterpolator {
public:
    TraceInterpolator() = default;

    TraceInterpolator(const SpaceTimeGrid& data, std::size_t upsample = kDefaultUpsample) {
        require(upsample >= 1, "upsample factor must be >= 1");
        const std::size_t m = data.geometry.element_count;
        std::vector<std::vector<double>> fine(m);
        parallel_for(m, [&](std::size_t n) { fine[n] = fft::upsample(data.trace(n), upsample); });
        init(fine, data.t_start(), data.dt() / static_cast<double>(upsample));
    }

    /// Wraps already-refined traces sharing one fine time axis.
    static TraceInterpolator from_fine(const std::vector<std::vector<double>>& fine, double start,
                                       double fine_step) {
        TraceInterpolator out;
        out.init(fine, start, fine_step);
        return out;
    }

    std::size_t trace_count() const noexcept { return count_; }

    /// Returns false (and leaves value at 0) when t lies outside the record.
    bool sample(std::size_t trace, double t, double& value) const {
        const double u = (t - start_) * inv_step_;
        value = 0.0;
        if (!(u >= -kEdgeSlack) || u > last_ + kEdgeSlack) return false;
        const double* f = fine_.data() + trace * length_;
        if (u <= 0.0) {
            value = f[0];
        } else if (u >= last_) {
            value = f[length_ - 1];
        } else {
            const auto i = static_cast<std::size_t>(u);
            const double frac = u - static_cast<double>(i);
            value = f[i] + frac * (f[i + 1] - f[i]);
        }
        return true;
    }

    double operator()(std::size_t trace, double t) const {
        double v;
        sample(trace, t, v);
        return v;
    }

private:
    static constexpr double kEdgeSlack = 1e-9;

    void init(const std::vector<std::vector<double>>& fine, double start, double fine_step) {
        count_ = fine.size();
        length_ = count_ ? fine.front().size() : 0;
        require(length_ >= 1 || count_ == 0, "traces must be non-empty");
        start_ = start;
        inv_step_ = 1.0 / fine_step;
        last_ = static_cast<double>(length_) - 1.0;
        fine_.resize(count_ * length_);
        for (std::size_t n = 0; n < count_; ++n) {
            require(fine[n].size() == length_, "all traces must share one length");
            std::copy(fine[n].begin(), fine[n].end(), fine_.begin() + static_cast<std::ptrdiff_t>(n * length_));
        }
    }

    std::vector<double> fine_;
    std::size_t count_ = 0;
    std::size_t length_ = 0;
    double start_ = 0.0;
    double inv_step_ = 1.0;
    double last_ = 0.0;
};

}  // namespace uwbr
