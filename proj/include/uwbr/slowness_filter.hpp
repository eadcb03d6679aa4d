#pragma once

// Zero/one slowness bandstop mask over the Radon domain, with an optional
// raised-cosine taper at each band edge.

#include <algorithm>
#include <cmath>
#include <vector>

#include "uwbr/core.hpp"
#include "uwbr/radon.hpp"
#include "uwbr/semblance.hpp"

namespace uwbr {

struct SlownessMask {
    std::vector<double> gains;          // one entry per slowness cell, in [0, 1]
    std::vector<SlownessBand> stopped;  // merged bands after guard widening
    std::size_t guard_cells = 0;
    std::size_t taper_cells = 0;
};

/// Gain 0 inside every band widened by `guard_cells` on each side, rising
/// to 1 over `taper_cells` cells with a raised-cosine ramp. taper_cells = 0
/// gives the hard 0/1 mask. Overlapping bands are merged first.
inline SlownessMask build_mask(const std::vector<SlownessBand>& bands, const UniformAxis& slowness,
                               std::size_t guard_cells, std::size_t taper_cells) {
    const std::size_t n = slowness.size;
    SlownessMask mask{std::vector<double>(n, 1.0), {}, guard_cells, taper_cells};
    if (n == 0) return mask;

    struct Run {
        std::ptrdiff_t first, last;
    };
    std::vector<Run> runs;
    for (const auto& b : bands) {
        // Snap the interval to the cells it covers; half-cell slack absorbs rounding.
        const double lo = std::ceil(slowness.position(std::min(b.p_low, b.p_high)) - 0.5 + 1e-9);
        const double hi = std::floor(slowness.position(std::max(b.p_low, b.p_high)) + 0.5 - 1e-9);
        const auto g = static_cast<std::ptrdiff_t>(guard_cells);
        auto first = static_cast<std::ptrdiff_t>(lo) - g;
        auto last = static_cast<std::ptrdiff_t>(hi) + g;
        first = std::max<std::ptrdiff_t>(first, 0);
        last = std::min<std::ptrdiff_t>(last, static_cast<std::ptrdiff_t>(n) - 1);
        if (first <= last) runs.push_back({first, last});
    }
    std::sort(runs.begin(), runs.end(), [](const Run& a, const Run& b) { return a.first < b.first; });
    std::vector<Run> merged;
    for (const auto& r : runs) {
        if (!merged.empty() && r.first <= merged.back().last + 1)
            merged.back().last = std::max(merged.back().last, r.last);
        else
            merged.push_back(r);
    }

    const auto taper = static_cast<std::ptrdiff_t>(taper_cells);
    auto ramp = [&](std::ptrdiff_t distance) {
        // distance >= 1 cells outside the stopped core
        if (distance > taper) return 1.0;
        return 0.5 - 0.5 * std::cos(kPi * static_cast<double>(distance) / static_cast<double>(taper + 1));
    };
    for (const auto& r : merged) {
        for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(n); ++k) {
            double g = 1.0;
            if (k >= r.first && k <= r.last) g = 0.0;
            else if (k < r.first) g = ramp(r.first - k);
            else g = ramp(k - r.last);
            auto& slot = mask.gains[static_cast<std::size_t>(k)];
            slot = std::min(slot, g);
        }
        const auto f = static_cast<std::size_t>(r.first);
        const auto l = static_cast<std::size_t>(r.last);
        mask.stopped.push_back({slowness[f], slowness[l], f, l});
    }
    return mask;
}

/// Column-wise product f_r(tau, p) * H(p).
inline RadonGrid apply_mask(const RadonGrid& radon, const SlownessMask& mask) {
    if (mask.gains.size() != radon.slowness.size)
        throw std::invalid_argument("apply_mask: mask length does not match the slowness axis");
    RadonGrid out = radon;
    for (std::size_t j = 0; j < out.samples.rows(); ++j) {
        auto row = out.samples.row(j);
        for (std::size_t k = 0; k < row.size(); ++k) row[k] *= mask.gains[k];
    }
    return out;
}

}  // namespace uwbr
