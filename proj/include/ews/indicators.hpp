/*
   Copyright 2026 The ews authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ews/errors.hpp"

namespace ews {

// Generic early-warning statistics over a detrended series: Lowess smoothing,
// rolling variance, rolling lag-1 autocorrelation, and the Kendall tau trend
// statistic. Undefined values (0/0 windows, all-tied series) are carried as
// empty optionals, never silently as zeros.

/// Lowess decomposition: residual[i] + trend[i] == input[i].
struct ResidualSeries {
    std::vector<double> times;
    std::vector<double> residual;
    std::vector<double> trend;
    double span = 0.0;
};

/// Rolling statistic, defined from the first full window onwards.
struct IndicatorSeries {
    std::vector<double> times;
    std::vector<std::optional<double>> values;
    double window_frac = 0.0;

    std::vector<double> defined_values() const {
        std::vector<double> out;
        out.reserve(values.size());
        for (const auto& v : values)
            if (v) out.push_back(*v);
        return out;
    }
};

/// Locally weighted linear regression with tricube weights over the nearest
/// ceil(span*n) neighbors of each point; no robustness iterations.
inline std::vector<double> lowess_smooth(std::span<const double> series, double span = 0.2) {
    const std::size_t n = series.size();
    require(n >= 2, "lowess_smooth: need at least 2 points");
    require(span > 0.0 && span <= 1.0, "lowess_smooth: span must be in (0, 1]");
    const auto k = static_cast<std::size_t>(std::ceil(span * static_cast<double>(n)));
    require(span * static_cast<double>(n) >= 2.0, "lowess_smooth: span*len must be >= 2");

    std::vector<double> trend(n);
    std::size_t lo = 0;  // nearest-k window is contiguous on a uniform grid
    for (std::size_t i = 0; i < n; ++i) {
        while (lo + k < n && i > lo && (i - lo) > (lo + k - i)) ++lo;
        const std::size_t hi = lo + k;  // window [lo, hi)
        const double h = std::max(static_cast<double>(i - lo), static_cast<double>(hi - 1 - i));

        // regression in coordinates centered on i; the fit point is x = 0
        double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
        for (std::size_t j = lo; j < hi; ++j) {
            const double x = static_cast<double>(j) - static_cast<double>(i);
            const double d = std::abs(x);
            double w = 0.0;
            if (d < h) {
                const double u = 1.0 - (d / h) * (d / h) * (d / h);
                w = u * u * u;
            }
            if (w <= 0.0) continue;
            sw += w;
            swx += w * x;
            swy += w * series[j];
            swxx += w * x * x;
            swxy += w * x * series[j];
        }
        const double denom = sw * swxx - swx * swx;
        if (sw <= 0.0) {
            trend[i] = series[i];
        } else if (std::abs(denom) <= 1e-12 * std::max(1.0, std::abs(sw * swxx))) {
            trend[i] = swy / sw;  // weights collapsed onto one point
        } else {
            trend[i] = (swy * swxx - swx * swxy) / denom;
        }
    }
    return trend;
}

/// Detrend a series; times default to the index grid when omitted.
inline ResidualSeries detrend(std::span<const double> series, double span = 0.2,
                              std::span<const double> times = {}) {
    ResidualSeries out;
    out.span = span;
    out.trend = lowess_smooth(series, span);
    out.residual.resize(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) out.residual[i] = series[i] - out.trend[i];
    if (times.empty()) {
        out.times.resize(series.size());
        for (std::size_t i = 0; i < series.size(); ++i) out.times[i] = static_cast<double>(i);
    } else {
        require(times.size() == series.size(), "detrend: times/series length mismatch");
        out.times.assign(times.begin(), times.end());
    }
    return out;
}

inline std::size_t rolling_window_size(std::size_t n, double window_frac) {
    return static_cast<std::size_t>(std::ceil(window_frac * static_cast<double>(n)));
}

/// Population (1/n) variance of the trailing window at each full-window index.
inline IndicatorSeries rolling_variance(std::span<const double> series, double window_frac = 0.25,
                                        std::span<const double> times = {}) {
    const std::size_t n = series.size();
    require(window_frac > 0.0 && window_frac <= 1.0, "rolling_variance: window_frac in (0, 1]");
    const std::size_t w = rolling_window_size(n, window_frac);
    require(w >= 2 && w <= n, "rolling_variance: window must span at least 2 points");

    IndicatorSeries out;
    out.window_frac = window_frac;
    for (std::size_t i = w - 1; i < n; ++i) {
        const std::size_t lo = i + 1 - w;
        double mean = 0.0;
        for (std::size_t j = lo; j <= i; ++j) mean += series[j];
        mean /= static_cast<double>(w);
        double ss = 0.0;
        for (std::size_t j = lo; j <= i; ++j) ss += (series[j] - mean) * (series[j] - mean);
        out.values.emplace_back(ss / static_cast<double>(w));
        out.times.push_back(times.empty() ? static_cast<double>(i) : times[i]);
    }
    return out;
}

/// Rolling lag-1 autocorrelation: sum (x_t - m)(x_{t+1} - m) / sum (x_t - m)^2
/// over each trailing window. Zero-variance windows yield an empty optional.
inline IndicatorSeries rolling_lag1_ac(std::span<const double> series, double window_frac = 0.25,
                                       std::span<const double> times = {}) {
    const std::size_t n = series.size();
    require(window_frac > 0.0 && window_frac <= 1.0, "rolling_lag1_ac: window_frac in (0, 1]");
    const std::size_t w = rolling_window_size(n, window_frac);
    require(w >= 3 && w <= n, "rolling_lag1_ac: window must span at least 3 points");

    IndicatorSeries out;
    out.window_frac = window_frac;
    for (std::size_t i = w - 1; i < n; ++i) {
        const std::size_t lo = i + 1 - w;
        double mean = 0.0;
        for (std::size_t j = lo; j <= i; ++j) mean += series[j];
        mean /= static_cast<double>(w);
        double num = 0.0, den = 0.0;
        for (std::size_t j = lo; j <= i; ++j) {
            const double d = series[j] - mean;
            den += d * d;
            if (j < i) num += d * (series[j + 1] - mean);
        }
        if (den > 0.0)
            out.values.emplace_back(num / den);
        else
            out.values.emplace_back(std::nullopt);
        out.times.push_back(times.empty() ? static_cast<double>(i) : times[i]);
    }
    return out;
}

namespace detail {

// Strict inversion count (pairs i < j with v[i] > v[j]) by merge sort.
inline std::uint64_t count_inversions(std::vector<double>& v, std::vector<double>& scratch,
                                      std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::uint64_t count = count_inversions(v, scratch, lo, mid) + count_inversions(v, scratch, mid, hi);
    std::size_t a = lo, b = mid, out = lo;
    while (a < mid && b < hi) {
        if (v[b] < v[a]) {
            count += mid - a;
            scratch[out++] = v[b++];
        } else {
            scratch[out++] = v[a++];
        }
    }
    while (a < mid) scratch[out++] = v[a++];
    while (b < hi) scratch[out++] = v[b++];
    std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo),
              scratch.begin() + static_cast<std::ptrdiff_t>(hi),
              v.begin() + static_cast<std::ptrdiff_t>(lo));
    return count;
}

}  // namespace detail

/// Tie-corrected Kendall tau-b of a value sequence against its index sequence
/// (the index has no ties). Empty optional when every value is tied.
/// O(n log n): discordant pairs via merge-sort inversion counting.
inline std::optional<double> kendall_tau(std::span<const double> values) {
    const std::size_t n = values.size();
    require(n >= 2, "kendall_tau: need at least 2 values");
    for (double v : values) require(std::isfinite(v), "kendall_tau: values must be finite");

    const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;

    std::vector<double> sorted(values.begin(), values.end());
    std::vector<double> scratch(n);
    const std::uint64_t discordant = detail::count_inversions(sorted, scratch, 0, n);

    // sorted is now ascending; count tied pairs group by group
    std::uint64_t tied = 0;
    std::size_t run = 1;
    for (std::size_t i = 1; i <= n; ++i) {
        if (i < n && sorted[i] == sorted[i - 1]) {
            ++run;
        } else {
            tied += static_cast<std::uint64_t>(run) * (run - 1) / 2;
            run = 1;
        }
    }
    if (tied == n0) return std::nullopt;

    const std::uint64_t concordant = n0 - discordant - tied;
    const double num = static_cast<double>(concordant) - static_cast<double>(discordant);
    const double den = std::sqrt(static_cast<double>(n0 - tied) * static_cast<double>(n0));
    return num / den;
}

/// Expanding-prefix trend scores of a rolling indicator, mirroring the
/// prediction protocol: at t = stride, 2*stride, ... the prefix series[0, t)
/// is detrended, the indicator computed on the residuals, and the Kendall tau
/// of its defined values recorded.
enum class GenericIndicator { Variance, Lag1Ac };

struct ScoreTrace {
    std::vector<double> times;
    std::vector<std::optional<double>> scores;
};

inline ScoreTrace expanding_indicator_tau(std::span<const double> series, GenericIndicator which,
                                          double lowess_span = 0.2, double window_frac = 0.25,
                                          std::size_t stride = 10) {
    require(stride >= 1, "expanding_indicator_tau: stride must be >= 1");
    ScoreTrace trace;
    for (std::size_t t = stride; t <= series.size(); t += stride) {
        const auto prefix = series.subspan(0, t);
        std::optional<double> score;
        const std::size_t w = rolling_window_size(t, window_frac);
        const std::size_t min_w = which == GenericIndicator::Variance ? 2 : 3;
        if (lowess_span * static_cast<double>(t) >= 2.0 && w >= min_w) {
            const auto res = detrend(prefix, lowess_span);
            const auto ind = which == GenericIndicator::Variance
                                 ? rolling_variance(res.residual, window_frac)
                                 : rolling_lag1_ac(res.residual, window_frac);
            const auto defined = ind.defined_values();
            if (defined.size() >= 2) score = kendall_tau(defined);
        }
        trace.times.push_back(static_cast<double>(t));
        trace.scores.push_back(score);
    }
    return trace;
}

}  // namespace ews
