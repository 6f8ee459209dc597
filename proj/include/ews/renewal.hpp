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

#include <boost/math/special_functions/gamma.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ews/errors.hpp"
#include "ews/io.hpp"
#include "ews/scenario.hpp"

namespace ews {

// Effective reproduction number from daily incidence by the renewal-equation
// posterior mean with a gamma prior:
//
//   R_t = (a + sum_{s in window} I_s) / (1/b + sum_{s in window} Lambda_s)
//   Lambda_s = sum_k w_k I_{s-k}
//
// over a trailing window ending at day t, with the serial-interval
// distribution w discretized from a gamma fit.

/// Contiguous daily case counts.
struct CaseSeries {
    std::chrono::sys_days start{};
    std::vector<double> counts;

    std::size_t size() const { return counts.size(); }
    std::chrono::sys_days date(std::size_t i) const {
        return start + std::chrono::days(static_cast<long>(i));
    }
};

inline std::string format_date(std::chrono::sys_days day) {
    const std::chrono::year_month_day ymd{day};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

inline std::chrono::sys_days parse_date(const std::string& text, const std::string& context) {
    int y = 0;
    unsigned m = 0, d = 0;
    char extra = 0;
    if (std::sscanf(text.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &extra) != 3)
        throw DataError(context + ": bad date '" + text + "', expected YYYY-MM-DD");
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                          std::chrono::day{d}};
    if (!ymd.ok()) throw DataError(context + ": invalid calendar date '" + text + "'");
    return std::chrono::sys_days{ymd};
}

/// Load `date,cases` CSV. Dates must be consecutive calendar days; counts
/// nonnegative integers.
inline CaseSeries load_case_series(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    const auto ctx = path.string();
    const std::size_t date_col = table.column("date", ctx);
    const std::size_t case_col = table.column("cases", ctx);
    if (table.rows.empty()) throw DataError(ctx + ": no data rows");

    CaseSeries series;
    series.start = parse_date(table.rows.front()[date_col], ctx);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto day = parse_date(table.rows[r][date_col], ctx);
        if (day != series.start + std::chrono::days(static_cast<long>(r)))
            throw DataError(ctx + ": dates must be consecutive days (gap or disorder at '" +
                            table.rows[r][date_col] + "')");
        const double count = parse_double(table.rows[r][case_col], ctx);
        if (!(count >= 0.0) || count != std::floor(count))
            throw DataError(ctx + ": case counts must be nonnegative integers (row " +
                            std::to_string(r + 2) + ")");
        series.counts.push_back(count);
    }
    return series;
}

/// Serial-interval distribution over integer lags 1..K.
struct SerialInterval {
    double mean = 0.0;
    double sd = 0.0;
    std::vector<double> weights;  // weights[k-1] is the mass at lag k
};

/// Discretize a gamma serial interval with the given moments over daily bins
/// [s-1, s], s = 1..K, renormalized. K is chosen automatically so that the
/// truncated tail mass is below 1e-4 (unless max_lag forces a value).
inline SerialInterval discretize_serial_interval(double mean = 6.3, double sd = 4.2,
                                                 int max_lag = 0) {
    require(mean > 1.0 && sd > 0.0, "discretize_serial_interval: need mean > 1 and sd > 0");
    const double shape = (mean / sd) * (mean / sd);
    const double scale = sd * sd / mean;

    SerialInterval si;
    si.mean = mean;
    si.sd = sd;

    auto cdf = [&](double x) { return boost::math::gamma_p(shape, x / scale); };

    int K = max_lag;
    if (K <= 0) {
        K = 1;
        while (1.0 - cdf(static_cast<double>(K)) >= 1e-4 && K < 10000) ++K;
    }
    double total = 0.0;
    for (int s = 1; s <= K; ++s) {
        const double w = cdf(static_cast<double>(s)) - cdf(static_cast<double>(s - 1));
        si.weights.push_back(w);
        total += w;
    }
    require(total > 0.0, "discretize_serial_interval: empty distribution");
    for (double& w : si.weights) w /= total;
    return si;
}

/// Posterior-mean R_e per day over trailing windows. Days before the first
/// full window, and windows with zero total infectivity, are empty optionals.
inline std::vector<std::optional<double>> estimate_re(const CaseSeries& cases,
                                                      const SerialInterval& si, int window = 14,
                                                      double prior_mean = 5.0,
                                                      double prior_sd = 5.0) {
    require(window >= 1, "estimate_re: window must be >= 1");
    require(prior_mean > 0.0 && prior_sd > 0.0, "estimate_re: prior moments must be positive");
    const std::size_t n = cases.size();
    const std::size_t K = si.weights.size();
    require(n > static_cast<std::size_t>(window) + K,
            "estimate_re: series shorter than window plus serial-interval support");

    const double a = (prior_mean / prior_sd) * (prior_mean / prior_sd);
    const double inv_b = prior_mean / (prior_sd * prior_sd);

    // infectivity Lambda_s for s >= 1 (earlier lags truncated at the origin)
    std::vector<double> infectivity(n, 0.0);
    for (std::size_t s = 1; s < n; ++s) {
        double sum = 0.0;
        const std::size_t k_max = std::min(K, s);
        for (std::size_t k = 1; k <= k_max; ++k) sum += si.weights[k - 1] * cases.counts[s - k];
        infectivity[s] = sum;
    }

    std::vector<std::optional<double>> re(n);
    const auto w = static_cast<std::size_t>(window);
    for (std::size_t t = w; t < n; ++t) {
        double sum_cases = 0.0, sum_infectivity = 0.0;
        for (std::size_t s = t + 1 - w; s <= t; ++s) {
            sum_cases += cases.counts[s];
            sum_infectivity += infectivity[s];
        }
        if (sum_infectivity > 0.0) re[t] = (a + sum_cases) / (inv_b + sum_infectivity);
    }
    return re;
}

/// Labeled slice [begin, end) of a case series.
struct SubSeries {
    ScenarioClass label = ScenarioClass::Null;
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t length() const { return end - begin; }
};

/// Maximal sub-unity runs of R_e extended through the first day R_e >= 1.
/// Runs of at least min_length days become transcritical slices, each with a
/// null twin truncated by null_trim days from the end. Undefined R_e days
/// break runs; runs that never cross are dropped.
inline std::vector<SubSeries> slice_subseries(std::span<const std::optional<double>> re,
                                              std::size_t min_length = 56,
                                              std::size_t null_trim = 28) {
    require(min_length > null_trim, "slice_subseries: min_length must exceed null_trim");
    std::vector<SubSeries> out;
    std::optional<std::size_t> run_start;
    for (std::size_t i = 0; i < re.size(); ++i) {
        if (!re[i]) {
            run_start.reset();
            continue;
        }
        if (*re[i] < 1.0) {
            if (!run_start) run_start = i;
            continue;
        }
        // first day at or above one closes any open run
        if (run_start) {
            const std::size_t begin = *run_start;
            const std::size_t end = i + 1;
            if (end - begin >= min_length) {
                out.push_back(SubSeries{ScenarioClass::Transcritical, begin, end});
                out.push_back(SubSeries{ScenarioClass::Null, begin, end - null_trim});
            }
            run_start.reset();
        }
    }
    return out;
}

inline std::string subseries_filename(const CaseSeries& cases, const SubSeries& sub) {
    return std::string(to_string(sub.label)) + "_" + format_date(cases.date(sub.begin)) + "_" +
           format_date(cases.date(sub.end - 1)) + ".csv";
}

}  // namespace ews
