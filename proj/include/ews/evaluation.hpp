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
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "ews/errors.hpp"
#include "ews/scenario.hpp"

namespace ews {

/// ROC curve from (0,0) to (1,1), nondecreasing in both coordinates.
/// auc is the trapezoidal area, equivalent to pair counting with ties at 1/2.
struct RocCurve {
    std::vector<double> thresholds;  // thresholds[i] produced points[i]; [0] is +inf
    std::vector<std::pair<double, double>> points;  // (fpr, tpr)
    double auc = 0.0;
    std::int64_t n_pos = 0;
    std::int64_t n_neg = 0;
};

/// Sweep every distinct score as a "predict positive when score >= threshold"
/// rule. Tied scores enter together.
inline RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels) {
    require(scores.size() == labels.size(), "roc_auc: scores/labels length mismatch");
    require(!scores.empty(), "roc_auc: empty input");
    for (double s : scores) require(std::isfinite(s), "roc_auc: scores must be finite");

    RocCurve roc;
    for (int l : labels) {
        require(l == 0 || l == 1, "roc_auc: labels must be 0 or 1");
        (l == 1 ? roc.n_pos : roc.n_neg)++;
    }
    require(roc.n_pos > 0 && roc.n_neg > 0, "roc_auc: both classes must be present");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    roc.thresholds.push_back(std::numeric_limits<double>::infinity());
    roc.points.emplace_back(0.0, 0.0);

    const double np = static_cast<double>(roc.n_pos);
    const double nn = static_cast<double>(roc.n_neg);
    std::int64_t tp = 0, fp = 0;
    double auc = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double threshold = scores[order[i]];
        while (i < order.size() && scores[order[i]] == threshold) {
            (labels[order[i]] == 1 ? tp : fp)++;
            ++i;
        }
        const double fpr = static_cast<double>(fp) / nn;
        const double tpr = static_cast<double>(tp) / np;
        auc += (fpr - roc.points.back().first) * (tpr + roc.points.back().second) / 2.0;
        roc.thresholds.push_back(threshold);
        roc.points.emplace_back(fpr, tpr);
    }
    roc.auc = auc;
    return roc;
}

/// The final min(k, n) scores in chronological order.
inline std::vector<double> last_k_scores(std::span<const double> scores, std::size_t k = 5) {
    require(!scores.empty(), "last_k_scores: empty trace");
    const std::size_t take = std::min(k, scores.size());
    return {scores.end() - static_cast<std::ptrdiff_t>(take), scores.end()};
}

/// Counts of favored class over the pooled last-k predictions, keyed by the
/// true class of each trace.
struct FrequencyTable {
    // counts[true class][favored class], indexed by static_cast<int>(ScenarioClass)
    std::array<std::array<std::int64_t, 2>, 2> counts{};

    std::int64_t total() const {
        return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
    }
    std::int64_t row_total(ScenarioClass true_class) const {
        const auto& row = counts[static_cast<std::size_t>(true_class)];
        return row[0] + row[1];
    }
};

inline void accumulate_favored(FrequencyTable& table, ScenarioClass true_class,
                               std::span<const ScenarioClass> favored, std::size_t k = 5) {
    require(!favored.empty(), "accumulate_favored: empty trace");
    const std::size_t take = std::min(k, favored.size());
    for (std::size_t i = favored.size() - take; i < favored.size(); ++i)
        table.counts[static_cast<std::size_t>(true_class)][static_cast<std::size_t>(favored[i])]++;
}

/// Convenience over any range of traces exposing a `favored` member.
template <class TraceRange>
FrequencyTable favored_class_frequencies(const TraceRange& traces,
                                         std::span<const ScenarioClass> true_labels,
                                         std::size_t k = 5) {
    require(traces.size() == true_labels.size(),
            "favored_class_frequencies: traces/labels length mismatch");
    require(!traces.empty(), "favored_class_frequencies: empty group");
    FrequencyTable table;
    for (std::size_t i = 0; i < traces.size(); ++i)
        accumulate_favored(table, true_labels[i], traces[i].favored, k);
    return table;
}

}  // namespace ews
