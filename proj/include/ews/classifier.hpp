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

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ews/errors.hpp"
#include "ews/evaluation.hpp"
#include "ews/indicators.hpp"
#include "ews/rng.hpp"
#include "ews/scenario.hpp"

namespace ews {

// Trainable two-class probability model over normalized residual windows.
// The window is summarized by trend statistics of its non-padded prefix and
// classified by an affine map plus softmax. Class order is fixed:
// index 0 = transcritical, index 1 = null.

inline constexpr std::size_t kFeatureStats = 6;
inline constexpr std::size_t kFeatureDim = 2 * kFeatureStats;  // values then presence flags
inline constexpr std::size_t kMinFeaturePrefix = 20;

/// Window summary. Undefined statistics carry value 0 and presence flag 0.
struct FeatureVector {
    // order: variance trend tau, lag-1 AC trend tau, terminal/initial variance
    // ratio, terminal lag-1 AC, terminal window mean, non-padded length fraction
    std::array<double, kFeatureStats> value{};
    std::array<double, kFeatureStats> present{};

    std::array<double, kFeatureDim> flat() const {
        std::array<double, kFeatureDim> out{};
        for (std::size_t i = 0; i < kFeatureStats; ++i) {
            out[i] = value[i];
            out[kFeatureStats + i] = present[i];
        }
        return out;
    }
};

inline FeatureVector featurize(const Window& w, double window_frac = 0.25) {
    const std::size_t np = w.prefix_length();
    require(np >= kMinFeaturePrefix, "featurize: non-padded prefix shorter than minimum");
    const auto prefix = w.prefix();

    FeatureVector f;
    auto set = [&](std::size_t slot, std::optional<double> v) {
        if (v && std::isfinite(*v)) {
            f.value[slot] = *v;
            f.present[slot] = 1.0;
        }
    };

    const auto rv = rolling_variance(prefix, window_frac);
    const auto ra = rolling_lag1_ac(prefix, window_frac);
    const auto rv_values = rv.defined_values();
    const auto ra_values = ra.defined_values();

    set(0, rv_values.size() >= 2 ? kendall_tau(rv_values) : std::nullopt);
    set(1, ra_values.size() >= 2 ? kendall_tau(ra_values) : std::nullopt);

    const double first_var = *rv.values.front();
    const double last_var = *rv.values.back();
    set(2, first_var > 0.0 ? std::optional<double>(last_var / first_var) : std::nullopt);
    set(3, ra_values.empty() ? std::nullopt : std::optional<double>(ra_values.back()));

    const std::size_t wlen = rolling_window_size(np, window_frac);
    double terminal_mean = 0.0;
    for (std::size_t i = np - wlen; i < np; ++i) terminal_mean += prefix[i];
    set(4, terminal_mean / static_cast<double>(wlen));
    set(5, static_cast<double>(np) / static_cast<double>(w.values.size()));
    return f;
}

// ---------------------------------------------------------------------------
// softmax core: parameters are [W row 0, W row 1, b0, b1], W rows of kFeatureDim

inline constexpr std::size_t kParamCount = 2 * kFeatureDim + 2;

inline std::array<double, 2> softmax_logits_to_probs(double z0, double z1) {
    const double m = std::max(z0, z1);
    const double e0 = std::exp(z0 - m);
    const double e1 = std::exp(z1 - m);
    const double sum = e0 + e1;
    return {e0 / sum, e1 / sum};
}

inline std::array<double, 2> softmax_forward(std::span<const double> params,
                                             std::span<const double> features) {
    require(params.size() == kParamCount, "softmax_forward: bad parameter count");
    require(features.size() == kFeatureDim, "softmax_forward: bad feature count");
    double z0 = params[2 * kFeatureDim];
    double z1 = params[2 * kFeatureDim + 1];
    for (std::size_t i = 0; i < kFeatureDim; ++i) {
        z0 += params[i] * features[i];
        z1 += params[kFeatureDim + i] * features[i];
    }
    return softmax_logits_to_probs(z0, z1);
}

/// Mean cross-entropy over rows of a flattened feature matrix.
inline double softmax_loss(std::span<const double> params, std::span<const double> features,
                           std::span<const int> labels) {
    const std::size_t n = labels.size();
    require(n >= 1 && features.size() == n * kFeatureDim, "softmax_loss: shape mismatch");
    double loss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        const auto p = softmax_forward(params, features.subspan(r * kFeatureDim, kFeatureDim));
        const double q = std::max(p[static_cast<std::size_t>(labels[r])], 1e-300);
        loss -= std::log(q);
    }
    return loss / static_cast<double>(n);
}

/// Analytic gradient of softmax_loss with respect to every parameter.
inline std::vector<double> softmax_loss_grad(std::span<const double> params,
                                             std::span<const double> features,
                                             std::span<const int> labels) {
    const std::size_t n = labels.size();
    require(n >= 1 && features.size() == n * kFeatureDim, "softmax_loss_grad: shape mismatch");
    std::vector<double> grad(kParamCount, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        const auto x = features.subspan(r * kFeatureDim, kFeatureDim);
        const auto p = softmax_forward(params, x);
        const double d0 = p[0] - (labels[r] == 0 ? 1.0 : 0.0);
        const double d1 = p[1] - (labels[r] == 1 ? 1.0 : 0.0);
        for (std::size_t i = 0; i < kFeatureDim; ++i) {
            grad[i] += d0 * x[i];
            grad[kFeatureDim + i] += d1 * x[i];
        }
        grad[2 * kFeatureDim] += d0;
        grad[2 * kFeatureDim + 1] += d1;
    }
    for (double& g : grad) g /= static_cast<double>(n);
    return grad;
}

// ---------------------------------------------------------------------------

struct TrainingManifest {
    std::uint64_t dataset_hash = 0;
    std::uint64_t seed = 0;
    int epochs = 0;
    double learning_rate = 0.0;
    std::size_t n_train = 0, n_test = 0, n_validation = 0;
    double validation_auc = 0.0;
    double validation_accuracy = 0.0;
};

struct Classifier {
    std::string architecture = "softmax-features-v1";
    int window_length = 0;
    std::array<std::string, 2> class_order{"transcritical", "null"};
    std::vector<double> params;     // kParamCount entries
    std::vector<double> feat_mean;  // kFeatureDim standardization constants
    std::vector<double> feat_std;
    TrainingManifest manifest;
};

inline std::array<double, kFeatureDim> standardized_features(const Classifier& c,
                                                             const Window& w) {
    auto x = featurize(w).flat();
    for (std::size_t i = 0; i < kFeatureDim; ++i) x[i] = (x[i] - c.feat_mean[i]) / c.feat_std[i];
    return x;
}

/// Two-class probability for a normalized window; entries sum to one.
inline std::array<double, 2> predict(const Classifier& c, const Window& w) {
    require(static_cast<int>(w.values.size()) == c.window_length,
            "predict: window length does not match classifier");
    const auto x = standardized_features(c, w);
    return softmax_forward(c.params, x);
}

struct TrainOptions {
    int epochs = 1500;
    double learning_rate = 0.0005;
    std::uint64_t seed = 0;
    std::string architecture = "softmax-features-v1";
    // train / test / validation fractions; remainders spill into validation
    double train_frac = 0.95;
    double test_frac = 0.01;
};

/// Fit by full-batch gradient descent on the cross-entropy of standardized
/// features. Deterministic for a fixed dataset and seed.
inline Classifier train(const std::vector<Window>& dataset, const TrainOptions& opts,
                        std::uint64_t dataset_hash = 0) {
    require(!dataset.empty(), "train: empty dataset");
    require(opts.epochs >= 1 && opts.learning_rate > 0.0, "train: invalid hyperparameters");
    require(opts.architecture == "softmax-features-v1", "train: unknown architecture");
    bool has_pos = false, has_neg = false;
    for (const auto& w : dataset) {
        (w.label == ScenarioClass::Transcritical ? has_pos : has_neg) = true;
        require(w.values.size() == dataset.front().values.size(),
                "train: inconsistent window lengths");
    }
    require(has_pos && has_neg, "train: dataset must contain both classes");

    const std::size_t n = dataset.size();

    // seeded Fisher-Yates shuffle, then contiguous train / test / validation
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    RngStream stream(substream_seed(opts.seed, 0x51E1Full));
    for (std::size_t i = n - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(stream.next_u64() % (i + 1));
        std::swap(order[i], order[j]);
    }
    const auto n_train = std::max<std::size_t>(1, static_cast<std::size_t>(
        std::floor(opts.train_frac * static_cast<double>(n))));
    const auto n_test = static_cast<std::size_t>(
        std::floor(opts.test_frac * static_cast<double>(n)));
    require(n_train + n_test <= n, "train: split fractions exceed dataset");
    const std::size_t n_val = n - n_train - n_test;

    std::vector<double> X(n * kFeatureDim);
    std::vector<int> y(n);
    for (std::size_t r = 0; r < n; ++r) {
        const auto x = featurize(dataset[order[r]]).flat();
        std::copy(x.begin(), x.end(), X.begin() + static_cast<std::ptrdiff_t>(r * kFeatureDim));
        y[r] = dataset[order[r]].label == ScenarioClass::Transcritical ? 0 : 1;
    }

    // standardization constants from the training split only
    std::vector<double> mean(kFeatureDim, 0.0), stddev(kFeatureDim, 0.0);
    for (std::size_t r = 0; r < n_train; ++r)
        for (std::size_t i = 0; i < kFeatureDim; ++i) mean[i] += X[r * kFeatureDim + i];
    for (double& m : mean) m /= static_cast<double>(n_train);
    for (std::size_t r = 0; r < n_train; ++r)
        for (std::size_t i = 0; i < kFeatureDim; ++i) {
            const double d = X[r * kFeatureDim + i] - mean[i];
            stddev[i] += d * d;
        }
    for (double& s : stddev) {
        s = std::sqrt(s / static_cast<double>(n_train));
        if (s < 1e-12) s = 1.0;
    }
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t i = 0; i < kFeatureDim; ++i)
            X[r * kFeatureDim + i] = (X[r * kFeatureDim + i] - mean[i]) / stddev[i];

    std::vector<double> params(kParamCount, 0.0);
    const std::span<const double> train_X(X.data(), n_train * kFeatureDim);
    const std::span<const int> train_y(y.data(), n_train);
    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        const auto grad = softmax_loss_grad(params, train_X, train_y);
        for (std::size_t i = 0; i < kParamCount; ++i) params[i] -= opts.learning_rate * grad[i];
    }

    Classifier c;
    c.architecture = opts.architecture;
    c.window_length = static_cast<int>(dataset.front().values.size());
    c.params = std::move(params);
    c.feat_mean = std::move(mean);
    c.feat_std = std::move(stddev);
    c.manifest.dataset_hash = dataset_hash;
    c.manifest.seed = opts.seed;
    c.manifest.epochs = opts.epochs;
    c.manifest.learning_rate = opts.learning_rate;
    c.manifest.n_train = n_train;
    c.manifest.n_test = n_test;
    c.manifest.n_validation = n_val;

    if (n_val >= 2) {
        std::vector<double> scores;
        std::vector<int> vlabels;
        bool both = false, seen_pos = false, seen_neg = false;
        std::size_t correct = 0;
        for (std::size_t r = n_train + n_test; r < n; ++r) {
            const auto p =
                softmax_forward(c.params, std::span<const double>(X).subspan(r * kFeatureDim, kFeatureDim));
            scores.push_back(p[0]);
            vlabels.push_back(y[r] == 0 ? 1 : 0);  // 1 = transcritical for roc_auc
            (y[r] == 0 ? seen_pos : seen_neg) = true;
            if ((p[0] >= p[1]) == (y[r] == 0)) ++correct;
        }
        both = seen_pos && seen_neg;
        c.manifest.validation_accuracy =
            static_cast<double>(correct) / static_cast<double>(n_val);
        c.manifest.validation_auc = both ? roc_auc(scores, vlabels).auc : 0.0;
    }
    return c;
}

inline std::array<double, 2> ensemble_predict(std::span<const Classifier> models,
                                              const Window& w) {
    require(!models.empty(), "ensemble_predict: empty ensemble");
    for (const auto& m : models)
        require(m.class_order == models.front().class_order,
                "ensemble_predict: inconsistent class order");
    std::array<double, 2> mean{0.0, 0.0};
    for (const auto& m : models) {
        const auto p = predict(m, w);
        mean[0] += p[0];
        mean[1] += p[1];
    }
    mean[0] /= static_cast<double>(models.size());
    mean[1] /= static_cast<double>(models.size());
    return mean;
}

/// Probabilities along an expanding window; times are multiples of the stride.
struct PredictionTrace {
    std::vector<double> times;
    std::vector<std::array<double, 2>> probs;  // (transcritical, null)
    std::vector<ScenarioClass> favored;        // argmax, ties favor null

    std::vector<double> transcritical_scores() const {
        std::vector<double> out(probs.size());
        for (std::size_t i = 0; i < probs.size(); ++i) out[i] = probs[i][0];
        return out;
    }
};

/// Expanding-window inference mirroring the training pipeline: detrend the
/// prefix, right-pad or truncate the residuals into a length-L window,
/// normalize, predict. Prefixes too short to featurize score (0.5, 0.5).
inline PredictionTrace expanding_predictions(std::span<const Classifier> models,
                                             std::span<const double> series, int window_length,
                                             double lowess_span = 0.2, std::size_t stride = 10) {
    require(!models.empty(), "expanding_predictions: empty ensemble");
    require(series.size() >= stride, "expanding_predictions: series shorter than one stride");
    for (const auto& m : models)
        require(m.window_length == window_length,
                "expanding_predictions: classifier/window length mismatch");

    PredictionTrace trace;
    for (std::size_t t = stride; t <= series.size(); t += stride) {
        std::array<double, 2> p{0.5, 0.5};
        if (t >= kMinFeaturePrefix && lowess_span * static_cast<double>(t) >= 2.0) {
            const auto res = detrend(series.subspan(0, t), lowess_span);
            Window w = extract_window(res.residual, ScenarioClass::Null, window_length);
            // all-zero windows are already canonical; anything else is normalized
            if (window_has_signal(w)) w = normalize_window(std::move(w));
            p = ensemble_predict(models, w);
        }
        trace.times.push_back(static_cast<double>(t));
        trace.probs.push_back(p);
        trace.favored.push_back(p[0] > p[1] ? ScenarioClass::Transcritical : ScenarioClass::Null);
    }
    return trace;
}

}  // namespace ews
