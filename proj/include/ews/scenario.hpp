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

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "ews/errors.hpp"
#include "ews/indicators.hpp"
#include "ews/io.hpp"
#include "ews/models.hpp"
#include "ews/rng.hpp"
#include "ews/sde.hpp"

namespace ews {

// Labeled scenario generation. A transcritical scenario ramps the transmission
// rate past its critical value within the horizon; a null scenario stays below
// it. Sampling scheme (all triangular, mode at half the upper limit):
//
//   beta0 ~ Tri(0, beta_c/4, beta_c/2)
//   null:          beta1 ~ Tri(0,  hi/2, hi),  hi = (beta_c - beta0)/horizon
//   transcritical: beta1 ~ Tri(lo, hi/2, hi),  lo = (beta_c - beta0)/horizon,
//                                              hi = (2 beta_c - beta0)/horizon
//   sigma ~ Tri(0, 0.5*scale, 1.0*scale), one draw per stochastic equation
//
// The transcritical transition time is the deterministic crossing
// (beta_c - beta0)/beta1, always in (0, horizon] by construction.

enum class ScenarioClass { Transcritical, Null };

inline const char* to_string(ScenarioClass c) {
    return c == ScenarioClass::Transcritical ? "transcritical" : "null";
}

enum class ScenarioModel { SirWhite, SirEnvironmental, SirDemographic, SeirWhite };

inline const char* to_string(ScenarioModel m) {
    switch (m) {
        case ScenarioModel::SirWhite: return "sir-white";
        case ScenarioModel::SirEnvironmental: return "sir-env";
        case ScenarioModel::SirDemographic: return "sir-demographic";
        case ScenarioModel::SeirWhite: return "seir-white";
    }
    return "?";
}

inline constexpr ScenarioModel kAllScenarioModels[] = {
    ScenarioModel::SirWhite,
    ScenarioModel::SirEnvironmental,
    ScenarioModel::SirDemographic,
    ScenarioModel::SeirWhite,
};

inline std::optional<ScenarioModel> scenario_model_from_string(const std::string& s) {
    for (auto m : kAllScenarioModels)
        if (s == to_string(m)) return m;
    return std::nullopt;
}

inline NoiseFamily noise_family_of(ScenarioModel m) {
    switch (m) {
        case ScenarioModel::SirWhite:
        case ScenarioModel::SeirWhite: return NoiseFamily::AdditiveWhite;
        case ScenarioModel::SirEnvironmental: return NoiseFamily::MultiplicativeEnvironmental;
        case ScenarioModel::SirDemographic: return NoiseFamily::Demographic;
    }
    return NoiseFamily::None;
}

inline std::size_t sigma_count_of(ScenarioModel m) {
    switch (m) {
        case ScenarioModel::SirWhite:
        case ScenarioModel::SirEnvironmental: return 2;
        case ScenarioModel::SeirWhite: return 4;
        case ScenarioModel::SirDemographic: return 0;
    }
    return 0;
}

struct Scenario {
    ScenarioClass cls = ScenarioClass::Null;
    ScenarioModel model = ScenarioModel::SirWhite;
    std::variant<SirParams, SeirParams> params;
    double beta0 = 0.0;
    double beta1 = 0.0;
    std::vector<double> sigma;
    std::uint64_t seed = 0;
    std::optional<double> transition_time;  // transcritical only
};

struct DatasetConfig {
    std::map<ScenarioModel, int> counts;  // scenarios per class for each model kind
    int window_length = 500;
    std::uint64_t master_seed = 1;
    double dt = 0.01;
    double horizon = 1500.0;
    double burn_in = 100.0;
    SirParams sir_params{100.0, 1.0, 1.0};
    SeirParams seir_params{100.0, 0.75, 2.0, 1.0};
    std::vector<double> sir_init{500.0, 7.0};
    std::vector<double> seir_init{500.0, 1.0, 2.0, 2.0};
    double lowess_span = 0.2;
    double sigma_scale = 1.0;  // multiplier on the noise-intensity triangular limits
    int workers = 1;
};

inline void validate(const DatasetConfig& cfg) {
    for (const auto& [model, count] : cfg.counts)
        require(count >= 0, "DatasetConfig: counts must be nonnegative");
    require(cfg.window_length == 100 || cfg.window_length == 500,
            "DatasetConfig: window length must be 100 or 500");
    require(cfg.dt > 0.0, "DatasetConfig: dt must be positive");
    const double steps_per_unit = 1.0 / cfg.dt;
    require(std::abs(steps_per_unit - std::round(steps_per_unit)) < 1e-9,
            "DatasetConfig: 1/dt must be an integer so unit-time recording is exact");
    require(cfg.horizon > 0.0 && cfg.burn_in >= 0.0, "DatasetConfig: invalid time spans");
    require(cfg.sigma_scale > 0.0, "DatasetConfig: sigma_scale must be positive");
    require(cfg.workers >= 1, "DatasetConfig: workers must be >= 1");
    validate(cfg.sir_params);
    validate(cfg.seir_params);
}

inline double critical_beta_of(const Scenario& s) {
    return std::visit([](const auto& p) { return critical_beta(p); }, s.params);
}

/// Draw one labeled scenario. Consumes, in order: beta0, beta1, then one
/// sigma per stochastic equation, then the simulation seed.
inline Scenario sample_scenario(RngStream& stream, ScenarioClass cls, ScenarioModel model,
                                const DatasetConfig& cfg) {
    Scenario s;
    s.cls = cls;
    s.model = model;
    if (model == ScenarioModel::SeirWhite)
        s.params = cfg.seir_params;
    else
        s.params = cfg.sir_params;

    const double beta_c = critical_beta_of(s);
    const double horizon = cfg.horizon;

    s.beta0 = sample_triangular(stream, 0.0, beta_c / 4.0, beta_c / 2.0);
    if (cls == ScenarioClass::Null) {
        const double hi = (beta_c - s.beta0) / horizon;
        s.beta1 = sample_triangular(stream, 0.0, hi / 2.0, hi);
    } else {
        const double lo = (beta_c - s.beta0) / horizon;
        const double hi = (2.0 * beta_c - s.beta0) / horizon;
        s.beta1 = sample_triangular(stream, lo, hi / 2.0, hi);
        double crossing = (beta_c - s.beta0) / s.beta1;
        require(crossing <= horizon * (1.0 + 1e-12) && crossing > 0.0,
                "sample_scenario: transition time outside (0, horizon]");
        s.transition_time = std::min(crossing, horizon);
    }

    const std::size_t n_sigma = sigma_count_of(model);
    for (std::size_t i = 0; i < n_sigma; ++i)
        s.sigma.push_back(
            sample_triangular(stream, 0.0, 0.5 * cfg.sigma_scale, 1.0 * cfg.sigma_scale));
    s.seed = stream.next_u64();
    return s;
}

/// Simulate a scenario: burn-in from t = -burn_in (discarded), the beta ramp
/// from t = 0, recording at unit-time spacing t = 1..T where T is the floored
/// transition time (transcritical) or the horizon (null).
inline Trajectory run_scenario(const Scenario& s, const DatasetConfig& cfg) {
    const double t_end = s.transition_time ? std::floor(*s.transition_time) : cfg.horizon;
    const auto stride = static_cast<std::size_t>(std::llround(1.0 / cfg.dt));
    const NoiseSpec noise{noise_family_of(s.model), s.sigma};
    const BetaSchedule beta{s.beta0, s.beta1};
    SimOptions opts;
    opts.start_time = -cfg.burn_in;
    opts.record_stride = stride;

    Trajectory full;
    if (std::holds_alternative<SirParams>(s.params)) {
        full = simulate(std::get<SirParams>(s.params), noise, beta, State{cfg.sir_init, 0.0},
                        t_end + cfg.burn_in, cfg.dt, s.seed, opts);
    } else {
        full = simulate(std::get<SeirParams>(s.params), noise, beta, State{cfg.seir_init, 0.0},
                        t_end + cfg.burn_in, cfg.dt, s.seed, opts);
    }

    // drop burn-in and t = 0; keep t = 1..T
    std::size_t first = 0;
    while (first < full.size() && full.times[first] < 0.5) ++first;
    Trajectory out;
    out.model = full.model;
    out.noise = full.noise;
    out.dt = full.dt;
    out.sim_dt = full.sim_dt;
    out.seed = full.seed;
    out.dim = full.dim;
    out.times.assign(full.times.begin() + static_cast<std::ptrdiff_t>(first), full.times.end());
    out.values.assign(full.values.begin() + static_cast<std::ptrdiff_t>(first * full.dim),
                      full.values.end());
    return out;
}

/// Fixed-length labeled residual window, zero-padded past the transition.
struct Window {
    std::vector<double> values;
    ScenarioClass label = ScenarioClass::Null;
    int pad_count = 0;
    std::int64_t scenario_id = -1;

    std::size_t prefix_length() const { return values.size() - static_cast<std::size_t>(pad_count); }
    std::span<const double> prefix() const {
        return std::span<const double>(values).subspan(0, prefix_length());
    }
};

/// Last min(len, L) residual points. Shorter series sit at the start of the
/// window with a zero-padded tail, so the transition point is always included.
inline Window extract_window(std::span<const double> residuals, ScenarioClass label, int length,
                             std::int64_t scenario_id = -1) {
    require(!residuals.empty(), "extract_window: empty series");
    require(length >= 1, "extract_window: window length must be positive");
    const auto len = residuals.size();
    const auto L = static_cast<std::size_t>(length);
    Window w;
    w.label = label;
    w.scenario_id = scenario_id;
    w.values.assign(L, 0.0);
    if (len >= L) {
        std::copy(residuals.end() - static_cast<std::ptrdiff_t>(L), residuals.end(),
                  w.values.begin());
        w.pad_count = 0;
    } else {
        std::copy(residuals.begin(), residuals.end(), w.values.begin());
        w.pad_count = static_cast<int>(L - len);
    }
    return w;
}

/// Divide the non-padded prefix by its mean absolute value; padding stays zero.
/// Idempotent: after normalization the prefix mean absolute value is one.
inline Window normalize_window(Window w) {
    const std::size_t np = w.prefix_length();
    require(np >= 1, "normalize_window: window has no non-padded entries");
    double mean_abs = 0.0;
    for (std::size_t i = 0; i < np; ++i) mean_abs += std::abs(w.values[i]);
    mean_abs /= static_cast<double>(np);
    if (mean_abs <= 0.0)
        throw DegenerateWindowError("normalize_window: all non-padded residuals are zero");
    for (std::size_t i = 0; i < np; ++i) w.values[i] /= mean_abs;
    return w;
}

/// True when the non-padded prefix carries any nonzero residual.
inline bool window_has_signal(const Window& w) {
    for (double v : w.prefix())
        if (v != 0.0) return true;
    return false;
}

/// Full per-scenario pipeline: simulate, detrend the whole recorded series,
/// slice the trailing residual window, normalize. Extinct runs (the zero state
/// is absorbing under environmental and demographic noise) produce all-zero
/// residual windows; those are already scale-free and are stored as-is.
inline Window scenario_window(const Scenario& s, const DatasetConfig& cfg,
                              std::int64_t scenario_id = -1) {
    const Trajectory traj = run_scenario(s, cfg);
    const auto series = traj.component(infected_index(traj.model));
    const auto res = detrend(series, cfg.lowess_span);
    Window w = extract_window(res.residual, s.cls, cfg.window_length, scenario_id);
    if (window_has_signal(w)) w = normalize_window(std::move(w));
    return w;
}

struct DatasetRow {
    std::int64_t scenario_id;
    ScenarioModel model;
    Window window;
};

namespace detail {

struct DatasetJob {
    std::int64_t index;
    ScenarioModel model;
    ScenarioClass cls;
};

inline std::vector<DatasetJob> dataset_jobs(const DatasetConfig& cfg) {
    std::vector<DatasetJob> jobs;
    std::int64_t index = 0;
    for (auto model : kAllScenarioModels) {
        const auto it = cfg.counts.find(model);
        if (it == cfg.counts.end()) continue;
        for (auto cls : {ScenarioClass::Transcritical, ScenarioClass::Null})
            for (int rep = 0; rep < it->second; ++rep)
                jobs.push_back(DatasetJob{index++, model, cls});
    }
    return jobs;
}

}  // namespace detail

/// Generate every configured scenario window. Scenario i draws from the
/// substream (master_seed, i), so the result is independent of worker count.
inline std::vector<DatasetRow> generate_dataset_rows(const DatasetConfig& cfg) {
    validate(cfg);
    const auto jobs = detail::dataset_jobs(cfg);
    std::vector<DatasetRow> rows(jobs.size());

    const auto worker_count = static_cast<std::size_t>(
        std::min<std::int64_t>(cfg.workers, std::max<std::int64_t>(1, static_cast<std::int64_t>(jobs.size()))));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(worker_count);

    auto work = [&](std::size_t worker_id) {
        try {
            for (std::size_t j = next.fetch_add(1); j < jobs.size(); j = next.fetch_add(1)) {
                const auto& job = jobs[j];
                RngStream stream = substream(cfg.master_seed, static_cast<std::uint64_t>(job.index));
                const Scenario s = sample_scenario(stream, job.cls, job.model, cfg);
                rows[j] = DatasetRow{job.index, job.model, scenario_window(s, cfg, job.index)};
            }
        } catch (...) {
            errors[worker_id] = std::current_exception();
        }
    };

    if (worker_count == 1) {
        work(0);
    } else {
        pool.reserve(worker_count);
        for (std::size_t w = 0; w < worker_count; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return rows;
}

inline std::string dataset_csv_header(int window_length) {
    std::string header = "scenario_id,model,class,pad_count";
    for (int i = 0; i < window_length; ++i) header += ",v" + std::to_string(i);
    return header;
}

inline std::string dataset_csv_row(const DatasetRow& row) {
    std::string line = std::to_string(row.scenario_id);
    line += ",";
    line += to_string(row.model);
    line += ",";
    line += to_string(row.window.label);
    line += "," + std::to_string(row.window.pad_count);
    for (double v : row.window.values) {
        line += ",";
        line += format_double(v);
    }
    return line;
}

/// Write the dataset CSV. Byte-identical for a fixed config and master seed.
inline std::size_t write_dataset_csv(const DatasetConfig& cfg,
                                     const std::filesystem::path& csv_path) {
    const auto rows = generate_dataset_rows(cfg);
    std::string out = dataset_csv_header(cfg.window_length) + "\n";
    for (const auto& row : rows) out += dataset_csv_row(row) + "\n";
    write_text_file(csv_path, out);
    return rows.size();
}

struct LabeledDataset {
    int window_length = 0;
    std::vector<Window> windows;
    std::vector<ScenarioModel> models;
};

inline LabeledDataset load_dataset(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    const auto ctx = path.string();
    const std::size_t id_col = table.column("scenario_id", ctx);
    const std::size_t model_col = table.column("model", ctx);
    const std::size_t class_col = table.column("class", ctx);
    const std::size_t pad_col = table.column("pad_count", ctx);
    const std::size_t v0 = table.column("v0", ctx);
    if (table.header.size() <= v0) throw DataError(ctx + ": no value columns");

    LabeledDataset ds;
    ds.window_length = static_cast<int>(table.header.size() - v0);
    for (const auto& row : table.rows) {
        Window w;
        w.scenario_id = static_cast<std::int64_t>(parse_double(row[id_col], ctx));
        if (row[class_col] == "transcritical")
            w.label = ScenarioClass::Transcritical;
        else if (row[class_col] == "null")
            w.label = ScenarioClass::Null;
        else
            throw DataError(ctx + ": unknown class '" + row[class_col] + "'");
        w.pad_count = static_cast<int>(parse_double(row[pad_col], ctx));
        if (w.pad_count < 0 || w.pad_count >= ds.window_length)
            throw DataError(ctx + ": pad_count out of range");
        w.values.reserve(static_cast<std::size_t>(ds.window_length));
        for (std::size_t c = v0; c < table.header.size(); ++c)
            w.values.push_back(parse_double(row[c], ctx));
        const auto model = scenario_model_from_string(row[model_col]);
        if (!model) throw DataError(ctx + ": unknown model '" + row[model_col] + "'");
        ds.models.push_back(*model);
        ds.windows.push_back(std::move(w));
    }
    return ds;
}

}  // namespace ews
