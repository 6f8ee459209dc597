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
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ews/errors.hpp"
#include "ews/models.hpp"
#include "ews/rng.hpp"

namespace ews {

// Euler-Maruyama integration of the noise-induced compartment models:
//
//   X_{k+1} = X_k + f(X_k, t_k) dt + G(X_k) dW_k,   dW_k ~ N(0, sqrt(dt))
//
// with beta evaluated at the left endpoint t_k and compartments clamped at
// zero from below after every step.

enum class NoiseFamily {
    None,                         // deterministic: explicit Euler
    AdditiveWhite,                // G = diag(sigma), constant
    MultiplicativeEnvironmental,  // G = diag(sigma_1 S, sigma_2 I)
    Demographic,                  // G = sqrt(V), V from event transition rates
};

inline const char* to_string(NoiseFamily f) {
    switch (f) {
        case NoiseFamily::None: return "none";
        case NoiseFamily::AdditiveWhite: return "additive-white";
        case NoiseFamily::MultiplicativeEnvironmental: return "environmental";
        case NoiseFamily::Demographic: return "demographic";
    }
    return "?";
}

/// Noise family plus per-equation intensities. Demographic and None carry no
/// free intensities: the diffusion is fully determined by the state (or zero).
struct NoiseSpec {
    NoiseFamily family = NoiseFamily::None;
    std::vector<double> sigma;
};

inline void validate(const NoiseSpec& spec, std::size_t dim) {
    for (double s : spec.sigma)
        require(std::isfinite(s) && s >= 0.0, "NoiseSpec: intensities must be nonnegative");
    switch (spec.family) {
        case NoiseFamily::None:
        case NoiseFamily::Demographic:
            require(spec.sigma.empty(), "NoiseSpec: family carries no intensities");
            break;
        case NoiseFamily::AdditiveWhite:
        case NoiseFamily::MultiplicativeEnvironmental:
            require(spec.sigma.size() == dim, "NoiseSpec: one intensity per equation required");
            break;
    }
}

/// Linear transmission-rate ramp beta(t) = beta0 + beta1 * max(t, 0).
/// The ramp starts at t = 0; earlier times (burn-in) see the constant beta0.
struct BetaSchedule {
    double beta0 = 0.0;
    double beta1 = 0.0;
    double at(double t) const { return beta0 + beta1 * std::max(t, 0.0); }
};

inline void validate(const BetaSchedule& b, double horizon) {
    require(b.beta0 >= 0.0, "BetaSchedule: beta0 must be nonnegative");
    require(b.at(horizon) >= 0.0, "BetaSchedule: beta must stay nonnegative over the horizon");
}

enum class ModelKind { Sir, Seir };

inline const char* to_string(ModelKind m) {
    return m == ModelKind::Sir ? "sir" : "seir";
}

/// Simulated states on a uniform time grid. `dt` is the spacing of recorded
/// rows; `sim_dt` the integration step (they differ when recording is strided).
struct Trajectory {
    ModelKind model = ModelKind::Sir;
    NoiseFamily noise = NoiseFamily::None;
    double dt = 0.0;
    double sim_dt = 0.0;
    std::uint64_t seed = 0;
    std::size_t dim = 0;
    std::vector<double> times;
    std::vector<double> values;  // row-major, times.size() * dim

    std::size_t size() const { return times.size(); }
    std::span<const double> state_at(std::size_t i) const {
        return std::span<const double>(values).subspan(i * dim, dim);
    }
    /// Single-compartment series (e.g. the infected count).
    std::vector<double> component(std::size_t c) const {
        std::vector<double> out(times.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = values[i * dim + c];
        return out;
    }
};

struct SimOptions {
    double start_time = 0.0;
    std::size_t record_stride = 1;  // record every n-th step (step 0 always)
};

using Mat2 = std::array<std::array<double, 2>, 2>;

/// Constant diagonal diffusion diag(sigma_1..sigma_n).
template <std::size_t N>
std::array<std::array<double, N>, N> diffusion_additive(const NoiseSpec& spec) {
    require(spec.family == NoiseFamily::AdditiveWhite, "diffusion_additive: wrong noise family");
    require(spec.sigma.size() == N, "diffusion_additive: intensity count mismatch");
    std::array<std::array<double, N>, N> g{};
    for (std::size_t i = 0; i < N; ++i) g[i][i] = spec.sigma[i];
    return g;
}

/// State-proportional diagonal diffusion diag(sigma_1 S, sigma_2 I).
inline Mat2 diffusion_environmental(const NoiseSpec& spec, std::span<const double> state) {
    require(spec.family == NoiseFamily::MultiplicativeEnvironmental,
            "diffusion_environmental: wrong noise family");
    require(state.size() == 2 && spec.sigma.size() == 2,
            "diffusion_environmental: two compartments required");
    require(state[0] >= 0.0 && state[1] >= 0.0,
            "diffusion_environmental: compartments must be nonnegative");
    return Mat2{{{spec.sigma[0] * state[0], 0.0}, {0.0, spec.sigma[1] * state[1]}}};
}

/// Symmetric square root of the demographic event covariance
///   V = [[a, b], [b, c]],   a = L + bSI + mS, b = -bSI, c = bSI + rI + mI
/// computed as G = (1/e) [[a+d, b], [b, c+d]] with d = sqrt(ac - b^2),
/// e = sqrt(a + c + 2d), so that G*G = V.
inline Mat2 diffusion_demographic(std::span<const double> state, const SirParams& p, double beta) {
    require(state.size() == 2, "diffusion_demographic: two compartments required");
    require(state[0] >= 0.0 && state[1] >= 0.0,
            "diffusion_demographic: compartments must be nonnegative");
    require(beta >= 0.0, "diffusion_demographic: beta must be nonnegative");
    const double s = state[0], i = state[1];
    const double infection = beta * s * i;
    const double a = p.recruitment + infection + p.death * s;
    const double b = -infection;
    const double c = infection + p.recovery * i + p.death * i;
    const double d = std::sqrt(std::max(a * c - b * b, 0.0));
    const double e2 = a + c + 2.0 * d;
    if (e2 <= 0.0)
        throw SingularDiffusionError("diffusion_demographic: V is singular (empty system)");
    const double e = std::sqrt(e2);
    return Mat2{{{(a + d) / e, b / e}, {b / e, (c + d) / e}}};
}

namespace detail {

template <std::size_t N, class Drift, class Diffusion>
Trajectory em_integrate(Drift&& drift, Diffusion&& diffusion, bool stochastic,
                        const std::array<double, N>& init, double horizon, double dt,
                        std::uint64_t seed, const SimOptions& opts) {
    require(dt > 0.0, "simulate: dt must be positive");
    require(horizon >= dt, "simulate: horizon must be at least one step");
    require(opts.record_stride >= 1, "simulate: record_stride must be >= 1");

    const auto n_steps = static_cast<std::size_t>(std::llround(horizon / dt));
    const double record_spacing = dt * static_cast<double>(opts.record_stride);

    Trajectory traj;
    traj.dt = record_spacing;
    traj.sim_dt = dt;
    traj.seed = seed;
    traj.dim = N;
    traj.times.reserve(n_steps / opts.record_stride + 2);
    traj.values.reserve((n_steps / opts.record_stride + 2) * N);

    RngStream stream(seed);
    std::array<double, N> x = init;
    std::array<double, N> f{};
    std::array<double, N> dw{};
    std::array<std::array<double, N>, N> g{};
    const double sqrt_dt = std::sqrt(dt);

    auto record = [&](std::size_t record_index) {
        traj.times.push_back(opts.start_time + static_cast<double>(record_index) * record_spacing);
        traj.values.insert(traj.values.end(), x.begin(), x.end());
    };

    record(0);
    for (std::size_t k = 0; k < n_steps; ++k) {
        const double t = opts.start_time + static_cast<double>(k) * dt;
        drift(x, t, f);
        if (stochastic) {
            diffusion(x, t, g);
            for (std::size_t i = 0; i < N; ++i) dw[i] = sqrt_dt * stream.normal();
            for (std::size_t i = 0; i < N; ++i) {
                double noise = 0.0;
                for (std::size_t j = 0; j < N; ++j) noise += g[i][j] * dw[j];
                x[i] += f[i] * dt + noise;
            }
        } else {
            for (std::size_t i = 0; i < N; ++i) x[i] += f[i] * dt;
        }
        for (std::size_t i = 0; i < N; ++i) {
            if (!std::isfinite(x[i]))
                throw DivergenceError("simulate: non-finite state", k + 1);
            x[i] = std::max(x[i], 0.0);
        }
        if ((k + 1) % opts.record_stride == 0) record((k + 1) / opts.record_stride);
    }
    return traj;
}

}  // namespace detail

inline Trajectory simulate(const SirParams& p, const NoiseSpec& noise, const BetaSchedule& beta,
                           const State& init, double horizon, double dt, std::uint64_t seed,
                           const SimOptions& opts = {}) {
    validate(p);
    validate(init);
    validate(noise, 2);
    validate(beta, opts.start_time + horizon);
    require(init.compartments.size() == 2, "simulate: SIR state must have 2 compartments");

    std::array<double, 2> x0{init.compartments[0], init.compartments[1]};
    auto drift = [&](const std::array<double, 2>& x, double t, std::array<double, 2>& out) {
        detail::sir_rhs_into(x, p, beta.at(t), out);
    };

    Trajectory traj;
    switch (noise.family) {
        case NoiseFamily::None:
            traj = detail::em_integrate<2>(
                drift, [](const auto&, double, auto&) {}, false, x0, horizon, dt, seed, opts);
            break;
        case NoiseFamily::AdditiveWhite: {
            const auto g0 = diffusion_additive<2>(noise);
            traj = detail::em_integrate<2>(
                drift, [&](const auto&, double, Mat2& g) { g = g0; }, true, x0, horizon, dt, seed,
                opts);
            break;
        }
        case NoiseFamily::MultiplicativeEnvironmental:
            traj = detail::em_integrate<2>(
                drift,
                [&](const std::array<double, 2>& x, double, Mat2& g) {
                    g = diffusion_environmental(noise, x);
                },
                true, x0, horizon, dt, seed, opts);
            break;
        case NoiseFamily::Demographic:
            traj = detail::em_integrate<2>(
                drift,
                [&](const std::array<double, 2>& x, double t, Mat2& g) {
                    g = diffusion_demographic(x, p, beta.at(t));
                },
                true, x0, horizon, dt, seed, opts);
            break;
    }
    traj.model = ModelKind::Sir;
    traj.noise = noise.family;
    return traj;
}

inline Trajectory simulate(const SeirParams& p, const NoiseSpec& noise, const BetaSchedule& beta,
                           const State& init, double horizon, double dt, std::uint64_t seed,
                           const SimOptions& opts = {}) {
    validate(p);
    validate(init);
    validate(beta, opts.start_time + horizon);
    require(init.compartments.size() == 4, "simulate: SEIR state must have 4 compartments");
    require(noise.family == NoiseFamily::None || noise.family == NoiseFamily::AdditiveWhite,
            "simulate: SEIR supports only additive white noise");
    validate(noise, 4);

    std::array<double, 4> x0{init.compartments[0], init.compartments[1], init.compartments[2],
                             init.compartments[3]};
    auto drift = [&](const std::array<double, 4>& x, double t, std::array<double, 4>& out) {
        detail::seir_rhs_into(x, p, beta.at(t), out);
    };

    Trajectory traj;
    if (noise.family == NoiseFamily::None) {
        traj = detail::em_integrate<4>(
            drift, [](const auto&, double, auto&) {}, false, x0, horizon, dt, seed, opts);
    } else {
        const auto g0 = diffusion_additive<4>(noise);
        traj = detail::em_integrate<4>(
            drift, [&](const auto&, double, auto& g) { g = g0; }, true, x0, horizon, dt, seed,
            opts);
    }
    traj.model = ModelKind::Seir;
    traj.noise = noise.family;
    return traj;
}

inline const char* compartment_names(ModelKind m) {
    return m == ModelKind::Sir ? "S,I" : "S,E,I,R";
}

/// CSV text with header `t,<compartment names...>`, one row per recorded step.
inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    out << "t," << compartment_names(traj.model) << "\n";
    char buf[32];
    for (std::size_t i = 0; i < traj.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", traj.times[i]);
        out << buf;
        const auto state = traj.state_at(i);
        for (double v : state) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out << ',' << buf;
        }
        out << '\n';
    }
}

/// Index of the infected compartment within a model's state vector.
inline std::size_t infected_index(ModelKind m) {
    return m == ModelKind::Sir ? 1 : 2;
}

}  // namespace ews
