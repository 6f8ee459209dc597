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
#include <span>
#include <vector>

#include "ews/errors.hpp"

namespace ews {

// Deterministic compartment models. The SIR model is the reduced two-compartment
// system (S, I); the recovered compartment decouples and is never integrated.
//
//   dS/dt = recruitment - beta*S*I - death*S
//   dI/dt = beta*S*I - recovery*I - death*I
//
// SEIR adds an exposed compartment with progression rate `progression` and its
// own death rate `death`:
//
//   dS/dt = recruitment - beta*S*I - death*S
//   dE/dt = beta*S*I - (death + progression)*E
//   dI/dt = progression*E - (death + recovery)*I
//   dR/dt = recovery*I - death*R

struct SirParams {
    double recruitment;  // new susceptibles per unit time
    double death;        // per-capita natural death rate
    double recovery;     // per-capita recovery rate
};

struct SeirParams {
    double recruitment;
    double death;
    double progression;  // inverse mean exposed period
    double recovery;     // inverse mean infectious period
};

inline void validate(const SirParams& p) {
    require(std::isfinite(p.recruitment) && p.recruitment > 0.0, "SirParams: recruitment must be positive and finite");
    require(std::isfinite(p.death) && p.death > 0.0, "SirParams: death must be positive and finite");
    require(std::isfinite(p.recovery) && p.recovery > 0.0, "SirParams: recovery must be positive and finite");
}

inline void validate(const SeirParams& p) {
    require(std::isfinite(p.recruitment) && p.recruitment > 0.0, "SeirParams: recruitment must be positive and finite");
    require(std::isfinite(p.death) && p.death > 0.0, "SeirParams: death must be positive and finite");
    require(std::isfinite(p.progression) && p.progression > 0.0, "SeirParams: progression must be positive and finite");
    require(std::isfinite(p.recovery) && p.recovery > 0.0, "SeirParams: recovery must be positive and finite");
}

/// Compartment values at a point in time. (S, I) for SIR, (S, E, I, R) for SEIR.
struct State {
    std::vector<double> compartments;
    double t = 0.0;
};

inline void validate(const State& s) {
    require(std::isfinite(s.t), "State: time must be finite");
    for (double c : s.compartments)
        require(std::isfinite(c) && c >= 0.0, "State: compartments must be nonnegative and finite");
}

namespace detail {

inline void sir_rhs_into(std::span<const double> x, const SirParams& p, double beta,
                         std::span<double> out) {
    const double s = x[0], i = x[1];
    const double infection = beta * s * i;
    out[0] = p.recruitment - infection - p.death * s;
    out[1] = infection - p.recovery * i - p.death * i;
}

inline void seir_rhs_into(std::span<const double> x, const SeirParams& p, double beta,
                          std::span<double> out) {
    const double s = x[0], e = x[1], i = x[2], r = x[3];
    const double infection = beta * s * i;
    out[0] = p.recruitment - infection - p.death * s;
    out[1] = infection - (p.death + p.progression) * e;
    out[2] = p.progression * e - (p.death + p.recovery) * i;
    out[3] = p.recovery * i - p.death * r;
}

}  // namespace detail

inline std::vector<double> sir_rhs(const State& state, const SirParams& p, double beta) {
    require(state.compartments.size() == 2, "sir_rhs: state must have 2 compartments");
    require(beta >= 0.0, "sir_rhs: beta must be nonnegative");
    std::vector<double> out(2);
    detail::sir_rhs_into(state.compartments, p, beta, out);
    return out;
}

inline std::vector<double> seir_rhs(const State& state, const SeirParams& p, double beta) {
    require(state.compartments.size() == 4, "seir_rhs: state must have 4 compartments");
    require(beta >= 0.0, "seir_rhs: beta must be nonnegative");
    std::vector<double> out(4);
    detail::seir_rhs_into(state.compartments, p, beta, out);
    return out;
}

inline double basic_reproduction_number(const SirParams& p, double beta) {
    require(beta >= 0.0, "basic_reproduction_number: beta must be nonnegative");
    return beta * p.recruitment / (p.death * (p.recovery + p.death));
}

inline double basic_reproduction_number(const SeirParams& p, double beta) {
    require(beta >= 0.0, "basic_reproduction_number: beta must be nonnegative");
    return p.progression * beta * p.recruitment /
           (p.death * (p.death + p.progression) * (p.death + p.recovery));
}

/// Transmission rate at which the basic reproduction number equals one.
inline double critical_beta(const SirParams& p) {
    return p.death * (p.recovery + p.death) / p.recruitment;
}

inline double critical_beta(const SeirParams& p) {
    return p.death * (p.death + p.progression) * (p.death + p.recovery) /
           (p.progression * p.recruitment);
}

/// Disease-free equilibrium always; the endemic point as well when R0 > 1.
inline std::vector<State> equilibria(const SirParams& p, double beta) {
    require(beta > 0.0, "equilibria: beta must be positive");
    std::vector<State> out;
    out.push_back(State{{p.recruitment / p.death, 0.0}, 0.0});
    if (basic_reproduction_number(p, beta) > 1.0) {
        const double s_star = (p.death + p.recovery) / beta;
        const double i_star = p.recruitment / (p.death + p.recovery) - p.death / beta;
        out.push_back(State{{s_star, i_star}, 0.0});
    }
    return out;
}

}  // namespace ews
