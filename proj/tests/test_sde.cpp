#include "ews/sde.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <sstream>
#include <vector>

#include "ews/rng.hpp"

using namespace ews;

namespace {

const SirParams kSir{100.0, 1.0, 1.0};
const SeirParams kSeir{100.0, 0.75, 2.0, 1.0};

// test-side oracle: explicit Euler with hand-written right-hand sides
std::array<double, 2> euler_sir(std::array<double, 2> x, const BetaSchedule& beta, double t_end,
                                double dt) {
    const auto steps = static_cast<long long>(std::llround(t_end / dt));
    for (long long k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const double b = beta.beta0 + beta.beta1 * std::max(t, 0.0);
        const double ds = 100.0 - b * x[0] * x[1] - x[0];
        const double di = b * x[0] * x[1] - x[1] - x[1];
        x[0] = std::max(x[0] + ds * dt, 0.0);
        x[1] = std::max(x[1] + di * dt, 0.0);
    }
    return x;
}

TEST(DiffusionAdditive, ConstantDiagonal) {
    const NoiseSpec zero{NoiseFamily::AdditiveWhite, {0.0, 0.0}};
    const auto g0 = diffusion_additive<2>(zero);
    EXPECT_EQ(g0, (Mat2{{{0.0, 0.0}, {0.0, 0.0}}}));

    const NoiseSpec half{NoiseFamily::AdditiveWhite, {0.5, 0.5}};
    const auto g1 = diffusion_additive<2>(half);
    EXPECT_DOUBLE_EQ(g1[0][0], 0.5);
    EXPECT_DOUBLE_EQ(g1[1][1], 0.5);
    EXPECT_DOUBLE_EQ(g1[0][1], 0.0);

    const NoiseSpec seir{NoiseFamily::AdditiveWhite, {0.1, 0.2, 0.3, 0.4}};
    const auto g2 = diffusion_additive<4>(seir);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            EXPECT_DOUBLE_EQ(g2[i][j], i == j ? 0.1 * static_cast<double>(i + 1) : 0.0);
}

TEST(DiffusionAdditive, WrongFamilyThrows) {
    const NoiseSpec env{NoiseFamily::MultiplicativeEnvironmental, {0.5, 0.5}};
    EXPECT_THROW(diffusion_additive<2>(env), ContractError);
}

TEST(DiffusionEnvironmental, ScalesWithState) {
    const NoiseSpec spec{NoiseFamily::MultiplicativeEnvironmental, {0.5, 0.5}};
    const std::array<double, 2> state{500.0, 7.0};
    const auto g = diffusion_environmental(spec, state);
    EXPECT_DOUBLE_EQ(g[0][0], 250.0);
    EXPECT_DOUBLE_EQ(g[1][1], 3.5);
    EXPECT_DOUBLE_EQ(g[0][1], 0.0);

    const std::array<double, 2> extinct{500.0, 0.0};
    const auto g2 = diffusion_environmental(spec, extinct);
    EXPECT_DOUBLE_EQ(g2[1][0], 0.0);
    EXPECT_DOUBLE_EQ(g2[1][1], 0.0);

    const std::array<double, 2> bad{-1.0, 7.0};
    EXPECT_THROW(diffusion_environmental(spec, bad), ContractError);
}

TEST(DiffusionDemographic, HandEvaluatedPoint) {
    const std::array<double, 2> state{500.0, 7.0};
    const auto g = diffusion_demographic(state, kSir, 0.01);
    // a = 100 + 35 + 500 = 635, b = -35, c = 35 + 7 + 7 = 49
    const double a = 635.0, b = -35.0, c = 49.0;
    const double d = std::sqrt(a * c - b * b);
    const double e = std::sqrt(a + c + 2.0 * d);
    EXPECT_NEAR(d, 172.887, 1e-3);
    EXPECT_NEAR(e, 32.090, 1e-3);
    EXPECT_NEAR(g[0][0], (a + d) / e, 1e-12);
    EXPECT_NEAR(g[0][1], b / e, 1e-12);
    EXPECT_NEAR(g[1][0], b / e, 1e-12);
    EXPECT_NEAR(g[1][1], (c + d) / e, 1e-12);
}

TEST(DiffusionDemographic, MatchesEigenDecompositionSquareRoot) {
    // independent symmetric square root of V via 2x2 eigendecomposition
    const std::array<double, 2> state{500.0, 7.0};
    const double beta = 0.01;
    const auto g = diffusion_demographic(state, kSir, beta);

    const double a = 100.0 + beta * 500.0 * 7.0 + 500.0;
    const double b = -beta * 500.0 * 7.0;
    const double c = beta * 500.0 * 7.0 + 7.0 + 7.0;
    const double tr = a + c, det = a * c - b * b;
    const double disc = std::sqrt(tr * tr / 4.0 - det);
    const double l1 = tr / 2.0 + disc, l2 = tr / 2.0 - disc;
    // eigenvector for l1 is (b, l1 - a) normalized
    const double n1 = std::hypot(b, l1 - a);
    const double u = b / n1, v = (l1 - a) / n1;
    const double s1 = std::sqrt(l1), s2 = std::sqrt(l2);
    const double r00 = s1 * u * u + s2 * v * v;
    const double r01 = s1 * u * v - s2 * u * v;
    const double r11 = s1 * v * v + s2 * u * u;
    EXPECT_NEAR(g[0][0], r00, 1e-9 * std::abs(r00));
    EXPECT_NEAR(g[0][1], r01, 1e-9 * std::max(1.0, std::abs(r01)));
    EXPECT_NEAR(g[1][1], r11, 1e-9 * std::abs(r11));
}

TEST(DiffusionDemographic, DiagonalWhenInfectionTermVanishes) {
    const std::array<double, 2> state{500.0, 0.0};
    const auto g = diffusion_demographic(state, kSir, 0.3);
    const double a = 100.0 + 500.0;  // recruitment + death of S
    EXPECT_NEAR(g[0][0], std::sqrt(a), 1e-12 * std::sqrt(a));
    EXPECT_DOUBLE_EQ(g[0][1], 0.0);
    EXPECT_NEAR(g[1][1], 0.0, 1e-12);
}

TEST(DiffusionDemographic, SquareRootIdentityOverRandomStates) {
    RngStream stream(404);
    for (int i = 0; i < 1000; ++i) {
        const std::array<double, 2> state{1000.0 * stream.uniform(), 300.0 * stream.uniform()};
        const double beta = 0.05 * stream.uniform();
        const SirParams p{1.0 + 200.0 * stream.uniform(), 0.05 + 2.0 * stream.uniform(),
                          0.05 + 2.0 * stream.uniform()};
        const auto g = diffusion_demographic(state, p, beta);
        EXPECT_DOUBLE_EQ(g[0][1], g[1][0]);

        const double infection = beta * state[0] * state[1];
        const double a = p.recruitment + infection + p.death * state[0];
        const double b = -infection;
        const double c = infection + p.recovery * state[1] + p.death * state[1];
        const double vnorm = std::sqrt(a * a + 2.0 * b * b + c * c);

        const double p00 = g[0][0] * g[0][0] + g[0][1] * g[0][1];
        const double p01 = g[0][0] * g[0][1] + g[0][1] * g[1][1];
        const double p11 = g[0][1] * g[0][1] + g[1][1] * g[1][1];
        const double err = std::sqrt((p00 - a) * (p00 - a) + 2.0 * (p01 - b) * (p01 - b) +
                                     (p11 - c) * (p11 - c));
        EXPECT_LE(err, 1e-9 * vnorm);
    }
}

TEST(DiffusionDemographic, SingularSystemThrows) {
    // recruitment zero and both compartments empty: V = 0, no square root scale
    const SirParams degenerate{1e-300, 1.0, 1.0};  // validation happens at simulate level
    const std::array<double, 2> state{0.0, 0.0};
    SirParams zero_recruitment = degenerate;
    zero_recruitment.recruitment = 0.0;
    EXPECT_THROW(diffusion_demographic(state, zero_recruitment, 0.01), SingularDiffusionError);
}

TEST(Simulate, ZeroNoiseEqualsExplicitEulerExactly) {
    const BetaSchedule beta{0.005, 1e-5};
    const State init{{500.0, 7.0}, 0.0};
    const double horizon = 50.0, dt = 0.01;

    const NoiseSpec zero_white{NoiseFamily::AdditiveWhite, {0.0, 0.0}};
    const NoiseSpec zero_env{NoiseFamily::MultiplicativeEnvironmental, {0.0, 0.0}};
    const NoiseSpec none{NoiseFamily::None, {}};

    const auto euler = euler_sir({500.0, 7.0}, beta, horizon, dt);
    for (const auto& spec : {zero_white, zero_env, none}) {
        const auto traj = simulate(kSir, spec, beta, init, horizon, dt, 123);
        const auto last = traj.state_at(traj.size() - 1);
        EXPECT_DOUBLE_EQ(last[0], euler[0]) << to_string(spec.family);
        EXPECT_DOUBLE_EQ(last[1], euler[1]) << to_string(spec.family);
    }
}

TEST(Simulate, ZeroNoiseTracksFineStepReference) {
    const BetaSchedule beta{0.005, 1e-5};
    const State init{{500.0, 7.0}, 0.0};
    const auto traj =
        simulate(kSir, NoiseSpec{NoiseFamily::None, {}}, beta, init, 50.0, 0.01, 1);
    const auto fine = euler_sir({500.0, 7.0}, beta, 50.0, 1e-4);
    const auto last = traj.state_at(traj.size() - 1);
    EXPECT_NEAR(last[0], fine[0], 0.5);
    EXPECT_NEAR(last[1], fine[1], 0.5);
}

TEST(Simulate, SameSeedBitIdentical) {
    const BetaSchedule beta{0.01, 5e-6};
    const State init{{500.0, 7.0}, 0.0};
    const NoiseSpec noise{NoiseFamily::AdditiveWhite, {0.5, 0.5}};
    const auto a = simulate(kSir, noise, beta, init, 20.0, 0.01, 777);
    const auto b = simulate(kSir, noise, beta, init, 20.0, 0.01, 777);
    EXPECT_EQ(a.values, b.values);
    EXPECT_EQ(a.times, b.times);

    const auto c = simulate(kSir, noise, beta, init, 20.0, 0.01, 778);
    EXPECT_NE(a.values, c.values);
}

TEST(Simulate, RecordStrideKeepsEveryNthStep) {
    const BetaSchedule beta{0.01, 0.0};
    const State init{{500.0, 7.0}, 0.0};
    SimOptions opts;
    opts.record_stride = 100;
    const auto traj = simulate(kSir, NoiseSpec{NoiseFamily::None, {}}, beta, init, 5.0, 0.01,
                               1, opts);
    ASSERT_EQ(traj.size(), 6u);  // t = 0..5
    for (std::size_t i = 0; i < traj.size(); ++i)
        EXPECT_DOUBLE_EQ(traj.times[i], static_cast<double>(i));
    EXPECT_DOUBLE_EQ(traj.dt, 1.0);
    EXPECT_DOUBLE_EQ(traj.sim_dt, 0.01);
}

TEST(Simulate, NoTransmissionInfectionDecays) {
    // beta = 0 with additive noise: I decays toward zero in expectation
    const BetaSchedule beta{0.0, 0.0};
    const State init{{500.0, 7.0}, 0.0};
    const NoiseSpec noise{NoiseFamily::AdditiveWhite, {0.5, 0.5}};
    double mean_tail = 0.0;
    const int replicates = 200;
    for (int r = 0; r < replicates; ++r) {
        const auto traj = simulate(kSir, noise, beta, init, 50.0, 0.01,
                                   substream_seed(15, static_cast<std::uint64_t>(r)));
        const auto series = traj.component(1);
        const std::size_t tail = series.size() / 10;
        double local = 0.0;
        for (std::size_t i = series.size() - tail; i < series.size(); ++i) local += series[i];
        mean_tail += local / static_cast<double>(tail);
    }
    mean_tail /= replicates;
    EXPECT_LT(mean_tail, 7.0);
}

TEST(Simulate, WeakConsistencyOfOneStep) {
    // one EM step from a fixed state: mean increment ~ f dt, covariance ~ G G^T dt
    const double dt = 0.01;
    const BetaSchedule beta{0.015, 0.0};
    const State init{{500.0, 7.0}, 0.0};
    const double s1 = 0.5, s2 = 0.8;
    const NoiseSpec noise{NoiseFamily::AdditiveWhite, {s1, s2}};

    const double infection = 0.015 * 500.0 * 7.0;
    const double f0 = 100.0 - infection - 500.0;
    const double f1 = infection - 7.0 - 7.0;

    const int n = 2000;
    std::vector<std::array<double, 2>> increments;
    increments.reserve(n);
    for (int r = 0; r < n; ++r) {
        const auto traj = simulate(kSir, noise, beta, init, dt, dt,
                                   substream_seed(99, static_cast<std::uint64_t>(r)));
        const auto last = traj.state_at(1);
        increments.push_back({last[0] - 500.0, last[1] - 7.0});
    }
    double m0 = 0.0, m1 = 0.0;
    for (const auto& d : increments) {
        m0 += d[0];
        m1 += d[1];
    }
    m0 /= n;
    m1 /= n;
    const double se0 = s1 * std::sqrt(dt) / std::sqrt(static_cast<double>(n));
    const double se1 = s2 * std::sqrt(dt) / std::sqrt(static_cast<double>(n));
    EXPECT_NEAR(m0, f0 * dt, 4.0 * se0);
    EXPECT_NEAR(m1, f1 * dt, 4.0 * se1);

    double c00 = 0.0, c01 = 0.0, c11 = 0.0;
    for (const auto& d : increments) {
        c00 += (d[0] - m0) * (d[0] - m0);
        c01 += (d[0] - m0) * (d[1] - m1);
        c11 += (d[1] - m1) * (d[1] - m1);
    }
    c00 /= n;
    c01 /= n;
    c11 /= n;
    const double t00 = s1 * s1 * dt, t11 = s2 * s2 * dt;
    const double err = std::sqrt((c00 - t00) * (c00 - t00) + 2.0 * c01 * c01 +
                                 (c11 - t11) * (c11 - t11));
    const double scale = std::sqrt(t00 * t00 + t11 * t11);
    EXPECT_LE(err, 0.10 * scale);
}

TEST(Simulate, SeirZeroNoiseMatchesDeterministic) {
    const BetaSchedule beta{0.005, 1e-5};
    const State init{{500.0, 1.0, 2.0, 2.0}, 0.0};
    const NoiseSpec zero{NoiseFamily::AdditiveWhite, {0.0, 0.0, 0.0, 0.0}};
    const auto a = simulate(kSeir, zero, beta, init, 30.0, 0.01, 5);
    const auto b = simulate(kSeir, NoiseSpec{NoiseFamily::None, {}}, beta, init, 30.0, 0.01, 6);
    EXPECT_EQ(a.values, b.values);
}

TEST(Simulate, SeirRejectsUnsupportedNoise) {
    const BetaSchedule beta{0.005, 0.0};
    const State init{{500.0, 1.0, 2.0, 2.0}, 0.0};
    EXPECT_THROW(simulate(kSeir, NoiseSpec{NoiseFamily::Demographic, {}}, beta, init, 10.0, 0.01,
                          1),
                 ContractError);
}

TEST(Simulate, DivergenceCarriesStepIndex) {
    const BetaSchedule beta{1e305, 0.0};
    const State init{{500.0, 7.0}, 0.0};
    try {
        simulate(kSir, NoiseSpec{NoiseFamily::None, {}}, beta, init, 1.0, 0.01, 1);
        FAIL() << "expected divergence";
    } catch (const DivergenceError& e) {
        EXPECT_EQ(e.step(), 1u);
    }
}

TEST(Trajectory, CsvExportShape) {
    const BetaSchedule beta{0.01, 0.0};
    const State init{{500.0, 7.0}, 0.0};
    const auto traj =
        simulate(kSir, NoiseSpec{NoiseFamily::None, {}}, beta, init, 1.0, 0.25, 1);
    std::ostringstream os;
    write_trajectory_csv(os, traj);
    const std::string text = os.str();
    EXPECT_EQ(text.substr(0, 6), "t,S,I\n");
    std::size_t lines = 0;
    for (char ch : text)
        if (ch == '\n') ++lines;
    EXPECT_EQ(lines, 1u + traj.size());
}

}  // namespace
