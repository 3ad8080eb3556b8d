#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "sigcalc/montecarlo.hpp"
#include "sigcalc/schemes.hpp"
#include "test_util.hpp"

using namespace sigcalc;

namespace {

TensorCoeffs levy_initial(double lambda, double g1, double g2, int N) {
    TensorCoeffs u(2, N);
    u.at({2, 1}) = Complex(0, lambda / 2);
    u.at({1, 2}) = Complex(0, -lambda / 2);
    u.at({1}) = Complex(0, g1);
    u.at({2}) = Complex(0, g2);
    return u;
}

// E exp(iλA_T + iγ·W_T) for planar Brownian motion and its Lévy area
Complex levy_closed_form(double lambda, double g1, double g2, double T) {
    double gg = g1 * g1 + g2 * g2;
    double damp = lambda == 0 ? gg * T / 2 : gg * std::tanh(lambda * T / 2) / lambda;
    return std::exp(-damp) / std::cosh(lambda * T / 2);
}

}  // namespace

TEST(Ode, LinearGrowth) {
    SchemeConfig cfg;
    cfg.T = 2.0;
    cfg.steps = 400;
    Seq y0{1.0};
    auto traj = ode_integrate([](const Seq& y) { return Complex(-0.7, 2.0) * y; }, y0, cfg);
    ASSERT_EQ(traj.status, RunStatus::Completed);
    ASSERT_EQ(traj.states.size(), 401u);
    EXPECT_NEAR(std::abs(traj.states.back()[0] - std::exp(Complex(-0.7, 2.0) * 2.0)), 0.0, 1e-9);
}

TEST(Ode, ExplosionDetected) {
    SchemeConfig cfg;
    cfg.T = 2.0;
    cfg.steps = 2000;
    auto traj = ode_integrate([](const Seq& y) { return Seq{y[0] * y[0]}; }, Seq{1.0}, cfg);
    ASSERT_EQ(traj.status, RunStatus::Exploded);
    EXPECT_NEAR(*traj.explosion_time, 1.0, 2e-3);
    EXPECT_EQ(traj.times.size(), traj.states.size());
    EXPECT_LE(traj.times.back(), 1.0);
}

TEST(Ode, AdaptiveRefinement) {
    SchemeConfig cfg;
    cfg.T = 0.9;
    cfg.steps = 3;
    cfg.adaptive = true;
    auto f = [](const Seq& y) { return Seq{y[0] * y[0]}; };
    auto traj = ode_integrate(f, Seq{1.0}, cfg);
    ASSERT_EQ(traj.status, RunStatus::Completed);
    EXPECT_NEAR(traj.states.back()[0].real(), 10.0, 1e-6);
    cfg.adaptive = false;
    EXPECT_GT(std::abs(ode_integrate(f, Seq{1.0}, cfg).states.back()[0].real() - 10.0), 1e-3);
}

TEST(Scheme1, BrownianMgfBothBases) {
    for (double theta : {-1.0, 0.5, 2.0}) {
        SchemeConfig cfg;
        cfg.steps = 200;
        auto m = brownian_model();
        auto pow = scheme1_riccati([&](const Seq& u) { return R_pow(u, m); }, Seq::delta(1, 6, theta), cfg);
        auto sig = scheme1_riccati([&](const Seq& u) { return R_sig1(u, m); }, Seq::delta(1, 6, theta), cfg);
        EXPECT_NEAR(std::abs(pow.values.back() - std::exp(theta * theta / 2)), 0.0, 1e-8);
        EXPECT_NEAR(std::abs(sig.values.back() - std::exp(theta * theta / 2)), 0.0, 1e-8);
        auto spec = brownian_spec(1, 6);
        auto ten = scheme1_riccati([&](const TensorCoeffs& u) { return R_op(u, spec); }, TensorCoeffs::basis({1}, 1, 6, theta), cfg);
        EXPECT_NEAR(std::abs(ten.values.back() - std::exp(theta * theta / 2)), 0.0, 1e-8);
    }
}

TEST(Scheme1, GbmBasesAgree) {
    SchemeConfig cfg;
    cfg.steps = 1000;
    auto m = brownian_model();
    auto u = gbm_initial(1.0, 1.0, 20);
    auto pow = scheme1_riccati([&](const Seq& v) { return R_pow(v, m); }, u, cfg);
    auto sig = scheme1_riccati([&](const Seq& v) { return R_sig1(v, m); }, reweight(u), cfg);
    ASSERT_EQ(pow.values.size(), sig.values.size());
    for (std::size_t k = 0; k < pow.values.size(); ++k) EXPECT_NEAR(std::abs(pow.values[k] - sig.values[k]), 0.0, 1e-8);
    auto q = gauss_quadrature([](double x) { return Complex(std::exp(-std::exp(x))); }, 1.0);
    EXPECT_NEAR(std::abs(pow.values.back() - q.value), 0.0, 1e-3);
}

TEST(Scheme1, LevyAreaClosedForm) {
    SchemeConfig cfg;
    cfg.steps = 1000;
    for (double lambda : {0.5, 1.0, 2.0})
        for (auto [g1, g2] : {std::pair{0.0, 0.0}, std::pair{0.7, -0.4}}) {
            auto spec = brownian_spec(2, 2);
            auto vs = scheme1_riccati([&](const TensorCoeffs& u) { return R_op(u, spec); }, levy_initial(lambda, g1, g2, 2), cfg);
            for (std::size_t k = 0; k < vs.times.size(); k += 100)
                EXPECT_NEAR(std::abs(vs.values[k] - levy_closed_form(lambda, g1, g2, vs.times[k])), 0.0, 1e-10);
        }
}

TEST(Scheme2, MatchesScheme1WhenWeightsAreProbabilities) {
    auto m = brownian_model();
    auto u = gbm_initial(1.0, 1.0, 20);
    SchemeConfig c1;
    c1.T = 0.5;
    c1.steps = 500;
    auto ref = scheme1_riccati([&](const Seq& v) { return R_pow(v, m); }, u, c1);
    SchemeConfig c2;
    c2.T = 0.5;
    c2.steps = 100;
    c2.M = 160;
    auto vs = scheme2_transport([&](const Seq& v) { return R_pow(v, m); }, u, c2);
    ASSERT_EQ(vs.status, RunStatus::Completed);
    EXPECT_TRUE(vs.warnings.empty());
    EXPECT_NEAR(std::abs(vs.values.back() - ref.values.back()), 0.0, 5e-3);
    EXPECT_EQ(vs.values.front(), std::exp(u[0]));
}

TEST(Scheme2, BinomialWeightsSumToOne) {
    // with R = 0 every composition is u0 and the mixture must reproduce exp(u0_∅)
    auto zero = [](const Seq& v) { return Seq(v.K()); };
    SchemeConfig cfg;
    cfg.T = 1.0;
    cfg.steps = 300;
    cfg.M = 150;
    auto vs = scheme2_transport(zero, Seq{0.3}, cfg);
    for (const auto& v : vs.values) EXPECT_NEAR(std::abs(v - std::exp(0.3)), 0.0, 1e-12);
    cfg.M = 600;
    auto flagged = scheme2_transport(zero, Seq{0.3}, cfg);
    EXPECT_FALSE(flagged.warnings.empty());
}

TEST(MatrixExp, MatchesReferenceImplementation) {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 30; ++trial) {
        int n = 1 + trial % 12;
        double scale = std::pow(10.0, trial % 3 - 1);
        Eigen::MatrixXcd A(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) A(i, j) = Complex(g(rng), g(rng)) * scale;
        Eigen::MatrixXcd ref = A.exp();
        EXPECT_LT((matrix_exp(A) - ref).norm() / std::max(1.0, ref.norm()), 1e-11) << n << " " << scale;
    }
    Eigen::MatrixXcd nil = Eigen::MatrixXcd::Zero(3, 3);
    nil(0, 1) = 2.0;
    nil(1, 2) = 3.0;
    auto e = matrix_exp(nil);
    EXPECT_NEAR(std::abs(e(0, 2) - Complex(3.0)), 0.0, 1e-14);
    nil(0, 0) = NAN;
    EXPECT_THROW(matrix_exp(nil), std::domain_error);
}

TEST(Scheme3, JacobiSecondMoment) {
    auto G = linear_matrix_1d(jacobi_model(), 2);
    Eigen::VectorXcd u0 = Eigen::VectorXcd::Zero(3);
    u0(2) = 1.0;
    for (double T : {0.1, 1.0, 5.0}) {
        auto r = scheme3_linear(G, u0, T, 0.5);
        EXPECT_NEAR(std::abs(r.c(2) - std::exp(-T)), 0.0, 1e-13);
        EXPECT_NEAR(std::abs(r.c(1) - (1 - std::exp(-T))), 0.0, 1e-13);
        EXPECT_NEAR(std::abs(r.c(0)), 0.0, 1e-15);
        EXPECT_NEAR(std::abs(r.value - (0.5 - 0.25 * std::exp(-T))), 0.0, 1e-13);
        auto w = scheme3_linear(G, u0, T, 0.5, 3.0);
        EXPECT_NEAR(std::abs(w.value - r.value), 0.0, 1e-13);
    }
}

TEST(Scheme3, JacobiStationaryMgf) {
    const int K = 30;
    auto G = linear_matrix_1d(jacobi_model(), K);
    for (double c = -3; c <= 3; c += 1) {
        auto u0 = exp_star(Seq::delta(1, K, c));
        Eigen::VectorXcd v(K + 1);
        for (int k = 0; k <= K; ++k) v(k) = u0[k];
        auto r = scheme3_linear(G, v, 1000.0, 0.5);
        EXPECT_NEAR(std::abs(r.value - 0.5 * (1 + std::exp(c))), 0.0, 5e-3) << c;
    }
}

TEST(Scheme3, BrownianExpectedSignature) {
    // E[S(W)_{0,T}] = exp_⊗(T/2 Σ e_ii)
    const int N = 4;
    const double T = 0.8;
    auto es = expected_signature_linear(brownian_spec(2, N), N, T);
    TensorCoeffs gen(2, N);
    gen.at({1, 1}) = T / 2;
    gen.at({2, 2}) = T / 2;
    TensorCoeffs oracle = TensorCoeffs::unit(2, N), term = oracle;
    for (int k = 1; k <= N; ++k) {
        term = concat(term, gen);
        term *= 1.0 / k;
        oracle += term;
    }
    EXPECT_LT(es.max_abs_diff(oracle), 1e-13);
}

TEST(Scheme3, BlackScholesTimeWords) {
    const double T = 1.3;
    auto es = expected_signature_linear(black_scholes_spec(0.2, 1.0, 3), 3, T);
    EXPECT_NEAR(es.coeff({1}).real(), T, 1e-12);
    EXPECT_NEAR(es.coeff({1, 1}).real(), T * T / 2, 1e-12);
    EXPECT_NEAR(es.coeff({1, 1, 1}).real(), T * T * T / 6, 1e-12);
    EXPECT_NEAR(std::abs(es.coeff({2})), 0.0, 1e-13);  // S is a martingale
    // E[(S_T - S_0)^2] = S0^2 (e^{σ^2 T} - 1)
    EXPECT_NEAR(2 * es.coeff({2, 2}).real(), std::exp(0.04 * T) - 1, 1e-12);
}

TEST(Routes, LinearSchemeReproducesRiccati) {
    // one letter, affine drift and quadratic diffusion characteristic; the linear route carries
    // exp⧢(u0) truncated at N and is converted back through the shuffle logarithm
    const int N = 16;
    const double T = 0.5;
    auto spec = brownian_spec(1, N);
    spec.b[0][1] = -0.3;
    spec.a(0, 0)[1] = 0.4;
    spec.a(0, 0)[2] = 0.2;
    TensorCoeffs u0(1, N);
    u0[1] = Complex(0, 0.5);
    SchemeConfig cfg;
    cfg.T = T;
    cfg.steps = 1000;
    Trajectory<TensorCoeffs> traj;
    scheme1_riccati([&](const TensorCoeffs& u) { return R_op(u, spec); }, u0, cfg, &traj);
    ASSERT_EQ(traj.status, RunStatus::Completed);
    auto G = linear_matrix(spec, N);
    auto c0 = shuffle_exp(u0);
    Eigen::VectorXcd v(static_cast<Eigen::Index>(c0.size()));
    for (std::size_t k = 0; k < c0.size(); ++k) v(static_cast<Eigen::Index>(k)) = c0[k];
    std::vector<TensorCoeffs> cs;
    for (double t : {0.0, 0.25, 0.5}) {
        auto r = scheme3_linear(G, v, t, 0.0);
        cs.emplace_back(1, N, std::vector<Complex>(r.c.data(), r.c.data() + r.c.size()));
    }
    auto psi = linear_to_riccati(cs, u0, spec);
    EXPECT_LT(psi.back().resized(4).max_abs_diff(traj.states.back().resized(4)), 1e-6);
    EXPECT_NEAR(std::abs(std::exp(psi.back()[0]) - cs.back()[0]), 0.0, 1e-12);
}

TEST(Routes, BlackScholesLinearToRiccatiRoundTrip) {
    const int N = 3;
    auto spec = black_scholes_spec(0.2, 1.0, N);
    TensorCoeffs u0(2, N);
    u0.at({2}) = Complex(0, 0.7);
    u0.at({1, 2}) = -0.3;
    auto G = linear_matrix(spec, N);
    auto c0 = shuffle_exp(u0);
    Eigen::VectorXcd v(static_cast<Eigen::Index>(c0.size()));
    for (std::size_t k = 0; k < c0.size(); ++k) v(static_cast<Eigen::Index>(k)) = c0[k];
    std::vector<TensorCoeffs> cs;
    for (int k = 0; k <= 10; ++k) {
        auto r = scheme3_linear(G, v, 0.1 * k, 0.0);
        cs.emplace_back(2, N, std::vector<Complex>(r.c.data(), r.c.data() + r.c.size()));
    }
    auto psi = linear_to_riccati(cs, u0, spec);
    EXPECT_LT(psi.front().max_abs_diff(u0), 1e-14);
    EXPECT_LT(shuffle_exp(psi.back()).max_abs_diff(cs.back()), 1e-8);
}
