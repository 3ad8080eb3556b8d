#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sigcalc/sig_operators.hpp"
#include "test_util.hpp"

using namespace sigcalc;
using testutil::random_tensor;

namespace {

SdeSpec random_spec(std::mt19937_64& rng, int d, int N) {
    SdeSpec s = zero_spec(d, N);
    for (auto& b : s.b) b = random_tensor(rng, d, N, 0.5);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            auto t = random_tensor(rng, d, N, 0.5);
            s.a(i, j) = t;
            s.a(j, i) = t;
        }
    return s;
}

// L(e_I) = e_{I'} ⧢ b_{i_n} + ½ e_{I''} ⧢ a_{i_{n-1} i_n}, word by word
TensorCoeffs drift_of_word(const Word& I, const SdeSpec& s) {
    const int d = s.d, N = s.level();
    TensorCoeffs out(d, N);
    if (I.empty()) return out;
    out += shuffle(TensorCoeffs::basis(I.prefix(), d, N), s.b[static_cast<std::size_t>(I.back() - 1)]);
    if (I.size() >= 2) out.axpy(0.5, shuffle(TensorCoeffs::basis(I.prefix(2), d, N), s.a(I[I.size() - 2] - 1, I.back() - 1)));
    return out;
}

}  // namespace

TEST(Operators, LinearOperatorOnWords) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        int d = 1 + trial % 3, N = 2 + trial % 3;
        auto s = random_spec(rng, d, N);
        for (std::size_t k = 0; k < tensor_size(d, N); ++k) {
            TensorCoeffs e(d, N);
            e[k] = 1.0;
            EXPECT_LT(L_op(e, s).max_abs_diff(drift_of_word(index_word(k, d), s)), 1e-13);
        }
    }
}

TEST(Operators, BlackScholesWordFormula) {
    const double sigma = 0.3, s0 = 1.7;
    const int N = 4;
    auto spec = black_scholes_spec(sigma, s0, N);
    for (std::size_t k = 0; k < tensor_size(2, N); ++k) {
        Word I = index_word(k, 2);
        TensorCoeffs expect(2, N);
        const std::size_t n = I.size();
        if (n >= 2 && I[n - 1] == 2 && I[n - 2] == 2) {
            auto epp = TensorCoeffs::basis(I.prefix(2), 2, N);
            TensorCoeffs inner = 2.0 * shuffle(epp, TensorCoeffs::basis({2, 2}, 2, N));
            inner.axpy(2.0 * s0, shuffle(epp, TensorCoeffs::basis({2}, 2, N)));
            inner.axpy(s0 * s0, epp);
            expect.axpy(0.5 * sigma * sigma, inner);
        }
        if (n >= 1 && I[n - 1] == 1) expect += TensorCoeffs::basis(I.prefix(), 2, N);
        EXPECT_LT(L_op(TensorCoeffs::basis(I, 2, N), spec).max_abs_diff(expect), 1e-14) << I.to_string();
    }
}

TEST(Operators, QuadraticFromLinear) {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 200; ++trial) {
        int d = 1 + trial % 3, N = 2 + trial % 3;
        auto s = random_spec(rng, d, N);
        auto u = random_tensor(rng, d, N, 0.7);
        const int M = N - 2;
        EXPECT_LT(poly_to_affine(u, s).resized(M).max_abs_diff(R_op(u, s).resized(M)), 1e-11);
    }
}

TEST(Operators, LinearFromQuadraticByScaling) {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> lam(-3, 3);
    for (int trial = 0; trial < 200; ++trial) {
        int d = 1 + trial % 3, N = 2 + trial % 3;
        auto s = random_spec(rng, d, N);
        auto u = random_tensor(rng, d, N, 0.7);
        double l = lam(rng);
        if (std::abs(l) < 0.1 || std::abs(l - 1) < 0.1) l = 2.5;
        EXPECT_LT(affine_to_poly(u, s, l).max_abs_diff(L_op(u, s)), 1e-10);
    }
    auto s = random_spec(rng, 2, 3);
    auto u = random_tensor(rng, 2, 3);
    EXPECT_THROW(affine_to_poly(u, s, 0.0), std::invalid_argument);
    EXPECT_THROW(affine_to_poly(u, s, 1.0), std::invalid_argument);
}

TEST(Operators, ExponentialIntertwining) {
    std::mt19937_64 rng(24);
    for (int trial = 0; trial < 200; ++trial) {
        int d = 1 + trial % 3, N = 2 + trial % 3;
        auto s = random_spec(rng, d, N);
        auto u = random_tensor(rng, d, N, 0.5);
        EXPECT_LT(exp_relation_defect(u, s), 1e-10);
    }
}

TEST(Operators, ShapeChecks) {
    auto s = brownian_spec(2, 3);
    EXPECT_THROW(R_op(TensorCoeffs(2, 2), s), DimensionError);
    EXPECT_THROW(L_op(TensorCoeffs(3, 3), s), DimensionError);
    auto bad = s;
    bad.a(0, 1)[0] = 1.0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Operators, BrownianRiccatiIsQuadraticInFrequency) {
    // for u = iγ·e, R(u) = -|γ|^2/2 e_∅
    auto s = brownian_spec(2, 3);
    TensorCoeffs u(2, 3);
    u.at({1}) = Complex(0, 0.4);
    u.at({2}) = Complex(0, -1.1);
    auto r = R_op(u, s);
    EXPECT_NEAR(std::abs(r[0] - Complex(-0.5 * (0.16 + 1.21))), 0.0, 1e-15);
    r[0] = 0;
    EXPECT_EQ(r.max_abs(), 0.0);
}

TEST(LinearMatrix, ColumnsAreOperatorImages) {
    auto spec = black_scholes_spec(0.2, 1.0, 3);
    auto G = linear_matrix(spec, 3);
    ASSERT_EQ(G.rows(), 15);
    for (std::size_t k = 0; k < 15; ++k) {
        TensorCoeffs e(2, 3);
        e[k] = 1.0;
        auto col = L_op(e, spec);
        for (std::size_t r = 0; r < 15; ++r) EXPECT_EQ(G(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)), col[r]);
    }
    // larger truncation than the SdeSpec's own level
    auto G5 = linear_matrix(spec, 5);
    EXPECT_EQ(G5.rows(), 63);
}

TEST(LinearMatrix, RejectsNonInvariantSpecWithWord) {
    auto spec = brownian_spec(2, 3);
    spec.b[1].at({2, 1}) = 0.5;
    try {
        linear_matrix(spec, 3);
        FAIL() << "expected rejection";
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("(2,1)"), std::string::npos) << e.what();
    }
}

TEST(LinearToRiccati, RecoversBrownianExponent) {
    // c(t) = exp(θ^2 t/2) Σ θ^k e_1^{⊗k} is exp⧢ of θ e_1 + θ^2 t/2 e_∅
    const int N = 6;
    const Complex theta(0.3, 0.8);
    auto spec = brownian_spec(1, N);
    auto u0 = TensorCoeffs::basis({1}, 1, N, theta);
    std::vector<TensorCoeffs> c;
    std::vector<double> ts;
    for (int k = 0; k <= 10; ++k) {
        double t = 0.1 * k;
        TensorCoeffs ck(1, N);
        Complex p = 1.0;
        for (int n = 0; n <= N; ++n) {
            ck[static_cast<std::size_t>(n)] = std::exp(0.5 * theta * theta * t) * p;
            p *= theta;
        }
        c.push_back(ck);
        ts.push_back(t);
    }
    auto psi = linear_to_riccati(c, u0, spec);
    for (std::size_t k = 0; k < psi.size(); ++k) {
        TensorCoeffs expect = u0;
        expect[0] = 0.5 * theta * theta * ts[k];
        EXPECT_LT(psi[k].max_abs_diff(expect), 1e-12);
    }
    c[3][0] = 0.0;
    EXPECT_THROW(linear_to_riccati(c, u0, spec), std::domain_error);
}
