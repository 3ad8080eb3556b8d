#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sigcalc/signature.hpp"
#include "sigcalc/tensor_algebra.hpp"
#include "test_util.hpp"

using namespace sigcalc;
using testutil::random_tensor;

TEST(Word, IndexRoundTrip) {
    EXPECT_EQ(word_index(Word{}, 2), 0u);
    EXPECT_EQ(word_index(Word{1}, 2), 1u);
    EXPECT_EQ(word_index(Word{1, 2}, 2), 4u);
    EXPECT_EQ(word_index(Word{2, 2}, 2), 6u);
    for (int d = 1; d <= 3; ++d)
        for (std::size_t i = 0; i < tensor_size(d, 4); ++i) EXPECT_EQ(word_index(index_word(i, d), d), i);
    EXPECT_THROW(word_index(Word{3}, 2), DimensionError);
}

TEST(Word, Prefixes) {
    Word w{1, 2, 3};
    EXPECT_EQ(w.prefix(), (Word{1, 2}));
    EXPECT_EQ(w.prefix(2), (Word{1}));
    EXPECT_EQ((Word{2, 1, 2}).sorted(), (Word{1, 2, 2}));
    EXPECT_DOUBLE_EQ((Word{2, 1, 2, 2}).multiplicity_factorial(), 6.0);
}

TEST(Shuffle, SmallExamples) {
    auto s = shuffle(TensorCoeffs::basis({1}, 2, 2), TensorCoeffs::basis({2}, 2, 2));
    EXPECT_EQ(s.coeff({1, 2}), Complex(1.0));
    EXPECT_EQ(s.coeff({2, 1}), Complex(1.0));
    EXPECT_EQ(s.max_abs(), 1.0);
    auto s11 = shuffle(TensorCoeffs::basis({1}, 2, 2), TensorCoeffs::basis({1}, 2, 2));
    EXPECT_EQ(s11.coeff({1, 1}), Complex(2.0));
    // e_12 ⧢ e_3 = e_123 + e_132 + e_312
    auto s3 = shuffle(TensorCoeffs::basis({1, 2}, 3, 3), TensorCoeffs::basis({3}, 3, 3));
    EXPECT_EQ(s3.coeff({1, 2, 3}), Complex(1.0));
    EXPECT_EQ(s3.coeff({1, 3, 2}), Complex(1.0));
    EXPECT_EQ(s3.coeff({3, 1, 2}), Complex(1.0));
    EXPECT_EQ(s3.coeff({2, 1, 3}), Complex(0.0));
}

TEST(Shuffle, WordsAgreeWithBruteForceInterleavings) {
    for (int d = 1; d <= 3; ++d) {
        const int N = 5;
        for (int p = 0; p <= N; ++p)
            for (int q = 0; p + q <= N; ++q)
                for (const auto& I : testutil::words_of_length(d, p))
                    for (const auto& J : testutil::words_of_length(d, q)) {
                        if (d == 3 && p + q > 4) continue;
                        auto oracle = testutil::brute_shuffle_words(I, J, d, N);
                        EXPECT_EQ(shuffle_words(I, J, d, N).max_abs_diff(oracle), 0.0) << I.to_string() << " x " << J.to_string();
                        EXPECT_EQ(shuffle(TensorCoeffs::basis(I, d, N), TensorCoeffs::basis(J, d, N)).max_abs_diff(oracle), 0.0);
                    }
    }
}

TEST(Shuffle, RandomElementsAgreeWithBruteForce) {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        int d = 1 + trial % 3, N = 2 + trial % 3;
        auto u = random_tensor(rng, d, N), v = random_tensor(rng, d, N);
        EXPECT_LT(shuffle(u, v).max_abs_diff(testutil::brute_shuffle(u, v)), 1e-12);
    }
}

TEST(Shuffle, AlgebraProperties) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 200; ++trial) {
        int d = 1 + trial % 3, N = 1 + trial % 4;
        auto u = random_tensor(rng, d, N), v = random_tensor(rng, d, N), w = random_tensor(rng, d, N);
        EXPECT_LT(shuffle(u, v).max_abs_diff(shuffle(v, u)), 1e-12);
        EXPECT_LT(shuffle(shuffle(u, v), w).max_abs_diff(shuffle(u, shuffle(v, w))), 1e-10);
        EXPECT_LT(shuffle(u, TensorCoeffs::unit(d, N)).max_abs_diff(u), 1e-15);
        EXPECT_LT(shuffle(u, v + w).max_abs_diff(shuffle(u, v) + shuffle(u, w)), 1e-12);
    }
}

TEST(Shuffle, MismatchThrows) {
    EXPECT_THROW(shuffle(TensorCoeffs(2, 3), TensorCoeffs(2, 2)), DimensionError);
    EXPECT_THROW(shuffle(TensorCoeffs(2, 3), TensorCoeffs(3, 3)), DimensionError);
    EXPECT_THROW(concat(TensorCoeffs(2, 3), TensorCoeffs(3, 3)), DimensionError);
}

TEST(Concat, WordsConcatenate) {
    auto c = concat(TensorCoeffs::basis({1, 2}, 2, 4), TensorCoeffs::basis({2, 1}, 2, 4));
    EXPECT_EQ(c.coeff({1, 2, 2, 1}), Complex(1.0));
    EXPECT_EQ(c.max_abs(), 1.0);
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        int d = 1 + trial % 3, N = 1 + trial % 4;
        auto u = random_tensor(rng, d, N), v = random_tensor(rng, d, N), w = random_tensor(rng, d, N);
        EXPECT_LT(concat(concat(u, v), w).max_abs_diff(concat(u, concat(v, w))), 1e-10);
        // brute force over word pairs
        TensorCoeffs oracle(d, N);
        for (std::size_t i = 0; i < u.size(); ++i)
            for (std::size_t j = 0; j < v.size(); ++j) {
                auto IJ = index_word(i, d) + index_word(j, d);
                if (static_cast<int>(IJ.size()) <= N) oracle.at(IJ) += u[i] * v[j];
            }
        EXPECT_LT(concat(u, v).max_abs_diff(oracle), 1e-12);
    }
}

TEST(ShuffleExp, InverseOfLog) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        int d = 1 + trial % 3, N = 1 + trial % 4;
        auto u = random_tensor(rng, d, N, 0.5);
        auto e = shuffle_exp(u);
        EXPECT_NEAR(std::abs(e[0] - std::exp(u[0])), 0.0, 1e-13);
        u[0] = 0.0;
        EXPECT_LT(shuffle_log(shuffle_exp(u)).max_abs_diff(u), 1e-11);
        auto x = random_tensor(rng, d, N, 0.3);
        x[0] = 1.0;
        EXPECT_LT(shuffle_exp(shuffle_log(x)).max_abs_diff(x), 1e-11);
    }
}

TEST(ShuffleExp, Homomorphism) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        int d = 1 + trial % 3, N = 1 + trial % 4;
        auto u = random_tensor(rng, d, N, 0.5), v = random_tensor(rng, d, N, 0.5);
        EXPECT_LT(shuffle_exp(u + v).max_abs_diff(shuffle(shuffle_exp(u), shuffle_exp(v))), 1e-11);
    }
}

TEST(ShuffleExp, ScalarCaseMatchesExponentialAndLogarithm) {
    // paired with the signature of a one-dimensional increment x, e_1^{⊗k} reads x^k/k!
    const int N = 40;
    const double x = 0.3, theta = 1.7;
    std::vector<double> inc{x};
    auto sig = segment_signature(inc, N).value;
    auto u = TensorCoeffs::basis({1}, 1, N, theta);
    EXPECT_NEAR(std::abs(pair(shuffle_exp(u), sig) - std::exp(theta * x)), 0.0, 1e-13);
    // log(1 + e_1) pairs to log(1 + x), which pins the sign pattern (-1)^{k-1}/k
    auto one_plus = TensorCoeffs::unit(1, N);
    one_plus[1] = 1.0;
    EXPECT_NEAR(std::abs(pair(shuffle_log(one_plus), sig) - std::log(1.0 + x)), 0.0, 1e-13);
}

TEST(ShuffleLog, RejectsNonUnitEmptyCoefficient) {
    auto u = TensorCoeffs::unit(2, 3);
    u[0] = 2.0;
    EXPECT_THROW(shuffle_log(u), std::domain_error);
}

TEST(Shift, Examples) {
    TensorCoeffs u(2, 3);
    u.at({1, 2}) = 1.0;
    u.at({2}) = 3.0;
    auto s1 = shift1(u);
    EXPECT_EQ(s1[1].coeff({1}), Complex(1.0));
    EXPECT_EQ(s1[1].coeff({}), Complex(3.0));
    EXPECT_EQ(s1[0].max_abs(), 0.0);
    EXPECT_EQ(s1[0].level(), 2);
    auto s2 = shift2(u);
    EXPECT_EQ(s2(0, 1).coeff({}), Complex(1.0));
    EXPECT_EQ(s2(1, 0).max_abs(), 0.0);
    EXPECT_EQ(s2(0, 1).level(), 1);
}

TEST(Shift, ExponentialIdentities) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 200; ++trial) {
        int d = 1 + trial % 3, N = 2 + trial % 3;
        auto u = random_tensor(rng, d, N, 0.5);
        auto e = shuffle_exp(u);
        auto e1 = shift1(e);
        auto u1 = shift1(u);
        auto eN1 = e.resized(N - 1);
        for (int i = 0; i < d; ++i)
            EXPECT_LT(e1[static_cast<std::size_t>(i)].max_abs_diff(shuffle(eN1, u1[static_cast<std::size_t>(i)])), 1e-11);
        auto e2 = shift2(e);
        auto u2 = shift2(u);
        auto eN2 = e.resized(N - 2);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                auto inner = u2(i, j) + shuffle(u1[static_cast<std::size_t>(i)].resized(N - 2), u1[static_cast<std::size_t>(j)].resized(N - 2));
                EXPECT_LT(e2(i, j).max_abs_diff(shuffle(eN2, inner)), 1e-11);
            }
    }
}

TEST(Dilate, ScalesLevels) {
    std::mt19937_64 rng(7);
    auto u = random_tensor(rng, 2, 3);
    auto v = dilate(u, 2.0);
    EXPECT_EQ(v.coeff({}), u.coeff({}));
    EXPECT_EQ(v.coeff({1, 2}), 4.0 * u.coeff({1, 2}));
    EXPECT_EQ(v.coeff({2, 2, 1}), 8.0 * u.coeff({2, 2, 1}));
}

TEST(Pair, BilinearOverCommonLevels) {
    auto u = TensorCoeffs::basis({1, 2}, 2, 3, 2.0);
    u.at({}) = 1.0;
    auto x = TensorCoeffs::basis({1, 2}, 2, 2, 3.0);
    x.at({}) = 5.0;
    EXPECT_EQ(pair(u, x), Complex(11.0));
    EXPECT_THROW(pair(TensorCoeffs(2, 2), TensorCoeffs(3, 2)), DimensionError);
}

TEST(Seminorm, PartitionExamples) {
    TensorCoeffs x(2, 2);
    x.at({}) = 1.0;
    x.at({1}) = 1.0;
    x.at({2}) = -1.0;
    x.at({1, 2}) = 0.5;
    x.at({2, 1}) = -0.5;
    EXPECT_DOUBLE_EQ(l1_norm(x, Partition::Singleton), 3.0);
    EXPECT_DOUBLE_EQ(l1_norm(x, Partition::Ordered), 2.0);
    EXPECT_DOUBLE_EQ(l1_norm(x, Partition::Level), 0.0);
    EXPECT_DOUBLE_EQ(l1_norm(x, Partition::Level, true), 1.0);
    EXPECT_FALSE(is_shuffle_compatible(Partition::Singleton));
    EXPECT_TRUE(is_shuffle_compatible(Partition::Ordered));
    EXPECT_TRUE(is_shuffle_compatible(Partition::Level));
}

TEST(Pair, ShuffleIsMultiplicativeOnSignatures) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> inc{g(rng), g(rng)};
        auto x = segment_signature(inc, 4).value;
        auto u = random_tensor(rng, 2, 4, 1.0, false), v = random_tensor(rng, 2, 4, 1.0, false);
        u = u.resized(2).resized(4);
        v = v.resized(2).resized(4);
        EXPECT_NEAR(std::abs(pair(shuffle(u, v), x) - pair(u, x) * pair(v, x)), 0.0, 1e-10);
    }
}
