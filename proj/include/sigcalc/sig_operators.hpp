#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tensor_algebra.hpp"

namespace sigcalc {

// Signature SDE dX^i = <b_i, X> dt + <sqrt(a)_ij, X> dW^j, characteristics given as tensors.
struct SdeSpec {
    int d = 0;
    std::vector<TensorCoeffs> b;  // d entries
    TensorMatrix a;               // d x d, symmetric
    std::vector<double> x0;

    int level() const { return b.empty() ? 0 : b.front().level(); }

    void validate(double tol = 1e-14) const {
        if (d < 1) throw DimensionError("spec: dimension must be >= 1");
        if (static_cast<int>(b.size()) != d) throw DimensionError("spec: need one drift characteristic per coordinate");
        if (a.d != d || static_cast<int>(a.entries.size()) != d * d) throw DimensionError("spec: diffusion characteristic must be d x d");
        if (static_cast<int>(x0.size()) != d) throw DimensionError("spec: initial point has wrong dimension");
        const int N = level();
        for (const auto& t : b)
            if (t.dim() != d || t.level() != N) throw DimensionError("spec: drift characteristic shape mismatch");
        for (const auto& t : a.entries)
            if (t.dim() != d || t.level() != N) throw DimensionError("spec: diffusion characteristic shape mismatch");
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j)
                if (a(i, j).max_abs_diff(a(j, i)) > tol)
                    throw std::invalid_argument("spec: diffusion characteristic not symmetric at (" + std::to_string(i + 1) + "," +
                                                std::to_string(j + 1) + ")");
    }

    SdeSpec with_level(int N) const {
        SdeSpec s = *this;
        for (auto& t : s.b) t = t.resized(N);
        for (auto& t : s.a.entries) t = t.resized(N);
        return s;
    }
};

inline SdeSpec zero_spec(int d, int N) {
    SdeSpec s;
    s.d = d;
    s.b.assign(static_cast<std::size_t>(d), TensorCoeffs(d, N));
    s.a = TensorMatrix{d, std::vector<TensorCoeffs>(static_cast<std::size_t>(d * d), TensorCoeffs(d, N))};
    s.x0.assign(static_cast<std::size_t>(d), 0.0);
    return s;
}

// constant drift and diffusion matrix
inline SdeSpec constant_spec(const std::vector<double>& drift, const std::vector<std::vector<double>>& diffusion, int N) {
    const int d = static_cast<int>(drift.size());
    SdeSpec s = zero_spec(d, N);
    for (int i = 0; i < d; ++i) {
        s.b[static_cast<std::size_t>(i)][0] = drift[static_cast<std::size_t>(i)];
        for (int j = 0; j < d; ++j) s.a(i, j)[0] = diffusion[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    s.validate();
    return s;
}

inline SdeSpec brownian_spec(int d, int N) {
    std::vector<std::vector<double>> id(static_cast<std::size_t>(d), std::vector<double>(static_cast<std::size_t>(d), 0.0));
    for (int i = 0; i < d; ++i) id[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;
    return constant_spec(std::vector<double>(static_cast<std::size_t>(d), 0.0), id, N);
}

// Adds time as letter 1 with unit drift and no noise. Space characteristics are tensors over
// the extended alphabet of size d+1, space coordinate k is letter k+2.
inline SdeSpec time_extended_spec(int d_space, int N, const std::vector<TensorCoeffs>& b_space,
                                  const std::vector<TensorCoeffs>& a_space, const std::vector<double>& x0_space) {
    const int d = d_space + 1;
    if (static_cast<int>(b_space.size()) != d_space || static_cast<int>(a_space.size()) != d_space * d_space ||
        static_cast<int>(x0_space.size()) != d_space)
        throw DimensionError("time_extended_spec: wrong number of space characteristics");
    SdeSpec s = zero_spec(d, N);
    s.b[0][0] = 1.0;
    for (int i = 0; i < d_space; ++i) {
        s.b[static_cast<std::size_t>(i + 1)] = b_space[static_cast<std::size_t>(i)];
        s.x0[static_cast<std::size_t>(i + 1)] = x0_space[static_cast<std::size_t>(i)];
        for (int j = 0; j < d_space; ++j) s.a(i + 1, j + 1) = a_space[static_cast<std::size_t>(i * d_space + j)];
    }
    s.validate();
    return s;
}

// time-extended geometric Brownian motion dS = sigma S dW, S_0 = s0; letter 1 is time, letter 2 is S
inline SdeSpec black_scholes_spec(double sigma, double s0, int N) {
    TensorCoeffs a22(2, N);
    a22[0] = sigma * sigma * s0 * s0;
    if (N >= 1) a22.at(Word{2}) = 2.0 * sigma * sigma * s0;
    if (N >= 2) a22.at(Word{2, 2}) = 2.0 * sigma * sigma;
    return time_extended_spec(1, N, {TensorCoeffs(2, N)}, {a22}, {s0});
}

// initial value iλ·½(e_21 − e_12) + iγ_1 e_1 + iγ_2 e_2, whose pairing with the signature of a
// planar path is iλ times its Lévy area plus iγ·(increment)
inline TensorCoeffs levy_area_initial(double lambda, double gamma1, double gamma2, int N) {
    if (N < 2) throw DimensionError("levy_area_initial: needs level >= 2");
    TensorCoeffs u(2, N);
    u.at(Word{2, 1}) = Complex(0, lambda / 2);
    u.at(Word{1, 2}) = Complex(0, -lambda / 2);
    u.at(Word{1}) = Complex(0, gamma1);
    u.at(Word{2}) = Complex(0, gamma2);
    return u;
}

namespace detail {

inline bool is_zero(const TensorCoeffs& t) {
    for (const auto& c : t.data())
        if (c != Complex(0.0)) return false;
    return true;
}

inline void require_spec_shape(const TensorCoeffs& u, const SdeSpec& spec) {
    if (u.dim() != spec.d || u.level() != spec.level())
        throw DimensionError("operator: tensor (d=" + std::to_string(u.dim()) + ",N=" + std::to_string(u.level()) +
                             ") does not match spec (d=" + std::to_string(spec.d) + ",N=" + std::to_string(spec.level()) + ")");
}

}  // namespace detail

// R(u) = Σ b_i ⧢ u^(1)_i + ½ Σ a_ij ⧢ (u^(2)_ji + u^(1)_j ⧢ u^(1)_i)
inline TensorCoeffs R_op(const TensorCoeffs& u, const SdeSpec& spec) {
    detail::require_spec_shape(u, spec);
    const int d = spec.d, N = u.level();
    auto s1 = shift1(u);
    auto s2 = shift2(u);
    for (auto& t : s1) t = t.resized(N);
    for (auto& t : s2.entries) t = t.resized(N);
    TensorCoeffs out(d, N);
    for (int i = 0; i < d; ++i)
        if (!detail::is_zero(spec.b[static_cast<std::size_t>(i)])) out += shuffle(spec.b[static_cast<std::size_t>(i)], s1[static_cast<std::size_t>(i)]);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (detail::is_zero(spec.a(i, j))) continue;
            TensorCoeffs inner = s2(j, i) + shuffle(s1[static_cast<std::size_t>(j)], s1[static_cast<std::size_t>(i)]);
            out.axpy(0.5, shuffle(spec.a(i, j), inner));
        }
    return out;
}

// L(u) = Σ b_i ⧢ u^(1)_i + ½ Σ a_ij ⧢ u^(2)_ji
inline TensorCoeffs L_op(const TensorCoeffs& u, const SdeSpec& spec) {
    detail::require_spec_shape(u, spec);
    const int d = spec.d, N = u.level();
    auto s1 = shift1(u);
    auto s2 = shift2(u);
    TensorCoeffs out(d, N);
    for (int i = 0; i < d; ++i)
        if (!detail::is_zero(spec.b[static_cast<std::size_t>(i)]))
            out += shuffle(spec.b[static_cast<std::size_t>(i)], s1[static_cast<std::size_t>(i)].resized(N));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (detail::is_zero(spec.a(i, j))) continue;
            out.axpy(0.5, shuffle(spec.a(i, j), s2(j, i).resized(N)));
        }
    return out;
}

// Recovers the linear operator from the quadratic one by evaluating at u and lambda*u.
inline TensorCoeffs affine_to_poly(const TensorCoeffs& u, const SdeSpec& spec, double lambda) {
    if (lambda == 0.0 || lambda == 1.0) throw std::invalid_argument("affine_to_poly: lambda must differ from 0 and 1");
    TensorCoeffs out = R_op(u, spec);
    out *= lambda / (lambda - 1.0);
    out.axpy(-1.0 / (lambda * (lambda - 1.0)), R_op(lambda * u, spec));
    return out;
}

// R(u) recovered from L: L(u) + ½ L(u⧢u) − u ⧢ L(u)
inline TensorCoeffs poly_to_affine(const TensorCoeffs& u, const SdeSpec& spec) {
    TensorCoeffs Lu = L_op(u, spec);
    TensorCoeffs out = Lu;
    out.axpy(0.5, L_op(shuffle(u, u), spec));
    out -= shuffle(u, Lu);
    return out;
}

// largest coefficient gap in L(exp⧢u) = exp⧢u ⧢ R(u) over levels <= N-2, where truncation is exact
inline double exp_relation_defect(const TensorCoeffs& u, const SdeSpec& spec) {
    TensorCoeffs e = shuffle_exp(u);
    TensorCoeffs lhs = L_op(e, spec);
    TensorCoeffs rhs = shuffle(e, R_op(u, spec));
    const int M = std::max(u.level() - 2, 0);
    return lhs.resized(M).max_abs_diff(rhs.resized(M));
}

// Given c(t) solving the linear equation from exp⧢(u0), returns psi(t) with exp⧢psi = c.
// The empty-word coefficient integrates d/dt log c_∅ = (Lc)_∅ / c_∅, evaluated exactly by
// telescoping log-ratios between grid points so the branch stays continuous.
inline std::vector<TensorCoeffs> linear_to_riccati(const std::vector<TensorCoeffs>& c, const TensorCoeffs& u0, const SdeSpec& spec) {
    detail::require_spec_shape(u0, spec);
    std::vector<TensorCoeffs> psi;
    psi.reserve(c.size());
    Complex psi0 = u0[0];
    for (std::size_t k = 0; k < c.size(); ++k) {
        detail::require_spec_shape(c[k], spec);
        if (c[k][0] == Complex(0.0) || !c[k].all_finite()) throw std::domain_error("linear_to_riccati: empty-word coefficient vanished or non-finite");
        if (k > 0) psi0 += std::log(c[k][0] / c[k - 1][0]);
        TensorCoeffs normalized = c[k];
        normalized *= 1.0 / c[k][0];
        normalized[0] = 1.0;
        TensorCoeffs p = shuffle_log(normalized);
        p[0] = psi0;
        psi.push_back(std::move(p));
    }
    return psi;
}

// Matrix of L on T^N in the word basis; requires deg b_i <= 1 and deg a_ij <= 2 so T^N is invariant.
inline Eigen::MatrixXcd linear_matrix(const SdeSpec& spec, int N) {
    spec.validate();
    auto check = [&](const TensorCoeffs& t, int max_len, const std::string& name) {
        for (int n = max_len + 1; n <= t.level(); ++n) {
            auto blk = t.block(n);
            for (std::size_t r = 0; r < blk.size(); ++r)
                if (blk[r] != Complex(0.0))
                    throw std::invalid_argument("linear_matrix: " + name + " has a coefficient at word (" + rank_word(r, n, spec.d).to_string() +
                                                ") of length " + std::to_string(n) + " > " + std::to_string(max_len) +
                                                "; truncated space is not invariant");
        }
    };
    for (int i = 0; i < spec.d; ++i) check(spec.b[static_cast<std::size_t>(i)], 1, "drift characteristic b_" + std::to_string(i + 1));
    for (int i = 0; i < spec.d; ++i)
        for (int j = 0; j < spec.d; ++j)
            check(spec.a(i, j), 2, "diffusion characteristic a_" + std::to_string(i + 1) + std::to_string(j + 1));
    SdeSpec s = spec.with_level(N);
    const std::size_t n = tensor_size(spec.d, N);
    Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
        TensorCoeffs e(spec.d, N);
        e[k] = 1.0;
        TensorCoeffs col = L_op(e, s);
        for (std::size_t r = 0; r < n; ++r) G(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = col[r];
    }
    return G;
}

}  // namespace sigcalc
