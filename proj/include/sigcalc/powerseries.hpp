#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tensor_algebra.hpp"

namespace sigcalc {

// Truncated coefficient sequence (u_0, ..., u_K).
class Seq {
public:
    Seq() : c_(1, 0.0) {}
    explicit Seq(int K) : c_(static_cast<std::size_t>(K + 1), 0.0) {
        if (K < 0) throw DimensionError("Seq: truncation must be >= 0");
    }
    Seq(std::initializer_list<Complex> v) : c_(v) {
        if (c_.empty()) c_.push_back(0.0);
    }
    explicit Seq(std::vector<Complex> v) : c_(std::move(v)) {
        if (c_.empty()) throw DimensionError("Seq: empty coefficient vector");
    }

    static Seq delta(int k, int K, Complex value = 1.0) {
        Seq s(K);
        if (k <= K) s[k] = value;
        return s;
    }

    int K() const { return static_cast<int>(c_.size()) - 1; }
    std::size_t size() const { return c_.size(); }
    Complex& operator[](int k) { return c_[static_cast<std::size_t>(k)]; }
    const Complex& operator[](int k) const { return c_[static_cast<std::size_t>(k)]; }
    // zero beyond the stored range
    Complex get(int k) const { return (k >= 0 && k <= K()) ? c_[static_cast<std::size_t>(k)] : Complex(0.0); }
    const std::vector<Complex>& data() const { return c_; }
    std::vector<Complex>& data() { return c_; }

    Seq resized(int K) const {
        Seq s(K);
        for (int k = 0; k <= std::min(K, this->K()); ++k) s[k] = (*this)[k];
        return s;
    }

    Complex empty_coeff() const { return c_[0]; }

    Seq& operator+=(const Seq& o) {
        require_same(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    Seq& operator-=(const Seq& o) {
        require_same(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }
    Seq& operator*=(Complex s) {
        for (auto& x : c_) x *= s;
        return *this;
    }
    Seq& axpy(Complex s, const Seq& x) {
        require_same(x);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += s * x.c_[i];
        return *this;
    }
    friend Seq operator+(Seq a, const Seq& b) { return a += b; }
    friend Seq operator-(Seq a, const Seq& b) { return a -= b; }
    friend Seq operator*(Complex s, Seq a) { return a *= s; }
    friend Seq operator*(Seq a, Complex s) { return a *= s; }

    double max_abs() const {
        double m = 0.0;
        for (const auto& x : c_) m = std::max(m, std::abs(x));
        return m;
    }
    double max_abs_diff(const Seq& o) const {
        require_same(o);
        double m = 0.0;
        for (std::size_t i = 0; i < c_.size(); ++i) m = std::max(m, std::abs(c_[i] - o.c_[i]));
        return m;
    }
    bool all_finite() const {
        for (const auto& x : c_)
            if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
        return true;
    }

    // Σ u_k x^k
    Complex evaluate(Complex x) const {
        Complex r = 0.0;
        for (int k = K(); k >= 0; --k) r = r * x + (*this)[k];
        return r;
    }

    void require_same(const Seq& o) const {
        if (K() != o.K()) throw DimensionError("Seq truncation mismatch: " + std::to_string(K()) + " vs " + std::to_string(o.K()));
    }

private:
    std::vector<Complex> c_;
};

// One-dimensional diffusion dX = b(X)dt + sqrt(a(X))dW with polynomial b, a (monomial coefficients).
struct Model1D {
    std::string name;
    Seq b{0.0};
    Seq a{0.0};
    double x0 = 0.0;
    int K = 20;
    std::optional<std::pair<double, double>> interval;

    Complex drift(double x) const { return b.evaluate(x); }
    Complex diffusion(double x) const { return a.evaluate(x); }

    // a must be non-negative on the declared state interval
    void validate() const {
        if (K < 0) throw DimensionError("model: K must be >= 0");
        if (!interval) return;
        auto [lo, hi] = *interval;
        for (int i = 0; i <= 200; ++i) {
            double x = lo + (hi - lo) * i / 200.0;
            if (a.evaluate(x).real() < -1e-12)
                throw std::invalid_argument("model '" + name + "': diffusion coefficient negative at x=" + std::to_string(x));
        }
    }
};

inline Seq conv(const Seq& u, const Seq& v) {
    u.require_same(v);
    const int K = u.K();
    Seq out(K);
    for (int i = 0; i <= K; ++i) {
        if (u[i] == Complex(0.0)) continue;
        for (int j = 0; i + j <= K; ++j) out[i + j] += u[i] * v[j];
    }
    return out;
}

// polynomial p (any length) times series u, truncated at u's K
inline Seq poly_mul(const Seq& p, const Seq& u) {
    const int K = u.K();
    Seq out(K);
    for (int i = 0; i <= std::min(p.K(), K); ++i) {
        if (p[i] == Complex(0.0)) continue;
        for (int j = 0; i + j <= K; ++j) out[i + j] += p[i] * u[j];
    }
    return out;
}

// u^[1]_k = (k+1) u_{k+1}
inline Seq bracket1(const Seq& u) {
    Seq out(std::max(u.K() - 1, 0));
    for (int k = 0; k + 1 <= u.K(); ++k) out[k] = static_cast<double>(k + 1) * u[k + 1];
    return out;
}

// u^[2]_k = (k+1)(k+2) u_{k+2}
inline Seq bracket2(const Seq& u) {
    Seq out(std::max(u.K() - 2, 0));
    for (int k = 0; k + 2 <= u.K(); ++k) out[k] = static_cast<double>((k + 1) * (k + 2)) * u[k + 2];
    return out;
}

inline Seq R_pow(const Seq& u, const Model1D& m) {
    const int K = u.K();
    Seq d1 = bracket1(u).resized(K);
    Seq d2 = bracket2(u).resized(K);
    Seq out = poly_mul(m.b, d1);
    out.axpy(0.5, poly_mul(m.a, d2 + conv(d1, d1)));
    return out;
}

inline Seq L_pow(const Seq& u, const Model1D& m) {
    const int K = u.K();
    Seq out = poly_mul(m.b, bracket1(u).resized(K));
    out.axpy(0.5, poly_mul(m.a, bracket2(u).resized(K)));
    return out;
}

inline double factorial(int k) { return std::tgamma(static_cast<double>(k) + 1.0); }

// monomial coefficients -> factorial-weighted coefficients: u_k * k!
inline Seq reweight(const Seq& u) {
    Seq out = u;
    for (int k = 0; k <= u.K(); ++k) out[k] *= factorial(k);
    return out;
}

inline Seq unweight(const Seq& u) {
    Seq out = u;
    for (int k = 0; k <= u.K(); ++k) out[k] /= factorial(k);
    return out;
}

// product in the factorial basis: (u ⧢ v)_k = Σ C(k,i) u_i v_{k-i}
inline Seq shuffle1(const Seq& u, const Seq& v) {
    u.require_same(v);
    const int K = u.K();
    Seq out(K);
    for (int k = 0; k <= K; ++k) {
        Complex s = 0.0;
        for (int i = 0; i <= k; ++i) s += binomial(k, i) * u[i] * v[k - i];
        out[k] = s;
    }
    return out;
}

namespace detail {

inline Seq shift_left(const Seq& u, int by) {
    Seq out(u.K());
    for (int k = 0; k + by <= u.K(); ++k) out[k] = u[k + by];
    return out;
}

inline Seq sig_coeffs(const Seq& poly, int K) { return reweight(poly.resized(K)); }

}  // namespace detail

// R in the factorial basis, g_u(x) = Σ u_k x^k / k!
inline Seq R_sig1(const Seq& u, const Model1D& m) {
    const int K = u.K();
    Seq s1 = detail::shift_left(u, 1);
    Seq s2 = detail::shift_left(u, 2);
    Seq out = shuffle1(detail::sig_coeffs(m.b, K), s1);
    out.axpy(0.5, shuffle1(detail::sig_coeffs(m.a, K), s2 + shuffle1(s1, s1)));
    return out;
}

inline Seq L_sig1(const Seq& u, const Model1D& m) {
    const int K = u.K();
    Seq out = shuffle1(detail::sig_coeffs(m.b, K), detail::shift_left(u, 1));
    out.axpy(0.5, shuffle1(detail::sig_coeffs(m.a, K), detail::shift_left(u, 2)));
    return out;
}

// coefficients of exp(Σ u_k x^k), from f' = g' f
inline Seq exp_star(const Seq& u) {
    const int K = u.K();
    Seq c(K);
    c[0] = std::exp(u[0]);
    for (int k = 0; k < K; ++k) {
        Complex s = 0.0;
        for (int i = 0; i <= k; ++i) s += static_cast<double>(i + 1) * u[i + 1] * c[k - i];
        c[k + 1] = s / static_cast<double>(k + 1);
    }
    return c;
}

// matrix of L on polynomials of degree <= K; column j is L applied to x^j
inline Eigen::MatrixXcd linear_matrix_1d(const Model1D& m, int K) {
    if (m.b.K() > 1 || m.a.K() > 2) {
        for (int k = 2; k <= m.b.K(); ++k)
            if (m.b[k] != Complex(0.0)) throw std::invalid_argument("linear_matrix_1d: drift has degree " + std::to_string(k) + " > 1");
        for (int k = 3; k <= m.a.K(); ++k)
            if (m.a[k] != Complex(0.0)) throw std::invalid_argument("linear_matrix_1d: diffusion has degree " + std::to_string(k) + " > 2");
    }
    Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(K + 1, K + 1);
    for (int j = 0; j <= K; ++j)
        for (int i = 0; i <= K; ++i)
            G(i, j) = static_cast<double>(j) * m.b.get(i - (j - 1)) + 0.5 * static_cast<double>(j * (j - 1)) * m.a.get(i - (j - 2));
    return G;
}

// ---- model constructors ----

inline Model1D brownian_model(double x0 = 0.0, int K = 20) {
    return Model1D{"brownian", Seq{0.0}, Seq{1.0}, x0, K, std::nullopt};
}

inline Model1D jacobi_model(double x0 = 0.5, int K = 30) {
    Model1D m{"jacobi", Seq{0.0}, Seq{0.0, 1.0, -1.0}, x0, K, std::make_pair(0.0, 1.0)};
    m.validate();
    return m;
}

// Jacobi diffusion written for X - 1, living on [-1, 0]
inline Model1D reflected_jacobi_model(double x0 = -0.5, int K = 30) {
    Model1D m{"reflected-jacobi", Seq{0.0}, Seq{0.0, -1.0, -1.0}, x0, K, std::make_pair(-1.0, 0.0)};
    m.validate();
    return m;
}

// a(x) = x(1-x)(1-x/2)
inline Model1D interval_cubic_model(double x0 = 0.5, int K = 30) {
    Model1D m{"interval-cubic", Seq{0.0}, Seq{0.0, 1.0, -1.5, 0.5}, x0, K, std::make_pair(0.0, 1.0)};
    m.validate();
    return m;
}

// drift Σ_{n>=1} b_n (x^n - x^{n+1}), diffusion x - x^2
inline Model1D fleming_viot_model(const std::vector<double>& bn, double x0 = 0.5, int K = 30) {
    const int deg = static_cast<int>(bn.size()) + 1;
    Seq drift(deg);
    for (int n = 1; n <= deg; ++n) {
        double cur = (n <= static_cast<int>(bn.size())) ? bn[static_cast<std::size_t>(n - 1)] : 0.0;
        double prev = (n >= 2) ? bn[static_cast<std::size_t>(n - 2)] : 0.0;
        drift[n] = cur - prev;
    }
    Model1D m{"fleming-viot", drift, Seq{0.0, 1.0, -1.0}, x0, K, std::make_pair(0.0, 1.0)};
    m.validate();
    return m;
}

// initial coefficients of -c*Y0*exp(x), Y0 = exp(X)
inline Seq gbm_initial(double c, double y0, int K) {
    Seq u(K);
    double f = 1.0;
    for (int k = 0; k <= K; ++k) {
        if (k > 0) f /= k;
        u[k] = -c * y0 * f;
    }
    return u;
}

}  // namespace sigcalc
