#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "powerseries.hpp"
#include "sig_operators.hpp"
#include "tensor_algebra.hpp"

namespace sigcalc {

struct SchemeConfig {
    double T = 1.0;
    int steps = 1000;  // RK4 steps for the Riccati scheme, grid size N for the transport scheme
    int M = 80;        // transport scheme: Euler composition parameter
    double explosion_threshold = 1e10;
    bool adaptive = false;  // step halving until two half steps agree with one full step
    double rtol = 1e-8;
    int max_halvings = 20;
};

enum class RunStatus { Completed, Exploded };

inline std::string to_string(RunStatus s) { return s == RunStatus::Completed ? "completed" : "exploded"; }

template <class State>
struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    RunStatus status = RunStatus::Completed;
    std::optional<double> explosion_time;
};

// values of a scalar quantity on a time grid, truncated at an explosion
struct ValueSeries {
    std::vector<double> times;
    std::vector<Complex> values;
    RunStatus status = RunStatus::Completed;
    std::optional<double> explosion_time;
    std::vector<std::string> warnings;
};

template <class State>
concept OdeState = requires(State a, const State& b, Complex s) {
    { a += b };
    { a.axpy(s, b) };
    { b.max_abs() } -> std::convertible_to<double>;
    { b.all_finite() } -> std::convertible_to<bool>;
};

namespace detail {

template <OdeState State, class F>
State rk4_step(const F& f, const State& y, double h) {
    State k1 = f(y);
    State tmp = y;
    tmp.axpy(0.5 * h, k1);
    State k2 = f(tmp);
    tmp = y;
    tmp.axpy(0.5 * h, k2);
    State k3 = f(tmp);
    tmp = y;
    tmp.axpy(h, k3);
    State k4 = f(tmp);
    State out = y;
    out.axpy(h / 6.0, k1);
    out.axpy(h / 3.0, k2);
    out.axpy(h / 3.0, k3);
    out.axpy(h / 6.0, k4);
    return out;
}

template <OdeState State>
bool blown_up(const State& y, double threshold) {
    return !y.all_finite() || y.max_abs() > threshold;
}

}  // namespace detail

// Classical RK4 on a uniform grid of cfg.steps steps over [0, cfg.T]; explosion when a
// coefficient becomes non-finite or exceeds the threshold in magnitude.
template <OdeState State, class F>
Trajectory<State> ode_integrate(const F& f, const State& y0, const SchemeConfig& cfg) {
    if (cfg.steps < 1) throw std::invalid_argument("ode_integrate: steps must be >= 1");
    if (!(cfg.T >= 0.0)) throw std::invalid_argument("ode_integrate: horizon must be >= 0");
    Trajectory<State> traj;
    traj.times.push_back(0.0);
    traj.states.push_back(y0);
    const double h = cfg.T / cfg.steps;
    State y = y0;
    for (int s = 0; s < cfg.steps; ++s) {
        const double t0 = s * h;
        if (!cfg.adaptive) {
            y = detail::rk4_step(f, y, h);
            if (detail::blown_up(y, cfg.explosion_threshold)) {
                traj.status = RunStatus::Exploded;
                traj.explosion_time = t0 + h;
                return traj;
            }
        } else {
            // integrate [t0, t0+h] with sub-step hs chosen by step-doubling
            double t = t0, hs = h;
            int halvings = 0;
            while (t < t0 + h - 1e-15 * h) {
                hs = std::min(hs, t0 + h - t);
                State full = detail::rk4_step(f, y, hs);
                State half = detail::rk4_step(f, detail::rk4_step(f, y, 0.5 * hs), 0.5 * hs);
                bool bad = detail::blown_up(half, cfg.explosion_threshold);
                double scale = std::max(1.0, half.max_abs());
                State diff = half;
                diff.axpy(-1.0, full);
                if (!bad && diff.max_abs() > cfg.rtol * scale && halvings < cfg.max_halvings) {
                    hs *= 0.5;
                    ++halvings;
                    continue;
                }
                if (bad) {
                    traj.status = RunStatus::Exploded;
                    traj.explosion_time = t + hs;
                    return traj;
                }
                y = half;
                t += hs;
            }
        }
        traj.times.push_back((s + 1) * h);
        traj.states.push_back(y);
    }
    return traj;
}

inline Complex empty_coeff(const TensorCoeffs& t) { return t[0]; }
inline Complex empty_coeff(const Seq& s) { return s[0]; }

// Riccati scheme: psi' = R(psi), value exp(psi_∅)
template <OdeState State, class Rop>
ValueSeries scheme1_riccati(const Rop& R, const State& u0, const SchemeConfig& cfg, Trajectory<State>* traj_out = nullptr) {
    auto traj = ode_integrate(R, u0, cfg);
    ValueSeries vs;
    vs.times = traj.times;
    for (const auto& s : traj.states) vs.values.push_back(std::exp(empty_coeff(s)));
    vs.status = traj.status;
    vs.explosion_time = traj.explosion_time;
    if (traj_out) *traj_out = std::move(traj);
    return vs;
}

namespace detail {

// Neumaier summation of complex terms in order of increasing magnitude
inline Complex compensated_sum(std::vector<Complex> terms) {
    std::sort(terms.begin(), terms.end(), [](const Complex& a, const Complex& b) { return std::abs(a) < std::abs(b); });
    auto sum1 = [](double& s, double& c, double x) {
        double t = s + x;
        c += (std::abs(s) >= std::abs(x)) ? (s - t) + x : (x - t) + s;
        s = t;
    };
    double sr = 0, cr = 0, si = 0, ci = 0;
    for (const auto& x : terms) {
        sum1(sr, cr, x.real());
        sum1(si, ci, x.imag());
    }
    return {sr + cr, si + ci};
}

inline double log_binomial(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace detail

// Transport scheme: v(Tn/N) = Σ_m C(n,m)(1-λ)^{n-m} λ^m exp((A_M)^{∘m}(u0)_∅), A_M(u) = u + R(u)/M, λ = MT/N.
// For λ <= 1 the weights form a binomial distribution; λ > 1 is evaluated but flagged.
template <OdeState State, class Rop>
ValueSeries scheme2_transport(const Rop& R, const State& u0, const SchemeConfig& cfg) {
    const int N = cfg.steps;
    if (N < 1 || cfg.M < 1) throw std::invalid_argument("scheme2_transport: N and M must be >= 1");
    const double lambda = cfg.M * cfg.T / N;
    ValueSeries vs;
    if (lambda > 1.0)
        vs.warnings.push_back("lambda = M*T/N = " + std::to_string(lambda) + " > 1: mixture weights alternate in sign");

    // log of exp(psi_∅) for each composition power; NaN once a composition stops being finite
    std::vector<Complex> log_vals;
    log_vals.reserve(static_cast<std::size_t>(N + 1));
    State u = u0;
    bool finite = u.all_finite();
    for (int m = 0; m <= N; ++m) {
        if (m > 0 && finite) {
            State step = R(u);
            u.axpy(1.0 / cfg.M, step);
            finite = u.all_finite();
        }
        log_vals.push_back(finite ? empty_coeff(u) : Complex(std::nan(""), 0.0));
    }

    const double log_lam = lambda > 0 ? std::log(lambda) : -INFINITY;
    const double log_one_minus = std::log(std::abs(1.0 - lambda));
    for (int n = 0; n <= N; ++n) {
        const double t = cfg.T * n / N;
        std::vector<Complex> terms;
        bool nonfinite = false;
        for (int m = 0; m <= n; ++m) {
            // weight C(n,m) (1-λ)^{n-m} λ^m, zero when λ = 1 and m < n, or λ = 0 and m > 0
            if (lambda == 1.0 && m < n) continue;
            if (lambda == 0.0 && m > 0) continue;
            double logw = detail::log_binomial(n, m) + (n - m == 0 ? 0.0 : (n - m) * log_one_minus) + (m == 0 ? 0.0 : m * log_lam);
            double sign = (lambda > 1.0 && (n - m) % 2 == 1) ? -1.0 : 1.0;
            const Complex lv = log_vals[static_cast<std::size_t>(m)];
            if (!std::isfinite(lv.real()) || !std::isfinite(lv.imag())) {
                nonfinite = true;
                break;
            }
            terms.push_back(sign * std::exp(Complex(logw, 0.0) + lv));
        }
        Complex v = nonfinite ? Complex(std::nan(""), 0.0) : detail::compensated_sum(std::move(terms));
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()) || std::abs(v) > cfg.explosion_threshold) {
            vs.status = RunStatus::Exploded;
            vs.explosion_time = t;
            return vs;
        }
        vs.times.push_back(t);
        vs.values.push_back(v);
    }
    return vs;
}

// exp(A) by scaling and squaring with the diagonal (6,6) Padé approximant, ||A||_1 / 2^s <= 1/2
inline Eigen::MatrixXcd matrix_exp(const Eigen::MatrixXcd& A) {
    if (A.rows() != A.cols()) throw DimensionError("matrix_exp: matrix is not square");
    if (!A.allFinite()) throw std::domain_error("matrix_exp: non-finite input");
    const Eigen::Index n = A.rows();
    if (n == 0) return A;
    const double norm = A.cwiseAbs().colwise().sum().maxCoeff();
    int s = 0;
    if (norm > 0.5) s = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    Eigen::MatrixXcd X = A / std::ldexp(1.0, s);
    // c_k = (12-k)! 6! / (12! k! (6-k)!)
    double c[7];
    c[0] = 1.0;
    for (int k = 1; k <= 6; ++k) c[k] = c[k - 1] * (6 - k + 1) / (k * (12.0 - k + 1));
    const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);
    Eigen::MatrixXcd P = I, Num = c[0] * I, Den = c[0] * I;
    for (int k = 1; k <= 6; ++k) {
        P = P * X;
        Num += c[k] * P;
        Den += ((k % 2) ? -c[k] : c[k]) * P;
    }
    Eigen::MatrixXcd F = Den.partialPivLu().solve(Num);
    for (int i = 0; i < s; ++i) F = F * F;
    if (!F.allFinite()) throw std::domain_error("matrix_exp: result overflowed");
    return F;
}

struct LinearResult {
    Eigen::VectorXcd c;
    Complex value;
};

// Linear scheme: c(T) = exp(TG) u0 and value Σ c_n x0^n. With rho != 1 the exponential is taken in
// the basis rescaled by rho^n, which balances coefficient growth for large truncations.
inline LinearResult scheme3_linear(const Eigen::MatrixXcd& G, const Eigen::VectorXcd& u0, double T, Complex x0, double rho = 1.0) {
    if (G.rows() != u0.size()) throw DimensionError("scheme3_linear: matrix and vector sizes differ");
    if (!(rho > 0.0)) throw std::invalid_argument("scheme3_linear: rho must be positive");
    const Eigen::Index n = G.rows();
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) w(i) = std::pow(rho, static_cast<double>(i));
    Eigen::MatrixXcd Gs = w.cwiseInverse().asDiagonal() * G * w.asDiagonal();
    Eigen::VectorXcd c = w.asDiagonal() * (matrix_exp(T * Gs) * (w.cwiseInverse().asDiagonal() * u0));
    Complex v = 0.0, p = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        v += c(i) * p;
        p *= x0;
    }
    return {c, v};
}

// E[X_T] for the signature process started at the unit, via the moment formula: row ∅ of exp(TG)
inline TensorCoeffs expected_signature_linear(const SdeSpec& spec, int N, double T) {
    Eigen::MatrixXcd E = matrix_exp(T * linear_matrix(spec, N));
    TensorCoeffs out(spec.d, N);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = E(0, static_cast<Eigen::Index>(k));
    return out;
}

}  // namespace sigcalc
