#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <boost/random/normal_distribution.hpp>

#include "powerseries.hpp"
#include "sig_operators.hpp"
#include "signature.hpp"

namespace sigcalc {

// Philox4x32-10 counter-based generator. Each (seed, stream) pair is an independent sequence,
// so path i draws the same numbers no matter which thread simulates it.
class Philox4x32 {
public:
    using result_type = std::uint32_t;
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    Philox4x32(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          ctr_{0, 0, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)} {}

    result_type operator()() {
        if (pos_ == 4) refill();
        return buf_[pos_++];
    }

    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> x, std::array<std::uint32_t, 2> k) {
        for (int r = 0; r < 10; ++r) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(0xD2511F53u) * x[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(0xCD9E8D57u) * x[2];
            x = {static_cast<std::uint32_t>(p1 >> 32) ^ x[1] ^ k[0], static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ x[3] ^ k[1], static_cast<std::uint32_t>(p0)};
            k[0] += 0x9E3779B9u;
            k[1] += 0xBB67AE85u;
        }
        return x;
    }

private:
    void refill() {
        buf_ = block(ctr_, key_);
        if (++ctr_[0] == 0) ++ctr_[1];
        pos_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> ctr_;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
};

enum class Discretization { Euler, Milstein };

struct SimConfig {
    std::size_t n_paths = 100000;
    double T = 1.0;
    double dt = 1e-3;
    std::uint64_t seed = 20240601;
    Discretization scheme = Discretization::Euler;
    std::size_t block_size = 4096;
};

struct McEstimate {
    Complex mean = 0.0;
    double std_error = 0.0;  // sqrt(E|Z - mean|^2 / n)
    double std_error_re = 0.0;
    double std_error_im = 0.0;
    std::size_t n = 0;
};

namespace detail {

inline unsigned mc_threads() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("SIGCALC_THREADS")) {
        int cap = std::atoi(env);
        if (cap >= 1) return std::min(hw, static_cast<unsigned>(cap));
    }
    return hw;
}

// running sums for one complex output within a block; combined across blocks in block order
struct Moments {
    double n = 0, mr = 0, mi = 0, m2r = 0, m2i = 0;

    void add(Complex z) {
        n += 1;
        const double dr = z.real() - mr, di = z.imag() - mi;
        mr += dr / n;
        mi += di / n;
        m2r += dr * (z.real() - mr);
        m2i += di * (z.imag() - mi);
    }
    void merge(const Moments& o) {
        if (o.n == 0) return;
        const double tot = n + o.n;
        const double dr = o.mr - mr, di = o.mi - mi;
        m2r += o.m2r + dr * dr * n * o.n / tot;
        m2i += o.m2i + di * di * n * o.n / tot;
        mr += dr * o.n / tot;
        mi += di * o.n / tot;
        n = tot;
    }
    McEstimate estimate() const {
        McEstimate e;
        e.mean = {mr, mi};
        e.n = static_cast<std::size_t>(n);
        if (n > 1) {
            e.std_error_re = std::sqrt(m2r / (n - 1) / n);
            e.std_error_im = std::sqrt(m2i / (n - 1) / n);
            e.std_error = std::sqrt((m2r + m2i) / (n - 1) / n);
        }
        return e;
    }
};

// Runs fn(first_path, last_path, moments*) over blocks in parallel.
template <class BlockFn>
std::vector<McEstimate> run_blocks(std::size_t n_paths, std::size_t block_size, std::size_t n_out, BlockFn fn) {
    if (n_paths == 0) throw std::invalid_argument("Monte Carlo needs at least one path");
    block_size = std::max<std::size_t>(block_size, 1);
    const std::size_t n_blocks = (n_paths + block_size - 1) / block_size;
    std::vector<std::vector<Moments>> results(n_blocks, std::vector<Moments>(n_out));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t b = next++; b < n_blocks; b = next++)
            fn(b * block_size, std::min(n_paths, (b + 1) * block_size), results[b].data());
    };
    const unsigned nt = std::min<std::size_t>(mc_threads(), n_blocks);
    if (nt <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < nt; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    // pairwise tree reduction with a fixed shape, independent of the thread count
    for (std::size_t stride = 1; stride < n_blocks; stride *= 2)
        for (std::size_t b = 0; b + stride < n_blocks; b += 2 * stride)
            for (std::size_t k = 0; k < n_out; ++k) results[b][k].merge(results[b + stride][k]);
    std::vector<McEstimate> out;
    for (const auto& m : results[0]) out.push_back(m.estimate());
    return out;
}

inline int n_steps(const SimConfig& cfg) {
    if (!(cfg.dt > 0) || !(cfg.T > 0)) throw std::invalid_argument("simulation: dt and T must be positive");
    return std::max(1, static_cast<int>(std::llround(cfg.T / cfg.dt)));
}

}  // namespace detail

// ---------------- one-dimensional diffusions ----------------

struct Ensemble1D {
    std::vector<double> terminal;
    std::size_t clamp_count = 0;  // steps where a(x) < 0 was clamped or x was projected into the interval
};

namespace detail {

class Path1D {
public:
    Path1D(const Model1D& m, const SimConfig& cfg) : m_(m), cfg_(cfg), steps_(n_steps(cfg)), h_(cfg.T / steps_), sq_(std::sqrt(h_)) {
        for (int k = 0; k <= m.b.K(); ++k) b_.push_back(m.b[k].real());
        for (int k = 0; k <= m.a.K(); ++k) a_.push_back(m.a[k].real());
        for (int k = 1; k <= m.a.K(); ++k) da_.push_back(k * m.a[k].real());
    }

    double run(std::size_t path, std::size_t& clamps) const {
        Philox4x32 eng(cfg_.seed, path);
        boost::random::normal_distribution<double> nd;
        double x = m_.x0;
        for (int s = 0; s < steps_; ++s) {
            double a = horner(a_, x);
            if (a < 0) {
                a = 0;
                ++clamps;
            }
            const double sig = std::sqrt(a);
            const double z = nd(eng);
            double dx = horner(b_, x) * h_ + sig * sq_ * z;
            // sigma sigma' = a'/2
            if (cfg_.scheme == Discretization::Milstein && sig > 0) dx += 0.25 * horner(da_, x) * h_ * (z * z - 1.0);
            x += dx;
            if (m_.interval) {
                auto [lo, hi] = *m_.interval;
                if (x < lo || x > hi) {
                    x = std::clamp(x, lo, hi);
                    ++clamps;
                }
            }
        }
        return x;
    }

private:
    static double horner(const std::vector<double>& c, double x) {
        double r = 0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * x + *it;
        return r;
    }
    const Model1D& m_;
    const SimConfig& cfg_;
    int steps_;
    double h_, sq_;
    std::vector<double> b_, a_, da_;
};

}  // namespace detail

inline Ensemble1D simulate_1d(const Model1D& m, const SimConfig& cfg) {
    m.validate();
    detail::Path1D p(m, cfg);
    Ensemble1D e;
    e.terminal.resize(cfg.n_paths);
    std::atomic<std::size_t> clamps{0};
    detail::run_blocks(cfg.n_paths, cfg.block_size, 0, [&](std::size_t lo, std::size_t hi, detail::Moments*) {
        std::size_t c = 0;
        for (std::size_t i = lo; i < hi; ++i) e.terminal[i] = p.run(i, c);
        clamps += c;
    });
    e.clamp_count = clamps;
    return e;
}

// E[f(X_T)] with standard error, streaming over paths
template <class F>
McEstimate mc_1d(const Model1D& m, const SimConfig& cfg, F f, std::size_t* clamp_count = nullptr) {
    m.validate();
    detail::Path1D p(m, cfg);
    std::atomic<std::size_t> clamps{0};
    auto res = detail::run_blocks(cfg.n_paths, cfg.block_size, 1, [&](std::size_t lo, std::size_t hi, detail::Moments* mom) {
        std::size_t c = 0;
        for (std::size_t i = lo; i < hi; ++i) mom[0].add(Complex(f(p.run(i, c))));
        clamps += c;
    });
    if (clamp_count) *clamp_count = clamps;
    return res[0];
}

inline McEstimate sample_mean(std::span<const Complex> z) {
    detail::Moments m;
    for (const auto& v : z) m.add(v);
    return m.estimate();
}

// ---------------- signature SDEs ----------------

// Observer that only looks at the terminal state; f(x, sig, out) writes n outputs.
template <class F>
struct TerminalObserver {
    F f;
    void start() {}
    void step(double, double, const double*, const RunningSignature&) {}
    void finish(const double* x, const RunningSignature& sig, Complex* out) { f(x, sig, out); }
};

template <class F>
TerminalObserver<F> terminal_observer(F f) {
    return {std::move(f)};
}

namespace detail {

struct SparseChar {
    std::vector<std::size_t> idx;
    std::vector<double> val;
    double eval(const RunningSignature& s) const {
        double r = 0;
        for (std::size_t k = 0; k < idx.size(); ++k) r += val[k] * s[idx[k]];
        return r;
    }
    bool constant() const { return idx.empty() || (idx.size() == 1 && idx[0] == 0); }
};

inline SparseChar sparse(const TensorCoeffs& t) {
    SparseChar s;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (std::abs(t[i].imag()) > 0) throw std::invalid_argument("simulation needs real characteristics");
        if (t[i].real() != 0) {
            s.idx.push_back(i);
            s.val.push_back(t[i].real());
        }
    }
    return s;
}

}  // namespace detail

// Simulates the signature SDE with Euler steps; characteristics are evaluated on the running
// signature of the path increments. Each path's observer sees every step and the terminal state.
// The diffusion factor is a Cholesky factor of a(X) when positive definite, otherwise an LDL
// factorisation with negative pivots clamped to zero (counted in clamp_count).
template <class Obs>
std::vector<McEstimate> mc_sigsde(const SdeSpec& spec, const SimConfig& cfg, int sig_level, const Obs& proto, std::size_t n_out,
                                  std::size_t* clamp_count = nullptr) {
    spec.validate();
    const int d = spec.d;
    const int level = std::max(sig_level, spec.level());
    const int steps = detail::n_steps(cfg);
    const double h = cfg.T / steps, sq = std::sqrt(h);
    std::vector<detail::SparseChar> bch, ach;
    for (const auto& t : spec.b) bch.push_back(detail::sparse(t));
    for (const auto& t : spec.a.entries) ach.push_back(detail::sparse(t));
    const bool const_a = std::all_of(ach.begin(), ach.end(), [](const auto& s) { return s.constant(); });
    bool diag_a = true;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (i != j && !ach[static_cast<std::size_t>(i * d + j)].idx.empty()) diag_a = false;
    const auto du = static_cast<std::size_t>(d);

    auto factor = [&](const Eigen::MatrixXd& A, Eigen::MatrixXd& out, std::size_t& clamps) {
        Eigen::LLT<Eigen::MatrixXd> llt(A);
        if (llt.info() == Eigen::Success) {
            out = llt.matrixL();
            return;
        }
        Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
        Eigen::VectorXd D = ldlt.vectorD();
        for (Eigen::Index i = 0; i < D.size(); ++i)
            if (D(i) < 0) {
                D(i) = 0;
                ++clamps;
            }
        Eigen::MatrixXd L = ldlt.matrixL();
        out = ldlt.transpositionsP().transpose() * L * D.cwiseSqrt().asDiagonal();
    };

    Eigen::MatrixXd A0(d, d), C0(d, d);
    std::size_t clamps0 = 0;
    if (const_a) {
        RunningSignature unit(d, 0);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) A0(i, j) = ach[static_cast<std::size_t>(i * d + j)].eval(unit);
        factor(A0, C0, clamps0);
    }
    std::atomic<std::size_t> clamps{0};
    auto res = detail::run_blocks(cfg.n_paths, cfg.block_size, n_out, [&](std::size_t lo, std::size_t hi, detail::Moments* mom) {
        RunningSignature sig(d, level);
        std::vector<double> x(du), dx(du), z(du), bv(du);
        Eigen::MatrixXd A(d, d), C = const_a ? C0 : Eigen::MatrixXd::Zero(d, d);
        std::vector<Complex> out(n_out);
        std::size_t c = 0;
        for (std::size_t p = lo; p < hi; ++p) {
            Philox4x32 eng(cfg.seed, p);
            boost::random::normal_distribution<double> nd;
            Obs obs = proto;
            obs.start();
            sig.reset();
            std::copy(spec.x0.begin(), spec.x0.end(), x.begin());
            for (int s = 0; s < steps; ++s) {
                for (std::size_t i = 0; i < du; ++i) bv[i] = bch[i].eval(sig);
                if (!const_a && diag_a) {
                    for (int i = 0; i < d; ++i) {
                        double v = ach[static_cast<std::size_t>(i * d + i)].eval(sig);
                        if (v < 0) {
                            v = 0;
                            ++c;
                        }
                        C(i, i) = std::sqrt(v);
                    }
                } else if (!const_a) {
                    for (int i = 0; i < d; ++i)
                        for (int j = 0; j < d; ++j) A(i, j) = ach[static_cast<std::size_t>(i * d + j)].eval(sig);
                    factor(A, C, c);
                }
                for (auto& v : z) v = nd(eng);
                for (std::size_t i = 0; i < du; ++i) {
                    double acc = bv[i] * h;
                    for (std::size_t j = 0; j <= i; ++j) acc += C(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * sq * z[j];
                    for (std::size_t j = i + 1; j < du; ++j) acc += C(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * sq * z[j];
                    dx[i] = acc;
                }
                obs.step(s * h, h, x.data(), sig);
                for (std::size_t i = 0; i < du; ++i) x[i] += dx[i];
                sig.advance(dx);
            }
            obs.finish(x.data(), sig, out.data());
            for (std::size_t k = 0; k < n_out; ++k) mom[k].add(out[k]);
        }
        clamps += c;
    });
    if (clamp_count) *clamp_count = clamps + clamps0 * (const_a ? 1 : 0);
    return res;
}

struct ExpectedSignatureMC {
    TensorCoeffs mean;
    std::vector<double> std_error;  // per coefficient, in storage order
    std::size_t n_paths = 0;
};

inline ExpectedSignatureMC expected_signature_mc(const SdeSpec& spec, const SimConfig& cfg, int N) {
    const std::size_t n = tensor_size(spec.d, N);
    auto obs = terminal_observer([n](const double*, const RunningSignature& s, Complex* out) {
        for (std::size_t k = 0; k < n; ++k) out[k] = s[k];
    });
    auto est = mc_sigsde(spec, cfg, N, obs, n);
    ExpectedSignatureMC r{TensorCoeffs(spec.d, N), {}, cfg.n_paths};
    for (std::size_t k = 0; k < n; ++k) {
        r.mean[k] = est[k].mean;
        r.std_error.push_back(est[k].std_error);
    }
    return r;
}

// sample mean of the signatures of a given path ensemble
inline ExpectedSignatureMC expected_signature_mc(std::span<const PiecewisePath> paths, int N) {
    if (paths.empty()) throw std::invalid_argument("expected_signature_mc: empty ensemble");
    const int d = paths.front().dim();
    const std::size_t n = tensor_size(d, N);
    std::vector<detail::Moments> mom(n);
    for (const auto& p : paths) {
        if (p.dim() != d) throw DimensionError("expected_signature_mc: paths of different dimension");
        auto s = path_signature(p, N).value;
        for (std::size_t k = 0; k < n; ++k) mom[k].add(s[k]);
    }
    ExpectedSignatureMC r{TensorCoeffs(d, N), {}, paths.size()};
    for (std::size_t k = 0; k < n; ++k) {
        auto e = mom[k].estimate();
        r.mean[k] = e.mean;
        r.std_error.push_back(e.std_error);
    }
    return r;
}

// ---------------- planar Brownian motion and Lévy area ----------------

// characteristic function E exp(iλA_T + iγ·W_T), A_T = ½∫(W²dW¹ − W¹dW²)
struct LevyPoint {
    double lambda = 0, gamma1 = 0, gamma2 = 0;
};

inline Complex levy_closed_form(const LevyPoint& p, double T) {
    const double gg = p.gamma1 * p.gamma1 + p.gamma2 * p.gamma2;
    const double damp = p.lambda == 0 ? gg * T / 2 : gg * std::tanh(p.lambda * T / 2) / p.lambda;
    return std::exp(-damp) / std::cosh(p.lambda * T / 2);
}

// Simulates planar Brownian paths with exact Gaussian increments on the dt grid; the area is that of
// the piecewise-linear interpolation. One estimate per point, all from the same paths.
inline std::vector<McEstimate> levy_area_mc(std::span<const LevyPoint> points, const SimConfig& cfg) {
    const int steps = detail::n_steps(cfg);
    const double sq = std::sqrt(cfg.T / steps);
    const std::vector<LevyPoint> pts(points.begin(), points.end());
    return detail::run_blocks(cfg.n_paths, cfg.block_size, pts.size(), [&](std::size_t lo, std::size_t hi, detail::Moments* mom) {
        for (std::size_t p = lo; p < hi; ++p) {
            Philox4x32 eng(cfg.seed, p);
            boost::random::normal_distribution<double> nd;
            double w1 = 0, w2 = 0, area = 0;
            for (int s = 0; s < steps; ++s) {
                const double d1 = sq * nd(eng), d2 = sq * nd(eng);
                area += 0.5 * (w2 * d1 - w1 * d2);
                w1 += d1;
                w2 += d2;
            }
            for (std::size_t k = 0; k < pts.size(); ++k)
                mom[k].add(std::exp(Complex(0, pts[k].lambda * area + pts[k].gamma1 * w1 + pts[k].gamma2 * w2)));
        }
    });
}

// ---------------- Gauss–Hermite quadrature ----------------

struct GaussRule {
    std::vector<double> nodes;    // for a standard normal variable
    std::vector<double> weights;  // summing to one
};

// Nodes are eigenvalues of the Jacobi matrix of the probabilists' Hermite polynomials, polished by
// Newton steps; weights are Christoffel numbers 1 / Σ_k p_k(x)^2 over the orthonormal polynomials.
// The recurrence is rescaled on the fly so large n does not overflow.
namespace detail {

inline GaussRule compute_gauss_hermite(int n) {
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n), sub(std::max(n - 1, 0));
    for (int k = 1; k < n; ++k) sub(k - 1) = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    GaussRule r;
    const double big = 1e150, log_big = std::log(big);
    for (int i = 0; i < n; ++i) {
        double x = es.eigenvalues()(i);
        double lw = 0;
        for (int pass = 0; pass < 3; ++pass) {
            // p_prev = p_{k-1}, p = p_k, sums scaled by big^{2*scale}
            double p_prev = 0, p = 1, sum = 1, scale = 0;
            for (int k = 0; k + 1 < n; ++k) {
                double next = (x * p - std::sqrt(static_cast<double>(k)) * p_prev) / std::sqrt(k + 1.0);
                p_prev = p;
                p = next;
                sum += p * p;
                if (std::abs(p) > big) {
                    p /= big;
                    p_prev /= big;
                    sum /= big * big;
                    scale += 1;
                }
            }
            // p holds p_{n-1}; one more step gives p_n, and p_n' = sqrt(n) p_{n-1}
            double pn = (x * p - std::sqrt(n - 1.0) * p_prev) / std::sqrt(static_cast<double>(n));
            lw = -(std::log(sum) + 2 * scale * log_big);
            if (pass < 2 && p != 0) x -= pn / (std::sqrt(static_cast<double>(n)) * p);
        }
        r.nodes.push_back(x);
        r.weights.push_back(std::exp(lw));
    }
    return r;
}

}  // namespace detail

// rules are cached per node count
inline const GaussRule& gauss_hermite(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: n must be >= 1");
    static std::mutex mu;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, detail::compute_gauss_hermite(n)).first;
    return it->second;
}

struct QuadResult {
    Complex value;
    int nodes = 0;
    double last_delta = 0;
    bool converged = false;
};

// E[f(sqrt(t) Z)]; doubles the node count from n0 until successive values differ by less than tol
// or throws after max_doublings
inline QuadResult gauss_quadrature(const std::function<Complex(double)>& f, double t, int n0 = 200, double tol = 1e-10, int max_doublings = 4) {
    if (t < 0) throw std::invalid_argument("gauss_quadrature: t must be >= 0");
    if (t == 0) return {f(0.0), 0, 0.0, true};
    auto eval = [&](int n) {
        const auto& rule = gauss_hermite(n);
        Complex s = 0.0;
        const double st = std::sqrt(t);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            if (rule.weights[i] > 0) s += rule.weights[i] * f(st * rule.nodes[i]);
        return s;
    };
    int n = n0;
    Complex prev = eval(n);
    QuadResult r{prev, n, INFINITY, false};
    for (int k = 0; k < max_doublings; ++k) {
        n *= 2;
        Complex cur = eval(n);
        r = {cur, n, std::abs(cur - prev), std::abs(cur - prev) < tol};
        if (r.converged) return r;
        prev = cur;
    }
    throw std::runtime_error("gauss_quadrature: no convergence after " + std::to_string(max_doublings) +
                             " doublings (last change " + std::to_string(r.last_delta) + ")");
}

}  // namespace sigcalc
