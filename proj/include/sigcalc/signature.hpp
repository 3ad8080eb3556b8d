#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tensor_algebra.hpp"

namespace sigcalc {

class PiecewisePath {
public:
    PiecewisePath() = default;
    PiecewisePath(std::vector<double> times, std::vector<std::vector<double>> points, bool time_extended = false)
        : times_(std::move(times)), points_(std::move(points)), time_extended_(time_extended) {
        if (times_.size() != points_.size()) throw DimensionError("path: times and points differ in length");
        if (points_.empty()) throw std::invalid_argument("path: no points");
        d_ = static_cast<int>(points_.front().size());
        if (d_ < 1) throw DimensionError("path: zero-dimensional points");
        for (const auto& p : points_)
            if (static_cast<int>(p.size()) != d_) throw DimensionError("path: ragged point dimensions");
        for (std::size_t i = 1; i < times_.size(); ++i)
            if (!(times_[i] > times_[i - 1])) throw std::invalid_argument("path: times must be strictly increasing");
    }

    int dim() const { return d_; }
    std::size_t size() const { return points_.size(); }
    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& point(std::size_t i) const { return points_[i]; }
    bool time_extended() const { return time_extended_; }

private:
    std::vector<double> times_;
    std::vector<std::vector<double>> points_;
    int d_ = 0;
    bool time_extended_ = false;
};

// Element of the truncated group of signatures: empty-word coefficient 1 and shuffle-multiplicative.
struct GroupLike {
    TensorCoeffs value;
};

// Real-valued running signature updated in place by Chen's relation with a linear segment.
class RunningSignature {
public:
    RunningSignature(int d, int N) : d_(d), N_(N), c_(tensor_size(d, N), 0.0), h_(level_size(d, N)), g_(level_size(d, N)) {
        c_[0] = 1.0;
    }

    void reset() {
        std::fill(c_.begin(), c_.end(), 0.0);
        c_[0] = 1.0;
    }

    // x <- x ⊗ exp(dx), Horner form level by level, highest level first
    void advance(std::span<const double> dx) {
        const std::size_t d = static_cast<std::size_t>(d_);
        const double* x = dx.data();
        double* c = c_.data();
        for (int n = N_; n >= 1; --n) {
            double* h = h_.data();
            double* g = g_.data();
            h[0] = c[0];
            std::size_t len = 1;
            for (int m = 1; m <= n; ++m) {
                const double inv = 1.0 / static_cast<double>(n - m + 1);
                double* old = c + level_offset_[static_cast<std::size_t>(m)];
                // the last stage writes level n in place
                double* dst = m == n ? old : g;
                for (std::size_t i = 0; i < len; ++i) {
                    const double hi = h[i] * inv;
                    for (std::size_t k = 0; k < d; ++k) dst[i * d + k] = hi * x[k] + old[i * d + k];
                }
                len *= d;
                std::swap(h, g);
            }
        }
    }

    double operator[](std::size_t i) const { return c_[i]; }
    const std::vector<double>& data() const { return c_; }
    int dim() const { return d_; }
    int level() const { return N_; }

    TensorCoeffs to_tensor() const {
        std::vector<Complex> v(c_.begin(), c_.end());
        return TensorCoeffs(d_, N_, std::move(v));
    }

private:
    int d_, N_;
    std::vector<double> c_, h_, g_;
    std::vector<std::size_t> level_offset_ = make_offsets(d_, N_);

    static std::vector<std::size_t> make_offsets(int d, int N) {
        std::vector<std::size_t> o;
        for (int n = 0; n <= N; ++n) o.push_back(level_offset(d, n));
        return o;
    }
};

// exp(Δ) truncated at N: level n holds Δ^{⊗n}/n!
inline GroupLike segment_signature(std::span<const double> increment, int N) {
    const int d = static_cast<int>(increment.size());
    if (d < 1) throw DimensionError("segment increment is empty");
    TensorCoeffs t(d, N);
    t[0] = 1.0;
    for (int n = 1; n <= N; ++n) {
        auto prev = t.block(n - 1);
        auto cur = t.block(n);
        for (std::size_t i = 0; i < prev.size(); ++i)
            for (std::size_t k = 0; k < increment.size(); ++k) cur[i * increment.size() + k] = prev[i] * increment[k] / static_cast<double>(n);
    }
    return {t};
}

inline GroupLike path_signature(const PiecewisePath& path, int N) {
    const int d = path.dim();
    RunningSignature sig(d, N);
    std::vector<double> dx(static_cast<std::size_t>(d));
    for (std::size_t i = 1; i < path.size(); ++i) {
        for (std::size_t k = 0; k < dx.size(); ++k) dx[k] = path.point(i)[k] - path.point(i - 1)[k];
        sig.advance(dx);
    }
    return {sig.to_tensor()};
}

// Prepends time as letter 1.
inline PiecewisePath time_extend(const PiecewisePath& path) {
    if (path.time_extended()) throw std::invalid_argument("path is already time-extended");
    std::vector<std::vector<double>> pts;
    pts.reserve(path.size());
    for (std::size_t i = 0; i < path.size(); ++i) {
        std::vector<double> p{path.times()[i]};
        p.insert(p.end(), path.point(i).begin(), path.point(i).end());
        pts.push_back(std::move(p));
    }
    return PiecewisePath(path.times(), std::move(pts), true);
}

struct GroupLikeCheck {
    bool ok = false;
    double max_violation = 0.0;
};

// Checks x_∅ = 1 and x_I x_J = <e_I ⧢ e_J, x> for |I|+|J| <= N, violations scaled by max(1,|x_I x_J|).
inline GroupLikeCheck is_grouplike(const TensorCoeffs& x, double tol) {
    const int d = x.dim(), N = x.level();
    double worst = std::abs(x[0] - Complex(1.0));
    auto plan = detail::shuffle_plan(d, N);
    for (int n = 1; n <= N; ++n) {
        auto xn = x.block(n);
        for (int p = 1; p < n; ++p) {
            auto a = x.block(p);
            auto b = x.block(n - p);
            for (std::size_t i = 0; i < a.size(); ++i)
                for (std::size_t j = 0; j < b.size(); ++j) {
                    Complex s = 0.0;
                    for (const auto& il : plan->pairs[static_cast<std::size_t>(n)][static_cast<std::size_t>(p)]) s += xn[il.mapI[i] + il.mapJ[j]];
                    Complex prod = a[i] * b[j];
                    worst = std::max(worst, std::abs(prod - s) / std::max(1.0, std::abs(prod)));
                }
        }
    }
    return {worst <= tol, worst};
}

// CSV with header t,x1,...,xd
inline PiecewisePath read_path_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("path csv: missing header");
    std::vector<std::string> cols;
    {
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cols.push_back(c);
    }
    if (cols.size() < 2 || cols[0] != "t") throw std::invalid_argument("path csv: header must be t,x1,...,xd");
    for (std::size_t k = 1; k < cols.size(); ++k)
        if (cols[k] != "x" + std::to_string(k)) throw std::invalid_argument("path csv: unexpected column '" + cols[k] + "'");
    std::vector<double> times;
    std::vector<std::vector<double>> pts;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string c;
        std::vector<double> row;
        while (std::getline(ss, c, ',')) {
            try {
                row.push_back(std::stod(c));
            } catch (const std::exception&) {
                throw std::invalid_argument("path csv: bad number on line " + std::to_string(lineno));
            }
        }
        if (row.size() != cols.size()) throw std::invalid_argument("path csv: wrong column count on line " + std::to_string(lineno));
        times.push_back(row[0]);
        pts.emplace_back(row.begin() + 1, row.end());
    }
    return PiecewisePath(std::move(times), std::move(pts));
}

inline void write_path_csv(std::ostream& out, const PiecewisePath& path) {
    out << "t";
    for (int k = 1; k <= path.dim(); ++k) out << ",x" << k;
    out << "\n";
    out.precision(17);
    for (std::size_t i = 0; i < path.size(); ++i) {
        out << path.times()[i];
        for (double v : path.point(i)) out << "," << v;
        out << "\n";
    }
}

}  // namespace sigcalc
