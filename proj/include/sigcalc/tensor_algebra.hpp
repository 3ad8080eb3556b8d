#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sigcalc {

using Complex = std::complex<double>;

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A word over the alphabet {1,...,d}; letters are stored 1-based.
class Word {
public:
    Word() = default;
    Word(std::initializer_list<int> letters) : letters_(letters) {}
    explicit Word(std::vector<int> letters) : letters_(std::move(letters)) {}

    std::size_t size() const { return letters_.size(); }
    bool empty() const { return letters_.empty(); }
    int operator[](std::size_t i) const { return letters_[i]; }
    int back() const { return letters_.back(); }
    const std::vector<int>& letters() const { return letters_; }

    // I' : drop the last letter
    Word prefix(std::size_t drop = 1) const {
        if (drop > letters_.size()) throw std::out_of_range("Word::prefix: word too short");
        return Word(std::vector<int>(letters_.begin(), letters_.end() - static_cast<std::ptrdiff_t>(drop)));
    }

    Word sorted() const {
        auto l = letters_;
        std::sort(l.begin(), l.end());
        return Word(std::move(l));
    }

    Word operator+(const Word& o) const {
        auto l = letters_;
        l.insert(l.end(), o.letters_.begin(), o.letters_.end());
        return Word(std::move(l));
    }

    Word& push_back(int letter) {
        letters_.push_back(letter);
        return *this;
    }

    // product of factorials of letter multiplicities
    double multiplicity_factorial() const {
        auto s = sorted();
        double f = 1.0;
        std::size_t run = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            run = (i > 0 && s[i] == s[i - 1]) ? run + 1 : 1;
            f *= static_cast<double>(run);
        }
        return f;
    }

    std::string to_string() const {
        std::string s;
        for (std::size_t i = 0; i < letters_.size(); ++i) {
            if (i) s += ',';
            s += std::to_string(letters_[i]);
        }
        return s;
    }

    friend bool operator==(const Word&, const Word&) = default;
    friend auto operator<=>(const Word&, const Word&) = default;

private:
    std::vector<int> letters_;
};

inline std::size_t ipow(std::size_t base, int e) {
    std::size_t r = 1;
    for (int i = 0; i < e; ++i) {
        if (base != 0 && r > SIZE_MAX / base) throw std::overflow_error("tensor dimension overflow");
        r *= base;
    }
    return r;
}

inline std::size_t level_size(int d, int n) { return ipow(static_cast<std::size_t>(d), n); }

inline std::size_t level_offset(int d, int n) {
    std::size_t off = 0;
    for (int k = 0; k < n; ++k) off += level_size(d, k);
    return off;
}

inline std::size_t tensor_size(int d, int N) { return level_offset(d, N + 1); }

// rank of a word inside its level block (letters in base d, most significant first)
inline std::size_t word_rank(const Word& w, int d) {
    std::size_t r = 0;
    for (int l : w.letters()) {
        if (l < 1 || l > d) throw DimensionError("letter " + std::to_string(l) + " outside alphabet of size " + std::to_string(d));
        r = r * static_cast<std::size_t>(d) + static_cast<std::size_t>(l - 1);
    }
    return r;
}

inline std::size_t word_index(const Word& w, int d) {
    return level_offset(d, static_cast<int>(w.size())) + word_rank(w, d);
}

inline Word rank_word(std::size_t rank, int n, int d) {
    std::vector<int> l(static_cast<std::size_t>(n));
    for (int k = n - 1; k >= 0; --k) {
        l[static_cast<std::size_t>(k)] = static_cast<int>(rank % static_cast<std::size_t>(d)) + 1;
        rank /= static_cast<std::size_t>(d);
    }
    return Word(std::move(l));
}

inline Word index_word(std::size_t idx, int d) {
    int n = 0;
    while (idx >= level_size(d, n)) {
        idx -= level_size(d, n);
        ++n;
    }
    return rank_word(idx, n, d);
}

// Truncated tensor algebra element, dense level-major storage.
class TensorCoeffs {
public:
    TensorCoeffs() : TensorCoeffs(1, 0) {}
    TensorCoeffs(int d, int N) : d_(d), N_(N) {
        if (d < 1) throw DimensionError("alphabet size must be >= 1");
        if (N < 0) throw DimensionError("truncation level must be >= 0");
        c_.assign(tensor_size(d, N), Complex(0.0));
    }
    TensorCoeffs(int d, int N, std::vector<Complex> data) : d_(d), N_(N), c_(std::move(data)) {
        if (c_.size() != tensor_size(d, N)) throw DimensionError("coefficient vector has wrong length");
    }

    static TensorCoeffs unit(int d, int N) {
        TensorCoeffs t(d, N);
        t.c_[0] = 1.0;
        return t;
    }

    static TensorCoeffs basis(const Word& w, int d, int N, Complex value = 1.0) {
        TensorCoeffs t(d, N);
        if (static_cast<int>(w.size()) <= N) t.c_[word_index(w, d)] = value;
        return t;
    }

    int dim() const { return d_; }
    int level() const { return N_; }
    std::size_t size() const { return c_.size(); }

    Complex& operator[](std::size_t i) { return c_[i]; }
    const Complex& operator[](std::size_t i) const { return c_[i]; }

    Complex coeff(const Word& w) const {
        if (static_cast<int>(w.size()) > N_) return 0.0;
        return c_[word_index(w, d_)];
    }
    Complex& at(const Word& w) {
        if (static_cast<int>(w.size()) > N_) throw DimensionError("word longer than truncation level");
        return c_[word_index(w, d_)];
    }

    Complex empty_coeff() const { return c_[0]; }

    std::span<Complex> block(int n) { return {c_.data() + level_offset(d_, n), level_size(d_, n)}; }
    std::span<const Complex> block(int n) const { return {c_.data() + level_offset(d_, n), level_size(d_, n)}; }

    std::vector<Complex>& data() { return c_; }
    const std::vector<Complex>& data() const { return c_; }

    // cut or zero-pad to level M
    TensorCoeffs resized(int M) const {
        TensorCoeffs t(d_, M);
        std::size_t n = std::min(t.size(), size());
        std::copy_n(c_.begin(), n, t.c_.begin());
        return t;
    }

    bool same_shape(const TensorCoeffs& o) const { return d_ == o.d_ && N_ == o.N_; }

    TensorCoeffs& operator+=(const TensorCoeffs& o) {
        require_shape(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    TensorCoeffs& operator-=(const TensorCoeffs& o) {
        require_shape(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }
    TensorCoeffs& operator*=(Complex s) {
        for (auto& x : c_) x *= s;
        return *this;
    }
    // y += s*x
    TensorCoeffs& axpy(Complex s, const TensorCoeffs& x) {
        require_shape(x);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += s * x.c_[i];
        return *this;
    }

    friend TensorCoeffs operator+(TensorCoeffs a, const TensorCoeffs& b) { return a += b; }
    friend TensorCoeffs operator-(TensorCoeffs a, const TensorCoeffs& b) { return a -= b; }
    friend TensorCoeffs operator*(Complex s, TensorCoeffs a) { return a *= s; }
    friend TensorCoeffs operator*(TensorCoeffs a, Complex s) { return a *= s; }
    friend TensorCoeffs operator-(TensorCoeffs a) { return a *= -1.0; }

    double max_abs() const {
        double m = 0.0;
        for (const auto& x : c_) m = std::max(m, std::abs(x));
        return m;
    }
    double max_abs_diff(const TensorCoeffs& o) const {
        require_shape(o);
        double m = 0.0;
        for (std::size_t i = 0; i < c_.size(); ++i) m = std::max(m, std::abs(c_[i] - o.c_[i]));
        return m;
    }
    bool all_finite() const {
        return std::all_of(c_.begin(), c_.end(), [](const Complex& x) { return std::isfinite(x.real()) && std::isfinite(x.imag()); });
    }

    void require_shape(const TensorCoeffs& o) const {
        if (!same_shape(o))
            throw DimensionError("tensor shape mismatch: (d=" + std::to_string(d_) + ",N=" + std::to_string(N_) + ") vs (d=" +
                                 std::to_string(o.d_) + ",N=" + std::to_string(o.N_) + ")");
    }

private:
    int d_;
    int N_;
    std::vector<Complex> c_;
};

// d x d array of tensors, row-major, 0-based indices (entry (i,j) belongs to letters i+1, j+1)
struct TensorMatrix {
    int d = 0;
    std::vector<TensorCoeffs> entries;
    TensorCoeffs& operator()(int i, int j) { return entries[static_cast<std::size_t>(i * d + j)]; }
    const TensorCoeffs& operator()(int i, int j) const { return entries[static_cast<std::size_t>(i * d + j)]; }
};

namespace detail {

// All interleavings of a length-p and a length-q word into a length-(p+q) word.
// For each interleaving, rank contributions of the two factors are tabulated so that
// the merged word's rank is mapI[rank(I)] + mapJ[rank(J)].
struct Interleaving {
    std::vector<std::size_t> mapI;
    std::vector<std::size_t> mapJ;
};

struct ShufflePlan {
    int d = 0;
    int N = 0;
    // pairs[n][p] : interleavings of level p with level n-p
    std::vector<std::vector<std::vector<Interleaving>>> pairs;
};

inline std::vector<std::size_t> place_table(int d, int p, const std::vector<int>& positions, int n) {
    std::size_t cnt = level_size(d, p);
    std::vector<std::size_t> out(cnt);
    std::vector<std::size_t> weight(static_cast<std::size_t>(p));
    for (int k = 0; k < p; ++k) weight[static_cast<std::size_t>(k)] = level_size(d, n - 1 - positions[static_cast<std::size_t>(k)]);
    for (std::size_t r = 0; r < cnt; ++r) {
        std::size_t rr = r, v = 0;
        for (int k = p - 1; k >= 0; --k) {
            v += (rr % static_cast<std::size_t>(d)) * weight[static_cast<std::size_t>(k)];
            rr /= static_cast<std::size_t>(d);
        }
        out[r] = v;
    }
    return out;
}

inline std::shared_ptr<const ShufflePlan> build_shuffle_plan(int d, int N) {
    if (N > 30) throw DimensionError("shuffle tables limited to truncation level 30");
    auto plan = std::make_shared<ShufflePlan>();
    plan->d = d;
    plan->N = N;
    plan->pairs.resize(static_cast<std::size_t>(N + 1));
    for (int n = 0; n <= N; ++n) {
        plan->pairs[static_cast<std::size_t>(n)].resize(static_cast<std::size_t>(n + 1));
        for (int p = 0; p <= n; ++p) {
            auto& list = plan->pairs[static_cast<std::size_t>(n)][static_cast<std::size_t>(p)];
            for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
                if (std::popcount(mask) != p) continue;
                std::vector<int> posI, posJ;
                for (int k = 0; k < n; ++k) (mask >> k & 1u ? posI : posJ).push_back(k);
                list.push_back({place_table(d, p, posI, n), place_table(d, n - p, posJ, n)});
            }
        }
    }
    return plan;
}

inline std::shared_ptr<const ShufflePlan> shuffle_plan(int d, int N) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::shared_ptr<const ShufflePlan>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{d, N}];
    if (!slot) slot = build_shuffle_plan(d, N);
    return slot;
}

inline const std::vector<std::vector<double>>& binomial_table(int n_max) {
    static std::mutex mu;
    static std::vector<std::vector<double>> table;
    std::lock_guard<std::mutex> lock(mu);
    while (static_cast<int>(table.size()) <= n_max) {
        std::size_t n = table.size();
        std::vector<double> row(n + 1, 1.0);
        for (std::size_t k = 1; k < n; ++k) row[k] = table[n - 1][k - 1] + table[n - 1][k];
        table.push_back(std::move(row));
    }
    return table;
}

}  // namespace detail

inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    return detail::binomial_table(n)[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
}

// e_I ⧢ e_J truncated at N, by the recursive definition
inline TensorCoeffs shuffle_words(const Word& I, const Word& J, int d, int N) {
    TensorCoeffs out(d, N);
    if (static_cast<int>(I.size() + J.size()) > N) return out;
    if (I.empty()) return TensorCoeffs::basis(J, d, N);
    if (J.empty()) return TensorCoeffs::basis(I, d, N);
    auto extend = [&](const TensorCoeffs& t, int letter) {
        // right-concatenate every word of t with the letter
        TensorCoeffs r(d, N);
        for (int n = 0; n < N; ++n) {
            auto src = t.block(n);
            auto dst = r.block(n + 1);
            for (std::size_t k = 0; k < src.size(); ++k) dst[k * static_cast<std::size_t>(d) + static_cast<std::size_t>(letter - 1)] += src[k];
        }
        return r;
    };
    out += extend(shuffle_words(I.prefix(), J, d, N), I.back());
    out += extend(shuffle_words(I, J.prefix(), d, N), J.back());
    return out;
}

// u ⧢ v truncated at the common level
inline TensorCoeffs shuffle(const TensorCoeffs& u, const TensorCoeffs& v) {
    u.require_shape(v);
    const int d = u.dim(), N = u.level();
    TensorCoeffs out(d, N);
    if (d == 1) {
        for (int n = 0; n <= N; ++n) {
            Complex s = 0.0;
            for (int p = 0; p <= n; ++p) s += binomial(n, p) * u[static_cast<std::size_t>(p)] * v[static_cast<std::size_t>(n - p)];
            out[static_cast<std::size_t>(n)] = s;
        }
        return out;
    }
    auto plan = detail::shuffle_plan(d, N);
    for (int n = 0; n <= N; ++n) {
        auto dst = out.block(n);
        for (int p = 0; p <= n; ++p) {
            auto a = u.block(p);
            auto b = v.block(n - p);
            bool a_zero = std::all_of(a.begin(), a.end(), [](const Complex& x) { return x == Complex(0.0); });
            if (a_zero) continue;
            for (const auto& il : plan->pairs[static_cast<std::size_t>(n)][static_cast<std::size_t>(p)]) {
                for (std::size_t i = 0; i < a.size(); ++i) {
                    if (a[i] == Complex(0.0)) continue;
                    const Complex ai = a[i];
                    const std::size_t base = il.mapI[i];
                    for (std::size_t j = 0; j < b.size(); ++j) dst[base + il.mapJ[j]] += ai * b[j];
                }
            }
        }
    }
    return out;
}

// concatenation (tensor) product truncated at the common level
inline TensorCoeffs concat(const TensorCoeffs& u, const TensorCoeffs& v) {
    u.require_shape(v);
    const int d = u.dim(), N = u.level();
    TensorCoeffs out(d, N);
    for (int n = 0; n <= N; ++n) {
        auto dst = out.block(n);
        for (int k = 0; k <= n; ++k) {
            auto a = u.block(k);
            auto b = v.block(n - k);
            for (std::size_t i = 0; i < a.size(); ++i) {
                if (a[i] == Complex(0.0)) continue;
                const std::size_t base = i * b.size();
                for (std::size_t j = 0; j < b.size(); ++j) dst[base + j] += a[i] * b[j];
            }
        }
    }
    return out;
}

inline TensorCoeffs shuffle_power(const TensorCoeffs& u, int k) {
    TensorCoeffs r = TensorCoeffs::unit(u.dim(), u.level());
    for (int i = 0; i < k; ++i) r = shuffle(r, u);
    return r;
}

inline TensorCoeffs shuffle_exp(const TensorCoeffs& u) {
    TensorCoeffs ubar = u;
    ubar[0] = 0.0;
    TensorCoeffs acc = TensorCoeffs::unit(u.dim(), u.level());
    TensorCoeffs term = acc;
    for (int k = 1; k <= u.level(); ++k) {
        term = shuffle(term, ubar);
        term *= 1.0 / k;
        acc += term;
    }
    acc *= std::exp(u[0]);
    return acc;
}

inline TensorCoeffs shuffle_log(const TensorCoeffs& u) {
    if (std::abs(u[0] - Complex(1.0)) > 1e-10)
        throw std::domain_error("shuffle_log requires unit empty-word coefficient");
    TensorCoeffs ubar = u;
    ubar[0] = 0.0;
    TensorCoeffs acc(u.dim(), u.level());
    TensorCoeffs power = TensorCoeffs::unit(u.dim(), u.level());
    for (int k = 1; k <= u.level(); ++k) {
        power = shuffle(power, ubar);
        acc.axpy(((k % 2) ? 1.0 : -1.0) / k, power);
    }
    return acc;
}

// u^(1): component k collects coefficients of words ending in letter k+1, with that letter removed
inline std::vector<TensorCoeffs> shift1(const TensorCoeffs& u) {
    const int d = u.dim(), N = u.level();
    const int M = std::max(N - 1, 0);
    std::vector<TensorCoeffs> out(static_cast<std::size_t>(d), TensorCoeffs(d, M));
    for (int n = 1; n <= N; ++n) {
        auto src = u.block(n);
        for (std::size_t r = 0; r < src.size(); ++r) {
            if (src[r] == Complex(0.0)) continue;
            out[r % static_cast<std::size_t>(d)].block(n - 1)[r / static_cast<std::size_t>(d)] = src[r];
        }
    }
    return out;
}

// u^(2): entry (i,j) collects words ending in letters (i+1, j+1), with both removed
inline TensorMatrix shift2(const TensorCoeffs& u) {
    const int d = u.dim(), N = u.level();
    const int M = std::max(N - 2, 0);
    const auto du = static_cast<std::size_t>(d);
    TensorMatrix out{d, std::vector<TensorCoeffs>(du * du, TensorCoeffs(d, M))};
    for (int n = 2; n <= N; ++n) {
        auto src = u.block(n);
        for (std::size_t r = 0; r < src.size(); ++r) {
            if (src[r] == Complex(0.0)) continue;
            std::size_t j = r % du, i = (r / du) % du;
            out.entries[i * du + j].block(n - 2)[r / (du * du)] = src[r];
        }
    }
    return out;
}

inline TensorCoeffs dilate(const TensorCoeffs& u, double lambda) {
    TensorCoeffs out = u;
    double f = 1.0;
    for (int n = 0; n <= u.level(); ++n) {
        for (auto& x : out.block(n)) x *= f;
        f *= lambda;
    }
    return out;
}

// bilinear pairing over the common levels
inline Complex pair(const TensorCoeffs& u, const TensorCoeffs& x) {
    if (u.dim() != x.dim()) throw DimensionError("pairing of tensors over different alphabets");
    std::size_t n = tensor_size(u.dim(), std::min(u.level(), x.level()));
    Complex s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += u[i] * x[i];
    return s;
}

enum class Partition { Singleton, Ordered, Level };

inline bool is_shuffle_compatible(Partition p) { return p != Partition::Singleton; }

namespace detail {

// group id of every word rank within level n: the rank of its sorted rearrangement
inline std::size_t ordered_group(std::size_t rank, int n, int d) {
    std::vector<int> letters(static_cast<std::size_t>(n));
    for (int k = n - 1; k >= 0; --k) {
        letters[static_cast<std::size_t>(k)] = static_cast<int>(rank % static_cast<std::size_t>(d));
        rank /= static_cast<std::size_t>(d);
    }
    std::sort(letters.begin(), letters.end());
    std::size_t g = 0;
    for (int l : letters) g = g * static_cast<std::size_t>(d) + static_cast<std::size_t>(l);
    return g;
}

}  // namespace detail

// Σ_k |Σ_{I in block k} u_I x_I| over the common levels; level 0 forms its own block
inline double seminorm(const TensorCoeffs& u, const TensorCoeffs& x, Partition part, bool include_level0 = true) {
    if (u.dim() != x.dim()) throw DimensionError("seminorm of tensors over different alphabets");
    const int d = u.dim();
    const int N = std::min(u.level(), x.level());
    double total = include_level0 ? std::abs(u[0] * x[0]) : 0.0;
    for (int n = 1; n <= N; ++n) {
        auto a = u.block(n);
        auto b = x.block(n);
        switch (part) {
            case Partition::Singleton:
                for (std::size_t i = 0; i < a.size(); ++i) total += std::abs(a[i] * b[i]);
                break;
            case Partition::Level: {
                Complex s = 0.0;
                for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
                total += std::abs(s);
                break;
            }
            case Partition::Ordered: {
                std::map<std::size_t, Complex> groups;
                for (std::size_t i = 0; i < a.size(); ++i) groups[detail::ordered_group(i, n, d)] += a[i] * b[i];
                for (const auto& [g, s] : groups) total += std::abs(s);
                break;
            }
        }
    }
    return total;
}

inline double l1_norm(const TensorCoeffs& x, Partition part, bool include_level0 = false) {
    TensorCoeffs ones(x.dim(), x.level());
    for (auto& c : ones.data()) c = 1.0;
    return seminorm(ones, x, part, include_level0);
}

}  // namespace sigcalc
