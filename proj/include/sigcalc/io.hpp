#pragma once

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "powerseries.hpp"
#include "montecarlo.hpp"
#include "schemes.hpp"
#include "sig_operators.hpp"
#include "tensor_algebra.hpp"

namespace sigcalc {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// One line per nonzero coefficient: "word=1,2,1 re=<float> im=<float>"; the empty word is "word=".
inline std::string to_text(const TensorCoeffs& t) {
    std::string s;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] == Complex(0.0)) continue;
        s += "word=" + index_word(i, t.dim()).to_string() + " re=" + format_double(t[i].real()) + " im=" + format_double(t[i].imag()) + "\n";
    }
    return s;
}

struct TextEntry {
    Word word;
    Complex value;
};

inline std::vector<TextEntry> parse_text_entries(const std::string& text) {
    std::vector<TextEntry> out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        std::string w, re, im;
        ls >> w >> re >> im;
        auto fail = [&](const std::string& why) { throw std::invalid_argument("tensor text line " + std::to_string(lineno) + ": " + why); };
        if (w.rfind("word=", 0) != 0 || re.rfind("re=", 0) != 0 || im.rfind("im=", 0) != 0) fail("expected 'word=... re=... im=...'");
        std::vector<int> letters;
        std::string body = w.substr(5);
        if (!body.empty()) {
            std::stringstream ws(body);
            std::string tok;
            while (std::getline(ws, tok, ',')) {
                try {
                    letters.push_back(std::stoi(tok));
                } catch (const std::exception&) {
                    fail("bad letter '" + tok + "'");
                }
            }
        }
        try {
            out.push_back({Word(letters), Complex(std::stod(re.substr(3)), std::stod(im.substr(3)))});
        } catch (const std::exception&) {
            fail("bad number");
        }
    }
    return out;
}

inline TensorCoeffs from_text(const std::string& text, int d, int N) {
    TensorCoeffs t(d, N);
    for (const auto& e : parse_text_entries(text)) {
        if (static_cast<int>(e.word.size()) > N)
            throw DimensionError("tensor text: word (" + e.word.to_string() + ") longer than level " + std::to_string(N));
        t.at(e.word) += e.value;
    }
    return t;
}

// smallest (d, N) that holds every word in the text
inline std::pair<int, int> infer_shape(const std::string& text) {
    int d = 1, N = 0;
    for (const auto& e : parse_text_entries(text)) {
        N = std::max(N, static_cast<int>(e.word.size()));
        for (int l : e.word.letters()) d = std::max(d, l);
    }
    return {d, N};
}

// {"d":2,"N":3,"x0":[...],"b":["<tensor text>",...],"a":[["<tensor text>",...],...]}
inline nlohmann::json spec_to_json(const SdeSpec& s) {
    nlohmann::json j;
    j["d"] = s.d;
    j["N"] = s.level();
    j["x0"] = s.x0;
    j["b"] = nlohmann::json::array();
    for (const auto& t : s.b) j["b"].push_back(to_text(t));
    j["a"] = nlohmann::json::array();
    for (int i = 0; i < s.d; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int k = 0; k < s.d; ++k) row.push_back(to_text(s.a(i, k)));
        j["a"].push_back(row);
    }
    return j;
}

inline SdeSpec spec_from_json(const nlohmann::json& j) {
    const int d = j.at("d").get<int>();
    int N = 2;
    if (j.contains("N")) {
        N = j.at("N").get<int>();
    } else {
        for (const auto& t : j.at("b")) N = std::max(N, infer_shape(t.get<std::string>()).second);
        for (const auto& row : j.at("a"))
            for (const auto& t : row) N = std::max(N, infer_shape(t.get<std::string>()).second);
    }
    SdeSpec s = zero_spec(d, N);
    s.x0 = j.at("x0").get<std::vector<double>>();
    const auto& b = j.at("b");
    const auto& a = j.at("a");
    if (static_cast<int>(b.size()) != d || static_cast<int>(a.size()) != d) throw DimensionError("spec json: need d drift entries and d diffusion rows");
    for (int i = 0; i < d; ++i) {
        s.b[static_cast<std::size_t>(i)] = from_text(b[static_cast<std::size_t>(i)].get<std::string>(), d, N);
        if (static_cast<int>(a[static_cast<std::size_t>(i)].size()) != d) throw DimensionError("spec json: diffusion row has wrong length");
        for (int k = 0; k < d; ++k) s.a(i, k) = from_text(a[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<std::string>(), d, N);
    }
    s.validate();
    return s;
}

namespace detail {
inline std::vector<double> real_coeffs(const Seq& s) {
    std::vector<double> v;
    for (int k = 0; k <= s.K(); ++k) v.push_back(s[k].real());
    return v;
}
inline Seq seq_from(const std::vector<double>& v) {
    std::vector<Complex> c(v.begin(), v.end());
    if (c.empty()) c.push_back(0.0);
    return Seq(std::move(c));
}
}  // namespace detail

// {"b":[...],"a":[...],"x0":0.5,"K":40}
inline nlohmann::json model_to_json(const Model1D& m) {
    nlohmann::json j{{"b", detail::real_coeffs(m.b)}, {"a", detail::real_coeffs(m.a)}, {"x0", m.x0}, {"K", m.K}};
    if (!m.name.empty()) j["name"] = m.name;
    if (m.interval) j["interval"] = {m.interval->first, m.interval->second};
    return j;
}

inline Model1D model_from_json(const nlohmann::json& j) {
    Model1D m;
    m.b = detail::seq_from(j.at("b").get<std::vector<double>>());
    m.a = detail::seq_from(j.at("a").get<std::vector<double>>());
    m.x0 = j.at("x0").get<double>();
    m.K = j.at("K").get<int>();
    if (j.contains("name")) m.name = j["name"].get<std::string>();
    if (j.contains("interval")) {
        auto iv = j["interval"].get<std::vector<double>>();
        if (iv.size() != 2) throw std::invalid_argument("model json: interval needs two endpoints");
        m.interval = std::make_pair(iv[0], iv[1]);
    }
    m.validate();
    return m;
}

// t,value_re,value_im,status ; an explosion adds a final row with status "exploded"
inline void write_trajectory_csv(std::ostream& out, const ValueSeries& vs) {
    out << "t,value_re,value_im,status\n";
    for (std::size_t i = 0; i < vs.times.size(); ++i)
        out << format_double(vs.times[i]) << "," << format_double(vs.values[i].real()) << "," << format_double(vs.values[i].imag()) << ",ok\n";
    if (vs.status == RunStatus::Exploded) out << format_double(*vs.explosion_time) << ",nan,nan,exploded\n";
}

// scheme settings; absent keys keep their defaults
inline SchemeConfig scheme_config_from_json(const nlohmann::json& j, SchemeConfig cfg = {}) {
    cfg.T = j.value("T", cfg.T);
    cfg.steps = j.value("steps", cfg.steps);
    cfg.M = j.value("M", cfg.M);
    cfg.explosion_threshold = j.value("explosion_threshold", cfg.explosion_threshold);
    cfg.adaptive = j.value("adaptive", cfg.adaptive);
    cfg.rtol = j.value("rtol", cfg.rtol);
    cfg.max_halvings = j.value("max_halvings", cfg.max_halvings);
    if (!(cfg.T > 0) || cfg.steps < 1 || cfg.M < 1) throw std::invalid_argument("scheme config: need T > 0, steps >= 1, M >= 1");
    return cfg;
}

inline nlohmann::json scheme_config_to_json(const SchemeConfig& c) {
    return {{"T", c.T}, {"steps", c.steps}, {"M", c.M}, {"explosion_threshold", c.explosion_threshold},
            {"adaptive", c.adaptive}, {"rtol", c.rtol}, {"max_halvings", c.max_halvings}};
}

// label,mean_re,mean_im,std_error,n_paths
inline void write_ensemble_summary_csv(std::ostream& out, const std::vector<std::string>& labels, const std::vector<McEstimate>& est) {
    if (labels.size() != est.size()) throw std::invalid_argument("ensemble summary: one label per estimate");
    out << "label,mean_re,mean_im,std_error,n_paths\n";
    for (std::size_t k = 0; k < est.size(); ++k)
        out << labels[k] << "," << format_double(est[k].mean.real()) << "," << format_double(est[k].mean.imag()) << ","
            << format_double(est[k].std_error) << "," << est[k].n << "\n";
}

}  // namespace sigcalc
