#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "report.hpp"
#include "sigcalc/sigcalc.hpp"

using namespace sigcalc;
using cli::Report;
using cli::Series;
using nlohmann::json;

namespace {

struct Common {
    std::string out;
    bool check = false;
    std::string config;
};

void add_common(CLI::App* app, Common& c, const std::string& default_out) {
    c.out = default_out;
    app->add_option("--out", c.out, "output prefix for <out>.csv, <out>.svg and <out>.report.json")->capture_default_str();
    app->add_flag("--check", c.check, "exit with status 1 when a result disagrees with its oracle");
}

void add_config(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "JSON file with scheme settings (T, steps, M, explosion_threshold, adaptive, rtol); overrides flags")
        ->check(CLI::ExistingFile);
}

SchemeConfig apply_config(const Common& c, SchemeConfig cfg) {
    if (c.config.empty()) return cfg;
    std::ifstream in(c.config);
    return scheme_config_from_json(json::parse(in), cfg);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string num(double v) { return format_double(v); }

class Timer {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

int finish(Report& rep, const Common& c, const Timer& timer, const std::string& status) {
    rep.write(c.out + ".report.json", timer.seconds(), rep.failed() ? "check_failed" : status);
    std::cout << "wrote " << c.out << ".csv, " << c.out << ".svg, " << c.out << ".report.json\n";
    if (rep.failed()) std::cerr << "oracle check failed; see " << c.out << ".report.json\n";
    return c.check && rep.failed() ? 1 : 0;
}

std::size_t nearest_index(const std::vector<double>& times, double t) {
    auto it = std::lower_bound(times.begin(), times.end(), t - 1e-12);
    if (it == times.end()) return times.size();
    return static_cast<std::size_t>(it - times.begin());
}

// ---------------- gbm-laplace ----------------

struct GbmArgs {
    double c = 1, y0 = 1, T = 1;
    int K = 20, steps = 1000, points = 21;
};

int cmd_gbm_laplace(const GbmArgs& a, const Common& com) {
    Timer timer;
    SchemeConfig cfg;
    cfg.T = a.T;
    cfg.steps = a.steps;
    cfg = apply_config(com, cfg);
    auto m = brownian_model();
    const Seq u = gbm_initial(a.c, a.y0, a.K);
    auto pow = scheme1_riccati([&](const Seq& v) { return R_pow(v, m); }, u, cfg);
    auto sig = scheme1_riccati([&](const Seq& v) { return R_sig1(v, m); }, reweight(u), cfg);

    Report rep("gbm-laplace");
    rep.config() = {{"c", a.c}, {"y0", a.y0}, {"K", a.K}, {"points", a.points}, {"scheme", scheme_config_to_json(cfg)}};
    std::ofstream csv(com.out + ".csv");
    csv << "t,scheme1_pow,scheme1_sig,quadrature,abs_diff,status\n";
    Series sp{"scheme1 (power basis)", {}, {}}, ss{"scheme1 (factorial basis)", {}, {}}, sq{"quadrature", {}, {}};
    double worst = 0, basis_gap = 0;
    for (int g = 0; g < a.points; ++g) {
        const double t = a.points == 1 ? cfg.T : cfg.T * g / (a.points - 1);
        const Complex q = gauss_quadrature([&](double x) { return Complex(std::exp(-a.c * a.y0 * std::exp(x))); }, t).value;
        const std::size_t kp = nearest_index(pow.times, t), ks = nearest_index(sig.times, t);
        const bool ok = kp < pow.times.size() && ks < sig.times.size();
        const double vp = ok ? pow.values[kp].real() : NAN, vs = ok ? sig.values[ks].real() : NAN;
        const double diff = std::abs(vp - q.real());
        csv << num(t) << "," << num(vp) << "," << num(vs) << "," << num(q.real()) << "," << num(diff) << "," << (ok ? "ok" : "exploded") << "\n";
        sp.x.push_back(t), sp.y.push_back(vp);
        ss.x.push_back(t), ss.y.push_back(vs);
        sq.x.push_back(t), sq.y.push_back(q.real());
        rep.point({{"t", t}}, {{"scheme1_pow", vp}, {"scheme1_sig", vs}, {"quadrature", q.real()}}, diff);
        if (ok) {
            worst = std::max(worst, diff);
            basis_gap = std::max(basis_gap, std::abs(vp - vs));
        }
    }
    const bool exploded = pow.status == RunStatus::Exploded || sig.status == RunStatus::Exploded;
    rep.note("max_abs_diff", worst);
    rep.note("max_basis_gap", basis_gap);
    if (exploded) rep.note("explosion_time", pow.explosion_time.value_or(sig.explosion_time.value_or(NAN)));
    rep.check(!exploded, "Riccati scheme completes on [0,T]");
    rep.check(worst <= 1e-3, "max |scheme1 - quadrature| <= 1e-3 (got " + num(worst) + ")");
    rep.check(basis_gap <= 1e-8, "power and factorial bases agree to 1e-8 (got " + num(basis_gap) + ")");
    cli::write_svg(com.out + ".svg", "E[exp(-c Y_t)] for geometric Brownian motion", "t", {sp, ss, sq});
    return finish(rep, com, timer, exploded ? "exploded" : "ok");
}

// ---------------- bm-quartic ----------------

struct QuarticArgs {
    double T = 0.25, riccati_T = 1.0;
    int K = 160, N = 80, steps = 1000;
    std::vector<int> M{80, 160, 320}, riccati_K{10, 20, 40};
};

int cmd_bm_quartic(const QuarticArgs& a, const Common& com) {
    Timer timer;
    auto m = brownian_model();
    auto R = [&](const Seq& v) { return R_sig1(v, m); };
    std::map<double, double> oracle_cache;
    auto oracle = [&](double t) {
        auto it = oracle_cache.find(t);
        if (it != oracle_cache.end()) return it->second;
        const double v = gauss_quadrature([](double x) { return Complex(std::exp(-std::pow(x, 4) / 24)); }, t).value.real();
        oracle_cache[t] = v;
        return v;
    };
    Report rep("bm-quartic");
    SchemeConfig base;
    base.T = a.T;
    base.steps = a.N;
    base = apply_config(com, base);
    rep.config() = {{"T", base.T}, {"K", a.K}, {"N", base.steps}, {"M", a.M}, {"riccati_T", a.riccati_T}, {"riccati_K", a.riccati_K}, {"steps", a.steps}};
    std::ofstream csv(com.out + ".csv");
    csv << "scheme,param,t,value,quadrature,rel_diff,status\n";
    std::vector<Series> series;
    std::vector<double> explosions;
    bool any_warning = false;
    for (int M : a.M) {
        SchemeConfig cfg = base;
        cfg.M = M;
        auto vs = scheme2_transport(R, Seq::delta(4, a.K, -1.0), cfg);
        Series s{"scheme2 M=" + std::to_string(M), {}, {}};
        double worst = 0;
        for (std::size_t k = 0; k < vs.times.size(); ++k) {
            const double q = oracle(vs.times[k]), v = vs.values[k].real();
            const double rel = std::abs(vs.values[k] - q) / std::abs(q);
            worst = std::max(worst, rel);
            csv << "scheme2," << M << "," << num(vs.times[k]) << "," << num(v) << "," << num(q) << "," << num(rel) << ",ok\n";
            s.x.push_back(vs.times[k]), s.y.push_back(v);
            rep.point({{"scheme", "scheme2"}, {"M", M}, {"t", vs.times[k]}}, {{"scheme2", v}, {"quadrature", q}}, rel);
        }
        if (vs.explosion_time) csv << "scheme2," << M << "," << num(*vs.explosion_time) << ",nan,nan,nan,exploded\n";
        for (const auto& w : vs.warnings) {
            std::cerr << "warning (M=" << M << "): " << w << "\n";
            any_warning = true;
        }
        explosions.push_back(vs.explosion_time.value_or(INFINITY));
        rep.note("scheme2_M" + std::to_string(M) + "_explosion_time", vs.explosion_time ? json(*vs.explosion_time) : json(nullptr));
        rep.check(worst <= 0.02, "scheme2 M=" + std::to_string(M) + " within 2% of quadrature before explosion (got " + num(worst) + ")");
        rep.check(vs.values.empty() || vs.values.front() == Complex(1.0), "scheme2 M=" + std::to_string(M) + " equals 1 at t=0");
        series.push_back(std::move(s));
    }
    rep.check(std::is_sorted(explosions.begin(), explosions.end()), "scheme2 explosion times non-decreasing in M");
    for (int K : a.riccati_K) {
        SchemeConfig cfg = base;
        cfg.T = a.riccati_T;
        cfg.steps = a.steps;
        auto vs = scheme1_riccati(R, Seq::delta(4, K, -1.0), cfg);
        Series s{"scheme1 K=" + std::to_string(K), {}, {}};
        const std::size_t stride = std::max<std::size_t>(1, vs.times.size() / 200);
        for (std::size_t k = 0; k < vs.times.size(); k += stride) {
            const double q = oracle(vs.times[k]), v = vs.values[k].real();
            const double rel = std::abs(vs.values[k] - q) / std::abs(q);
            csv << "scheme1," << K << "," << num(vs.times[k]) << "," << num(v) << "," << num(q) << "," << num(rel) << ",ok\n";
            s.x.push_back(vs.times[k]), s.y.push_back(v);
            rep.point({{"scheme", "scheme1"}, {"K", K}, {"t", vs.times[k]}}, {{"scheme1", v}, {"quadrature", q}}, rel);
        }
        if (vs.explosion_time) csv << "scheme1," << K << "," << num(*vs.explosion_time) << ",nan,nan,nan,exploded\n";
        rep.note("scheme1_K" + std::to_string(K) + "_explosion_time", vs.explosion_time ? json(*vs.explosion_time) : json(nullptr));
        rep.check(vs.status == RunStatus::Exploded, "scheme1 K=" + std::to_string(K) + " explodes before T=" + num(a.riccati_T));
        series.push_back(std::move(s));
    }
    Series sq{"quadrature", {}, {}};
    for (const auto& [t, v] : oracle_cache) sq.x.push_back(t), sq.y.push_back(v);
    series.push_back(sq);
    cli::write_svg(com.out + ".svg", "E[exp(-X_t^4/4!)] for Brownian motion", "t", series);
    return finish(rep, com, timer, any_warning ? "ok_with_warnings" : "ok");
}

// ---------------- jacobi-mgf ----------------

struct JacobiArgs {
    double T = 1000, x0 = 0.5, cmin = -3, cmax = 3, rho = 1, dt = 1e-3;
    int K = 30, points = 7;
    std::size_t mc_paths = 0;
    std::uint64_t seed = SimConfig{}.seed;
    std::string dump_paths;
};

int cmd_jacobi_mgf(const JacobiArgs& a, const Common& com) {
    Timer timer;
    auto m = jacobi_model(a.x0);
    m.K = a.K;
    auto G = linear_matrix_1d(m, a.K);
    Report rep("jacobi-mgf");
    rep.config() = {{"T", a.T}, {"K", a.K}, {"x0", a.x0}, {"cmin", a.cmin}, {"cmax", a.cmax}, {"points", a.points}, {"rho", a.rho},
                    {"mc_paths", a.mc_paths}, {"dt", a.dt}, {"seed", a.seed}};
    std::optional<Ensemble1D> ens;
    if (a.mc_paths > 0) {
        SimConfig sc;
        sc.n_paths = a.mc_paths;
        sc.T = a.T;
        sc.dt = a.dt;
        sc.seed = a.seed;
        ens = simulate_1d(m, sc);
        rep.note("clamped_steps", ens->clamp_count);
        if (!a.dump_paths.empty()) {
            if (a.mc_paths > 100000) std::cerr << "warning: dumping " << a.mc_paths << " terminal values to " << a.dump_paths << "\n";
            std::ofstream dump(a.dump_paths);
            dump << "path,x_T\n";
            for (std::size_t p = 0; p < ens->terminal.size(); ++p) dump << p << "," << num(ens->terminal[p]) << "\n";
        }
    }
    std::ofstream csv(com.out + ".csv");
    csv << "c,scheme3,stationary,mc_mean,mc_std_error\n";
    Series s3{"scheme3", {}, {}}, sst{"stationary (1-x0) + x0 e^c", {}, {}}, smc{"Monte Carlo", {}, {}};
    std::vector<std::string> labels;
    std::vector<McEstimate> mcs;
    double worst_stat = 0, worst_z = 0, at_zero = 0;
    for (int g = 0; g < a.points; ++g) {
        const double c = a.points == 1 ? a.cmin : a.cmin + (a.cmax - a.cmin) * g / (a.points - 1);
        Eigen::VectorXcd u0(a.K + 1);
        auto e = exp_star(Seq::delta(1, a.K, c));
        for (int k = 0; k <= a.K; ++k) u0(k) = e[k];
        const double v = scheme3_linear(G, u0, a.T, a.x0, a.rho).value.real();
        const double stat = (1 - a.x0) + a.x0 * std::exp(c);
        json vals{{"scheme3", v}, {"stationary", stat}};
        double mean = NAN, se = NAN;
        if (ens) {
            std::vector<Complex> z;
            z.reserve(ens->terminal.size());
            for (double x : ens->terminal) z.push_back(std::exp(c * x));
            auto est = sample_mean(z);
            mean = est.mean.real();
            se = est.std_error;
            vals["mc"] = mean;
            vals["mc_std_error"] = se;
            labels.push_back("c=" + num(c));
            mcs.push_back(est);
            const double dev = std::abs(v - mean);
            worst_z = std::max(worst_z, se > 0 ? dev / se : (dev < 1e-12 ? 0.0 : INFINITY));
            smc.x.push_back(c), smc.y.push_back(mean);
        }
        if (c == 0) at_zero = std::abs(v - 1.0);
        worst_stat = std::max(worst_stat, std::abs(v - stat));
        csv << num(c) << "," << num(v) << "," << num(stat) << "," << num(mean) << "," << num(se) << "\n";
        s3.x.push_back(c), s3.y.push_back(v);
        sst.x.push_back(c), sst.y.push_back(stat);
        rep.point({{"c", c}}, vals, ens ? std::abs(v - mean) : std::abs(v - stat));
    }
    rep.note("max_abs_diff_stationary", worst_stat);
    rep.check(at_zero <= 1e-12, "mgf(0) = 1");
    if (a.T >= 100) rep.check(worst_stat <= 5e-3, "large T: |mgf - stationary mgf| <= 5e-3 (got " + num(worst_stat) + ")");
    if (ens) {
        rep.note("max_z_mc", worst_z);
        rep.check(worst_z <= 3, "scheme3 within 3 SE of Monte Carlo (max z " + num(worst_z) + ")");
        std::ofstream summary(com.out + ".mc.csv");
        write_ensemble_summary_csv(summary, labels, mcs);
    }
    std::vector<Series> ser{s3, sst};
    if (ens) ser.push_back(smc);
    cli::write_svg(com.out + ".svg", "Jacobi diffusion: E[exp(c X_T)]", "c", ser);
    return finish(rep, com, timer, "ok");
}

// ---------------- levy-area ----------------

struct LevyArgs {
    double lambda = 1, gamma1 = 0, gamma2 = 0, T = 1, dt = 1e-3;
    int steps = 1000, points = 101;
    std::size_t mc_paths = 0;
    std::uint64_t seed = SimConfig{}.seed;
};

int cmd_levy_area(const LevyArgs& a, const Common& com) {
    Timer timer;
    SchemeConfig cfg;
    cfg.T = a.T;
    cfg.steps = a.steps;
    cfg = apply_config(com, cfg);
    auto spec = brownian_spec(2, 2);
    auto vs = scheme1_riccati([&](const TensorCoeffs& u) { return R_op(u, spec); }, levy_area_initial(a.lambda, a.gamma1, a.gamma2, 2), cfg);
    const LevyPoint pt{a.lambda, a.gamma1, a.gamma2};
    Report rep("levy-area");
    rep.config() = {{"lambda", a.lambda}, {"gamma1", a.gamma1}, {"gamma2", a.gamma2}, {"points", a.points}, {"mc_paths", a.mc_paths}, {"dt", a.dt},
                    {"seed", a.seed}, {"scheme", scheme_config_to_json(cfg)}};
    std::ofstream csv(com.out + ".csv");
    csv << "t,scheme1_re,scheme1_im,closed_form_re,closed_form_im,abs_diff,status\n";
    Series sre{"scheme1 (real part)", {}, {}}, scf{"closed form", {}, {}};
    double worst = 0;
    for (int g = 0; g < a.points; ++g) {
        const double t = a.points == 1 ? cfg.T : cfg.T * g / (a.points - 1);
        const std::size_t k = nearest_index(vs.times, t);
        const Complex cf = levy_closed_form(pt, t);
        if (k >= vs.times.size()) {
            csv << num(t) << ",nan,nan," << num(cf.real()) << "," << num(cf.imag()) << ",nan,exploded\n";
            continue;
        }
        const Complex v = vs.values[k];
        const double diff = std::abs(v - cf);
        worst = std::max(worst, diff);
        csv << num(t) << "," << num(v.real()) << "," << num(v.imag()) << "," << num(cf.real()) << "," << num(cf.imag()) << "," << num(diff) << ",ok\n";
        sre.x.push_back(t), sre.y.push_back(v.real());
        scf.x.push_back(t), scf.y.push_back(cf.real());
        rep.point({{"t", t}}, {{"scheme1", {v.real(), v.imag()}}, {"closed_form", {cf.real(), cf.imag()}}}, diff);
    }
    rep.note("max_abs_diff_closed_form", worst);
    rep.check(vs.status == RunStatus::Completed, "Riccati scheme completes on [0,T]");
    rep.check(worst <= 1e-6, "scheme1 within 1e-6 of the closed form (got " + num(worst) + ")");
    if (a.mc_paths > 0) {
        SimConfig sc;
        sc.n_paths = a.mc_paths;
        sc.T = cfg.T;
        sc.dt = a.dt;
        sc.seed = a.seed;
        const std::vector<LevyPoint> pts{pt};
        auto est = levy_area_mc(pts, sc);
        const Complex v = vs.values.back();
        const double dev = std::abs(v - est[0].mean);
        rep.point({{"t", cfg.T}}, {{"scheme1", {v.real(), v.imag()}}, {"mc", {est[0].mean.real(), est[0].mean.imag()}}, {"mc_std_error", est[0].std_error}},
                  dev);
        rep.check(dev <= 3 * est[0].std_error, "scheme1 within 3 SE of Monte Carlo at T (|diff| " + num(dev) + ", SE " + num(est[0].std_error) + ")");
        std::ofstream summary(com.out + ".mc.csv");
        write_ensemble_summary_csv(summary, {"levy"}, est);
    }
    cli::write_svg(com.out + ".svg", "E[exp(i lambda A_t + i gamma . W_t)]", "t", {sre, scf});
    return finish(rep, com, timer, vs.status == RunStatus::Completed ? "ok" : "exploded");
}

// ---------------- expected-sig ----------------

struct ExpSigArgs {
    double sigma = 0.2, s0 = 1, T = 1, dt = 1e-3;
    int level = 3;
    std::size_t mc_paths = 0;
    std::uint64_t seed = SimConfig{}.seed;
};

int cmd_expected_sig(const ExpSigArgs& a, const Common& com) {
    Timer timer;
    const int N = std::max(a.level, 2);
    auto spec = black_scholes_spec(a.sigma, a.s0, N);
    auto es = expected_signature_linear(spec, N, a.T).resized(a.level);
    Report rep("expected-sig");
    rep.config() = {{"sigma", a.sigma}, {"s0", a.s0}, {"level", a.level}, {"T", a.T}, {"mc_paths", a.mc_paths}, {"dt", a.dt}, {"seed", a.seed}};
    std::optional<ExpectedSignatureMC> mc;
    if (a.mc_paths > 0) {
        SimConfig sc;
        sc.n_paths = a.mc_paths;
        sc.T = a.T;
        sc.dt = a.dt;
        sc.seed = a.seed;
        mc = expected_signature_mc(spec, sc, a.level);
    }
    std::ofstream csv(com.out + ".csv");
    csv << "word,scheme3,mc_mean,mc_std_error,z\n";
    Series s3{"scheme3", {}, {}}, smc{"Monte Carlo", {}, {}};
    double time_err = 0, worst_z = 0;
    std::vector<std::string> labels;
    std::vector<McEstimate> est;
    for (std::size_t k = 0; k < es.size(); ++k) {
        const Word w = index_word(k, 2);
        const double v = es[k].real();
        if (std::all_of(w.letters().begin(), w.letters().end(), [](int l) { return l == 1; }))
            time_err = std::max(time_err, std::abs(v - std::pow(a.T, static_cast<double>(w.size())) / std::tgamma(w.size() + 1.0)));
        double mean = NAN, se = NAN, z = NAN;
        json vals{{"scheme3", v}};
        if (mc) {
            mean = mc->mean[k].real();
            se = mc->std_error[k];
            const double dev = std::abs(v - mean);
            z = se > 0 ? dev / se : (dev < 1e-10 ? 0.0 : INFINITY);
            worst_z = std::max(worst_z, z);
            vals["mc"] = mean;
            vals["mc_std_error"] = se;
            smc.x.push_back(static_cast<double>(k)), smc.y.push_back(mean);
            McEstimate e;
            e.mean = mean;
            e.std_error = se;
            e.n = mc->n_paths;
            labels.push_back("(" + w.to_string() + ")");
            est.push_back(e);
        }
        csv << "\"(" << w.to_string() << ")\"," << num(v) << "," << num(mean) << "," << num(se) << "," << num(z) << "\n";
        s3.x.push_back(static_cast<double>(k)), s3.y.push_back(v);
        rep.point({{"word", w.to_string()}}, vals, mc ? std::abs(v - mean) : 0.0);
    }
    rep.check(time_err <= 1e-10, "pure-time words equal T^m/m! (max deviation " + num(time_err) + ")");
    if (mc) {
        rep.note("max_z_mc", worst_z);
        rep.check(worst_z <= 3, "scheme3 within 3 SE of Monte Carlo for every word (max z " + num(worst_z) + ")");
        std::ofstream summary(com.out + ".mc.csv");
        write_ensemble_summary_csv(summary, labels, est);
    }
    std::vector<Series> ser{s3};
    if (mc) ser.push_back(smc);
    cli::write_svg(com.out + ".svg", "Expected signature, Black-Scholes with time", "word index", ser);
    return finish(rep, com, timer, "ok");
}

// ---------------- algebra ----------------

struct AlgebraArgs {
    std::vector<std::string> inputs;
    std::string out;
    int d = 0, N = -1;
    bool time_extend = false;
};

std::pair<int, int> shape_of(const AlgebraArgs& a, const std::vector<std::string>& texts) {
    int d = 1, N = 0;
    for (const auto& t : texts) {
        auto [td, tn] = infer_shape(t);
        d = std::max(d, td);
        N = std::max(N, tn);
    }
    if (a.d > 0) d = a.d;
    if (a.N >= 0) N = a.N;
    return {d, N};
}

void emit(const AlgebraArgs& a, const TensorCoeffs& t) {
    if (a.out.empty()) {
        std::cout << to_text(t);
    } else {
        std::ofstream(a.out) << to_text(t);
    }
}

int cmd_algebra(const std::string& op, const AlgebraArgs& a) {
    if (op == "sig") {
        std::ifstream in(a.inputs.at(0));
        if (!in) throw std::runtime_error("cannot open " + a.inputs.at(0));
        auto path = read_path_csv(in);
        if (a.time_extend) path = time_extend(path);
        emit(a, path_signature(path, a.N < 0 ? 3 : a.N).value);
        return 0;
    }
    std::vector<std::string> texts;
    for (const auto& p : a.inputs) texts.push_back(read_file(p));
    auto [d, N] = shape_of(a, texts);
    if (op == "shuffle") {
        if (a.N < 0) N = 0;
        for (const auto& t : texts) N += infer_shape(t).second;
        if (a.N >= 0) N = a.N;
        emit(a, shuffle(from_text(texts.at(0), d, N), from_text(texts.at(1), d, N)));
    } else if (op == "concat") {
        if (a.N < 0) N = infer_shape(texts.at(0)).second + infer_shape(texts.at(1)).second;
        emit(a, concat(from_text(texts.at(0), d, N), from_text(texts.at(1), d, N)));
    } else if (op == "exp") {
        emit(a, shuffle_exp(from_text(texts.at(0), d, N)));
    } else if (op == "log") {
        emit(a, shuffle_log(from_text(texts.at(0), d, N)));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Signature calculus toolkit: transform and moment schemes for signature SDEs, with Monte Carlo and quadrature oracles"};
    app.require_subcommand(1);
    int rc = 0;

    Common cg;
    GbmArgs ga;
    auto* gbm = app.add_subcommand("gbm-laplace", "E[exp(-c Y_t)] for Y = y0 exp(W) by the Riccati scheme in both bases, against quadrature");
    gbm->add_option("--c", ga.c)->capture_default_str();
    gbm->add_option("--y0", ga.y0)->capture_default_str();
    gbm->add_option("--T", ga.T)->capture_default_str()->check(CLI::PositiveNumber);
    gbm->add_option("--K", ga.K, "truncation level")->capture_default_str()->check(CLI::NonNegativeNumber);
    gbm->add_option("--steps", ga.steps, "RK4 steps")->capture_default_str()->check(CLI::PositiveNumber);
    gbm->add_option("--points", ga.points, "output grid points on [0,T]")->capture_default_str()->check(CLI::PositiveNumber);
    add_common(gbm, cg, "gbm_laplace");
    add_config(gbm, cg);
    gbm->callback([&] { rc = cmd_gbm_laplace(ga, cg); });

    Common cq;
    QuarticArgs qa;
    auto* quart = app.add_subcommand("bm-quartic", "E[exp(-X_t^4/4!)] for Brownian motion by the transport and Riccati schemes");
    quart->add_option("--T", qa.T, "transport scheme horizon")->capture_default_str()->check(CLI::PositiveNumber);
    quart->add_option("--K", qa.K, "transport scheme truncation level")->capture_default_str();
    quart->add_option("--N", qa.N, "transport scheme grid size")->capture_default_str()->check(CLI::PositiveNumber);
    quart->add_option("--M", qa.M, "transport scheme composition parameters")->capture_default_str();
    quart->add_option("--riccati-T", qa.riccati_T, "Riccati scheme horizon")->capture_default_str();
    quart->add_option("--riccati-K", qa.riccati_K, "Riccati scheme truncation levels")->capture_default_str();
    quart->add_option("--steps", qa.steps, "Riccati RK4 steps")->capture_default_str();
    add_common(quart, cq, "bm_quartic");
    add_config(quart, cq);
    quart->callback([&] { rc = cmd_bm_quartic(qa, cq); });

    Common cj;
    JacobiArgs ja;
    auto* jac = app.add_subcommand("jacobi-mgf", "E[exp(c X_T)] for the Jacobi diffusion by the linear scheme");
    jac->add_option("--T", ja.T)->capture_default_str()->check(CLI::PositiveNumber);
    jac->add_option("--K", ja.K, "truncation level")->capture_default_str()->check(CLI::PositiveNumber);
    jac->add_option("--x0", ja.x0)->capture_default_str()->check(CLI::Range(0.0, 1.0));
    jac->add_option("--cmin", ja.cmin)->capture_default_str();
    jac->add_option("--cmax", ja.cmax)->capture_default_str();
    jac->add_option("--points", ja.points, "number of c values")->capture_default_str()->check(CLI::PositiveNumber);
    jac->add_option("--rho", ja.rho, "basis rescaling for the matrix exponential")->capture_default_str();
    jac->add_option("--mc-paths", ja.mc_paths, "Monte Carlo paths (0 skips the simulation)")->capture_default_str();
    jac->add_option("--dt", ja.dt)->capture_default_str()->check(CLI::PositiveNumber);
    jac->add_option("--seed", ja.seed)->capture_default_str();
    jac->add_option("--dump-paths", ja.dump_paths, "write simulated terminal values to this CSV");
    add_common(jac, cj, "jacobi_mgf");
    jac->callback([&] { rc = cmd_jacobi_mgf(ja, cj); });

    Common cl;
    LevyArgs la;
    auto* lev = app.add_subcommand("levy-area", "E[exp(i lambda A_t + i gamma . W_t)] for planar Brownian motion by the Riccati scheme");
    lev->add_option("--lambda", la.lambda)->capture_default_str();
    lev->add_option("--gamma1", la.gamma1)->capture_default_str();
    lev->add_option("--gamma2", la.gamma2)->capture_default_str();
    lev->add_option("--T", la.T)->capture_default_str()->check(CLI::PositiveNumber);
    lev->add_option("--steps", la.steps)->capture_default_str()->check(CLI::PositiveNumber);
    lev->add_option("--points", la.points)->capture_default_str()->check(CLI::PositiveNumber);
    lev->add_option("--mc-paths", la.mc_paths, "Monte Carlo paths (0 skips the simulation)")->capture_default_str();
    lev->add_option("--dt", la.dt)->capture_default_str()->check(CLI::PositiveNumber);
    lev->add_option("--seed", la.seed)->capture_default_str();
    add_common(lev, cl, "levy_area");
    add_config(lev, cl);
    lev->callback([&] { rc = cmd_levy_area(la, cl); });

    Common ce;
    ExpSigArgs ea;
    auto* esig = app.add_subcommand("expected-sig", "expected signature of the time-extended Black-Scholes model by the linear scheme");
    esig->add_option("--sigma", ea.sigma)->capture_default_str();
    esig->add_option("--s0", ea.s0)->capture_default_str();
    esig->add_option("--level", ea.level)->capture_default_str()->check(CLI::Range(0, 8));
    esig->add_option("--T", ea.T)->capture_default_str()->check(CLI::PositiveNumber);
    esig->add_option("--mc-paths", ea.mc_paths, "Monte Carlo paths (0 skips the simulation)")->capture_default_str();
    esig->add_option("--dt", ea.dt)->capture_default_str()->check(CLI::PositiveNumber);
    esig->add_option("--seed", ea.seed)->capture_default_str();
    add_common(esig, ce, "expected_sig");
    esig->callback([&] { rc = cmd_expected_sig(ea, ce); });

    auto* alg = app.add_subcommand("algebra", "tensor utilities on the text format");
    alg->require_subcommand(1);
    std::vector<std::pair<std::string, AlgebraArgs>> ops{{"shuffle", {}}, {"concat", {}}, {"exp", {}}, {"log", {}}, {"sig", {}}};
    for (auto& [name, args] : ops) {
        const int n_in = (name == "shuffle" || name == "concat") ? 2 : 1;
        std::string help = name == "sig" ? "signature of a path CSV (t,x1,...,xd)" : name == "exp" ? "shuffle exponential" : name == "log" ? "shuffle logarithm" : name + " product";
        auto* sub = alg->add_subcommand(name, help);
        sub->add_option("inputs", args.inputs, "input file(s)")->required()->expected(n_in)->check(CLI::ExistingFile);
        sub->add_option("--out", args.out, "output file (default: stdout)");
        sub->add_option("--N,--level", args.N, "truncation level (default: inferred)");
        if (name != "sig") sub->add_option("--d", args.d, "alphabet size (default: inferred)");
        if (name == "sig") sub->add_flag("--time-extend", args.time_extend, "prepend time as letter 1");
        const std::string op = name;
        AlgebraArgs* ap = &args;
        sub->callback([&rc, op, ap] { rc = cmd_algebra(op, *ap); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return rc;
}
