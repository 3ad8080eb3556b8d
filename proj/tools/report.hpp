#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "sigcalc/io.hpp"

namespace sigcalc::cli {

struct Series {
    std::string label;
    std::vector<double> x, y;
};

// Minimal line chart: frame, ticks, one polyline per series, legend. Non-finite points break the line.
inline void write_svg(const std::string& path, const std::string& title, const std::string& xlabel, const std::vector<Series>& series) {
    const double W = 720, H = 440, L = 70, R = 170, Tm = 40, B = 50;
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y0 -= 0.5, y1 += 0.5;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - Tm - B); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

    std::ofstream out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
    out << "<rect x=\"" << L << "\" y=\"" << Tm << "\" width=\"" << W - L - R << "\" height=\"" << H - Tm - B << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = x0 + (x1 - x0) * k / 4, yv = y0 + (y1 - y0) * k / 4;
        out << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << format_double(std::round(xv * 1e4) / 1e4) << "</text>\n";
        out << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << format_double(std::round(yv * 1e4) / 1e4) << "</text>\n";
    }
    out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* col = colors[s % 8];
        std::string pts;
        auto flush = [&] {
            if (!pts.empty()) out << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"" << pts << "\"/>\n";
            pts.clear();
        };
        for (std::size_t i = 0; i < series[s].x.size(); ++i) {
            if (!std::isfinite(series[s].x[i]) || !std::isfinite(series[s].y[i])) {
                flush();
                continue;
            }
            pts += format_double(px(series[s].x[i])) + "," + format_double(py(series[s].y[i])) + " ";
        }
        flush();
        const double ly = Tm + 14 + 18.0 * static_cast<double>(s);
        out << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly << "\" stroke=\"" << col
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << W - R + 36 << "\" y=\"" << ly + 4 << "\">" << series[s].label << "</text>\n";
    }
    out << "</svg>\n";
}

// One entry per grid point; every value carries its source tag (scheme1, scheme2, scheme3, mc, quadrature, closed_form).
class Report {
public:
    explicit Report(std::string command) { j_["command"] = std::move(command); }

    nlohmann::json& config() { return j_["config"]; }

    void point(const nlohmann::json& at, const nlohmann::json& values, double difference) {
        j_["points"].push_back({{"at", at}, {"values", values}, {"difference", difference}});
    }

    void note(const std::string& key, const nlohmann::json& v) { j_["summary"][key] = v; }

    void check(bool ok, const std::string& what) {
        j_["checks"].push_back({{"passed", ok}, {"check", what}});
        if (!ok) failed_ = true;
    }

    bool failed() const { return failed_; }

    void write(const std::string& path, double seconds, const std::string& status) {
        j_["timing_seconds"] = seconds;
        j_["status"] = status;
        std::ofstream(path) << j_.dump(2) << "\n";
    }

private:
    nlohmann::json j_;
    bool failed_ = false;
};

}  // namespace sigcalc::cli
