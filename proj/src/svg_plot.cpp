// Deterministic SVG/CSV plot artifacts: one file pair per (graph, estimator)
// series, median curve with interquartile band across seeds. No external
// renderer; the SVG is assembled textually with fixed float formatting so
// identical inputs give identical bytes.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "glc/errors.hpp"
#include "glc/eval.hpp"

namespace glc {
namespace {

struct SeriesPoint {
    double x;
    double q1, median, q3;
    double aux = 0.0;  // pr_curve: lambda
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string sanitize(const std::string& s) {
    std::string out;
    for (char c : s)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-')
                   ? c
                   : '-';
    return out;
}

double quantile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    if (v.size() == 1) return v[0];
    const double pos = p * static_cast<double>(v.size() - 1);
    const size_t lo = static_cast<size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    return lo + 1 < v.size() ? v[lo] + frac * (v[lo + 1] - v[lo]) : v[lo];
}

struct Axis {
    double lo, hi;
    bool log10;
    double to_unit(double v) const {
        if (log10) return (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo));
        return (v - lo) / (hi - lo);
    }
};

double nice_step(double span) {
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double norm = raw / mag;
    if (norm <= 1.0) return mag;
    if (norm <= 2.0) return 2.0 * mag;
    if (norm <= 5.0) return 5.0 * mag;
    return 10.0 * mag;
}

// Plot geometry.
constexpr double kW = 720, kH = 480;
constexpr double kL = 80, kR = 690, kT = 40, kB = 420;

double px(const Axis& ax, double v) { return kL + ax.to_unit(v) * (kR - kL); }
double py(const Axis& ax, double v) { return kB - ax.to_unit(v) * (kB - kT); }

void write_svg(const std::string& path, const std::string& title, const std::string& x_label,
               const std::string& y_label, const Axis& xa, const Axis& ya,
               const std::vector<SeriesPoint>& pts, bool band) {
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
        << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n";
    svg << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << (kL + kR) / 2 << "\" y=\"22\" font-family=\"sans-serif\" font-size=\"14\""
        << " text-anchor=\"middle\">" << title << "</text>\n";

    // axes
    svg << "<line x1=\"" << kL << "\" y1=\"" << kB << "\" x2=\"" << kR << "\" y2=\"" << kB
        << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL << "\" y2=\"" << kB
        << "\" stroke=\"black\"/>\n";

    // x ticks
    std::vector<double> xticks;
    if (xa.log10) {
        for (double d = std::pow(10.0, std::floor(std::log10(xa.lo)));
             d <= xa.hi * 1.0000001; d *= 10.0)
            if (d >= xa.lo * 0.9999999) xticks.push_back(d);
    } else {
        const double step = nice_step(xa.hi - xa.lo);
        for (double v = std::ceil(xa.lo / step) * step; v <= xa.hi * 1.0000001; v += step)
            xticks.push_back(v);
    }
    for (double v : xticks) {
        const double x = px(xa, v);
        svg << "<line x1=\"" << fmt(x) << "\" y1=\"" << kB << "\" x2=\"" << fmt(x) << "\" y2=\""
            << kB + 5 << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << fmt(x) << "\" y=\"" << kB + 20
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" << fmt(v)
            << "</text>\n";
    }
    // y ticks
    const double ystep = nice_step(ya.hi - ya.lo);
    for (double v = std::ceil(ya.lo / ystep) * ystep; v <= ya.hi * 1.0000001; v += ystep) {
        const double y = py(ya, v);
        svg << "<line x1=\"" << kL - 5 << "\" y1=\"" << fmt(y) << "\" x2=\"" << kL << "\" y2=\""
            << fmt(y) << "\" stroke=\"black\"/>\n";
        svg << "<line x1=\"" << kL << "\" y1=\"" << fmt(y) << "\" x2=\"" << kR << "\" y2=\""
            << fmt(y) << "\" stroke=\"#dddddd\"/>\n";
        svg << "<text x=\"" << kL - 9 << "\" y=\"" << fmt(y + 4)
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << fmt(v)
            << "</text>\n";
    }
    svg << "<text x=\"" << (kL + kR) / 2 << "\" y=\"" << kH - 18
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" << x_label
        << "</text>\n";
    svg << "<text x=\"20\" y=\"" << (kT + kB) / 2
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
        << "transform=\"rotate(-90 20 " << (kT + kB) / 2 << ")\">" << y_label << "</text>\n";

    if (band && pts.size() > 1) {
        svg << "<polygon fill=\"#1f77b4\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
        for (const auto& p : pts) svg << fmt(px(xa, p.x)) << ',' << fmt(py(ya, p.q3)) << ' ';
        for (auto it = pts.rbegin(); it != pts.rend(); ++it)
            svg << fmt(px(xa, it->x)) << ',' << fmt(py(ya, it->q1)) << ' ';
        svg << "\"/>\n";
    }
    if (pts.size() > 1) {
        svg << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
        for (const auto& p : pts) svg << fmt(px(xa, p.x)) << ',' << fmt(py(ya, p.median)) << ' ';
        svg << "\"/>\n";
    }
    for (const auto& p : pts)
        svg << "<circle cx=\"" << fmt(px(xa, p.x)) << "\" cy=\"" << fmt(py(ya, p.median))
            << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
    svg << "</svg>\n";

    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot open '" + path + "' for writing");
    out << svg.str();
    out.flush();
    if (!out) throw data_error("write to '" + path + "' failed");
}

struct SplitLabel {
    std::string base;
    double value = 0.0;
    bool tagged = false;
};

SplitLabel split_tag(const std::string& label, const std::string& tag) {
    const auto pos = label.find(tag);
    if (pos == std::string::npos) return {label, 0.0, false};
    return {label.substr(0, pos), std::stod(label.substr(pos + tag.size())), true};
}

}  // namespace

std::vector<std::string> emit_plot(const std::vector<MetricRow>& rows, PlotKind kind,
                                   const std::string& output_dir) {
    if (rows.empty()) throw param_error("no rows to plot");
    std::filesystem::create_directories(output_dir);
    std::vector<std::string> written;

    const char* kind_name = kind == PlotKind::f1_vs_n        ? "f1_vs_n"
                            : kind == PlotKind::l2_vs_n      ? "l2_vs_n"
                            : kind == PlotKind::time_vs_n    ? "time_vs_n"
                            : kind == PlotKind::pr_curve     ? "pr_curve"
                                                             : "f1_vs_pinit";

    // series key -> x -> sample values (pr_curve: lambda -> [prec], [rec]).
    struct Bucket {
        std::map<double, std::vector<double>> ys;
        std::map<double, std::vector<double>> ys2;  // pr_curve recall
        std::string graph, estimator;
    };
    std::map<std::pair<std::string, std::string>, Bucket> series;

    for (const MetricRow& r : rows) {
        // failed cells carry NaN metrics; they are recorded, not plotted
        if (!std::isfinite(r.f1) || !std::isfinite(r.l2_error)) continue;
        if (kind == PlotKind::pr_curve) {
            const SplitLabel est = split_tag(r.estimator, "@lambda=");
            if (!est.tagged) continue;
            Bucket& b = series[{r.graph, est.base}];
            b.graph = r.graph;
            b.estimator = est.base;
            b.ys[est.value].push_back(r.precision);
            b.ys2[est.value].push_back(r.recall);
        } else if (kind == PlotKind::f1_vs_pinit) {
            const SplitLabel g = split_tag(r.graph, "@pinit=");
            if (!g.tagged) continue;
            Bucket& b = series[{g.base, r.estimator}];
            b.graph = g.base;
            b.estimator = r.estimator;
            b.ys[g.value].push_back(r.f1);
        } else {
            const double y = kind == PlotKind::f1_vs_n  ? r.f1
                             : kind == PlotKind::l2_vs_n ? r.l2_error
                                                         : r.wall_time_ms;
            Bucket& b = series[{r.graph, r.estimator}];
            b.graph = r.graph;
            b.estimator = r.estimator;
            b.ys[static_cast<double>(r.n_cascades)].push_back(y);
        }
    }
    if (series.empty()) throw param_error("rows carry no data for this plot kind");

    for (const auto& [key, bucket] : series) {
        std::vector<SeriesPoint> pts;
        if (kind == PlotKind::pr_curve) {
            // one point per lambda, descending lambda
            for (auto it = bucket.ys.rbegin(); it != bucket.ys.rend(); ++it) {
                const double lambda = it->first;
                SeriesPoint p;
                p.aux = lambda;
                p.median = quantile(it->second, 0.5);                  // precision
                p.x = quantile(bucket.ys2.at(lambda), 0.5);            // recall
                p.q1 = quantile(it->second, 0.25);
                p.q3 = quantile(it->second, 0.75);
                pts.push_back(p);
            }
        } else {
            for (const auto& [x, vals] : bucket.ys) {
                SeriesPoint p;
                p.x = x;
                p.q1 = quantile(vals, 0.25);
                p.median = quantile(vals, 0.5);
                p.q3 = quantile(vals, 0.75);
                pts.push_back(p);
            }
        }

        const std::string stem = std::string(kind_name) + "__" + sanitize(bucket.graph) + "__" +
                                 sanitize(bucket.estimator);
        const std::string svg_path = (std::filesystem::path(output_dir) / (stem + ".svg")).string();
        const std::string csv_path = (std::filesystem::path(output_dir) / (stem + ".csv")).string();

        Axis xa{}, ya{};
        std::string x_label, y_label;
        if (kind == PlotKind::pr_curve) {
            xa = {0.0, 1.0, false};
            ya = {0.0, 1.0, false};
            x_label = "recall";
            y_label = "precision";
        } else if (kind == PlotKind::f1_vs_pinit) {
            double lo = pts.front().x, hi = pts.back().x;
            xa = {std::min(lo, hi), std::max(lo, hi) * 1.0 + 1e-12, false};
            if (xa.lo == xa.hi) xa.hi = xa.lo + 1.0;
            ya = {0.0, 1.0, false};
            x_label = "p_init";
            y_label = "f1";
        } else {
            double lo = pts.front().x, hi = pts.back().x;
            const bool log_x = lo > 0.0 && hi / lo >= 8.0;
            if (lo == hi) hi = lo + 1.0;
            xa = {lo, hi, log_x};
            x_label = "cascades";
            if (kind == PlotKind::f1_vs_n) {
                ya = {0.0, 1.0, false};
                y_label = "f1";
            } else {
                double ymax = 0.0;
                for (const auto& p : pts) ymax = std::max(ymax, p.q3);
                ya = {0.0, ymax > 0.0 ? ymax * 1.1 : 1.0, false};
                y_label = kind == PlotKind::l2_vs_n ? "l2 error" : "wall time (ms)";
            }
        }

        write_svg(svg_path, bucket.graph + " / " + bucket.estimator, x_label, y_label, xa, ya, pts,
                  kind != PlotKind::pr_curve);

        std::ofstream csv(csv_path, std::ios::binary);
        if (!csv) throw data_error("cannot open '" + csv_path + "' for writing");
        if (kind == PlotKind::pr_curve) {
            csv << "lambda,recall,precision,precision_q1,precision_q3\n";
            for (const auto& p : pts)
                csv << fmt(p.aux) << ',' << fmt(p.x) << ',' << fmt(p.median) << ',' << fmt(p.q1)
                    << ',' << fmt(p.q3) << '\n';
        } else {
            csv << (kind == PlotKind::f1_vs_pinit ? "p_init" : "n_cascades") << ",q1,median,q3\n";
            for (const auto& p : pts)
                csv << fmt(p.x) << ',' << fmt(p.q1) << ',' << fmt(p.median) << ',' << fmt(p.q3)
                    << '\n';
        }
        csv.flush();
        if (!csv) throw data_error("write to '" + csv_path + "' failed");
        written.push_back(svg_path);
        written.push_back(csv_path);
    }
    return written;
}

}  // namespace glc
