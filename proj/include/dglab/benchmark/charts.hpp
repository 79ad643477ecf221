#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "dglab/benchmark/aggregate.hpp"
#include "dglab/rng.hpp"

namespace dglab {

// Chart layout. All coordinates are written with two decimals.
//   canvas: width = max(480, 70 + 20 + 120 * methods) for the distribution
//           chart, 560 for scatters; height 400
//   margins: left 70, right 20, top 40, bottom 60
//   value axis: ticks from nice_ticks(min, max, 5); a flat range is widened by
//           0.05 on both sides
//   distribution glyphs: radius 3.5, horizontal jitter uniform in +-20% of the
//           method band, drawn from a stream seeded by the method name and the
//           row's position within the method
//   quartile box: q1..q3 with a median line and min/max whiskers, quantiles by
//           linear interpolation; drawn only when a method has >= 2 runs
//   scatter x axis: log10 when every value is positive and max/min >= 100;
//           categorical labels are placed at integer positions in first-seen order
namespace chart_detail {

constexpr double height = 400, left = 70, right = 20, top = 40, bottom = 60;

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline double nice_number(double x, bool round) {
    const double e = std::floor(std::log10(x));
    const double f = x / std::pow(10.0, e);
    double nf;
    if (round) nf = f < 1.5 ? 1 : f < 3 ? 2 : f < 7 ? 5 : 10;
    else nf = f <= 1 ? 1 : f <= 2 ? 2 : f <= 5 ? 5 : 10;
    return nf * std::pow(10.0, e);
}

struct Ticks {
    double lo, hi, step;
    std::vector<double> values;
    int decimals;
};

inline Ticks nice_ticks(double lo, double hi, int n = 5) {
    if (hi - lo < 1e-12) {
        lo -= 0.05;
        hi += 0.05;
    }
    const double range = nice_number(hi - lo, false);
    const double step = nice_number(range / (n - 1), true);
    Ticks t{std::floor(lo / step) * step, std::ceil(hi / step) * step, step, {}, 0};
    t.decimals = std::max(0, static_cast<int>(-std::floor(std::log10(step) + 1e-9)));
    for (int k = 0;; ++k) {
        const double v = t.lo + k * step;
        if (v > t.hi + step * 1e-6) break;
        t.values.push_back(v);
    }
    return t;
}

inline std::string tick_label(double v, int decimals) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, std::abs(v) < 1e-12 ? 0.0 : v);
    return buf;
}

/// Quantile with linear interpolation between order statistics.
inline double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(i);
    return i + 1 < v.size() ? v[i] + frac * (v[i + 1] - v[i]) : v[i];
}

inline std::string header(double width, const std::string& title) {
    std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) + "\" height=\"" + fmt(height) +
         "\" viewBox=\"0 0 " + fmt(width) + " " + fmt(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    s += "<rect x=\"0\" y=\"0\" width=\"" + fmt(width) + "\" height=\"" + fmt(height) + "\" fill=\"white\"/>\n";
    s += "<text x=\"" + fmt(width / 2) + "\" y=\"22.00\" text-anchor=\"middle\" font-size=\"14\">" + escape(title) +
         "</text>\n";
    return s;
}

/// Value axis on the left with grid lines; returns the mapping to pixels.
struct YAxis {
    Ticks ticks;
    double y(double v) const {
        const double plot_h = height - top - bottom;
        return top + plot_h * (1.0 - (v - ticks.lo) / (ticks.hi - ticks.lo));
    }
};

inline std::string draw_y_axis(const YAxis& ax, double width, const std::string& label) {
    std::string s;
    for (double v : ax.ticks.values) {
        const std::string y = fmt(ax.y(v));
        s += "<line x1=\"" + fmt(left) + "\" y1=\"" + y + "\" x2=\"" + fmt(width - right) + "\" y2=\"" + y +
             "\" stroke=\"#e0e0e0\"/>\n";
        s += "<text x=\"" + fmt(left - 6) + "\" y=\"" + fmt(ax.y(v) + 4) + "\" text-anchor=\"end\">" +
             tick_label(v, ax.ticks.decimals) + "</text>\n";
    }
    s += "<line x1=\"" + fmt(left) + "\" y1=\"" + fmt(top) + "\" x2=\"" + fmt(left) + "\" y2=\"" +
         fmt(height - bottom) + "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + fmt(left) + "\" y1=\"" + fmt(height - bottom) + "\" x2=\"" + fmt(width - right) +
         "\" y2=\"" + fmt(height - bottom) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"16.00\" y=\"" + fmt(top + (height - top - bottom) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16.00 " +
         fmt(top + (height - top - bottom) / 2) + ")\">" + escape(label) + "</text>\n";
    return s;
}

inline std::string file_safe(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.') c = '-';
    return out;
}

struct OkRow {
    std::string method;
    double acc;
    std::vector<std::string> params;  // aligned with the table's parameter columns
};

}  // namespace chart_detail

/// Test accuracy per method: one glyph per run with a quartile box.
inline std::string distribution_chart_svg(const std::vector<std::string>& methods,
                                          const std::vector<std::vector<double>>& accs) {
    using namespace chart_detail;
    const double width = std::max(480.0, left + right + 120.0 * static_cast<double>(methods.size()));
    double lo = 1e300, hi = -1e300;
    for (const auto& a : accs)
        for (double v : a) lo = std::min(lo, v), hi = std::max(hi, v);
    const YAxis ax{nice_ticks(lo, hi)};
    std::string s = header(width, "test accuracy by method");
    s += draw_y_axis(ax, width, "test accuracy");
    const double band = (width - left - right) / static_cast<double>(methods.size());
    for (std::size_t m = 0; m < methods.size(); ++m) {
        const double cx = left + band * (static_cast<double>(m) + 0.5);
        const auto& a = accs[m];
        if (a.size() >= 2) {
            const double q1 = quantile(a, 0.25), med = quantile(a, 0.5), q3 = quantile(a, 0.75);
            const double mn = *std::min_element(a.begin(), a.end()), mx = *std::max_element(a.begin(), a.end());
            const double half = band * 0.25;
            s += "<line x1=\"" + fmt(cx) + "\" y1=\"" + fmt(ax.y(mx)) + "\" x2=\"" + fmt(cx) + "\" y2=\"" +
                 fmt(ax.y(q3)) + "\" stroke=\"#555555\"/>\n";
            s += "<line x1=\"" + fmt(cx) + "\" y1=\"" + fmt(ax.y(q1)) + "\" x2=\"" + fmt(cx) + "\" y2=\"" +
                 fmt(ax.y(mn)) + "\" stroke=\"#555555\"/>\n";
            s += "<rect x=\"" + fmt(cx - half) + "\" y=\"" + fmt(ax.y(q3)) + "\" width=\"" + fmt(2 * half) +
                 "\" height=\"" + fmt(ax.y(q1) - ax.y(q3)) + "\" fill=\"#dbe8f5\" stroke=\"#555555\"/>\n";
            s += "<line x1=\"" + fmt(cx - half) + "\" y1=\"" + fmt(ax.y(med)) + "\" x2=\"" + fmt(cx + half) +
                 "\" y2=\"" + fmt(ax.y(med)) + "\" stroke=\"black\" stroke-width=\"2\"/>\n";
        }
        for (std::size_t k = 0; k < a.size(); ++k) {
            Rng rng(derive_seed(fnv1a(methods[m]), k));
            const double jx = cx + (rng.uniform() - 0.5) * band * 0.4;
            s += "<circle cx=\"" + fmt(jx) + "\" cy=\"" + fmt(ax.y(a[k])) +
                 "\" r=\"3.50\" fill=\"#1f77b4\" fill-opacity=\"0.8\"/>\n";
        }
        s += "<text x=\"" + fmt(cx) + "\" y=\"" + fmt(height - bottom + 18) + "\" text-anchor=\"middle\">" +
             escape(methods[m]) + " (n=" + std::to_string(a.size()) + ")</text>\n";
    }
    s += "</svg>\n";
    return s;
}

/// Test accuracy against one hyperparameter of one method.
inline std::string scatter_chart_svg(const std::string& method, const std::string& param,
                                     const std::vector<std::string>& xs, const std::vector<double>& ys) {
    using namespace chart_detail;
    const double width = 560;
    const double plot_w = width - left - right;

    bool numeric = true;
    std::vector<double> xv;
    for (const auto& x : xs) {
        const ParamValue v = parse_param_value(x);
        if (const double* d = std::get_if<double>(&v)) xv.push_back(*d);
        else numeric = false;
    }
    std::vector<std::string> cats;
    if (!numeric) {
        xv.clear();
        for (const auto& x : xs) {
            auto it = std::find(cats.begin(), cats.end(), x);
            if (it == cats.end()) {
                cats.push_back(x);
                it = cats.end() - 1;
            }
            xv.push_back(static_cast<double>(it - cats.begin()));
        }
    }
    const double xmin = *std::min_element(xv.begin(), xv.end()), xmax = *std::max_element(xv.begin(), xv.end());
    const bool logx = numeric && xmin > 0 && xmax / xmin >= 100;

    std::string s = header(width, method + ": test accuracy vs " + param);
    const YAxis ay{nice_ticks(*std::min_element(ys.begin(), ys.end()), *std::max_element(ys.begin(), ys.end()))};
    s += draw_y_axis(ay, width, "test accuracy");

    std::function<double(double)> px;
    std::string xticks;
    auto xtick = [&](double pos, const std::string& label) {
        xticks += "<line x1=\"" + fmt(pos) + "\" y1=\"" + fmt(height - bottom) + "\" x2=\"" + fmt(pos) + "\" y2=\"" +
                  fmt(height - bottom + 5) + "\" stroke=\"black\"/>\n";
        xticks += "<text x=\"" + fmt(pos) + "\" y=\"" + fmt(height - bottom + 18) + "\" text-anchor=\"middle\">" +
                  escape(label) + "</text>\n";
    };
    if (!numeric) {
        const double band = plot_w / static_cast<double>(cats.size());
        px = [=](double v) { return left + band * (v + 0.5); };
        for (std::size_t i = 0; i < cats.size(); ++i) xtick(px(static_cast<double>(i)), cats[i]);
    } else if (logx) {
        const double e0 = std::floor(std::log10(xmin)), e1 = std::ceil(std::log10(xmax));
        px = [=](double v) { return left + plot_w * (std::log10(v) - e0) / (e1 - e0); };
        for (double e = e0; e <= e1; e += 1) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "1e%d", static_cast<int>(e));
            xtick(px(std::pow(10.0, e)), buf);
        }
    } else {
        const Ticks t = nice_ticks(xmin, xmax);
        px = [=](double v) { return left + plot_w * (v - t.lo) / (t.hi - t.lo); };
        for (double v : t.values) xtick(px(v), tick_label(v, t.decimals));
    }
    s += xticks;
    s += "<text x=\"" + fmt(left + plot_w / 2) + "\" y=\"" + fmt(height - 16) + "\" text-anchor=\"middle\">" +
         escape(param) + (logx ? " (log scale)" : "") + "</text>\n";
    for (std::size_t i = 0; i < ys.size(); ++i)
        s += "<circle cx=\"" + fmt(px(xv[i])) + "\" cy=\"" + fmt(ay.y(ys[i])) +
             "\" r=\"3.50\" fill=\"#d62728\" fill-opacity=\"0.8\"/>\n";
    s += "</svg>\n";
    return s;
}

/// Writes accuracy_distribution.svg and one scatter_<method>_<param>.svg per
/// hyperparameter that takes more than one value among a method's ok runs.
inline std::vector<fs::path> render_charts(const ResultTable& table, const fs::path& out_dir) {
    using namespace chart_detail;
    const auto c_method = table.column("method"), c_status = table.column("status"),
               c_acc = table.column("test_acc");
    if (!c_method || !c_status || !c_acc) throw ConfigError("table", "table lacks method/status/test_acc columns");
    std::vector<std::size_t> param_cols;
    for (std::size_t i = 0; i < table.header.size(); ++i)
        if (std::find(fixed_columns().begin(), fixed_columns().end(), table.header[i]) == fixed_columns().end())
            param_cols.push_back(i);

    std::vector<std::string> methods;
    std::vector<std::vector<OkRow>> by_method;
    for (const auto& r : table.rows) {
        if (r[*c_status] != "ok") continue;
        const ParamValue v = parse_param_value(r[*c_acc]);
        const double* acc = std::get_if<double>(&v);
        if (!acc) continue;
        auto it = std::find(methods.begin(), methods.end(), r[*c_method]);
        if (it == methods.end()) {
            methods.push_back(r[*c_method]);
            by_method.emplace_back();
            it = methods.end() - 1;
        }
        OkRow row{r[*c_method], *acc, {}};
        for (auto c : param_cols) row.params.push_back(r[c]);
        by_method[static_cast<std::size_t>(it - methods.begin())].push_back(std::move(row));
    }
    if (methods.empty()) throw ConfigError("table", "no successful runs");

    ensure_writable_dir(out_dir);
    std::vector<fs::path> written;
    std::vector<std::vector<double>> accs;
    for (const auto& rows : by_method) {
        accs.emplace_back();
        for (const auto& r : rows) accs.back().push_back(r.acc);
    }
    written.push_back(out_dir / "accuracy_distribution.svg");
    write_atomic(written.back(), distribution_chart_svg(methods, accs));

    for (std::size_t m = 0; m < methods.size(); ++m) {
        for (std::size_t p = 0; p < param_cols.size(); ++p) {
            std::vector<std::string> xs;
            std::vector<double> ys;
            for (const auto& r : by_method[m]) {
                if (r.params[p].empty()) continue;
                xs.push_back(r.params[p]);
                ys.push_back(r.acc);
            }
            auto distinct = xs;
            std::sort(distinct.begin(), distinct.end());
            if (std::unique(distinct.begin(), distinct.end()) - distinct.begin() < 2) continue;
            const std::string& name = table.header[param_cols[p]];
            written.push_back(out_dir / ("scatter_" + file_safe(methods[m]) + "_" + file_safe(name) + ".svg"));
            write_atomic(written.back(), scatter_chart_svg(methods[m], name, xs, ys));
        }
    }
    return written;
}

}  // namespace dglab
