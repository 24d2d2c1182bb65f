#include "wcrt/ncurve.hpp"

#include "wcrt/format.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace wcrt {

namespace {

const char* status_name(WcrtStatus s) {
    switch (s) {
    case WcrtStatus::finite: return "finite";
    case WcrtStatus::infinite: return "infinite";
    case WcrtStatus::non_converged: return "non_converged";
    }
    return "unknown";
}

std::string svg_num(double v) { return format_fixed(v, 2); }

} // namespace

std::vector<double> effect_grid(double lo, double hi, std::size_t count) {
    if (count < 2)
        throw std::domain_error("effect_grid: need at least 2 grid points");
    if (!(lo < hi))
        throw std::domain_error("effect_grid: lower bound must be below upper bound");
    std::vector<double> g(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(count - 1);
        g[i] = lo + t * (hi - lo);
    }
    g.front() = lo;
    g.back() = hi;
    return g;
}

NCurve sweep_corr(double r1, std::int64_t n1, const TestSpec& spec,
                  std::span<const double> r2_grid, const SolverConfig& config) {
    NCurve c;
    c.kind = EffectKind::pearson_r;
    c.label = "r1=" + format_double(r1) + ", n1=" + std::to_string(n1) +
              ", alpha=" + format_double(spec.alpha);
    c.points.reserve(r2_grid.size());
    for (const double r2 : r2_grid)
        c.points.push_back({r2, solve_corr_n2(r1, n1, r2, spec, config)});
    return c;
}

NCurve sweep_ttest(const SampleSummary& response, const TestSpec& spec,
                   std::span<const double> d2_grid,
                   std::optional<double> s2, const SolverConfig& config) {
    NCurve c;
    c.kind = EffectKind::cohen_d;
    c.label = "n1=" + std::to_string(response.n) + ", mean=" + format_double(response.mean) +
              ", sd=" + format_double(response.sd) + ", alpha=" + format_double(spec.alpha);
    c.points.reserve(d2_grid.size());
    for (const double d2 : d2_grid)
        c.points.push_back(
            {d2, solve_ttest_n2(response, spec, EffectSize{EffectKind::cohen_d, d2}, s2, config)});
    return c;
}

std::string render_ncurve_csv(const NCurve& curve) {
    std::string out = "effect_size,n2,status,stat_at_n2,critical_value\n";
    for (const auto& p : curve.points) {
        out += format_double(p.effect);
        out += ',';
        if (p.result.status == WcrtStatus::finite) {
            out += std::to_string(p.result.n2);
            out += ',';
            out += status_name(p.result.status);
            out += ',';
            out += format_double(p.result.stat_at_n2);
            out += ',';
            out += format_double(p.result.critical_value);
        } else {
            out += ',';
            out += status_name(p.result.status);
            out += ",,";
        }
        out += '\n';
    }
    return out;
}

std::string render_ncurve_svg(const NCurve& curve, std::span<const double> annotate_effects) {
    std::vector<const NCurvePoint*> finite;
    for (const auto& p : curve.points)
        if (p.result.status == WcrtStatus::finite && p.result.n2 >= 1)
            finite.push_back(&p);
    if (finite.empty())
        throw std::domain_error("render_ncurve_svg: curve has no finite points to plot");

    const double x_lo = std::min_element(curve.points.begin(), curve.points.end(),
                                         [](auto& a, auto& b) { return a.effect < b.effect; })
                            ->effect;
    const double x_hi = std::max_element(curve.points.begin(), curve.points.end(),
                                         [](auto& a, auto& b) { return a.effect < b.effect; })
                            ->effect;
    double y_lo = std::log10(static_cast<double>(finite.front()->result.n2));
    double y_hi = y_lo;
    for (const auto* p : finite) {
        const double ly = std::log10(static_cast<double>(p->result.n2));
        y_lo = std::min(y_lo, ly);
        y_hi = std::max(y_hi, ly);
    }
    y_lo = std::floor(y_lo);
    y_hi = std::ceil(std::max(y_hi, y_lo + 1.0));

    constexpr double W = 720, H = 480;
    constexpr double ML = 70, MR = 30, MT = 50, MB = 60;
    const double x_span = x_hi > x_lo ? x_hi - x_lo : 1.0;
    auto X = [&](double e) { return ML + (e - x_lo) / x_span * (W - ML - MR); };
    auto Y = [&](double log_n) { return H - MB - (log_n - y_lo) / (y_hi - y_lo) * (H - MT - MB); };

    std::string s;
    s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + svg_num(W) +
         "\" height=\"" + svg_num(H) + "\" viewBox=\"0 0 " + svg_num(W) + " " + svg_num(H) +
         "\">\n";
    s += "<rect x=\"0\" y=\"0\" width=\"" + svg_num(W) + "\" height=\"" + svg_num(H) +
         "\" fill=\"white\"/>\n";
    s += "<text x=\"" + svg_num(W / 2) + "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\""
         " text-anchor=\"middle\">Reversal sizes: " + curve.label + "</text>\n";

    // Decade gridlines and y tick labels.
    for (double d = y_lo; d <= y_hi + 1e-9; d += 1.0) {
        const double y = Y(d);
        s += "<line x1=\"" + svg_num(ML) + "\" y1=\"" + svg_num(y) + "\" x2=\"" +
             svg_num(W - MR) + "\" y2=\"" + svg_num(y) +
             "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        s += "<text x=\"" + svg_num(ML - 8) + "\" y=\"" + svg_num(y + 4) +
             "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">1e" +
             format_double(d) + "</text>\n";
    }
    // x ticks at each plotted effect.
    for (const auto& p : curve.points) {
        const double x = X(p.effect);
        s += "<line x1=\"" + svg_num(x) + "\" y1=\"" + svg_num(H - MB) + "\" x2=\"" + svg_num(x) +
             "\" y2=\"" + svg_num(H - MB + 5) + "\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
    }

    // Axes.
    s += "<line x1=\"" + svg_num(ML) + "\" y1=\"" + svg_num(MT) + "\" x2=\"" + svg_num(ML) +
         "\" y2=\"" + svg_num(H - MB) + "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
    s += "<line x1=\"" + svg_num(ML) + "\" y1=\"" + svg_num(H - MB) + "\" x2=\"" + svg_num(W - MR) +
         "\" y2=\"" + svg_num(H - MB) + "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
    const char* x_name = curve.kind == EffectKind::pearson_r
                             ? "hypothetical correlation of the extra group"
                             : "hypothetical standardized effect of the extra group";
    s += "<text x=\"" + svg_num((ML + W - MR) / 2) + "\" y=\"" + svg_num(H - 18) +
         "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">" +
         std::string(x_name) + "</text>\n";
    s += "<text x=\"20\" y=\"" + svg_num((MT + H - MB) / 2) +
         "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 20 " +
         svg_num((MT + H - MB) / 2) + ")\">group size needed to flip the test</text>\n";

    // Curve through the finite points.
    std::string path;
    for (std::size_t i = 0; i < finite.size(); ++i) {
        const double x = X(finite[i]->effect);
        const double y = Y(std::log10(static_cast<double>(finite[i]->result.n2)));
        path += (i == 0 ? "M" : " L") + svg_num(x) + " " + svg_num(y);
    }
    s += "<path d=\"" + path + "\" fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"2\"/>\n";

    for (const auto* p : finite) {
        const double x = X(p->effect);
        const double y = Y(std::log10(static_cast<double>(p->result.n2)));
        s += "<circle cx=\"" + svg_num(x) + "\" cy=\"" + svg_num(y) +
             "\" r=\"3.5\" fill=\"#1f6fb2\"/>\n";
        const bool annotate =
            std::any_of(annotate_effects.begin(), annotate_effects.end(),
                        [&](double a) { return std::abs(a - p->effect) <= 1e-9; });
        if (annotate) {
            s += "<text x=\"" + svg_num(x + 6) + "\" y=\"" + svg_num(y - 8) +
                 "\" font-family=\"sans-serif\" font-size=\"12\">" + format_double(p->effect) +
                 " : n=" + std::to_string(p->result.n2) + "</text>\n";
        }
    }
    s += "</svg>\n";
    return s;
}

} // namespace wcrt
