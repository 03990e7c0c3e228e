#include "svg.hpp"

#include "error.hpp"
#include "io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

namespace chiralcmt::svg
{

namespace
{
constexpr double kWidth = 760.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 180.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

constexpr std::array<const char *, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                   "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string fixed(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string escape(const std::string &s)
{
    std::string out;
    for (char c : s)
    {
        switch (c)
        {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Range
{
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v)
    {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }

    void pad()
    {
        if (hi - lo <= 0.0)
        {
            const double d = lo != 0.0 ? 0.1 * std::abs(lo) : 1.0;
            lo -= d;
            hi += d;
        }
    }
};

std::vector<double> linear_ticks(const Range &r)
{
    const double raw = (r.hi - r.lo) / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw)
        {
            step = m * mag;
            break;
        }
    std::vector<double> ticks;
    for (double t = std::ceil(r.lo / step) * step; t <= r.hi + 1e-9 * step; t += step)
        ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
    return ticks;
}

std::vector<double> log_ticks(const Range &r)
{
    std::vector<double> ticks;
    for (double e = std::ceil(r.lo - 1e-12); e <= r.hi + 1e-12; e += 1.0)
        ticks.push_back(e);
    return ticks;
}

bool usable(double v, bool log_axis) { return std::isfinite(v) && (!log_axis || v > 0.0); }
} // namespace

std::string render_plot(const std::vector<Series> &series, const Axes &axes)
{
    if (series.empty())
        throw ContractError("emit_svg_plot: no series to plot");

    Range xr, yr;
    std::size_t skipped = 0;
    std::size_t kept = 0;
    for (const auto &s : series)
    {
        if (s.x.size() != s.y.size())
            throw ContractError("emit_svg_plot: series '" + s.label + "' has mismatched x/y lengths");
        for (std::size_t i = 0; i < s.x.size(); ++i)
        {
            if (!usable(s.x[i], axes.log_x) || !usable(s.y[i], axes.log_y))
            {
                ++skipped;
                continue;
            }
            ++kept;
            xr.add(axes.log_x ? std::log10(s.x[i]) : s.x[i]);
            yr.add(axes.log_y ? std::log10(s.y[i]) : s.y[i]);
        }
    }
    if (kept == 0)
        throw ContractError("emit_svg_plot: series contain no plottable points");
    xr.pad();
    yr.pad();

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * plot_w; };
    auto py = [&](double y) { return kTop + (yr.hi - y) / (yr.hi - yr.lo) * plot_h; };

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<!-- chiralcmt plot; skipped " + std::to_string(skipped) + " non-plottable points -->\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(kWidth) + "\" height=\"" + fixed(kHeight) +
           "\" viewBox=\"0 0 " + fixed(kWidth) + " " + fixed(kHeight) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!axes.title.empty())
        out += "<text x=\"" + fixed(kLeft + plot_w / 2) + "\" y=\"24.00\" text-anchor=\"middle\" font-size=\"15\">" +
               escape(axes.title) + "</text>\n";
    out += "<rect x=\"" + fixed(kLeft) + "\" y=\"" + fixed(kTop) + "\" width=\"" + fixed(plot_w) + "\" height=\"" +
           fixed(plot_h) + "\" fill=\"none\" stroke=\"black\"/>\n";

    out += "<g font-size=\"11\" stroke=\"#dddddd\">\n";
    for (double t : axes.log_x ? log_ticks(xr) : linear_ticks(xr))
    {
        const std::string x = fixed(px(t));
        out += "<line x1=\"" + x + "\" y1=\"" + fixed(kTop) + "\" x2=\"" + x + "\" y2=\"" + fixed(kTop + plot_h) + "\"/>\n";
        out += "<text x=\"" + x + "\" y=\"" + fixed(kTop + plot_h + 16) + "\" text-anchor=\"middle\" stroke=\"none\">" +
               tick_label(axes.log_x ? std::pow(10.0, t) : t) + "</text>\n";
    }
    for (double t : axes.log_y ? log_ticks(yr) : linear_ticks(yr))
    {
        const std::string y = fixed(py(t));
        out += "<line x1=\"" + fixed(kLeft) + "\" y1=\"" + y + "\" x2=\"" + fixed(kLeft + plot_w) + "\" y2=\"" + y + "\"/>\n";
        out += "<text x=\"" + fixed(kLeft - 6) + "\" y=\"" + fixed(py(t) + 4) + "\" text-anchor=\"end\" stroke=\"none\">" +
               tick_label(axes.log_y ? std::pow(10.0, t) : t) + "</text>\n";
    }
    out += "</g>\n";

    out += "<text x=\"" + fixed(kLeft + plot_w / 2) + "\" y=\"" + fixed(kHeight - 16) +
           "\" text-anchor=\"middle\" font-size=\"13\">" + escape(axes.x_label) + "</text>\n";
    out += "<text x=\"18.00\" y=\"" + fixed(kTop + plot_h / 2) + "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18.00 " +
           fixed(kTop + plot_h / 2) + ")\">" + escape(axes.y_label) + "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k)
    {
        const auto &s = series[k];
        const char *color = kPalette[k % kPalette.size()];
        out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (std::size_t i = 0; i < s.x.size(); ++i)
        {
            if (!usable(s.x[i], axes.log_x) || !usable(s.y[i], axes.log_y))
                continue;
            if (!first)
                out += ' ';
            first = false;
            out += fixed(px(axes.log_x ? std::log10(s.x[i]) : s.x[i])) + "," +
                   fixed(py(axes.log_y ? std::log10(s.y[i]) : s.y[i]));
        }
        out += "\"/>\n";

        const double ly = kTop + 14.0 + 18.0 * static_cast<double>(k);
        const double lx = kLeft + plot_w + 14.0;
        out += "<line x1=\"" + fixed(lx) + "\" y1=\"" + fixed(ly) + "\" x2=\"" + fixed(lx + 22) + "\" y2=\"" + fixed(ly) +
               "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        out += "<text x=\"" + fixed(lx + 28) + "\" y=\"" + fixed(ly + 4) + "\" font-size=\"12\">" + escape(s.label) + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

void emit_svg_plot(const std::vector<Series> &series, const Axes &axes, const std::string &path)
{
    io::write_text(path, render_plot(series, axes));
}

} // namespace chiralcmt::svg
