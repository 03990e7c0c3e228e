#ifndef CHIRALCMT_SVG_HPP
#define CHIRALCMT_SVG_HPP

#include <string>
#include <vector>

namespace chiralcmt::svg
{

struct Series
{
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct Axes
{
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
};

// Standalone SVG document. Non-finite points (and non-positive ones on log
// axes) are skipped and counted in the header comment. Byte-identical output
// for identical input.
std::string render_plot(const std::vector<Series> &series, const Axes &axes);

void emit_svg_plot(const std::vector<Series> &series, const Axes &axes, const std::string &path);

} // namespace chiralcmt::svg

#endif
