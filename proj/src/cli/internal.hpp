#pragma once

#include <string>
#include <utility>
#include <vector>

#include "wvn/cli.hpp"

namespace wvn::cli {

/// Reads a background object from a JSON file (no nested file references).
BackgroundSpec load_background_file(const std::string& path);

struct SvgSeries {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

/// Minimal line plot; `log_x` uses a logarithmic abscissa.
std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                     const std::vector<SvgSeries>& series, bool log_x);

/// %.17g in the C locale.
std::string fmt(double v);

}  // namespace wvn::cli
