#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "internal.hpp"

namespace wvn::cli {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string esc(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '<') o += "&lt;";
        else if (c == '>') o += "&gt;";
        else if (c == '&') o += "&amp;";
        else o += c;
    }
    return o;
}

std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

}  // namespace

std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                     const std::vector<SvgSeries>& series, bool log_x) {
    constexpr double W = 800, H = 500, L = 70, R = 20, T = 40, B = 50;
    constexpr const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    auto tx = [&](double x) { return log_x ? std::log10(x) : x; };
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            if (!std::isfinite(y) || (log_x && !(x > 0.0))) continue;
            x0 = std::min(x0, tx(x));
            x1 = std::max(x1, tx(x));
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    }
    if (!(x1 > x0)) x1 = x0 + 1.0;
    if (!(y1 > y0)) y1 = y0 + 1.0;
    auto px = [&](double x) { return L + (tx(x) - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << esc(title) << "</text>\n";
    os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << esc(xlabel)
       << (log_x ? " (log scale)" : "") << "</text>\n";
    os << "<text x=\"16\" y=\"" << H / 2 << "\" transform=\"rotate(-90 16 " << H / 2 << ")\" text-anchor=\"middle\">"
       << esc(ylabel) << "</text>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = x0 + (x1 - x0) * i / 4, fy = y0 + (y1 - y0) * i / 4;
        const double xv = log_x ? std::pow(10.0, fx) : fx;
        os << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
           << short_num(xv) << "</text>\n";
        os << "<text x=\"" << L - 6 << "\" y=\"" << py(fy) + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
           << short_num(fy) << "</text>\n";
    }
    for (std::size_t k = 0; k < series.size(); ++k) {
        const char* c = colors[k % 4];
        os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.2\" points=\"";
        // Thin long series to at most ~4000 vertices.
        const auto& pts = series[k].points;
        const std::size_t step = std::max<std::size_t>(1, pts.size() / 4000);
        for (std::size_t i = 0; i < pts.size(); i += step) {
            const auto& [x, y] = pts[i];
            if (!std::isfinite(y) || (log_x && !(x > 0.0))) continue;
            os << short_num(px(x)) << ',' << short_num(py(y)) << ' ';
        }
        os << "\"/>\n";
        os << "<text x=\"" << L + 10 << "\" y=\"" << T + 18 + 16 * k << "\" fill=\"" << c << "\" font-size=\"12\">"
           << esc(series[k].name) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace wvn::cli
