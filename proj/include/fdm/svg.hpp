#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdm {

/// One polyline of an SVG chart.
struct SvgSeries {
    std::string label;
    std::string color = "#1f77b4";
    std::vector<double> x;
    std::vector<double> y;
};

/**
 * Minimal static SVG 1.1 line chart. Log axes drop non-positive points.
 * Meant for quick inspection of sweeps and spectra, not publication.
 */
inline void write_svg_chart(const std::string& path, const std::string& title,
                            const std::vector<SvgSeries>& series, bool logx, bool logy,
                            int width = 800, int height = 560) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);

    const double ml = 70, mr = 20, mt = 40, mb = 50;
    const double pw = width - ml - mr, ph = height - mt - mb;

    auto tx = [&](double v) { return logx ? std::log10(v) : v; };
    auto ty = [&](double v) { return logy ? std::log10(v) : v; };

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if ((logx && s.x[i] <= 0) || (logy && s.y[i] <= 0)) continue;
            xmin = std::min(xmin, tx(s.x[i]));
            xmax = std::max(xmax, tx(s.x[i]));
            ymin = std::min(ymin, ty(s.y[i]));
            ymax = std::max(ymax, ty(s.y[i]));
        }
    if (xmin > xmax) { xmin = 0; xmax = 1; }
    if (ymin > ymax) { ymin = 0; ymax = 1; }
    if (xmax - xmin < 1e-12) { xmax += 0.5; xmin -= 0.5; }
    if (ymax - ymin < 1e-12) { ymax += 0.5; ymin -= 0.5; }

    auto px = [&](double v) { return ml + (tx(v) - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double v) { return mt + ph - (ty(v) - ymin) / (ymax - ymin) * ph; };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
        << title << "</text>\n";
    out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";

    auto corner_label = [&](double v, bool is_log) {
        std::ostringstream os;
        os.precision(4);
        os << (is_log ? std::pow(10.0, v) : v);
        return os.str();
    };
    out << "<text x=\"" << ml << "\" y=\"" << height - 16 << "\" font-size=\"12\">"
        << corner_label(xmin, logx) << "</text>\n";
    out << "<text x=\"" << width - mr << "\" y=\"" << height - 16
        << "\" text-anchor=\"end\" font-size=\"12\">" << corner_label(xmax, logx) << "</text>\n";
    out << "<text x=\"" << ml - 6 << "\" y=\"" << mt + ph << "\" text-anchor=\"end\" font-size=\"12\">"
        << corner_label(ymin, logy) << "</text>\n";
    out << "<text x=\"" << ml - 6 << "\" y=\"" << mt + 10 << "\" text-anchor=\"end\" font-size=\"12\">"
        << corner_label(ymax, logy) << "</text>\n";

    int li = 0;
    for (const auto& s : series) {
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if ((logx && s.x[i] <= 0) || (logy && s.y[i] <= 0)) continue;
            out << px(s.x[i]) << "," << py(s.y[i]) << " ";
        }
        out << "\"/>\n";
        out << "<text x=\"" << ml + 10 << "\" y=\"" << mt + 18 + 16 * li << "\" font-size=\"12\" fill=\""
            << s.color << "\">" << s.label << "</text>\n";
        ++li;
    }
    out << "</svg>\n";
}

} // namespace fdm
