#include "pbil/plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace pbil::plot {

using experiments::CellSummary;
using experiments::TrialRecord;

PlotData build_plot_data(const std::vector<TrialRecord>& records)
{
    if (records.empty()) {
        throw PlotError("no data");
    }
    std::map<Problem, std::vector<TrialRecord>> by_problem;
    for (const auto& r : records) {
        by_problem[r.problem].push_back(r);
    }

    PlotData out;
    for (const auto& [problem, recs] : by_problem) {
        Series s;
        s.label = std::string(problem_name(problem));
        const auto cells = experiments::summarize(recs);
        for (const auto& c : cells) {
            s.data.push_back({static_cast<double>(c.n), c.median});
        }
        try {
            const auto fit = experiments::fit_scaling(cells);
            s.fit = fit;
            for (const auto& c : cells) {
                s.fitted.push_back({static_cast<double>(c.n),
                                    fit.predict(static_cast<double>(c.n), static_cast<double>(c.lambda))});
            }
        } catch (const experiments::FitError& e) {
            s.fit_note = e.what();
        }
        out.series.push_back(std::move(s));
    }
    return out;
}

LogLogFrame::LogLogFrame(const PlotData& data, double width, double height)
    : width_(width), height_(height)
{
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    const auto take = [&](const Point& p) {
        if (p.x > 0.0 && p.y > 0.0) {
            x0 = std::min(x0, std::log10(p.x));
            x1 = std::max(x1, std::log10(p.x));
            y0 = std::min(y0, std::log10(p.y));
            y1 = std::max(y1, std::log10(p.y));
        }
    };
    for (const auto& s : data.series) {
        std::for_each(s.data.begin(), s.data.end(), take);
        std::for_each(s.fitted.begin(), s.fitted.end(), take);
    }
    if (!std::isfinite(x0)) {
        x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
    }
    // Pad to whole decades' tenths so single points still get a frame.
    const double px = std::max(0.05, 0.05 * (x1 - x0));
    const double py = std::max(0.05, 0.05 * (y1 - y0));
    lx0_ = x0 - px;
    lx1_ = x1 + px;
    ly0_ = y0 - py;
    ly1_ = y1 + py;
}

Point LogLogFrame::to_pixels(Point p) const
{
    const double fx = (std::log10(p.x) - lx0_) / (lx1_ - lx0_);
    const double fy = (std::log10(p.y) - ly0_) / (ly1_ - ly0_);
    return {left() + fx * (right() - left()), bottom() - fy * (bottom() - top())};
}

namespace {

const char* const kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string polyline(const LogLogFrame& f, const std::vector<Point>& pts)
{
    std::ostringstream os;
    os.precision(6);
    os << std::fixed;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto p = f.to_pixels(pts[i]);
        os << (i ? " " : "") << p.x << ',' << p.y;
    }
    return os.str();
}

} // namespace

std::string render_svg(const PlotData& data, double width, double height)
{
    const LogLogFrame f(data, width, height);
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<rect x=\"" << f.left() << "\" y=\"" << f.top() << "\" width=\"" << f.right() - f.left()
       << "\" height=\"" << f.bottom() - f.top() << "\" fill=\"none\" stroke=\"black\"/>\n";

    // Decade ticks.
    for (int e = static_cast<int>(std::ceil(f.log_x_min())); e <= static_cast<int>(std::floor(f.log_x_max())); ++e) {
        const auto p = f.to_pixels({std::pow(10.0, e), std::pow(10.0, f.log_y_min())});
        os << "<line x1=\"" << p.x << "\" y1=\"" << f.bottom() << "\" x2=\"" << p.x << "\" y2=\""
           << f.bottom() + 5 << "\" stroke=\"black\"/><text x=\"" << p.x << "\" y=\"" << f.bottom() + 20
           << "\" font-size=\"12\" text-anchor=\"middle\">1e" << e << "</text>\n";
    }
    for (int e = static_cast<int>(std::ceil(f.log_y_min())); e <= static_cast<int>(std::floor(f.log_y_max())); ++e) {
        const auto p = f.to_pixels({std::pow(10.0, f.log_x_min()), std::pow(10.0, e)});
        os << "<line x1=\"" << f.left() - 5 << "\" y1=\"" << p.y << "\" x2=\"" << f.left() << "\" y2=\""
           << p.y << "\" stroke=\"black\"/><text x=\"" << f.left() - 8 << "\" y=\"" << p.y + 4
           << "\" font-size=\"12\" text-anchor=\"end\">1e" << e << "</text>\n";
    }
    os << "<text x=\"" << (f.left() + f.right()) / 2 << "\" y=\"" << height - 15
       << "\" font-size=\"14\" text-anchor=\"middle\">n</text>\n";
    os << "<text x=\"18\" y=\"" << (f.top() + f.bottom()) / 2 << "\" font-size=\"14\" text-anchor=\"middle\" "
       << "transform=\"rotate(-90 18 " << (f.top() + f.bottom()) / 2 << ")\">median evaluations</text>\n";

    for (std::size_t k = 0; k < data.series.size(); ++k) {
        const auto& s = data.series[k];
        const char* colour = kColours[k % std::size(kColours)];
        os << "<g class=\"series\" data-label=\"" << s.label << "\">\n";
        os << "<polyline class=\"data\" fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\""
           << polyline(f, s.data) << "\"/>\n";
        for (const auto& pt : s.data) {
            const auto p = f.to_pixels(pt);
            os << "<circle cx=\"" << p.x << "\" cy=\"" << p.y << "\" r=\"3\" fill=\"" << colour << "\"/>\n";
        }
        if (!s.fitted.empty()) {
            os << "<polyline class=\"fit\" fill=\"none\" stroke=\"" << colour
               << "\" stroke-width=\"1\" stroke-dasharray=\"5,3\" points=\"" << polyline(f, s.fitted) << "\"/>\n";
        }
        os << "</g>\n";
        const double ly = f.top() + 20.0 * static_cast<double>(k + 1);
        os << "<text x=\"" << f.right() + 10 << "\" y=\"" << ly << "\" font-size=\"12\" fill=\"" << colour
           << "\">" << s.label << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace pbil::plot
