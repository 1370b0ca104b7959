#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pbil/experiments.hpp"

namespace pbil::plot {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct Series {
    std::string label;
    std::vector<Point> data;                  // (n, median evaluations)
    std::optional<experiments::ScalingFit> fit;
    std::vector<Point> fitted;                // fit evaluated at each data point's (n, lambda)
    std::string fit_note;                     // why no fit was drawn, if any
};

struct PlotData {
    std::vector<Series> series;
};

class PlotError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One series per problem. Throws PlotError("no data") on an empty record set.
PlotData build_plot_data(const std::vector<experiments::TrialRecord>& records);

/// Log-log frame shared by all series; maps data coordinates to SVG pixels.
class LogLogFrame {
public:
    LogLogFrame(const PlotData& data, double width, double height);
    Point to_pixels(Point p) const;
    double width() const { return width_; }
    double height() const { return height_; }
    double left() const { return left_; }
    double right() const { return width_ - right_margin_; }
    double top() const { return top_; }
    double bottom() const { return height_ - bottom_margin_; }
    double log_x_min() const { return lx0_; }
    double log_x_max() const { return lx1_; }
    double log_y_min() const { return ly0_; }
    double log_y_max() const { return ly1_; }

private:
    double width_, height_;
    double left_ = 80.0, top_ = 30.0, right_margin_ = 150.0, bottom_margin_ = 60.0;
    double lx0_ = 0.0, lx1_ = 1.0, ly0_ = 0.0, ly1_ = 1.0;
};

std::string render_svg(const PlotData& data, double width = 800.0, double height = 520.0);

} // namespace pbil::plot
