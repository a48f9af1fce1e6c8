#pragma once

#include <string>
#include <utility>
#include <vector>

namespace kochlab {

std::string svg_histogram(const std::vector<double>& values, const std::string& title, int bins = 40);
// Sample quantiles against N(0, variance) quantiles.
std::string svg_qq(const std::vector<double>& values, double variance, const std::string& title);
// Log-log scatter with the least-squares slope annotated; non-positive points are dropped.
std::string svg_decay(const std::vector<double>& x, const std::vector<double>& y, const std::string& title);
// Arcs [lo, hi] of the unit interval drawn on a strip.
std::string svg_cover(const std::vector<std::pair<double, double>>& arcs, const std::string& title);

// Renders `input` (CSV or JSON written by the runner) as kind histogram, qq,
// decay or cover into `output`.
void plot_file(const std::string& input, const std::string& kind, const std::string& output);

}  // namespace kochlab
