#pragma once

#include <string>
#include <vector>

namespace kvwave::svg {

enum class Style { Line, Points };

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  Style style = Style::Line;
  std::string color = "#1f77b4";
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

/// Fixed 640x420 canvas, nice-number ticks, coordinates printed with two
/// decimals; identical input gives identical bytes. Non-finite points are
/// dropped. Throws kvwave::Error("nothing to plot") when no finite point remains.
std::string render(const Plot& plot);

/// Bar histogram of `values` over `bins` equal-width bins.
std::string render_histogram(const std::vector<double>& values, int bins, const std::string& title,
                             const std::string& x_label);

/// Nice tick positions covering [lo, hi] with about `target` intervals.
std::vector<double> nice_ticks(double lo, double hi, int target = 5);

}  // namespace kvwave::svg
