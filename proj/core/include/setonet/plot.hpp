#pragma once

#include <string>
#include <vector>

#include "setonet/training.hpp"

namespace setonet {

// One curve with an optional band [lo, hi]. Values are plotted as given, so
// log-space curves should be passed already in log10.
struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> lo;
  std::vector<double> hi;
};

struct PlotSpec {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  int width = 720;
  int height = 440;
};

std::string render_svg(const PlotSpec& spec, const std::vector<Series>& series);
void write_svg(const std::string& path, const PlotSpec& spec, const std::vector<Series>& series);

// Test-MSE history across seeds in log10 space: mean of log10(mse) with a
// band of one standard deviation of log10(mse). No smoothing.
Series loss_history_series(const std::string& label, const std::vector<std::vector<MetricsRecord>>& runs);

}  // namespace setonet
