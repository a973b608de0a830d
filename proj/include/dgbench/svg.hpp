#pragma once

#include <string>
#include <vector>

#include "dgbench/joint.hpp"

namespace dgbench {

// Deterministic M x K heatmap: one rect per cell, linear white-to-blue
// shading against the matrix maximum, numeric value printed as %.3f.
// Identical input yields identical bytes. The matrix need not be
// normalized (error matrices render the same way).
std::string render_heatmap_svg(const DiscreteJoint& joint,
                               const std::vector<std::string>& cell_names,
                               const std::vector<std::string>& label_names,
                               const std::string& title = "");

void render_heatmap(const DiscreteJoint& joint,
                    const std::vector<std::string>& cell_names,
                    const std::vector<std::string>& label_names,
                    const std::string& path, const std::string& title = "");

// Deterministic polyline chart of one or more named series over a shared
// x grid; used for rate-versus-parameter curves with reference series.
struct CurveSeries {
  std::string name;
  std::vector<double> y;
  std::string color;  // "#rrggbb"
};

std::string render_curves_svg(const std::vector<double>& x,
                              const std::vector<CurveSeries>& series,
                              const std::string& x_label,
                              const std::string& y_label,
                              const std::string& title);

void render_curves(const std::vector<double>& x,
                   const std::vector<CurveSeries>& series,
                   const std::string& x_label, const std::string& y_label,
                   const std::string& title, const std::string& path);

}  // namespace dgbench
