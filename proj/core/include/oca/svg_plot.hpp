// Copyright 2026 The OCA Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Minimal static SVG line/scatter charts.

#ifndef OCA_SVG_PLOT_HPP_
#define OCA_SVG_PLOT_HPP_

#include <span>
#include <string>
#include <vector>

namespace oca {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool lines = true;  // false draws markers only
  int width = 640;
  int height = 420;
};

/// Self-contained SVG document. Non-finite points are skipped.
std::string render_svg(const PlotSpec& spec, std::span<const PlotSeries> series);

}  // namespace oca

#endif  // OCA_SVG_PLOT_HPP_
