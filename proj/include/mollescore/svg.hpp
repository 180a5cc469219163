#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mollescore/common.hpp"
#include "mollescore/ledkde.hpp"

namespace mollescore {

// Static result plots: scatter overlays, line series, heatmap rectangles.
class SvgPlot {
 public:
  SvgPlot(double x_min, double x_max, double y_min, double y_max,
          std::string title = "", bool log_x = false, bool log_y = false);

  void scatter(const Matrix& points, const std::string& color,
               double radius = 1.5, const std::string& label = "");
  void line(const std::vector<double>& xs, const std::vector<double>& ys,
            const std::string& color, const std::string& label = "");
  void heatmap(const DensityField& field);
  void write(const std::filesystem::path& path) const;

 private:
  double tx(double x) const;
  double ty(double y) const;
  double x_min_, x_max_, y_min_, y_max_;
  bool log_x_, log_y_;
  std::string title_;
  std::vector<std::string> body_;
  std::vector<std::pair<std::string, std::string>> legend_;
  static constexpr double kW = 640, kH = 480, kPad = 48;
};

}  // namespace mollescore
