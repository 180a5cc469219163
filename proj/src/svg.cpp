#include "mollescore/svg.hpp"

#include <cmath>
#include <fstream>

namespace mollescore {

SvgPlot::SvgPlot(double x_min, double x_max, double y_min, double y_max,
                 std::string title, bool log_x, bool log_y)
    : x_min_(x_min),
      x_max_(x_max),
      y_min_(y_min),
      y_max_(y_max),
      log_x_(log_x),
      log_y_(log_y),
      title_(std::move(title)) {
  if (log_x_ && (x_min_ <= 0 || x_max_ <= 0))
    throw config_error("log x axis needs positive range");
  if (log_y_ && (y_min_ <= 0 || y_max_ <= 0))
    throw config_error("log y axis needs positive range");
}

double SvgPlot::tx(double x) const {
  double a = log_x_ ? std::log10(x) : x;
  double lo = log_x_ ? std::log10(x_min_) : x_min_;
  double hi = log_x_ ? std::log10(x_max_) : x_max_;
  return kPad + (a - lo) / (hi - lo) * (kW - 2 * kPad);
}

double SvgPlot::ty(double y) const {
  double a = log_y_ ? std::log10(y) : y;
  double lo = log_y_ ? std::log10(y_min_) : y_min_;
  double hi = log_y_ ? std::log10(y_max_) : y_max_;
  return kH - kPad - (a - lo) / (hi - lo) * (kH - 2 * kPad);
}

void SvgPlot::scatter(const Matrix& points, const std::string& color,
                      double radius, const std::string& label) {
  std::string g = "<g fill=\"" + color + "\" fill-opacity=\"0.7\">\n";
  for (int i = 0; i < points.rows(); ++i) {
    double x = points(i, 0);
    double y = points.cols() > 1 ? points(i, 1) : 0.0;
    if (x < x_min_ || x > x_max_ || y < y_min_ || y > y_max_) continue;
    g += strf("<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.2f\"/>\n", tx(x), ty(y),
              radius);
  }
  g += "</g>\n";
  body_.push_back(std::move(g));
  if (!label.empty()) legend_.emplace_back(label, color);
}

void SvgPlot::line(const std::vector<double>& xs, const std::vector<double>& ys,
                   const std::string& color, const std::string& label) {
  if (xs.size() != ys.size() || xs.empty())
    throw config_error("svg line needs matching nonempty series");
  std::string pts;
  for (size_t i = 0; i < xs.size(); ++i)
    pts += strf("%.2f,%.2f ", tx(xs[i]), ty(ys[i]));
  body_.push_back("<polyline fill=\"none\" stroke=\"" + color +
                  "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n");
  if (!label.empty()) legend_.emplace_back(label, color);
}

void SvgPlot::heatmap(const DensityField& field) {
  const Grid& g = field.grid;
  if (g.dims != 2) throw config_error("heatmap needs a 2d field");
  double mx = field.values.maxCoeff();
  if (mx <= 0) mx = 1;
  std::string out = "<g shape-rendering=\"crispEdges\">\n";
  for (int i0 = 0; i0 < g.res[0]; ++i0)
    for (int i1 = 0; i1 < g.res[1]; ++i1) {
      double v = field.at(i0, i1) / mx;
      int r = static_cast<int>(255 * std::min(1.0, 3.0 * v));
      int gg = static_cast<int>(255 * std::clamp(3.0 * v - 1.0, 0.0, 1.0));
      int b = static_cast<int>(255 * std::clamp(3.0 * v - 2.0, 0.0, 1.0));
      double x0 = tx(g.lo[0] + i0 * g.step(0));
      double x1 = tx(g.lo[0] + (i0 + 1) * g.step(0));
      double y0 = ty(g.lo[1] + (i1 + 1) * g.step(1));
      double y1 = ty(g.lo[1] + i1 * g.step(1));
      out += strf(
          "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" "
          "fill=\"rgb(%d,%d,%d)\"/>\n",
          x0, y0, x1 - x0, y1 - y0, r, gg, b);
    }
  out += "</g>\n";
  body_.push_back(std::move(out));
}

void SvgPlot::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path.string());
  out << strf(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" "
      "height=\"%g\" viewBox=\"0 0 %g %g\">\n",
      kW, kH, kW, kH);
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // axes
  out << strf(
      "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n",
      kPad, kH - kPad, kW - kPad, kH - kPad);
  out << strf(
      "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n",
      kPad, kPad, kPad, kH - kPad);
  for (int i = 0; i <= 4; ++i) {
    double fx = x_min_ * std::pow(x_max_ / x_min_, i / 4.0);
    double lx = x_min_ + (x_max_ - x_min_) * i / 4.0;
    double vx = log_x_ ? fx : lx;
    out << strf(
        "<text x=\"%.1f\" y=\"%g\" font-size=\"10\" "
        "text-anchor=\"middle\">%.3g</text>\n",
        tx(vx), kH - kPad + 14, vx);
    double fy = y_min_ * std::pow(y_max_ / y_min_, i / 4.0);
    double ly = y_min_ + (y_max_ - y_min_) * i / 4.0;
    double vy = log_y_ ? fy : ly;
    out << strf(
        "<text x=\"%g\" y=\"%.1f\" font-size=\"10\" "
        "text-anchor=\"end\">%.3g</text>\n",
        kPad - 4, ty(vy) + 3, vy);
  }
  if (!title_.empty())
    out << strf(
        "<text x=\"%g\" y=\"%g\" font-size=\"13\" "
        "text-anchor=\"middle\">%s</text>\n",
        kW / 2, kPad / 2, title_.c_str());
  for (const auto& b : body_) out << b;
  double ly = kPad + 4;
  for (const auto& [label, color] : legend_) {
    out << strf(
        "<rect x=\"%g\" y=\"%.1f\" width=\"10\" height=\"10\" "
        "fill=\"%s\"/>\n",
        kW - kPad - 130, ly, color.c_str());
    out << strf(
        "<text x=\"%g\" y=\"%.1f\" font-size=\"11\">%s</text>\n",
        kW - kPad - 116, ly + 9, label.c_str());
    ly += 16;
  }
  out << "</svg>\n";
}

}  // namespace mollescore
