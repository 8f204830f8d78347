#include "mane/plot.hpp"

#include "mane/errors.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace mane {

namespace {

constexpr std::array<const char*, 10> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
constexpr double kPlotSize = 600.0;
constexpr double kMargin = 20.0;
constexpr double kLegendWidth = 160.0;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

const char* color_for(int label) { return kPalette[static_cast<std::size_t>(label) % kPalette.size()]; }

}  // namespace

std::string render_scatter_svg(const RowMatrix& coordinates, const std::vector<int>& labels,
                               const std::vector<std::string>& label_names, const std::string& title) {
  if (coordinates.cols() != 2)
    throw UnsupportedDimensionError("scatter plots need 2-D coordinates, got " + std::to_string(coordinates.cols()));
  if (!labels.empty() && static_cast<Index>(labels.size()) != coordinates.rows())
    throw ShapeError("one label per point expected");

  double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
  if (coordinates.rows() > 0) {
    x_min = coordinates.col(0).minCoeff();
    x_max = coordinates.col(0).maxCoeff();
    y_min = coordinates.col(1).minCoeff();
    y_max = coordinates.col(1).maxCoeff();
  }
  const double span = std::max({x_max - x_min, y_max - y_min, 1e-12});
  const double inner = kPlotSize - 2 * kMargin;
  auto px = [&](double x) { return kMargin + (x - x_min) / span * inner; };
  auto py = [&](double y) { return kPlotSize - kMargin - (y - y_min) / span * inner; };

  std::set<int> present(labels.begin(), labels.end());
  const bool legend = !labels.empty();
  const double width = kPlotSize + (legend ? kLegendWidth : 0.0);

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\"" << fmt(kPlotSize)
      << "\" viewBox=\"0 0 " << fmt(width) << ' ' << fmt(kPlotSize) << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty())
    svg << "<text x=\"" << fmt(kMargin) << "\" y=\"14\" font-family=\"sans-serif\" font-size=\"12\">" << escape(title)
        << "</text>\n";
  svg << "<g stroke=\"none\" fill-opacity=\"0.7\">\n";
  for (Index i = 0; i < coordinates.rows(); ++i) {
    const char* color = labels.empty() ? kPalette[0] : color_for(labels[static_cast<std::size_t>(i)]);
    svg << "<circle cx=\"" << fmt(px(coordinates(i, 0))) << "\" cy=\"" << fmt(py(coordinates(i, 1)))
        << "\" r=\"1.5\" fill=\"" << color << "\"/>\n";
  }
  svg << "</g>\n";

  if (legend) {
    // Named labels list every name; otherwise the labels that occur.
    std::vector<int> entries;
    if (!label_names.empty())
      for (int l = 0; l < static_cast<int>(label_names.size()); ++l) entries.push_back(l);
    else
      entries.assign(present.begin(), present.end());
    svg << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
    double y = kMargin + 10.0;
    for (int l : entries) {
      const std::string name =
          l >= 0 && l < static_cast<int>(label_names.size()) ? label_names[static_cast<std::size_t>(l)] : std::to_string(l);
      svg << "<circle cx=\"" << fmt(kPlotSize + 10.0) << "\" cy=\"" << fmt(y - 4.0) << "\" r=\"5\" fill=\""
          << color_for(l) << "\"/><text x=\"" << fmt(kPlotSize + 20.0) << "\" y=\"" << fmt(y) << "\">" << escape(name)
          << "</text>\n";
      y += 18.0;
    }
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_plot(const RowMatrix& coordinates, const std::vector<int>& labels,
               const std::vector<std::string>& label_names, const std::filesystem::path& path,
               const std::string& title) {
  const std::string svg = render_scatter_svg(coordinates, labels, label_names, title);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << svg;
  if (!out) throw IoError("short write to " + path.string());
}

}  // namespace mane
