#pragma once

#include "mane/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace mane {

/// Self-contained SVG scatter plot of 2-D coordinates, one color per label
/// (fixed 10-color palette, cycled), with a legend. Output bytes depend only
/// on the inputs. Empty `labels` draws every point in one color, no legend.
std::string render_scatter_svg(const RowMatrix& coordinates, const std::vector<int>& labels,
                               const std::vector<std::string>& label_names, const std::string& title = {});

void emit_plot(const RowMatrix& coordinates, const std::vector<int>& labels,
               const std::vector<std::string>& label_names, const std::filesystem::path& path,
               const std::string& title = {});

}  // namespace mane
