#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "hiermetric/labels.hpp"
#include "hiermetric/mds.hpp"

namespace hiermetric {

enum class MarkerShape { Circle, Square, Triangle, Diamond, Cross };

/// Shape for a class id; cycles through the five shapes.
MarkerShape marker_for_class(int class_id) noexcept;
/// "#000000" positive, "#808080" neutral, "#FF0000" negative.
std::string_view polarity_color(Polarity p) noexcept;

struct SvgOptions {
  double plot_width = 600.0;
  double plot_height = 600.0;
  double legend_width = 180.0;
  double marker_radius = 4.0;
  std::string title;
};

/// Scatter of MDS coordinates: marker shape by class, fill by polarity,
/// 5% padding around the data, legend on the right. Data markers carry
/// class="point", legend glyphs class="legend-glyph".
std::string render_svg_scatter(const Mds2D& mds, std::span<const HierLabel> labels,
                               std::span<const std::string> class_names,
                               const SvgOptions& options = {});

void emit_svg_scatter(const Mds2D& mds, std::span<const HierLabel> labels,
                      std::span<const std::string> class_names, const std::filesystem::path& out,
                      const SvgOptions& options = {});

/// CSV with header id,x,y,class,polarity.
void write_mds_csv(const std::filesystem::path& out, std::span<const std::string> ids,
                   const Mds2D& mds, std::span<const HierLabel> labels,
                   std::span<const std::string> class_names);

}  // namespace hiermetric
