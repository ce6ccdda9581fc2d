#include "hiermetric/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hiermetric/error.hpp"

namespace hiermetric {

MarkerShape marker_for_class(int class_id) noexcept {
  constexpr MarkerShape cycle[] = {MarkerShape::Circle, MarkerShape::Square,
                                   MarkerShape::Triangle, MarkerShape::Diamond,
                                   MarkerShape::Cross};
  const int n = static_cast<int>(std::size(cycle));
  return cycle[((class_id % n) + n) % n];
}

std::string_view polarity_color(Polarity p) noexcept {
  switch (p) {
    case Polarity::Positive: return "#000000";
    case Polarity::Neutral: return "#808080";
    case Polarity::Negative: return "#FF0000";
  }
  return "#808080";
}

namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

void marker(std::ostringstream& out, MarkerShape shape, double x, double y, double r,
            std::string_view color, std::string_view css_class) {
  const std::string cls = std::string(" class=\"") + std::string(css_class) + "\"";
  switch (shape) {
    case MarkerShape::Circle:
      out << "<circle" << cls << " cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"" << num(r)
          << "\" fill=\"" << color << "\"/>\n";
      break;
    case MarkerShape::Square:
      out << "<rect" << cls << " x=\"" << num(x - r) << "\" y=\"" << num(y - r) << "\" width=\""
          << num(2 * r) << "\" height=\"" << num(2 * r) << "\" fill=\"" << color << "\"/>\n";
      break;
    case MarkerShape::Triangle:
      out << "<polygon" << cls << " points=\"" << num(x) << "," << num(y - r) << " "
          << num(x - r) << "," << num(y + r) << " " << num(x + r) << "," << num(y + r)
          << "\" fill=\"" << color << "\"/>\n";
      break;
    case MarkerShape::Diamond:
      out << "<polygon" << cls << " points=\"" << num(x) << "," << num(y - r) << " "
          << num(x + r) << "," << num(y) << " " << num(x) << "," << num(y + r) << " "
          << num(x - r) << "," << num(y) << "\" fill=\"" << color << "\"/>\n";
      break;
    case MarkerShape::Cross:
      out << "<path" << cls << " d=\"M" << num(x - r) << "," << num(y - r) << " L" << num(x + r)
          << "," << num(y + r) << " M" << num(x - r) << "," << num(y + r) << " L" << num(x + r)
          << "," << num(y - r) << "\" stroke=\"" << color
          << "\" stroke-width=\"2\" fill=\"none\"/>\n";
      break;
  }
}

}  // namespace

std::string render_svg_scatter(const Mds2D& mds, std::span<const HierLabel> labels,
                               std::span<const std::string> class_names,
                               const SvgOptions& options) {
  const auto n = mds.coords.rows();
  if (static_cast<std::size_t>(n) != labels.size()) {
    throw Error(ErrorKind::DimensionMismatch, "coordinate and label counts differ");
  }
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (n > 0) {
    xmin = mds.coords.col(0).minCoeff();
    xmax = mds.coords.col(0).maxCoeff();
    ymin = mds.coords.col(1).minCoeff();
    ymax = mds.coords.col(1).maxCoeff();
  }
  const double xr = std::max(xmax - xmin, 1e-12);
  const double yr = std::max(ymax - ymin, 1e-12);
  xmin -= 0.05 * xr;
  xmax += 0.05 * xr;
  ymin -= 0.05 * yr;
  ymax += 0.05 * yr;
  const double w = options.plot_width;
  const double h = options.plot_height;
  auto px = [&](double x) { return (x - xmin) / (xmax - xmin) * w; };
  auto py = [&](double y) { return h - (y - ymin) / (ymax - ymin) * h; };

  std::ostringstream out;
  const double total_w = w + options.legend_width;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(total_w)
      << "\" height=\"" << num(h) << "\" viewBox=\"0 0 " << num(total_w) << " " << num(h)
      << "\">\n";
  if (!options.title.empty()) out << "<title>" << xml_escape(options.title) << "</title>\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << num(total_w) << "\" height=\"" << num(h)
      << "\" fill=\"#FFFFFF\"/>\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << num(w) << "\" height=\"" << num(h)
      << "\" fill=\"none\" stroke=\"#CCCCCC\"/>\n";

  out << "<g id=\"points\">\n";
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& l = labels[static_cast<std::size_t>(i)];
    marker(out, marker_for_class(l.class_id), px(mds.coords(i, 0)), py(mds.coords(i, 1)),
           options.marker_radius, polarity_color(l.polarity), "point");
  }
  out << "</g>\n";

  out << "<g id=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
  double y = 20.0;
  const double lx = w + 16.0;
  for (std::size_t c = 0; c < class_names.size(); ++c) {
    marker(out, marker_for_class(static_cast<int>(c)), lx, y, options.marker_radius, "#404040",
           "legend-glyph");
    out << "<text x=\"" << num(lx + 12) << "\" y=\"" << num(y + 4) << "\">"
        << xml_escape(class_names[c]) << "</text>\n";
    y += 18.0;
  }
  y += 8.0;
  for (Polarity p : {Polarity::Positive, Polarity::Neutral, Polarity::Negative}) {
    marker(out, MarkerShape::Circle, lx, y, options.marker_radius, polarity_color(p),
           "legend-glyph");
    out << "<text x=\"" << num(lx + 12) << "\" y=\"" << num(y + 4) << "\">" << to_string(p)
        << "</text>\n";
    y += 18.0;
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

void emit_svg_scatter(const Mds2D& mds, std::span<const HierLabel> labels,
                      std::span<const std::string> class_names, const std::filesystem::path& out,
                      const SvgOptions& options) {
  const std::string doc = render_svg_scatter(mds, labels, class_names, options);
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorKind::IoError, "cannot write " + out.string());
  f << doc;
  if (!f) throw Error(ErrorKind::IoError, "write failure on " + out.string());
}

namespace {
std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}
}  // namespace

void write_mds_csv(const std::filesystem::path& out, std::span<const std::string> ids,
                   const Mds2D& mds, std::span<const HierLabel> labels,
                   std::span<const std::string> class_names) {
  if (ids.size() != labels.size() || static_cast<std::size_t>(mds.coords.rows()) != labels.size()) {
    throw Error(ErrorKind::DimensionMismatch, "id, coordinate and label counts differ");
  }
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorKind::IoError, "cannot write " + out.string());
  f << "id,x,y,class,polarity\n";
  char buf[64];
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g", mds.coords(row, 0), mds.coords(row, 1));
    f << csv_field(ids[i]) << ',' << buf << ','
      << csv_field(class_names[static_cast<std::size_t>(labels[i].class_id)]) << ','
      << to_string(labels[i].polarity) << '\n';
  }
}

}  // namespace hiermetric
