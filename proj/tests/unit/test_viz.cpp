#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#if HIERMETRIC_HAVE_BOOST_PTREE
#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#endif

#include "hiermetric/error.hpp"
#include "hiermetric/mds.hpp"
#include "hiermetric/svg.hpp"
#include "oracles.hpp"

using namespace hiermetric;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const Matrix& d) {
  try {
    classical_mds(d);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::IoError;
}

double max_rel_distance_error(const Matrix& want, const Matrix& got) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < want.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < want.cols(); ++j) {
      worst = std::max(worst, std::abs(got(i, j) - want(i, j)) / std::max(want(i, j), 1e-12));
    }
  }
  return worst;
}

std::vector<HierLabel> grid_labels(int classes, int per_subclass) {
  std::vector<HierLabel> out;
  for (int c = 0; c < classes; ++c) {
    for (Polarity p : {Polarity::Negative, Polarity::Neutral, Polarity::Positive}) {
      for (int k = 0; k < per_subclass; ++k) out.push_back({c, p});
    }
  }
  return out;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

// Color of every data marker in document order.
std::vector<std::string> point_colors(const std::string& svg) {
  static const std::regex point(R"re(class="point"[^>]*(?:fill|stroke)="(#[0-9A-F]{6})")re");
  std::vector<std::string> out;
  for (std::sregex_iterator it(svg.begin(), svg.end(), point), end; it != end; ++it) {
    out.push_back((*it)[1]);
  }
  return out;
}

#if HIERMETRIC_HAVE_BOOST_PTREE
void count_points(const boost::property_tree::ptree& node, int& n) {
  for (const auto& [name, child] : node) {
    if (name == "<xmlattr>") {
      if (child.get<std::string>("class", "") == "point") ++n;
      continue;
    }
    count_points(child, n);
  }
}
#endif

}  // namespace

TEST_CASE("MDS recovers an equilateral triangle") {
  Matrix d(3, 3);
  d << 0, 1, 1, 1, 0, 1, 1, 1, 0;
  const Mds2D m = classical_mds(d);
  CHECK(m.stress < 1e-9);
  CHECK(max_rel_distance_error(d, pairwise_distances(m.coords)) < 1e-9);
  CHECK(m.eigenvalues[0] >= m.eigenvalues[1]);
  CHECK(m.coords.colwise().mean().cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("MDS of collinear distances is one-dimensional") {
  Matrix d(3, 3);
  d << 0, 1, 2, 1, 0, 1, 2, 1, 0;
  const Mds2D m = classical_mds(d);
  CHECK(std::abs(m.eigenvalues[1]) < 1e-9);
  // Exact line embedding: positions -1, 0, 1 up to sign.
  CHECK(std::abs(std::abs(m.coords(0, 0)) - 1.0) < 1e-9);
  CHECK(std::abs(m.coords(1, 0)) < 1e-9);
  CHECK(std::abs(m.coords(0, 0) + m.coords(2, 0)) < 1e-9);
  CHECK(m.coords.col(1).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(m.stress < 1e-9);
}

TEST_CASE("MDS keeps identical points together") {
  Matrix p(3, 2);
  p << 0, 0, 0, 0, 3, 4;
  const Mds2D m = classical_mds_points(p);
  CHECK((m.coords.row(0) - m.coords.row(1)).norm() < 1e-9);
  CHECK((m.coords.row(0) - m.coords.row(2)).norm() == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("MDS on planar points and rigid transforms") {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix p = oracle::random_matrix(rng, 12, 2, 3.0);
    const Matrix d = pairwise_distances(p);
    const Mds2D m = classical_mds(d);
    CHECK(max_rel_distance_error(d, pairwise_distances(m.coords)) < 1e-6);
    CHECK(m.stress < 1e-9);

    // Embed in 5-D, rotate and translate.
    Matrix lifted = Matrix::Zero(12, 5);
    lifted.leftCols(2) = p;
    lifted += oracle::random_matrix(rng, 12, 5) * 0.3;
    const Matrix q = Eigen::HouseholderQR<Matrix>(oracle::random_matrix(rng, 5, 5)).householderQ();
    Matrix moved = lifted * q;
    moved.rowwise() += oracle::random_matrix(rng, 1, 5, 10.0).row(0);
    const Matrix a = pairwise_distances(classical_mds_points(lifted).coords);
    const Matrix b = pairwise_distances(classical_mds_points(moved).coords);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("MDS sign convention and determinism") {
  Rng rng(14);
  const Matrix p = oracle::random_matrix(rng, 20, 6);
  const Mds2D a = classical_mds_points(p);
  const Mds2D b = classical_mds_points(p);
  CHECK(a.coords == b.coords);
  for (int k = 0; k < 2; ++k) {
    Eigen::Index at = 0;
    a.coords.col(k).cwiseAbs().maxCoeff(&at);
    CHECK(a.coords(at, k) > 0.0);
  }
  CHECK(a.eigenvalues[0] >= a.eigenvalues[1]);
  CHECK(a.stress >= 0.0);
}

TEST_CASE("MDS input validation") {
  CHECK(kind_of(Matrix::Zero(4, 4)) == ErrorKind::DegenerateDistances);
  Matrix asym(3, 3);
  asym << 0, 1, 2, 1, 0, 1, 2.5, 1, 0;
  CHECK(kind_of(asym) == ErrorKind::AsymmetricInput);
  Matrix diag(3, 3);
  diag << 1, 1, 1, 1, 0, 1, 1, 1, 0;
  CHECK(kind_of(diag) == ErrorKind::AsymmetricInput);
  CHECK(kind_of(Matrix::Ones(3, 2)) == ErrorKind::DimensionMismatch);
  Matrix two(2, 2);
  two << 0, 1, 1, 0;
  CHECK(kind_of(two) == ErrorKind::InvalidArgument);
}

TEST_CASE("SVG scatter") {
  Rng rng(15);
  const auto labels = grid_labels(5, 10);
  const std::vector<std::string> names{"openness", "conscientiousness", "extraversion", "agreeableness",
                                       "neuroticism & <co>"};
  const Mds2D m = classical_mds_points(oracle::random_matrix(rng, 150, 8));
  SvgOptions opts;
  opts.title = "genre \"map\"";
  const std::string svg = render_svg_scatter(m, labels, names, opts);

  CHECK(count(svg, "class=\"point\"") == 150);
  CHECK(count(svg, "class=\"legend-glyph\"") == 5 + 3);
  const auto colors = point_colors(svg);
  REQUIRE(colors.size() == 150);
  for (std::size_t i = 0; i < labels.size(); ++i) CHECK(colors[i] == std::string(polarity_color(labels[i].polarity)));
  CHECK(polarity_color(Polarity::Positive) == "#000000");
  CHECK(polarity_color(Polarity::Neutral) == "#808080");
  CHECK(polarity_color(Polarity::Negative) == "#FF0000");
  CHECK(marker_for_class(0) == MarkerShape::Circle);
  CHECK(marker_for_class(4) == MarkerShape::Cross);
  CHECK(marker_for_class(5) == MarkerShape::Circle);
  CHECK(svg.find("neuroticism &amp; &lt;co&gt;") != std::string::npos);

#if HIERMETRIC_HAVE_BOOST_PTREE
  std::istringstream in(svg);
  boost::property_tree::ptree tree;
  CHECK_NOTHROW(boost::property_tree::read_xml(in, tree));
  int points = 0;
  count_points(tree, points);
  CHECK(points == 150);
  CHECK(tree.get<std::string>("svg.title") == "genre \"map\"");
#endif

  std::vector<HierLabel> neutral(labels.size(), HierLabel{0, Polarity::Neutral});
  for (std::size_t i = 0; i < neutral.size(); ++i) neutral[i].class_id = labels[i].class_id;
  for (const auto& c : point_colors(render_svg_scatter(m, neutral, names))) CHECK(c == "#808080");

  const std::vector<HierLabel> short_labels(3);
  CHECK_THROWS_AS(render_svg_scatter(m, short_labels, names), Error);
}

TEST_CASE("SVG and CSV files") {
  const fs::path dir = fs::temp_directory_path() / "hiermetric_test_viz";
  fs::create_directories(dir);
  Matrix p(3, 2);
  p << 0, 0, 1, 0, 0, 2;
  const Mds2D m = classical_mds_points(p);
  const std::vector<HierLabel> labels{{0, Polarity::Positive}, {1, Polarity::Negative}, {1, Polarity::Neutral}};
  const std::vector<std::string> names{"a", "b,c"};
  const std::vector<std::string> ids{"x", "y", "z\"q"};
  emit_svg_scatter(m, labels, names, dir / "s.svg");
  CHECK(fs::file_size(dir / "s.svg") > 0);
  write_mds_csv(dir / "s.csv", ids, m, labels, names);
  std::ifstream in(dir / "s.csv");
  std::string header, first, second, third;
  std::getline(in, header);
  std::getline(in, first);
  std::getline(in, second);
  std::getline(in, third);
  CHECK(header == "id,x,y,class,polarity");
  CHECK(first.rfind("x,", 0) == 0);
  CHECK(first.substr(first.size() - 11) == ",a,positive");
  CHECK(second.find(",\"b,c\",negative") != std::string::npos);
  CHECK(third.rfind("\"z\"\"q\",", 0) == 0);

  CHECK_THROWS_AS(emit_svg_scatter(m, labels, names, dir / "missing" / "s.svg"), Error);
}
