#include <doctest.h>

#include <atomic>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "hiermetric/core_math.hpp"
#include "hiermetric/error.hpp"
#include "hiermetric/labels.hpp"
#include "hiermetric/log.hpp"
#include "hiermetric/optimizer.hpp"
#include "hiermetric/parallel.hpp"
#include "hiermetric/rng.hpp"
#include "oracles.hpp"

using namespace hiermetric;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

template <typename Fn>
ErrorKind kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::IoError;
}

}  // namespace

TEST_CASE("unit_normalize") {
  const Vector u = unit_normalize(vec({3, 4}));
  CHECK(u[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(u[1] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(unit_normalize(vec({1, 0, 0})) == vec({1, 0, 0}));
  CHECK(kind_of([] { unit_normalize(vec({0, 0})); }) == ErrorKind::ZeroNorm);
  CHECK(kind_of([] { unit_normalize(vec({1, NAN})); }) == ErrorKind::NonFinite);

  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    Vector v = oracle::random_matrix(rng, 1, 1 + trial % 9, 10.0).row(0).transpose();
    const Vector once = unit_normalize(v);
    CHECK(std::abs(once.norm() - 1.0) < 1e-12);
    CHECK((unit_normalize(once) - once).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(once.dot(v) > 0.0);
  }
}

TEST_CASE("normalize_rows names the offending row") {
  Matrix m(2, 2);
  m << 3, 4, 0, 0;
  try {
    normalize_rows(m);
    FAIL("expected ZeroNorm");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ZeroNorm);
    CHECK(std::string(e.what()).find("1") != std::string::npos);
  }
}

TEST_CASE("cosine_sim examples") {
  CHECK(cosine_sim(vec({1, 0}), vec({0, 1})) == 0.0);
  CHECK(cosine_sim(vec({2, 2}), vec({1, 1})) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cosine_sim(vec({1, 0}), vec({-1, 0})) == -1.0);
  CHECK(kind_of([] { cosine_sim(vec({1, 0}), vec({1, 0, 0})); }) == ErrorKind::DimensionMismatch);
  CHECK(kind_of([] { cosine_sim(vec({0, 0}), vec({1, 0})); }) == ErrorKind::ZeroNorm);
}

TEST_CASE("cosine_sim properties") {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const Eigen::Index d = 1 + trial % 7;
    const Vector a = oracle::random_matrix(rng, d, 1).col(0);
    const Vector b = oracle::random_matrix(rng, d, 1).col(0);
    const double c = cosine_sim(a, b);
    CHECK(c == cosine_sim(b, a));
    CHECK(c >= -1.0);
    CHECK(c <= 1.0);
    const double scale = 0.01 + 100.0 * rng.uniform();
    CHECK(std::abs(cosine_sim(scale * a, b) - c) < 1e-12);
    CHECK(std::abs(oracle::plain_cosine(a, b) - c) < 1e-12);
  }
}

TEST_CASE("cosine_sim_grad matches finite differences") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector a = oracle::random_matrix(rng, 5, 1).col(0);
    const Vector b = oracle::random_matrix(rng, 5, 1).col(0);
    const CosineGrad g = cosine_sim_grad(a, b);
    CHECK(g.value == doctest::Approx(cosine_sim(a, b)).epsilon(1e-14));
    auto fa = [&](const Vector& x) { return x.dot(b) / (x.norm() * b.norm()); };
    auto fb = [&](const Vector& x) { return a.dot(x) / (a.norm() * x.norm()); };
    CHECK(grad_check(fa, a, g.grad_a, 1e-6).max_rel_error < 1e-7);
    CHECK(grad_check(fb, b, g.grad_b, 1e-6).max_rel_error < 1e-7);
  }
}

TEST_CASE("normalize_backward is the exact Jacobian") {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector v = oracle::random_matrix(rng, 6, 1, 3.0).col(0);
    const Vector up = oracle::random_matrix(rng, 6, 1).col(0);
    const Vector g = normalize_backward(v, up);
    auto f = [&](const Vector& x) { return up.dot(x / x.norm()); };
    CHECK(grad_check(f, v, g, 1e-6).max_rel_error < 1e-8);
    const Vector u = v / v.norm();
    const Matrix jac = (Matrix::Identity(6, 6) - u * u.transpose()) / v.norm();
    CHECK((jac * up - g).cwiseAbs().maxCoeff() < 1e-14);
  }
  Matrix raw = oracle::random_matrix(rng, 4, 3);
  Matrix up = oracle::random_matrix(rng, 4, 3);
  const Matrix rows = normalize_rows_backward(raw, up);
  for (Eigen::Index i = 0; i < 4; ++i) {
    const Vector expect = normalize_backward(raw.row(i).transpose(), up.row(i).transpose());
    CHECK((rows.row(i).transpose() - expect).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("grad_check examples") {
  auto square = [](const Vector& x) { return x[0] * x[0]; };
  CHECK(grad_check(square, vec({3}), vec({6}), 1e-3).max_rel_error < 1e-6);
  auto sum = [](const Vector& x) { return x.sum(); };
  Rng rng(1);
  const Vector x = oracle::random_matrix(rng, 8, 1).col(0);
  const GradCheckReport r = grad_check(sum, x, Vector::Ones(8), 1e-4);
  CHECK(r.max_rel_error < 1e-9);
  CHECK(r.per_coordinate_errors.size() == 8);
  CHECK(grad_check(sum, x, Vector::Zero(8), 1e-4).max_rel_error > 0.99);
  CHECK(kind_of([&] { grad_check(sum, x, Vector::Ones(8), 0.0); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { grad_check(sum, x, Vector::Ones(3), 1e-4); }) == ErrorKind::DimensionMismatch);
  auto blowup = [](const Vector& v) { return v[0] > 0 ? INFINITY : 0.0; };
  CHECK(kind_of([&] { grad_check(blowup, vec({0}), vec({0}), 1e-3); }) == ErrorKind::NonFinite);
}

TEST_CASE("rng is deterministic and splits into distinct streams") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng base(42);
  const std::uint64_t before = base.state();
  Rng s1 = base.split(1);
  Rng s2 = base.split(2);
  CHECK(base.state() == before);
  CHECK(s1.next_u64() != s2.next_u64());
  CHECK(Rng(42).split(1).next_u64() == Rng(42).split(1).next_u64());
}

TEST_CASE("rng distributions") {
  Rng rng(9);
  double sum = 0.0, sum_sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sum_sq += x * x;
  }
  CHECK(std::abs(sum / n) < 0.02);
  CHECK(std::abs(sum_sq / n - 1.0) < 0.02);

  std::vector<int> counts(6, 0);
  for (int i = 0; i < 60000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    ++counts[rng.below(6)];
  }
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);

  std::vector<int> items(20);
  std::iota(items.begin(), items.end(), 0);
  rng.shuffle(std::span<int>(items));
  CHECK(std::set<int>(items.begin(), items.end()).size() == 20);
}

TEST_CASE("labels") {
  CHECK(parse_polarity("positive") == Polarity::Positive);
  CHECK(parse_polarity("neutral") == Polarity::Neutral);
  CHECK(parse_polarity("negative") == Polarity::Negative);
  CHECK_FALSE(parse_polarity("entailment").has_value());
  CHECK(parse_entailment_label("entailment") == Polarity::Positive);
  CHECK(parse_entailment_label("contradiction") == Polarity::Negative);
  CHECK(parse_entailment_label("neutral") == Polarity::Neutral);
  CHECK(numeric(Polarity::Negative) == -1.0);
  CHECK(numeric(Polarity::Neutral) == 0.0);
  CHECK(numeric(Polarity::Positive) == 1.0);
  for (int idx = 0; idx < 30; ++idx) {
    CHECK(HierLabel::from_subclass_index(idx).subclass_index() == idx);
  }
  CHECK(HierLabel{2, Polarity::Positive}.subclass_index() == 8);
}

TEST_CASE("error categories") {
  CHECK(category(ErrorKind::InvalidArgument) == ErrorCategory::Usage);
  CHECK(category(ErrorKind::InvalidConfig) == ErrorCategory::Usage);
  CHECK(category(ErrorKind::ZeroNorm) == ErrorCategory::Numeric);
  CHECK(category(ErrorKind::NonFinite) == ErrorCategory::Numeric);
  CHECK(category(ErrorKind::ParseError) == ErrorCategory::Data);
  const Error e(ErrorKind::ParseError, "bad", 7);
  CHECK(e.line() == 7u);
  CHECK(std::string(e.what()).find("line 7") != std::string::npos);
}

TEST_CASE("warning sink") {
  std::vector<std::string> seen;
  set_warning_sink([&](std::string_view msg) { seen.emplace_back(msg); });
  warn("first");
  set_warning_sink({});
  REQUIRE(seen.size() == 1);
  CHECK(seen[0] == "first");
}

TEST_CASE("adam update") {
  OptimizerConfig cfg;
  Matrix p = Matrix::Constant(2, 2, 1.0);
  AdamMoments m = AdamMoments::zeros_like(p);
  adam_update(p, Matrix::Zero(2, 2), m, 1, cfg);
  CHECK(p == Matrix::Constant(2, 2, 1.0));

  // First bias-corrected step moves each entry by lr * g / (|g| + eps').
  Matrix g(2, 2);
  g << 0.5, -2.0, 1e-3, 4.0;
  adam_update(p, g, m, 1, cfg);
  for (Eigen::Index i = 0; i < 4; ++i) {
    const double gi = g.data()[i];
    const double expect = 1.0 - cfg.learning_rate * gi / (std::abs(gi) + cfg.epsilon);
    CHECK(p.data()[i] == doctest::Approx(expect).epsilon(1e-12));
  }

  OptimizerConfig bad;
  bad.beta1 = 1.0;
  CHECK(kind_of([&] { bad.validate(); }) == ErrorKind::InvalidConfig);
  bad = OptimizerConfig{};
  bad.learning_rate = -1.0;
  CHECK(kind_of([&] { bad.validate(); }) == ErrorKind::InvalidConfig);
}

TEST_CASE("parallel_for covers every index once and rethrows") {
  for (int threads : {1, 2, 3, 8}) {
    std::vector<std::atomic<int>> hits(103);
    parallel_for(hits.size(), threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) hits[i]++;
    });
    for (auto& h : hits) CHECK(h.load() == 1);
  }
  CHECK_THROWS_AS(parallel_for(10, 4,
                               [](std::size_t b, std::size_t) {
                                 if (b > 0) throw Error(ErrorKind::NonFinite, "x");
                               }),
                  Error);
}
