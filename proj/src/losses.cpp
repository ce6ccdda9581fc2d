#include "hiermetric/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hiermetric/error.hpp"
#include "hiermetric/log.hpp"

namespace hiermetric {

namespace {

constexpr double kArcSinFloor = 1e-6;

void check_labels(const Matrix& embeddings, std::span<const HierLabel> labels) {
  if (static_cast<std::size_t>(embeddings.rows()) != labels.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                std::to_string(embeddings.rows()) + " embeddings but " +
                    std::to_string(labels.size()) + " labels");
  }
}

std::vector<int> subclass_targets(std::span<const HierLabel> labels, int num_subclasses) {
  std::vector<int> targets;
  targets.reserve(labels.size());
  for (const auto& l : labels) {
    const int t = l.subclass_index();
    if (l.class_id < 0 || t < 0 || t >= num_subclasses) {
      throw Error(ErrorKind::IndexOutOfRange, "sub-class index " + std::to_string(t) +
                                                  " outside [0, " +
                                                  std::to_string(num_subclasses) + ")");
    }
    targets.push_back(t);
  }
  return targets;
}

Matrix clamped_cosines(const Matrix& unit_e, const Matrix& unit_w) {
  Matrix cos = unit_e * unit_w.transpose();
  return cos.cwiseMax(-1.0).cwiseMin(1.0);
}

}  // namespace

LossOutput softmax_ce_loss(const Matrix& logits, std::span<const int> targets) {
  const auto n = logits.rows();
  const auto c = logits.cols();
  if (c < 2) throw Error(ErrorKind::InvalidClassCount, "softmax needs at least 2 classes");
  if (n == 0) throw Error(ErrorKind::BatchTooSmall, "empty batch");
  if (static_cast<std::size_t>(n) != targets.size()) {
    throw Error(ErrorKind::DimensionMismatch, "logit rows and targets differ in length");
  }
  require_finite(logits, "logits");

  LossOutput out;
  out.grad_embeddings.resize(n, c);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = targets[static_cast<std::size_t>(i)];
    if (y < 0 || y >= c) {
      throw Error(ErrorKind::IndexOutOfRange,
                  "target " + std::to_string(y) + " outside [0, " + std::to_string(c) + ")");
    }
    const double mx = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd shifted = logits.row(i).array() - mx;
    const Eigen::RowVectorXd ex = shifted.array().exp();
    const double z = ex.sum();
    total += std::log(z) - shifted[y];
    out.grad_embeddings.row(i) = ex / z;
    out.grad_embeddings(i, y) -= 1.0;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  out.value = total * inv_n;
  out.grad_embeddings *= inv_n;
  return out;
}

// ---------------------------------------------------------------------------

LossOutput triplet_loss(const Vector& anchor, const Vector& positive, const Vector& negative,
                        double margin) {
  const auto d = anchor.size();
  if (positive.size() != d || negative.size() != d) {
    throw Error(ErrorKind::DimensionMismatch, "triplet members differ in dimension");
  }
  if (!(margin >= 0.0)) throw Error(ErrorKind::InvalidArgument, "triplet margin must be >= 0");
  const Vector a = unit_normalize(anchor);
  const Vector p = unit_normalize(positive);
  const Vector n = unit_normalize(negative);

  LossOutput out;
  out.grad_embeddings = Matrix::Zero(3, d);
  const Vector ap = a - p;
  const Vector an = a - n;
  const double dap = ap.norm();
  const double dan = an.norm();
  const double hinge = dap - dan + margin;
  if (hinge <= 0.0) return out;

  out.value = hinge;
  Vector ga = Vector::Zero(d), gp = Vector::Zero(d), gn = Vector::Zero(d);
  // Zero-length differences take the zero subgradient.
  if (dap > 0.0) {
    ga += ap / dap;
    gp -= ap / dap;
  }
  if (dan > 0.0) {
    ga -= an / dan;
    gn += an / dan;
  }
  out.grad_embeddings.row(0) = normalize_backward(anchor, ga).transpose();
  out.grad_embeddings.row(1) = normalize_backward(positive, gp).transpose();
  out.grad_embeddings.row(2) = normalize_backward(negative, gn).transpose();
  return out;
}

LossOutput triplet_batch_loss(const Matrix& embeddings, std::span<const HierLabel> labels,
                              double margin) {
  check_labels(embeddings, labels);
  if (!(margin >= 0.0)) throw Error(ErrorKind::InvalidArgument, "triplet margin must be >= 0");
  const Matrix unit = normalize_rows(embeddings);
  const auto b = unit.rows();

  // Pairwise distances on the sphere, computed once.
  Matrix dist(b, b);
  for (Eigen::Index i = 0; i < b; ++i) {
    for (Eigen::Index j = 0; j < b; ++j) dist(i, j) = (unit.row(i) - unit.row(j)).norm();
  }

  Matrix grad_unit = Matrix::Zero(b, unit.cols());
  double total = 0.0;
  long long count = 0;
  for (Eigen::Index i = 0; i < b; ++i) {
    const int si = labels[static_cast<std::size_t>(i)].subclass_index();
    for (Eigen::Index j = 0; j < b; ++j) {
      if (j == i || labels[static_cast<std::size_t>(j)].subclass_index() != si) continue;
      for (Eigen::Index k = 0; k < b; ++k) {
        if (labels[static_cast<std::size_t>(k)].subclass_index() == si) continue;
        ++count;
        const double hinge = dist(i, j) - dist(i, k) + margin;
        if (hinge <= 0.0) continue;
        total += hinge;
        if (dist(i, j) > 0.0) {
          const Eigen::RowVectorXd g = (unit.row(i) - unit.row(j)) / dist(i, j);
          grad_unit.row(i) += g;
          grad_unit.row(j) -= g;
        }
        if (dist(i, k) > 0.0) {
          const Eigen::RowVectorXd g = (unit.row(i) - unit.row(k)) / dist(i, k);
          grad_unit.row(i) -= g;
          grad_unit.row(k) += g;
        }
      }
    }
  }
  if (count == 0) {
    throw Error(ErrorKind::NoValidTriplets, "batch has no anchor/positive/negative triplet");
  }
  const double inv = 1.0 / static_cast<double>(count);
  LossOutput out;
  out.value = total * inv;
  out.grad_embeddings = normalize_rows_backward(embeddings, grad_unit * inv);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void check_margin_args(double scale, double margin) {
  if (!(scale > 0.0)) throw Error(ErrorKind::InvalidArgument, "scale must be > 0");
  if (!(margin >= 0.0)) throw Error(ErrorKind::InvalidArgument, "margin must be >= 0");
}

double margin_target_logit(double cosine, MarginKind kind, double scale, double margin) {
  if (kind == MarginKind::CosFace) return scale * (cosine - margin);
  return scale * std::cos(std::acos(cosine) + margin);
}

/// d(target logit)/d(cos).
double margin_target_slope(double cosine, MarginKind kind, double scale, double margin) {
  if (kind == MarginKind::CosFace) return scale;
  const double theta = std::acos(cosine);
  return scale * std::sin(theta + margin) / std::max(std::sin(theta), kArcSinFloor);
}

}  // namespace

Vector margin_logit_transform(const Vector& cosines, int target, MarginKind kind, double scale,
                              double margin) {
  check_margin_args(scale, margin);
  if (target < 0 || target >= cosines.size()) {
    throw Error(ErrorKind::IndexOutOfRange, "target " + std::to_string(target) +
                                                " outside [0, " +
                                                std::to_string(cosines.size()) + ")");
  }
  require_finite(cosines, "cosines");
  if (cosines.minCoeff() < -1.0 || cosines.maxCoeff() > 1.0) {
    throw Error(ErrorKind::InvalidArgument, "cosines must lie in [-1, 1]");
  }
  Vector logits = scale * cosines;
  logits[target] = margin_target_logit(cosines[target], kind, scale, margin);
  return logits;
}

LossOutput margin_softmax_loss(const Matrix& embeddings, const Matrix& weights,
                               std::span<const HierLabel> labels, MarginKind kind, double scale,
                               double margin) {
  check_labels(embeddings, labels);
  check_margin_args(scale, margin);
  if (embeddings.cols() != weights.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "embedding and weight widths differ");
  }
  const auto targets = subclass_targets(labels, static_cast<int>(weights.rows()));
  const Matrix ue = normalize_rows(embeddings);
  const Matrix uw = normalize_rows(weights);
  const Matrix cos = clamped_cosines(ue, uw);

  Matrix logits = scale * cos;
  for (Eigen::Index i = 0; i < cos.rows(); ++i) {
    const int y = targets[static_cast<std::size_t>(i)];
    logits(i, y) = margin_target_logit(cos(i, y), kind, scale, margin);
  }
  LossOutput ce = softmax_ce_loss(logits, targets);

  Matrix dcos = scale * ce.grad_embeddings;
  for (Eigen::Index i = 0; i < cos.rows(); ++i) {
    const int y = targets[static_cast<std::size_t>(i)];
    dcos(i, y) = ce.grad_embeddings(i, y) * margin_target_slope(cos(i, y), kind, scale, margin);
  }
  LossOutput out;
  out.value = ce.value;
  out.grad_embeddings = normalize_rows_backward(embeddings, dcos * uw);
  out.grad_weights = normalize_rows_backward(weights, dcos.transpose() * ue);
  return out;
}

LossOutput softmax_head_loss(const Matrix& embeddings, const Matrix& weights, const Vector& bias,
                             std::span<const HierLabel> labels) {
  check_labels(embeddings, labels);
  if (embeddings.cols() != weights.cols() || bias.size() != weights.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "classifier head shape does not match input");
  }
  const auto targets = subclass_targets(labels, static_cast<int>(weights.rows()));
  const Matrix ue = normalize_rows(embeddings);
  Matrix logits = ue * weights.transpose();
  logits.rowwise() += bias.transpose();
  LossOutput ce = softmax_ce_loss(logits, targets);

  LossOutput out;
  out.value = ce.value;
  out.grad_embeddings = normalize_rows_backward(embeddings, ce.grad_embeddings * weights);
  out.grad_weights = ce.grad_embeddings.transpose() * ue;
  out.grad_bias = ce.grad_embeddings.colwise().sum().transpose();
  return out;
}

// ---------------------------------------------------------------------------

double adacos_init_scale(int num_classes) {
  if (num_classes < 2) {
    throw Error(ErrorKind::InvalidClassCount,
                "AdaCos needs at least 2 classes, got " + std::to_string(num_classes));
  }
  return std::numbers::sqrt2 * std::log(static_cast<double>(num_classes - 1));
}

AdaCosState make_adacos_state(int num_subclasses, int dim, bool dynamic, Rng& rng) {
  if (dim < 1) throw Error(ErrorKind::InvalidArgument, "AdaCos weight dimension must be >= 1");
  AdaCosState state;
  state.num_subclasses = num_subclasses;
  state.dynamic = dynamic;
  state.scale = adacos_init_scale(num_subclasses);
  if (state.scale < kAdaCosMinScale) {
    warn("AdaCos initial scale " + std::to_string(state.scale) + " for " +
         std::to_string(num_subclasses) + " classes is degenerate; using " +
         std::to_string(kAdaCosMinScale));
    state.scale = kAdaCosMinScale;
  }
  state.weights.resize(num_subclasses, dim);
  for (int r = 0; r < num_subclasses; ++r) {
    Vector row(dim);
    do {
      for (int c = 0; c < dim; ++c) row[c] = rng.normal();
    } while (row.norm() <= kNormFloor);
    state.weights.row(r) = row.normalized().transpose();
  }
  return state;
}

double adacos_scale_from_stats(double b_avg, double theta_med) {
  const double s = std::log(b_avg) / std::cos(std::min(std::numbers::pi / 4.0, theta_med));
  if (!std::isfinite(s)) throw Error(ErrorKind::NonFinite, "AdaCos scale is not finite");
  return s;
}

double adacos_update_scale(AdaCosState& state, const Matrix& cosines,
                           std::span<const int> targets) {
  if (!state.dynamic) {
    throw Error(ErrorKind::InvalidArgument, "scale update requested on a fixed-scale state");
  }
  const auto n = cosines.rows();
  if (n < 1) throw Error(ErrorKind::BatchTooSmall, "scale update needs at least one sample");
  if (static_cast<std::size_t>(n) != targets.size()) {
    throw Error(ErrorKind::DimensionMismatch, "cosine rows and targets differ in length");
  }
  require_finite(cosines, "cosines");

  double b_sum = 0.0;
  std::vector<double> angles;
  angles.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = targets[static_cast<std::size_t>(i)];
    if (y < 0 || y >= cosines.cols()) {
      throw Error(ErrorKind::IndexOutOfRange, "target " + std::to_string(y) + " out of range");
    }
    for (Eigen::Index j = 0; j < cosines.cols(); ++j) {
      if (j == y) continue;
      b_sum += std::exp(std::min(kAdaCosExpClamp, state.scale * cosines(i, j)));
    }
    angles.push_back(std::acos(std::clamp(cosines(i, y), -1.0, 1.0)));
  }
  const double b_avg = b_sum / static_cast<double>(n);

  std::sort(angles.begin(), angles.end());
  const std::size_t mid = angles.size() / 2;
  const double median =
      angles.size() % 2 == 1 ? angles[mid] : 0.5 * (angles[mid - 1] + angles[mid]);

  state.scale = std::max(kAdaCosMinScale, adacos_scale_from_stats(b_avg, median));
  return state.scale;
}

LossOutput adacos_loss_at_scale(const Matrix& weights, double scale, const Matrix& embeddings,
                                std::span<const HierLabel> labels) {
  check_labels(embeddings, labels);
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw Error(ErrorKind::InvalidArgument, "AdaCos scale must be finite and > 0");
  }
  if (embeddings.cols() != weights.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "embedding and weight widths differ");
  }
  const auto targets = subclass_targets(labels, static_cast<int>(weights.rows()));
  const Matrix ue = normalize_rows(embeddings);
  const Matrix uw = normalize_rows(weights);
  const Matrix cos = clamped_cosines(ue, uw);
  LossOutput ce = softmax_ce_loss(scale * cos, targets);

  const Matrix dcos = scale * ce.grad_embeddings;
  LossOutput out;
  out.value = ce.value;
  out.grad_embeddings = normalize_rows_backward(embeddings, dcos * uw);
  out.grad_weights = normalize_rows_backward(weights, dcos.transpose() * ue);
  return out;
}

LossOutput adacos_loss(AdaCosState& state, const Matrix& embeddings,
                       std::span<const HierLabel> labels) {
  if (state.dynamic) {
    check_labels(embeddings, labels);
    const auto targets = subclass_targets(labels, state.num_subclasses);
    const Matrix cos = clamped_cosines(normalize_rows(embeddings), normalize_rows(state.weights));
    adacos_update_scale(state, cos, targets);
  }
  return adacos_loss_at_scale(state.weights, state.scale, embeddings, labels);
}

// ---------------------------------------------------------------------------

PairTarget pair_target(const HierLabel& a, const HierLabel& b,
                       NeutralPrecedence precedence) noexcept {
  if (a.class_id != b.class_id) return PairTarget::Unrelated;
  const bool any_neutral = a.polarity == Polarity::Neutral || b.polarity == Polarity::Neutral;
  if (precedence == NeutralPrecedence::SamePolarityFirst && a.polarity == b.polarity) {
    return PairTarget::Same;
  }
  if (any_neutral) return PairTarget::Unrelated;
  return a.polarity == b.polarity ? PairTarget::Same : PairTarget::Opposite;
}

double pair_loss_term(double cosine, PairTarget target, double threshold) noexcept {
  if (target == PairTarget::Unrelated && std::abs(cosine) < threshold) return 0.0;
  const double r = cosine - numeric(target);
  return r * r;
}

LossOutput pairwise_cosine_loss(const Matrix& embeddings, std::span<const HierLabel> labels,
                                double threshold, NeutralPrecedence precedence) {
  check_labels(embeddings, labels);
  const auto b = embeddings.rows();
  if (b < 2) throw Error(ErrorKind::BatchTooSmall, "pairwise loss needs at least 2 samples");
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "threshold must lie in [0, 1]");
  }
  const Matrix unit = normalize_rows(embeddings);
  const double inv_pairs = 1.0 / static_cast<double>(pair_count(b));

  Matrix grad_unit = Matrix::Zero(b, unit.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < b; ++i) {
    for (Eigen::Index j = i + 1; j < b; ++j) {
      const PairTarget y = pair_target(labels[static_cast<std::size_t>(i)],
                                       labels[static_cast<std::size_t>(j)], precedence);
      const double c = std::clamp(unit.row(i).dot(unit.row(j)), -1.0, 1.0);
      if (y == PairTarget::Unrelated && std::abs(c) < threshold) continue;
      const double r = c - numeric(y);
      total += r * r;
      const double dc = 2.0 * r * inv_pairs;
      grad_unit.row(i) += dc * unit.row(j);
      grad_unit.row(j) += dc * unit.row(i);
    }
  }
  LossOutput out;
  out.value = total * inv_pairs;
  out.grad_embeddings = normalize_rows_backward(embeddings, grad_unit);
  return out;
}

}  // namespace hiermetric
