#pragma once

#include <optional>
#include <span>
#include <vector>

#include "hiermetric/core_math.hpp"
#include "hiermetric/labels.hpp"
#include "hiermetric/rng.hpp"

namespace hiermetric {

/// Loss value with gradients. `grad_embeddings` has one row per input row
/// (for softmax_ce_loss the input rows are logits). `grad_weights` and
/// `grad_bias` are set by losses that own class parameters.
struct LossOutput {
  double value = 0.0;
  Matrix grad_embeddings;
  std::optional<Matrix> grad_weights;
  std::optional<Vector> grad_bias;
};

enum class MarginKind { CosFace, ArcFace };

/// Target assigned to an unordered sentence pair by the pairwise loss.
enum class PairTarget : int { Opposite = -1, Unrelated = 0, Same = 1 };

constexpr double numeric(PairTarget t) noexcept { return static_cast<double>(static_cast<int>(t)); }

/// Which rule wins for two neutral samples of the same class.
enum class NeutralPrecedence {
  NeutralFirst,       ///< either-neutral rule applies first: target 0
  SamePolarityFirst,  ///< same-polarity rule applies first: target +1
};

inline constexpr double kCosFaceScale = 30.0;
inline constexpr double kCosFaceMargin = 0.35;
inline constexpr double kArcFaceScale = 30.0;
inline constexpr double kArcFaceMargin = 0.5;
inline constexpr double kTripletMargin = 1.0;
inline constexpr double kPairThreshold = 0.3;
/// Exponent cap inside the AdaCos B_avg statistic.
inline constexpr double kAdaCosExpClamp = 80.0;
/// Lower bound applied to every AdaCos scale.
inline constexpr double kAdaCosMinScale = 1.0;

/// Mean cross-entropy of softmax(logits) against integer targets.
/// Gradient rows are (softmax - onehot) / N.
LossOutput softmax_ce_loss(const Matrix& logits, std::span<const int> targets);

/// Hinge triplet loss on unit-normalized inputs:
/// max(0, |a-p| - |a-n| + margin). grad_embeddings rows are (a, p, n).
LossOutput triplet_loss(const Vector& anchor, const Vector& positive, const Vector& negative,
                        double margin = kTripletMargin);

/// Mean triplet loss over every in-batch triplet whose anchor and positive
/// share a sub-class and whose negative does not. Throws NoValidTriplets
/// when the batch has none.
LossOutput triplet_batch_loss(const Matrix& embeddings, std::span<const HierLabel> labels,
                              double margin = kTripletMargin);

/// s*cos for every class, with the target entry replaced by s*(cos - m)
/// (CosFace) or s*cos(acos(cos) + m) (ArcFace).
Vector margin_logit_transform(const Vector& cosines, int target, MarginKind kind, double scale,
                              double margin);

/// CosFace / ArcFace loss over cosines between embeddings and class weight
/// rows. Gradients are returned for both.
LossOutput margin_softmax_loss(const Matrix& embeddings, const Matrix& weights,
                               std::span<const HierLabel> labels, MarginKind kind, double scale,
                               double margin);

/// Plain softmax classifier head on unit-normalized embeddings:
/// logits = e W^T + b.
LossOutput softmax_head_loss(const Matrix& embeddings, const Matrix& weights, const Vector& bias,
                             std::span<const HierLabel> labels);

// ---------------------------------------------------------------------------
// AdaCos

struct AdaCosState {
  Matrix weights;  ///< num_subclasses x d, unit rows
  double scale = 0.0;
  int num_subclasses = 0;
  bool dynamic = true;
};

/// Fixed AdaCos scale sqrt(2) * ln(C - 1). Throws InvalidClassCount for C < 2.
double adacos_init_scale(int num_classes);

/// Random unit anchors and the fixed initial scale. A non-positive initial
/// scale (C = 2) is floored at kAdaCosMinScale with a warning.
AdaCosState make_adacos_state(int num_subclasses, int dim, bool dynamic, Rng& rng);

/// ln(b_avg) / cos(min(pi/4, theta_med)).
double adacos_scale_from_stats(double b_avg, double theta_med);

/// Dynamic scale rule evaluated with the current scale; replaces state.scale
/// and returns it. `cosines` is N x C.
double adacos_update_scale(AdaCosState& state, const Matrix& cosines,
                           std::span<const int> targets);

/// AdaCos loss at a given scale. Pure.
LossOutput adacos_loss_at_scale(const Matrix& weights, double scale, const Matrix& embeddings,
                                std::span<const HierLabel> labels);

/// AdaCos loss; when the state is dynamic the scale is updated from this
/// batch before the loss is evaluated. The scale is not differentiated.
LossOutput adacos_loss(AdaCosState& state, const Matrix& embeddings,
                       std::span<const HierLabel> labels);

// ---------------------------------------------------------------------------
// Pairwise cosine similarity loss

PairTarget pair_target(const HierLabel& a, const HierLabel& b,
                       NeutralPrecedence precedence = NeutralPrecedence::NeutralFirst) noexcept;

/// Per-pair squared error (cos - y)^2; target-0 pairs with |cos| < t are
/// null. Returns 0 for null pairs.
double pair_loss_term(double cosine, PairTarget target, double threshold) noexcept;

/// Sum of per-pair losses over all unordered pairs divided by B(B-1)/2.
LossOutput pairwise_cosine_loss(const Matrix& embeddings, std::span<const HierLabel> labels,
                                double threshold = kPairThreshold,
                                NeutralPrecedence precedence = NeutralPrecedence::NeutralFirst);

/// Number of unordered pairs in a batch of size B.
constexpr long long pair_count(long long batch_size) noexcept {
  return batch_size * (batch_size - 1) / 2;
}

}  // namespace hiermetric
