#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hiermetric/data.hpp"
#include "hiermetric/encoder.hpp"
#include "hiermetric/losses.hpp"

namespace hiermetric {

/// Default stage-2 learning rate relative to stage 1.
inline constexpr double kStage2LearningRateFactor = 2.0;

enum class TrainMode { TwoStage, Triplet, Softmax, CosFace, ArcFace, AdaCos };

/// Initialization of the encoder before the pairwise stage of two-stage
/// training. None starts the pairwise stage from freshly initialized weights.
enum class Pretrain { AdaCos, Triplet, Softmax, None };

std::string_view to_string(TrainMode mode) noexcept;
std::optional<TrainMode> parse_train_mode(std::string_view text) noexcept;
std::string_view to_string(Pretrain p) noexcept;
std::optional<Pretrain> parse_pretrain(std::string_view text) noexcept;

struct TrainConfig {
  TrainMode mode = TrainMode::TwoStage;
  Pretrain pretrain = Pretrain::AdaCos;
  int stage1_epochs = 20;
  int stage2_epochs = 20;
  int batch_size = 32;
  double threshold = kPairThreshold;
  NeutralPrecedence precedence = NeutralPrecedence::NeutralFirst;
  double triplet_margin = kTripletMargin;
  double cosface_scale = kCosFaceScale;
  double cosface_margin = kCosFaceMargin;
  double arcface_scale = kArcFaceScale;
  double arcface_margin = kArcFaceMargin;
  bool dynamic_scale = true;
  OptimizerConfig optimizer;
  /// Defaults to twice optimizer.learning_rate.
  std::optional<double> stage2_learning_rate;
  /// input_dim and seed are filled in from the data and `seed`.
  EncoderConfig encoder;
  std::uint64_t seed = 7;
  bool shuffle = true;

  void validate() const;
  double effective_stage2_learning_rate() const;
  nlohmann::ordered_json to_json() const;
};

struct TrainReport {
  std::string mode;
  std::optional<double> stage1_initial_loss;
  std::vector<double> stage1_losses;  ///< sample-weighted mean loss per epoch
  std::vector<double> stage2_losses;
  std::vector<double> scale_trajectory;  ///< AdaCos scale at the end of each stage-1 epoch
  std::int64_t stage1_steps = 0;
  std::int64_t stage2_steps = 0;
  std::int64_t skipped_batches = 0;
  double wall_time_seconds = 0.0;
  nlohmann::ordered_json config_echo;
};

/// Report as JSON. Wall time is left out so that reports of identical runs
/// are byte-identical; it is recorded in the run manifest instead.
nlohmann::ordered_json to_json(const TrainReport& report);

struct TrainedModel {
  EncoderParams encoder;
  std::optional<AdaCosState> adacos;
  std::vector<std::string> class_names;
  TrainMode mode = TrainMode::TwoStage;
  TrainReport report;
};

struct EpochLog {
  int stage = 1;
  int epoch = 0;  ///< 1-based
  double mean_loss = 0.0;
  std::optional<double> scale;
};
using EpochCallback = std::function<void(const EpochLog&)>;

enum class BatchMode {
  KeepRemainder,   ///< trailing batch may have a single sample
  MergeSingleton,  ///< trailing singleton joins the previous batch
};

/// Seeded shuffle (optional) followed by contiguous chunks of `batch_size`.
std::vector<std::vector<std::size_t>> make_batches(std::size_t num_samples, int batch_size,
                                                   std::uint64_t seed, bool shuffle,
                                                   BatchMode mode = BatchMode::KeepRemainder);

/// Encoder + AdaCos weights on flattened sub-class labels.
TrainedModel train_stage1(const Dataset& dataset, const TrainConfig& config,
                          const EpochCallback& on_epoch = {});

/// Pairwise cosine fine-tuning of `initial.encoder`; AdaCos weights are
/// carried over unchanged.
TrainedModel train_stage2(const Dataset& dataset, TrainedModel initial, const TrainConfig& config,
                          const EpochCallback& on_epoch = {});

/// Single-stage training with `mode` (any mode except TwoStage), using
/// stage1_epochs.
TrainedModel train_baseline(const Dataset& dataset, const TrainConfig& config, TrainMode mode,
                            const EpochCallback& on_epoch = {});

/// Dispatches on config.mode.
TrainedModel train(const Dataset& dataset, const TrainConfig& config,
                   const EpochCallback& on_epoch = {});

}  // namespace hiermetric
