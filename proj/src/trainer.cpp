#include "hiermetric/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "hiermetric/error.hpp"
#include "hiermetric/log.hpp"
#include "hiermetric/rng.hpp"

namespace hiermetric {

std::string_view to_string(TrainMode mode) noexcept {
  switch (mode) {
    case TrainMode::TwoStage: return "two-stage";
    case TrainMode::Triplet: return "triplet";
    case TrainMode::Softmax: return "softmax";
    case TrainMode::CosFace: return "cosface";
    case TrainMode::ArcFace: return "arcface";
    case TrainMode::AdaCos: return "adacos";
  }
  return "two-stage";
}

std::optional<TrainMode> parse_train_mode(std::string_view text) noexcept {
  for (auto m : {TrainMode::TwoStage, TrainMode::Triplet, TrainMode::Softmax, TrainMode::CosFace,
                 TrainMode::ArcFace, TrainMode::AdaCos}) {
    if (to_string(m) == text) return m;
  }
  return std::nullopt;
}

std::string_view to_string(Pretrain p) noexcept {
  switch (p) {
    case Pretrain::AdaCos: return "adacos";
    case Pretrain::Triplet: return "triplet";
    case Pretrain::Softmax: return "softmax";
    case Pretrain::None: return "none";
  }
  return "adacos";
}

std::optional<Pretrain> parse_pretrain(std::string_view text) noexcept {
  for (auto p : {Pretrain::AdaCos, Pretrain::Triplet, Pretrain::Softmax, Pretrain::None}) {
    if (to_string(p) == text) return p;
  }
  return std::nullopt;
}

void TrainConfig::validate() const {
  if (stage1_epochs < 0 || stage2_epochs < 0) {
    throw Error(ErrorKind::InvalidConfig, "epoch counts must be >= 0");
  }
  if (batch_size < 2) throw Error(ErrorKind::InvalidConfig, "batch_size must be >= 2");
  // 1.0 is accepted as the saturated case that nulls every target-0 pair.
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "threshold t must lie in [0, 1]");
  }
  if (!(triplet_margin >= 0.0)) throw Error(ErrorKind::InvalidConfig, "triplet margin must be >= 0");
  if (!(cosface_scale > 0.0) || !(arcface_scale > 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "margin-loss scales must be > 0");
  }
  if (!(cosface_margin >= 0.0) || !(arcface_margin >= 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "margins must be >= 0");
  }
  optimizer.validate();
  if (stage2_learning_rate && !(*stage2_learning_rate > 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "stage-2 learning rate must be > 0");
  }
  if (encoder.output_dim < 1) throw Error(ErrorKind::InvalidConfig, "output_dim must be >= 1");
  for (int h : encoder.hidden_dims) {
    if (h < 1) throw Error(ErrorKind::InvalidConfig, "hidden widths must be >= 1");
  }
}

double TrainConfig::effective_stage2_learning_rate() const {
  return stage2_learning_rate.value_or(optimizer.learning_rate * kStage2LearningRateFactor);
}

nlohmann::ordered_json TrainConfig::to_json() const {
  nlohmann::ordered_json j;
  j["mode"] = std::string(to_string(mode));
  j["pretrain"] = std::string(to_string(pretrain));
  j["stage1_epochs"] = stage1_epochs;
  j["stage2_epochs"] = stage2_epochs;
  j["batch_size"] = batch_size;
  j["t"] = threshold;
  j["neutral_precedence"] =
      precedence == NeutralPrecedence::NeutralFirst ? "neutral-first" : "same-polarity-first";
  j["triplet_margin"] = triplet_margin;
  j["cosface"] = {{"scale", cosface_scale}, {"margin", cosface_margin}};
  j["arcface"] = {{"scale", arcface_scale}, {"margin", arcface_margin}};
  j["dynamic_scale"] = dynamic_scale;
  j["optimizer"] = {{"learning_rate", optimizer.learning_rate},
                    {"beta1", optimizer.beta1},
                    {"beta2", optimizer.beta2},
                    {"epsilon", optimizer.epsilon}};
  j["stage2_learning_rate"] = effective_stage2_learning_rate();
  j["hidden_dims"] = encoder.hidden_dims;
  j["output_dim"] = encoder.output_dim;
  j["activation"] = encoder.activation == Activation::Tanh ? "tanh" : "relu";
  j["seed"] = seed;
  j["shuffle"] = shuffle;
  return j;
}

nlohmann::ordered_json to_json(const TrainReport& report) {
  nlohmann::ordered_json j;
  j["mode"] = report.mode;
  j["stage1_initial_loss"] =
      report.stage1_initial_loss ? nlohmann::ordered_json(*report.stage1_initial_loss) : nullptr;
  j["stage1_epoch_losses"] = report.stage1_losses;
  j["stage2_epoch_losses"] = report.stage2_losses;
  j["adacos_scale_trajectory"] = report.scale_trajectory;
  j["stage1_steps"] = report.stage1_steps;
  j["stage2_steps"] = report.stage2_steps;
  j["skipped_batches"] = report.skipped_batches;
  j["config"] = report.config_echo;
  return j;
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t num_samples, int batch_size,
                                                   std::uint64_t seed, bool shuffle,
                                                   BatchMode mode) {
  if (num_samples < 2) {
    throw Error(ErrorKind::DatasetTooSmall, "need at least 2 samples, got " +
                                                std::to_string(num_samples));
  }
  if (batch_size < 2) throw Error(ErrorKind::InvalidConfig, "batch_size must be >= 2");
  std::vector<std::size_t> order(num_samples);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle) {
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));
  }
  const auto b = static_cast<std::size_t>(batch_size);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < num_samples; start += b) {
    const std::size_t end = std::min(num_samples, start + b);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  if (mode == BatchMode::MergeSingleton && batches.size() > 1 && batches.back().size() == 1) {
    batches[batches.size() - 2].push_back(batches.back().front());
    batches.pop_back();
  }
  return batches;
}

namespace {

enum Stream : std::uint64_t { kEncoderStream = 1, kHeadStream = 2, kBatchStream = 10 };

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return Rng(seed).split(stream).next_u64();
}

std::uint64_t epoch_seed(std::uint64_t seed, int stage, int epoch) {
  return Rng(seed).split(kBatchStream + static_cast<std::uint64_t>(stage))
      .split(static_cast<std::uint64_t>(epoch))
      .next_u64();
}

EncoderParams fresh_encoder(const Dataset& dataset, const TrainConfig& config) {
  EncoderConfig enc = config.encoder;
  enc.input_dim = dataset.input_dim;
  enc.seed = derive_seed(config.seed, kEncoderStream);
  return init_params(enc);
}

void check_dataset(const Dataset& dataset) {
  if (dataset.size() < 2) {
    throw Error(ErrorKind::DatasetTooSmall, "training needs at least 2 samples");
  }
  if (dataset.num_subclasses() < 2) {
    throw Error(ErrorKind::InvalidClassCount, "training needs at least 2 sub-classes");
  }
}

Matrix gather_rows(const Matrix& all, const std::vector<std::size_t>& idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), all.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = all.row(static_cast<Eigen::Index>(idx[i]));
  }
  return out;
}

/// A step receives the batch embeddings and returns the loss whose
/// grad_embeddings drive the encoder update, or nullopt to skip the batch.
/// Class-parameter updates happen inside the step.
using StepFn = std::function<std::optional<LossOutput>(const Matrix&, std::span<const HierLabel>)>;

struct StageStats {
  std::vector<double> epoch_losses;
  std::int64_t steps = 0;
  std::int64_t skipped = 0;
};

StageStats run_stage(const Dataset& dataset, EncoderParams& encoder, const TrainConfig& config,
                     int stage, int epochs, BatchMode batch_mode, const OptimizerConfig& opt,
                     const StepFn& step, const std::function<std::optional<double>()>& scale_probe,
                     const EpochCallback& on_epoch) {
  StageStats stats;
  const Matrix features = dataset.features();
  const auto labels = dataset.labels();
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    const auto batches = make_batches(dataset.size(), config.batch_size,
                                      epoch_seed(config.seed, stage, epoch), config.shuffle,
                                      batch_mode);
    double weighted = 0.0;
    std::size_t seen = 0;
    std::int64_t skipped_here = 0;
    for (const auto& idx : batches) {
      const Matrix x = gather_rows(features, idx);
      std::vector<HierLabel> batch_labels;
      batch_labels.reserve(idx.size());
      for (auto i : idx) batch_labels.push_back(labels[i]);

      ForwardCache cache;
      const Matrix e = encode_batch(encoder, x, &cache);
      std::optional<LossOutput> loss = step(e, batch_labels);
      if (!loss) {
        ++skipped_here;
        continue;
      }
      if (!std::isfinite(loss->value)) throw Error(ErrorKind::NonFinite, "loss is not finite");
      apply_gradients(encoder, encoder_backward(encoder, cache, loss->grad_embeddings), opt);
      weighted += loss->value * static_cast<double>(idx.size());
      seen += idx.size();
      ++stats.steps;
    }
    if (skipped_here > 0) {
      warn("stage " + std::to_string(stage) + " epoch " + std::to_string(epoch) + ": skipped " +
           std::to_string(skipped_here) + " batch(es) without valid triplets");
    }
    stats.skipped += skipped_here;
    const double mean = seen > 0 ? weighted / static_cast<double>(seen) : 0.0;
    stats.epoch_losses.push_back(mean);
    if (on_epoch) on_epoch({stage, epoch, mean, scale_probe ? scale_probe() : std::nullopt});
  }
  return stats;
}

void renormalize_rows(Matrix& w) {
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    const double n = w.row(r).norm();
    if (n <= kNormFloor) throw Error(ErrorKind::ZeroNorm, "class weight row collapsed to zero");
    w.row(r) /= n;
  }
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

TrainedModel run_adacos(const Dataset& dataset, const TrainConfig& config,
                        const EpochCallback& on_epoch) {
  Timer timer;
  TrainedModel model;
  model.class_names = dataset.class_names;
  model.mode = TrainMode::AdaCos;
  model.encoder = fresh_encoder(dataset, config);
  Rng head_rng(derive_seed(config.seed, kHeadStream));
  AdaCosState state = make_adacos_state(dataset.num_subclasses(), config.encoder.output_dim,
                                        config.dynamic_scale, head_rng);

  {
    const auto labels = dataset.labels();
    const Matrix e = encode_batch(model.encoder, dataset.features());
    model.report.stage1_initial_loss =
        adacos_loss_at_scale(state.weights, state.scale, e, labels).value;
  }

  AdamMoments moments = AdamMoments::zeros_like(state.weights);
  std::int64_t weight_steps = 0;
  const StepFn step = [&](const Matrix& e, std::span<const HierLabel> labels) {
    LossOutput loss = adacos_loss(state, e, labels);
    adam_update(state.weights, *loss.grad_weights, moments, ++weight_steps, config.optimizer);
    renormalize_rows(state.weights);
    return std::optional<LossOutput>(std::move(loss));
  };
  const auto probe = [&]() -> std::optional<double> { return state.scale; };
  const EpochCallback record = [&](const EpochLog& log) {
    model.report.scale_trajectory.push_back(state.scale);
    if (on_epoch) on_epoch(log);
  };

  StageStats stats = run_stage(dataset, model.encoder, config, 1, config.stage1_epochs,
                               BatchMode::KeepRemainder, config.optimizer, step, probe, record);
  model.report.stage1_losses = std::move(stats.epoch_losses);
  model.report.stage1_steps = stats.steps;
  model.adacos = std::move(state);
  model.report.mode = std::string(to_string(TrainMode::AdaCos));
  model.report.config_echo = config.to_json();
  model.report.wall_time_seconds = timer.seconds();
  return model;
}

}  // namespace

TrainedModel train_stage1(const Dataset& dataset, const TrainConfig& config,
                          const EpochCallback& on_epoch) {
  config.validate();
  check_dataset(dataset);
  return run_adacos(dataset, config, on_epoch);
}

TrainedModel train_stage2(const Dataset& dataset, TrainedModel initial, const TrainConfig& config,
                          const EpochCallback& on_epoch) {
  config.validate();
  check_dataset(dataset);
  if (initial.encoder.config.input_dim != dataset.input_dim) {
    throw Error(ErrorKind::DimensionMismatch, "pre-trained encoder input width differs from data");
  }
  Timer timer;
  TrainedModel model = std::move(initial);
  model.mode = TrainMode::TwoStage;

  // Fresh optimizer state for fine-tuning.
  model.encoder.step_count = 0;
  for (auto& layer : model.encoder.layers) {
    layer.weight_moments = AdamMoments::zeros_like(layer.weight);
    layer.bias_moments = AdamMoments::zeros_like(layer.bias);
  }
  OptimizerConfig opt = config.optimizer;
  opt.learning_rate = config.effective_stage2_learning_rate();

  const StepFn step = [&](const Matrix& e, std::span<const HierLabel> labels) {
    return std::optional<LossOutput>(
        pairwise_cosine_loss(e, labels, config.threshold, config.precedence));
  };
  StageStats stats = run_stage(dataset, model.encoder, config, 2, config.stage2_epochs,
                               BatchMode::MergeSingleton, opt, step, {}, on_epoch);
  model.report.stage2_losses = std::move(stats.epoch_losses);
  model.report.stage2_steps = stats.steps;
  model.report.mode = std::string(to_string(TrainMode::TwoStage));
  model.report.config_echo = config.to_json();
  model.report.wall_time_seconds += timer.seconds();
  return model;
}

TrainedModel train_baseline(const Dataset& dataset, const TrainConfig& config, TrainMode mode,
                            const EpochCallback& on_epoch) {
  config.validate();
  check_dataset(dataset);
  if (mode == TrainMode::TwoStage) {
    throw Error(ErrorKind::InvalidArgument, "two-stage is not a baseline mode");
  }
  if (mode == TrainMode::AdaCos) return run_adacos(dataset, config, on_epoch);

  Timer timer;
  TrainedModel model;
  model.class_names = dataset.class_names;
  model.mode = mode;
  model.encoder = fresh_encoder(dataset, config);
  Rng head_rng(derive_seed(config.seed, kHeadStream));
  const int c = dataset.num_subclasses();
  const int d = config.encoder.output_dim;

  Matrix weights;
  Matrix bias = Matrix::Zero(1, c);
  if (mode == TrainMode::Softmax) {
    const double bound = std::sqrt(6.0 / static_cast<double>(c + d));
    weights.resize(c, d);
    for (int r = 0; r < c; ++r) {
      for (int k = 0; k < d; ++k) weights(r, k) = head_rng.uniform(-bound, bound);
    }
  } else if (mode != TrainMode::Triplet) {
    weights = make_adacos_state(c, d, false, head_rng).weights;
  }
  AdamMoments w_moments = AdamMoments::zeros_like(weights);
  AdamMoments b_moments = AdamMoments::zeros_like(bias);
  std::int64_t head_steps = 0;

  const StepFn step = [&](const Matrix& e,
                          std::span<const HierLabel> labels) -> std::optional<LossOutput> {
    switch (mode) {
      case TrainMode::Triplet:
        try {
          return triplet_batch_loss(e, labels, config.triplet_margin);
        } catch (const Error& err) {
          if (err.kind() == ErrorKind::NoValidTriplets) return std::nullopt;
          throw;
        }
      case TrainMode::Softmax: {
        LossOutput loss = softmax_head_loss(e, weights, bias.row(0).transpose(), labels);
        ++head_steps;
        adam_update(weights, *loss.grad_weights, w_moments, head_steps, config.optimizer);
        adam_update(bias, loss.grad_bias->transpose(), b_moments, head_steps, config.optimizer);
        return loss;
      }
      case TrainMode::CosFace:
      case TrainMode::ArcFace: {
        const bool cos_face = mode == TrainMode::CosFace;
        LossOutput loss = margin_softmax_loss(
            e, weights, labels, cos_face ? MarginKind::CosFace : MarginKind::ArcFace,
            cos_face ? config.cosface_scale : config.arcface_scale,
            cos_face ? config.cosface_margin : config.arcface_margin);
        adam_update(weights, *loss.grad_weights, w_moments, ++head_steps, config.optimizer);
        renormalize_rows(weights);
        return loss;
      }
      default:
        return std::nullopt;
    }
  };

  StageStats stats = run_stage(dataset, model.encoder, config, 1, config.stage1_epochs,
                               BatchMode::KeepRemainder, config.optimizer, step, {}, on_epoch);
  model.report.stage1_losses = std::move(stats.epoch_losses);
  model.report.stage1_steps = stats.steps;
  model.report.skipped_batches = stats.skipped;
  model.report.mode = std::string(to_string(mode));
  model.report.config_echo = config.to_json();
  model.report.wall_time_seconds = timer.seconds();
  return model;
}

TrainedModel train(const Dataset& dataset, const TrainConfig& config,
                   const EpochCallback& on_epoch) {
  if (config.mode != TrainMode::TwoStage) {
    return train_baseline(dataset, config, config.mode, on_epoch);
  }
  config.validate();
  check_dataset(dataset);
  TrainedModel stage1;
  switch (config.pretrain) {
    case Pretrain::AdaCos: stage1 = train_stage1(dataset, config, on_epoch); break;
    case Pretrain::Triplet: stage1 = train_baseline(dataset, config, TrainMode::Triplet, on_epoch); break;
    case Pretrain::Softmax: stage1 = train_baseline(dataset, config, TrainMode::Softmax, on_epoch); break;
    case Pretrain::None:
      stage1.encoder = fresh_encoder(dataset, config);
      stage1.class_names = dataset.class_names;
      break;
  }
  return train_stage2(dataset, std::move(stage1), config, on_epoch);
}

}  // namespace hiermetric
