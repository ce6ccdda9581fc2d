#pragma once

#include <cstdint>
#include <vector>

#include "hiermetric/core_math.hpp"
#include "hiermetric/optimizer.hpp"

namespace hiermetric {

enum class Activation { Tanh, Relu };

struct EncoderConfig {
  int input_dim = 0;
  std::vector<int> hidden_dims{128};
  int output_dim = 32;
  Activation activation = Activation::Tanh;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One affine layer. The bias is stored as a 1 x out matrix so that it shares
/// the optimizer code path with the weight.
struct DenseLayer {
  Matrix weight;  ///< out x in
  Matrix bias;    ///< 1 x out
  AdamMoments weight_moments;
  AdamMoments bias_moments;
};

struct EncoderParams {
  EncoderConfig config;
  std::vector<DenseLayer> layers;
  std::int64_t step_count = 0;
};

/// Activations kept from a batch forward pass.
struct ForwardCache {
  Matrix input;
  std::vector<Matrix> hidden;  ///< post-activation output of each hidden layer
  Matrix raw_output;           ///< final affine output before normalization
};

struct EncoderGrads {
  std::vector<Matrix> weight;
  std::vector<Matrix> bias;
};

/// Glorot-uniform weights from the seeded generator, zero biases and moments.
EncoderParams init_params(const EncoderConfig& config);

/// Unit-norm embedding of a single input.
Vector encoder_forward(const EncoderParams& params, const Vector& x);

/// Unit-norm embeddings of a batch (one sample per row). Fills `cache` when
/// given.
Matrix encode_batch(const EncoderParams& params, const Matrix& inputs,
                    ForwardCache* cache = nullptr);

/// Parameter gradients of sum_i <grad_embeddings_i, embedding_i>.
EncoderGrads encoder_backward(const EncoderParams& params, const ForwardCache& cache,
                              const Matrix& grad_embeddings);

/// Recomputes the forward pass on `inputs`, backpropagates `grad_embeddings`
/// and applies one Adam step. Throws NonFinite (leaving params untouched) if
/// any gradient is NaN/Inf.
void encoder_backward_step(EncoderParams& params, const Matrix& inputs,
                           const Matrix& grad_embeddings, const OptimizerConfig& optimizer);

/// Applies already-computed gradients with one Adam step.
void apply_gradients(EncoderParams& params, const EncoderGrads& grads,
                     const OptimizerConfig& optimizer);

/// Flattened view of all weights and biases (layer order, weight row-major
/// then bias). Used by gradient checks.
Vector flatten_params(const EncoderParams& params);
Vector flatten_grads(const EncoderParams& params, const EncoderGrads& grads);
void unflatten_params(EncoderParams& params, const Vector& flat);

}  // namespace hiermetric
