#include "hiermetric/encoder.hpp"

#include <cmath>
#include <string>

#include "hiermetric/error.hpp"
#include "hiermetric/rng.hpp"

namespace hiermetric {

void EncoderConfig::validate() const {
  if (input_dim < 1) throw Error(ErrorKind::InvalidConfig, "input_dim must be >= 1");
  if (output_dim < 1) throw Error(ErrorKind::InvalidConfig, "output_dim must be >= 1");
  for (int h : hidden_dims) {
    if (h < 1) throw Error(ErrorKind::InvalidConfig, "hidden widths must be >= 1");
  }
}

EncoderParams init_params(const EncoderConfig& config) {
  config.validate();
  EncoderParams params;
  params.config = config;
  Rng rng(config.seed);

  std::vector<int> widths;
  widths.push_back(config.input_dim);
  widths.insert(widths.end(), config.hidden_dims.begin(), config.hidden_dims.end());
  widths.push_back(config.output_dim);

  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const int fan_in = widths[l];
    const int fan_out = widths[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    DenseLayer layer;
    layer.weight.resize(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) layer.weight(r, c) = rng.uniform(-bound, bound);
    }
    layer.bias = Matrix::Zero(1, fan_out);
    layer.weight_moments = AdamMoments::zeros_like(layer.weight);
    layer.bias_moments = AdamMoments::zeros_like(layer.bias);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

namespace {

void activate(Matrix& z, Activation act) {
  if (act == Activation::Tanh) {
    z = z.array().tanh();
  } else {
    z = z.cwiseMax(0.0);
  }
}

/// Derivative of the activation expressed through its output.
Matrix activation_slope(const Matrix& out, Activation act) {
  if (act == Activation::Tanh) return (1.0 - out.array().square()).matrix();
  return (out.array() > 0.0).cast<double>().matrix();
}

Matrix affine(const Matrix& x, const DenseLayer& layer) {
  Matrix z = x * layer.weight.transpose();
  z.rowwise() += layer.bias.row(0);
  return z;
}

}  // namespace

Matrix encode_batch(const EncoderParams& params, const Matrix& inputs, ForwardCache* cache) {
  if (inputs.cols() != params.config.input_dim) {
    throw Error(ErrorKind::DimensionMismatch,
                "encoder expects inputs of width " + std::to_string(params.config.input_dim) +
                    ", got " + std::to_string(inputs.cols()));
  }
  require_finite(inputs, "encoder input");
  Matrix h = inputs;
  if (cache) {
    cache->input = inputs;
    cache->hidden.clear();
  }
  const std::size_t last = params.layers.size() - 1;
  for (std::size_t l = 0; l < last; ++l) {
    Matrix z = affine(h, params.layers[l]);
    activate(z, params.config.activation);
    h = std::move(z);
    if (cache) cache->hidden.push_back(h);
  }
  Matrix raw = affine(h, params.layers[last]);
  Matrix out = normalize_rows(raw);
  if (cache) cache->raw_output = std::move(raw);
  return out;
}

Vector encoder_forward(const EncoderParams& params, const Vector& x) {
  if (x.size() != params.config.input_dim) {
    throw Error(ErrorKind::DimensionMismatch,
                "encoder expects inputs of length " + std::to_string(params.config.input_dim) +
                    ", got " + std::to_string(x.size()));
  }
  return encode_batch(params, x.transpose()).row(0).transpose();
}

EncoderGrads encoder_backward(const EncoderParams& params, const ForwardCache& cache,
                              const Matrix& grad_embeddings) {
  if (grad_embeddings.rows() != cache.raw_output.rows() ||
      grad_embeddings.cols() != cache.raw_output.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "embedding gradient shape does not match batch");
  }
  const std::size_t n_layers = params.layers.size();
  EncoderGrads grads;
  grads.weight.resize(n_layers);
  grads.bias.resize(n_layers);

  Matrix g = normalize_rows_backward(cache.raw_output, grad_embeddings);
  for (std::size_t k = n_layers; k-- > 0;) {
    const Matrix& below = k == 0 ? cache.input : cache.hidden[k - 1];
    grads.weight[k] = g.transpose() * below;
    grads.bias[k] = g.colwise().sum();
    if (k == 0) break;
    g = (g * params.layers[k].weight)
            .cwiseProduct(activation_slope(cache.hidden[k - 1], params.config.activation));
  }
  return grads;
}

void apply_gradients(EncoderParams& params, const EncoderGrads& grads,
                     const OptimizerConfig& optimizer) {
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    if (!grads.weight[k].allFinite() || !grads.bias[k].allFinite()) {
      throw Error(ErrorKind::NonFinite,
                  "encoder gradient of layer " + std::to_string(k) + " is not finite");
    }
  }
  ++params.step_count;
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    auto& layer = params.layers[k];
    adam_update(layer.weight, grads.weight[k], layer.weight_moments, params.step_count, optimizer);
    adam_update(layer.bias, grads.bias[k], layer.bias_moments, params.step_count, optimizer);
  }
}

void encoder_backward_step(EncoderParams& params, const Matrix& inputs,
                           const Matrix& grad_embeddings, const OptimizerConfig& optimizer) {
  require_finite(grad_embeddings, "embedding gradient");
  ForwardCache cache;
  encode_batch(params, inputs, &cache);
  apply_gradients(params, encoder_backward(params, cache, grad_embeddings), optimizer);
}

namespace {
template <typename Fn>
void for_each_block(const EncoderParams& params, Fn&& fn) {
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    fn(k, true);
    fn(k, false);
  }
}
}  // namespace

Vector flatten_params(const EncoderParams& params) {
  std::vector<double> flat;
  for_each_block(params, [&](std::size_t k, bool is_weight) {
    const Matrix& m = is_weight ? params.layers[k].weight : params.layers[k].bias;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
    }
  });
  return Eigen::Map<Vector>(flat.data(), static_cast<Eigen::Index>(flat.size()));
}

Vector flatten_grads(const EncoderParams& params, const EncoderGrads& grads) {
  std::vector<double> flat;
  for_each_block(params, [&](std::size_t k, bool is_weight) {
    const Matrix& m = is_weight ? grads.weight[k] : grads.bias[k];
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
    }
  });
  return Eigen::Map<Vector>(flat.data(), static_cast<Eigen::Index>(flat.size()));
}

void unflatten_params(EncoderParams& params, const Vector& flat) {
  Eigen::Index pos = 0;
  for_each_block(params, [&](std::size_t k, bool is_weight) {
    Matrix& m = is_weight ? params.layers[k].weight : params.layers[k].bias;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (pos >= flat.size()) {
          throw Error(ErrorKind::DimensionMismatch, "flat parameter vector too short");
        }
        m(r, c) = flat[pos++];
      }
    }
  });
  if (pos != flat.size()) throw Error(ErrorKind::DimensionMismatch, "flat parameter vector too long");
}

}  // namespace hiermetric
