#include "hiermetric/checkpoint.hpp"

#include <fstream>

#include "hiermetric/error.hpp"

namespace hiermetric {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

namespace {

ordered_json matrix_json(const Matrix& m) {
  ordered_json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  j["data"] = std::move(data);
  return j;
}

Matrix matrix_from(const json& j, const char* what) {
  try {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != data.size()) {
      throw Error(ErrorKind::ParseError, std::string(what) + ": data length does not match shape");
    }
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[static_cast<std::size_t>(r * cols + c)];
    }
    require_finite(m, what);
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string(what) + ": " + e.what());
  }
}

}  // namespace

ordered_json checkpoint_json(const TrainedModel& model) {
  ordered_json doc;
  doc["format_version"] = kCheckpointFormatVersion;
  doc["model"] = std::string(to_string(model.mode));
  doc["class_names"] = model.class_names;

  const auto& cfg = model.encoder.config;
  ordered_json enc;
  enc["config"] = {{"input_dim", cfg.input_dim},
                   {"hidden_dims", cfg.hidden_dims},
                   {"output_dim", cfg.output_dim},
                   {"activation", cfg.activation == Activation::Tanh ? "tanh" : "relu"},
                   {"seed", cfg.seed}};
  ordered_json layers = ordered_json::array();
  ordered_json moments = ordered_json::array();
  for (const auto& layer : model.encoder.layers) {
    layers.push_back({{"weight", matrix_json(layer.weight)}, {"bias", matrix_json(layer.bias)}});
    moments.push_back({{"weight_first", matrix_json(layer.weight_moments.first)},
                       {"weight_second", matrix_json(layer.weight_moments.second)},
                       {"bias_first", matrix_json(layer.bias_moments.first)},
                       {"bias_second", matrix_json(layer.bias_moments.second)}});
  }
  enc["layers"] = std::move(layers);
  doc["encoder"] = std::move(enc);
  doc["optimizer"] = {{"step_count", model.encoder.step_count}, {"moments", std::move(moments)}};

  if (model.adacos) {
    doc["adacos"] = {{"num_subclasses", model.adacos->num_subclasses},
                     {"scale", model.adacos->scale},
                     {"dynamic", model.adacos->dynamic},
                     {"weights", matrix_json(model.adacos->weights)}};
  }
  return doc;
}

TrainedModel model_from_checkpoint(const json& doc) {
  try {
    const int version = doc.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion) {
      throw Error(ErrorKind::ParseError,
                  "unsupported checkpoint format_version " + std::to_string(version));
    }
    TrainedModel model;
    const auto mode = parse_train_mode(doc.at("model").get<std::string>());
    if (!mode) throw Error(ErrorKind::ParseError, "unknown model kind in checkpoint");
    model.mode = *mode;
    model.class_names = doc.at("class_names").get<std::vector<std::string>>();

    const auto& enc = doc.at("encoder");
    const auto& cfg = enc.at("config");
    EncoderConfig ec;
    ec.input_dim = cfg.at("input_dim").get<int>();
    ec.hidden_dims = cfg.at("hidden_dims").get<std::vector<int>>();
    ec.output_dim = cfg.at("output_dim").get<int>();
    const auto act = cfg.at("activation").get<std::string>();
    if (act != "tanh" && act != "relu") throw Error(ErrorKind::ParseError, "unknown activation " + act);
    ec.activation = act == "tanh" ? Activation::Tanh : Activation::Relu;
    ec.seed = cfg.at("seed").get<std::uint64_t>();
    ec.validate();

    model.encoder = init_params(ec);
    const auto& layers = enc.at("layers");
    const auto& opt = doc.at("optimizer");
    const auto& moments = opt.at("moments");
    if (layers.size() != model.encoder.layers.size() || moments.size() != layers.size()) {
      throw Error(ErrorKind::ParseError, "checkpoint layer count does not match config");
    }
    for (std::size_t k = 0; k < layers.size(); ++k) {
      auto& layer = model.encoder.layers[k];
      const auto check = [&](const Matrix& m, const Matrix& like, const char* what) {
        if (m.rows() != like.rows() || m.cols() != like.cols()) {
          throw Error(ErrorKind::DimensionMismatch,
                      std::string(what) + " of layer " + std::to_string(k) + " has wrong shape");
        }
        return m;
      };
      layer.weight = check(matrix_from(layers[k].at("weight"), "weight"), layer.weight, "weight");
      layer.bias = check(matrix_from(layers[k].at("bias"), "bias"), layer.bias, "bias");
      layer.weight_moments.first =
          check(matrix_from(moments[k].at("weight_first"), "moment"), layer.weight, "moment");
      layer.weight_moments.second =
          check(matrix_from(moments[k].at("weight_second"), "moment"), layer.weight, "moment");
      layer.bias_moments.first =
          check(matrix_from(moments[k].at("bias_first"), "moment"), layer.bias, "moment");
      layer.bias_moments.second =
          check(matrix_from(moments[k].at("bias_second"), "moment"), layer.bias, "moment");
    }
    model.encoder.step_count = opt.at("step_count").get<std::int64_t>();

    if (doc.contains("adacos") && !doc["adacos"].is_null()) {
      const auto& a = doc["adacos"];
      AdaCosState state;
      state.num_subclasses = a.at("num_subclasses").get<int>();
      state.scale = a.at("scale").get<double>();
      state.dynamic = a.at("dynamic").get<bool>();
      state.weights = matrix_from(a.at("weights"), "adacos weights");
      if (state.weights.rows() != state.num_subclasses || state.weights.cols() != ec.output_dim) {
        throw Error(ErrorKind::DimensionMismatch, "AdaCos weights have wrong shape");
      }
      model.adacos = std::move(state);
    }
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("malformed checkpoint: ") + e.what());
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + tmp.string());
    out << contents;
    if (!out) throw Error(ErrorKind::IoError, "write failure on " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot move " + tmp.string() + ": " + ec.message());
}

void save_checkpoint(const std::filesystem::path& path, const TrainedModel& model) {
  write_file_atomic(path, checkpoint_json(model).dump() + "\n");
}

TrainedModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
  return model_from_checkpoint(doc);
}

}  // namespace hiermetric
