#include "hiermetric/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hiermetric/checkpoint.hpp"
#include "hiermetric/data.hpp"
#include "hiermetric/dedup.hpp"
#include "hiermetric/error.hpp"
#include "hiermetric/eval.hpp"
#include "hiermetric/mds.hpp"
#include "hiermetric/rng.hpp"
#include "hiermetric/svg.hpp"
#include "hiermetric/trainer.hpp"
#include "manifest.hpp"

namespace hiermetric::cli {
namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

std::string config_scalar(const std::string& key, const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return v.dump();
  throw Error(ErrorKind::InvalidConfig, "config key '" + key + "' must be a string, number, boolean or array");
}

bool flag_given(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.rfind(flag + "=", 0) == 0;
  });
}

// Arguments equivalent to a flat JSON config file for `sub`, skipping
// options already present on the command line.
std::vector<std::string> config_args(const CLI::App& sub, const fs::path& path,
                                     const std::vector<std::string>& given) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidConfig, "cannot open config file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, path.string() + " is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::InvalidConfig, "config file must hold a JSON object");
  std::vector<std::string> out;
  for (const auto& [key, value] : doc.items()) {
    const std::string flag = "--" + key;
    const CLI::Option* opt = sub.get_option_no_throw(flag);
    if (opt == nullptr || key == "config" || key == "help") {
      throw Error(ErrorKind::InvalidConfig, "unknown config key '" + key + "' for " + sub.get_name());
    }
    if (flag_given(given, flag)) continue;
    if (opt->get_expected_min() == 0) {
      if (!value.is_boolean()) {
        throw Error(ErrorKind::InvalidConfig, "config key '" + key + "' must be true or false");
      }
      if (value.get<bool>()) out.push_back(flag);
      continue;
    }
    std::string text;
    if (value.is_array()) {
      for (const auto& v : value) text += (text.empty() ? "" : ",") + config_scalar(key, v);
    } else {
      text = config_scalar(key, value);
    }
    out.push_back(flag + "=" + text);
  }
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

fs::path resolve_output(const std::string& path) {
  fs::path p(path);
  if (p.is_relative()) {
    if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0') {
      p = fs::path(dir) / p;
    }
  }
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  return p;
}

ojson options_echo(const CLI::App* app) {
  ojson echo = ojson::object();
  for (const CLI::Option* opt : app->get_options({})) {
    if (opt->get_lnames().empty() || opt->get_lnames().front() == "help") continue;
    const std::string& name = opt->get_lnames().front();
    std::vector<std::string> values = opt->results();
    if (values.empty()) {
      if (opt->get_expected_min() == 0) {
        echo[name] = false;
        continue;
      }
      if (opt->get_default_str().empty()) {
        echo[name] = nullptr;
        continue;
      }
      values = {opt->get_default_str()};
    }
    echo[name] = values.size() == 1 ? ojson(values.front()) : ojson(values);
  }
  return echo;
}

std::string fmt_double(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, value);
  return buf;
}

struct CommonFlags {
  std::string config_path;
  bool quiet = false;
  int threads = 1;
};

void add_config(CLI::App* sub, CommonFlags& common) {
  sub->add_option("--config", common.config_path,
                  "JSON file with option values (flags take precedence)");
}

void add_threads(CLI::App* sub, CommonFlags& common) {
  sub->add_option("--threads", common.threads, "Worker threads for parallel sections")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

struct GenFlags {
  GeneratorConfig gen;
  int test_per_subclass = 100;

  void add(CLI::App* sub) {
    sub->add_option("--classes", gen.num_classes, "Number of classes K")->capture_default_str();
    sub->add_option("--dim", gen.input_dim, "Input dimension")->capture_default_str();
    sub->add_option("--per-subclass", gen.per_subclass_count, "Training samples per sub-class")
        ->capture_default_str();
    sub->add_option("--alpha", gen.polarity_offset, "Polarity offset")->capture_default_str();
    sub->add_option("--sigma", gen.noise_sigma, "Noise standard deviation")->capture_default_str();
    sub->add_option("--test-per-subclass", test_per_subclass, "Test samples per sub-class")
        ->capture_default_str();
  }

  GeneratorConfig test_config() const {
    GeneratorConfig t = gen;
    t.per_subclass_count = test_per_subclass;
    return t;
  }
};

struct TrainFlags {
  std::string mode = "two-stage";
  std::string pretrain = "adacos";
  TrainConfig base;
  std::vector<int> hidden_dims{128};
  std::string activation = "tanh";
  std::string precedence = "neutral-first";
  bool fixed_scale = false;
  bool no_shuffle = false;

  void add(CLI::App* sub, bool with_mode) {
    if (with_mode) {
      sub->add_option("--mode", mode, "two-stage | triplet | softmax | cosface | arcface | adacos")
          ->check(CLI::IsMember({"two-stage", "triplet", "softmax", "cosface", "arcface", "adacos"}))
          ->capture_default_str();
    }
    sub->add_option("--pretrain", pretrain, "Stage-1 objective for two-stage: adacos | triplet | softmax | none")
        ->check(CLI::IsMember({"adacos", "triplet", "softmax", "none"}))
        ->capture_default_str();
    sub->add_option("--t", base.threshold, "Neutral-pair threshold of the pairwise loss")
        ->capture_default_str();
    sub->add_option("--stage1-epochs", base.stage1_epochs)->capture_default_str();
    sub->add_option("--stage2-epochs", base.stage2_epochs)->capture_default_str();
    sub->add_option("--batch-size", base.batch_size)->capture_default_str();
    sub->add_option("--lr", base.optimizer.learning_rate, "Adam learning rate")->capture_default_str();
    sub->add_option("--stage2-lr", base.stage2_learning_rate,
                    "Stage-2 learning rate (default: 2 x --lr)");
    sub->add_option("--hidden-dims", hidden_dims, "Comma-separated hidden widths")
        ->delimiter(',')
        ->capture_default_str();
    sub->add_option("--output-dim", base.encoder.output_dim)->capture_default_str();
    sub->add_option("--activation", activation)
        ->check(CLI::IsMember({"tanh", "relu"}))
        ->capture_default_str();
    sub->add_option("--triplet-margin", base.triplet_margin)->capture_default_str();
    sub->add_option("--cosface-scale", base.cosface_scale)->capture_default_str();
    sub->add_option("--cosface-margin", base.cosface_margin)->capture_default_str();
    sub->add_option("--arcface-scale", base.arcface_scale)->capture_default_str();
    sub->add_option("--arcface-margin", base.arcface_margin)->capture_default_str();
    sub->add_flag("--fixed-scale", fixed_scale, "Keep the AdaCos scale at its initial value");
    sub->add_option("--neutral-precedence", precedence, "neutral-first | same-polarity-first")
        ->check(CLI::IsMember({"neutral-first", "same-polarity-first"}))
        ->capture_default_str();
    sub->add_flag("--no-shuffle", no_shuffle, "Keep dataset order within epochs");
  }

  TrainConfig build(std::uint64_t seed, std::optional<std::string> mode_override = {},
                    std::optional<std::string> pretrain_override = {}) const {
    TrainConfig cfg = base;
    cfg.seed = seed;
    cfg.mode = *parse_train_mode(mode_override.value_or(mode));
    cfg.pretrain = *parse_pretrain(pretrain_override.value_or(pretrain));
    cfg.encoder.hidden_dims = hidden_dims;
    cfg.encoder.activation = activation == "relu" ? Activation::Relu : Activation::Tanh;
    cfg.precedence = precedence == "same-polarity-first" ? NeutralPrecedence::SamePolarityFirst
                                                        : NeutralPrecedence::NeutralFirst;
    cfg.dynamic_scale = !fixed_scale;
    cfg.shuffle = !no_shuffle;
    cfg.validate();
    return cfg;
  }
};

EpochCallback epoch_printer(std::ostream& out, const TrainConfig& cfg, bool quiet,
                            const std::string& prefix = "") {
  if (quiet) return {};
  return [&out, cfg, prefix](const EpochLog& log) {
    const int total = log.stage == 1 ? cfg.stage1_epochs : cfg.stage2_epochs;
    out << prefix << "stage " << log.stage << " epoch " << log.epoch << "/" << total << " loss "
        << fmt_double("%.6f", log.mean_loss);
    if (log.scale) out << " scale " << fmt_double("%.6f", *log.scale);
    out << "\n";
  };
}

LoadOptions load_options(bool mnli, std::vector<std::string> class_names = {},
                         std::optional<int> expected_dim = {}) {
  LoadOptions opts;
  opts.entailment_labels = mnli;
  opts.class_names = std::move(class_names);
  opts.expected_dim = expected_dim;
  return opts;
}

Matrix embed_dataset(const EncoderParams& encoder, const Dataset& data) {
  return encode_batch(encoder, data.features());
}

// Up to `per_subclass` samples of every sub-class, chosen by a seeded shuffle
// and returned in dataset order.
std::vector<std::size_t> subsample(const Dataset& data, int per_subclass, std::uint64_t seed) {
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < data.size(); ++i) {
    groups[data.samples[i].label.subclass_index()].push_back(i);
  }
  Rng rng = Rng(seed).split(20);
  std::vector<std::size_t> chosen;
  for (auto& [key, idx] : groups) {
    rng.shuffle(std::span<std::size_t>(idx));
    const std::size_t take = std::min<std::size_t>(idx.size(), static_cast<std::size_t>(per_subclass));
    chosen.insert(chosen.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take));
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

void render_scatter(const Matrix& embeddings, const Dataset& data,
                    const std::vector<std::size_t>& rows, const fs::path& svg_path,
                    const std::optional<fs::path>& csv_path, const std::string& title) {
  Matrix points(static_cast<Eigen::Index>(rows.size()), embeddings.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    points.row(static_cast<Eigen::Index>(i)) = embeddings.row(static_cast<Eigen::Index>(rows[i]));
  }
  const Mds2D mds = classical_mds_points(points);
  const std::vector<HierLabel> labels = data.labels(rows);
  SvgOptions opts;
  opts.title = title;
  emit_svg_scatter(mds, labels, data.class_names, svg_path, opts);
  if (csv_path) {
    std::vector<std::string> ids;
    ids.reserve(rows.size());
    for (std::size_t r : rows) ids.push_back(data.samples[r].id);
    write_mds_csv(*csv_path, ids, mds, labels, data.class_names);
  }
}

struct Outcome {
  std::optional<fs::path> manifest;
  RunManifest record;
};

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(const std::vector<std::string>& args);

 private:
  void setup(CLI::App& app);
  void finish(const CLI::App* sub, const std::vector<std::string>& args);

  void cmd_gen_data();
  void cmd_dedup();
  void cmd_train();
  void cmd_embed();
  void cmd_eval();
  void cmd_viz();
  void cmd_bench();

  std::ostream& out_;
  std::ostream& err_;
  CommonFlags common_;
  GenFlags gen_;
  TrainFlags train_;
  Clock::time_point start_ = Clock::now();
  Outcome outcome_;

  std::uint64_t gen_seed_ = 42;
  std::uint64_t train_seed_ = 7;
  std::uint64_t viz_seed_ = 7;
  std::uint64_t bench_seed_ = 42;
  bool mnli_ = false;
  bool unsigned_score_ = false;
  int per_subclass_ = 10;
  double threshold_ = kDefaultDedupThreshold;
  std::string data_, test_, model_, out_path_, test_out_, report_, table_, csv_, title_, tag_;
  std::string modes_ = "two-stage,adacos,triplet,softmax,cosface,arcface";
  std::string out_dir_ = "bench";
  bool viz_ = false;
};

void Runner::setup(CLI::App& app) {
  app.require_subcommand(1, 1);
  app.failure_message(CLI::FailureMessage::help);

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic hierarchical dataset");
  add_config(gen, common_);
  gen_.add(gen);
  gen->add_option("--seed", gen_seed_, "Random seed")->capture_default_str();
  gen->add_option("--out", out_path_, "Training split (JSONL)")->required();
  gen->add_option("--test-out", test_out_, "Optional test split (JSONL)");
  gen->callback([this] { cmd_gen_data(); });

  auto* dedup = app.add_subcommand("dedup", "Drop near-duplicate texts by TF-IDF cosine");
  add_config(dedup, common_);
  add_threads(dedup, common_);
  dedup->add_option("--in", data_, "Input texts (JSONL with id, text)")->required();
  dedup->add_option("--threshold", threshold_, "Cosine threshold in (0, 1]")->capture_default_str();
  dedup->add_option("--out", out_path_, "Kept texts (JSONL)")->required();
  dedup->add_option("--report", report_, "Removal report (JSON)");
  dedup->callback([this] { cmd_dedup(); });

  auto* train = app.add_subcommand("train", "Train an encoder and write a checkpoint");
  add_config(train, common_);
  train->add_option("--data", data_, "Training data (JSONL)")->required();
  train->add_option("--seed", train_seed_, "Random seed")->capture_default_str();
  train->add_option("--out", out_path_, "Checkpoint path (JSON)")->required();
  train->add_option("--report", report_, "Training report (default: <out stem>.report.json)");
  train->add_flag("--mnli-label-map", mnli_, "Read entailment/contradiction as polarities");
  train->add_flag("--quiet", common_.quiet, "Suppress epoch lines");
  train_.add(train, true);
  train->callback([this] { cmd_train(); });

  auto* embed = app.add_subcommand("embed", "Embed a dataset with a trained encoder");
  add_config(embed, common_);
  embed->add_option("--model", model_, "Checkpoint")->required();
  embed->add_option("--data", data_, "Input data (JSONL)")->required();
  embed->add_option("--out", out_path_, "Embedded data (JSONL)")->required();
  embed->add_flag("--mnli-label-map", mnli_, "Read entailment/contradiction as polarities");
  embed->callback([this] { cmd_embed(); });

  auto* eval = app.add_subcommand("eval", "Per-class MAE of centroid scores on a test set");
  add_config(eval, common_);
  add_threads(eval, common_);
  eval->add_option("--model", model_, "Checkpoint")->required();
  eval->add_option("--train", data_, "Data the centroids are computed from (JSONL)")->required();
  eval->add_option("--test", test_, "Test data (JSONL)")->required();
  eval->add_option("--report", report_, "MAE report (JSON)")->required();
  eval->add_option("--table", table_, "Plain-text MAE table");
  eval->add_option("--tag", tag_, "Row label (default: the model's training mode)");
  eval->add_flag("--unsigned-score", unsigned_score_, "Average the two centroid cosines");
  eval->add_flag("--mnli-label-map", mnli_, "Read entailment/contradiction as polarities");
  eval->callback([this] { cmd_eval(); });

  auto* viz = app.add_subcommand("viz", "2-D MDS scatter of (embedded) samples as SVG");
  add_config(viz, common_);
  viz->add_option("--model", model_, "Checkpoint (raw features when omitted)");
  viz->add_option("--data", data_, "Data (JSONL)")->required();
  viz->add_option("--out", out_path_, "SVG path")->required();
  viz->add_option("--csv", csv_, "Optional CSV of the coordinates");
  viz->add_option("--per-subclass", per_subclass_, "Points drawn per sub-class")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  viz->add_option("--seed", viz_seed_, "Random seed for the point selection")->capture_default_str();
  viz->add_option("--title", title_, "Plot title");
  viz->add_flag("--mnli-label-map", mnli_, "Read entailment/contradiction as polarities");
  viz->callback([this] { cmd_viz(); });

  auto* bench = app.add_subcommand("bench", "Train and evaluate a set of models on one dataset");
  add_config(bench, common_);
  add_threads(bench, common_);
  gen_.add(bench);
  bench->add_option("--data", data_, "Training data (synthetic when omitted)");
  bench->add_option("--test", test_, "Test data (required with --data)");
  bench->add_option("--seed", bench_seed_, "Random seed for data generation and training")
      ->capture_default_str();
  bench->add_option("--modes", modes_, "Comma-separated models; two-stage@<pretrain> selects stage 1")
      ->capture_default_str();
  bench->add_option("--out-dir", out_dir_, "Output directory")->capture_default_str();
  bench->add_flag("--viz", viz_, "Also write an MDS scatter per model");
  bench->add_option("--per-subclass-viz", per_subclass_, "Points per sub-class in the scatters")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench->add_flag("--unsigned-score", unsigned_score_, "Average the two centroid cosines");
  bench->add_flag("--mnli-label-map", mnli_, "Read entailment/contradiction as polarities");
  bench->add_flag("--quiet", common_.quiet, "Suppress epoch lines");
  train_.add(bench, false);
  bench->callback([this] { cmd_bench(); });
}

void Runner::cmd_gen_data() {
  gen_.gen.seed = gen_seed_;
  const Dataset train = generate_synthetic(gen_.gen, Split::Train);
  const fs::path out = resolve_output(out_path_);
  save_jsonl(out, train);
  outcome_.record.outputs.push_back(out);
  out_ << "wrote " << train.size() << " samples to " << out.string() << "\n";
  if (!test_out_.empty()) {
    const Dataset test = generate_synthetic(gen_.test_config(), Split::Test);
    const fs::path tout = resolve_output(test_out_);
    save_jsonl(tout, test);
    outcome_.record.outputs.push_back(tout);
    out_ << "wrote " << test.size() << " samples to " << tout.string() << "\n";
  }
  outcome_.record.seed = gen_seed_;
  outcome_.manifest = manifest_path_for(out);
}

void Runner::cmd_dedup() {
  const std::vector<TextItem> texts = load_texts_jsonl(data_);
  const DedupResult result = tfidf_dedup(texts, threshold_, common_.threads);
  std::vector<TextItem> kept;
  kept.reserve(result.kept_ids.size());
  std::size_t k = 0;
  for (const TextItem& t : texts) {
    if (k < result.kept_ids.size() && t.id == result.kept_ids[k]) {
      kept.push_back(t);
      ++k;
    }
  }
  const fs::path out = resolve_output(out_path_);
  save_texts_jsonl(out, kept);
  outcome_.record.inputs.push_back(data_);
  outcome_.record.outputs.push_back(out);
  if (!report_.empty()) {
    const fs::path rpath = resolve_output(report_);
    write_file_atomic(rpath, dedup_report_json(result));
    outcome_.record.outputs.push_back(rpath);
  }
  out_ << "kept " << kept.size() << " of " << texts.size() << " texts, removed "
       << result.removed.size() << "\n";
  outcome_.manifest = manifest_path_for(out);
}

void Runner::cmd_train() {
  const Dataset data = load_jsonl(data_, load_options(mnli_));
  const TrainConfig cfg = train_.build(train_seed_);
  const TrainedModel model = train(data, cfg, epoch_printer(out_, cfg, common_.quiet));

  const fs::path out = resolve_output(out_path_);
  fs::path report_path;
  if (report_.empty()) {
    report_path = out;
    report_path.replace_extension(".report.json");
  } else {
    report_path = resolve_output(report_);
  }
  save_checkpoint(out, model);
  write_file_atomic(report_path, to_json(model.report).dump(2) + "\n");
  if (!common_.quiet) {
    out_ << "wrote checkpoint " << out.string() << " and report " << report_path.string() << "\n";
  }
  outcome_.record.inputs.push_back(data_);
  outcome_.record.outputs = {out, report_path};
  outcome_.record.seed = train_seed_;
  outcome_.record.config["train_config"] = cfg.to_json();
  outcome_.manifest = manifest_path_for(out);
}

void Runner::cmd_embed() {
  const TrainedModel model = load_checkpoint(model_);
  Dataset data = load_jsonl(data_, load_options(mnli_, model.class_names,
                                                model.encoder.config.input_dim));
  const Matrix emb = embed_dataset(model.encoder, data);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data.samples[i].features = emb.row(static_cast<Eigen::Index>(i)).transpose();
  }
  data.input_dim = static_cast<int>(emb.cols());
  const fs::path out = resolve_output(out_path_);
  save_jsonl(out, data);
  out_ << "embedded " << data.size() << " samples to " << out.string() << "\n";
  outcome_.record.inputs = {model_, data_};
  outcome_.record.outputs.push_back(out);
  outcome_.manifest = manifest_path_for(out);
}

void Runner::cmd_eval() {
  const TrainedModel model = load_checkpoint(model_);
  const int dim = model.encoder.config.input_dim;
  const Dataset train = load_jsonl(data_, load_options(mnli_, model.class_names, dim));
  const Dataset test = load_jsonl(test_, load_options(mnli_, train.class_names, dim));
  if (test.num_classes != train.num_classes) {
    throw Error(ErrorKind::MissingSubclass,
                "test data names class '" + test.class_names.back() + "' absent from the training data");
  }
  const SubclassCentroids centroids = compute_centroids(model.encoder, train);
  const std::string tag = tag_.empty() ? std::string(to_string(model.mode)) : tag_;
  const MaeReport report =
      mae_report(model.encoder, centroids, test, tag,
                 unsigned_score_ ? ScoreMode::Unsigned : ScoreMode::Signed, common_.threads);

  const fs::path rpath = resolve_output(report_);
  write_file_atomic(rpath, to_json(report).dump(2) + "\n");
  const std::string table = format_mae_table(std::span<const MaeReport>(&report, 1));
  out_ << table;
  outcome_.record.inputs = {model_, data_, test_};
  outcome_.record.outputs.push_back(rpath);
  if (!table_.empty()) {
    const fs::path tpath = resolve_output(table_);
    write_file_atomic(tpath, table);
    outcome_.record.outputs.push_back(tpath);
  }
  outcome_.manifest = manifest_path_for(rpath);
}

void Runner::cmd_viz() {
  std::optional<TrainedModel> model;
  LoadOptions opts = load_options(mnli_);
  if (!model_.empty()) {
    model = load_checkpoint(model_);
    opts = load_options(mnli_, model->class_names, model->encoder.config.input_dim);
  }
  const Dataset data = load_jsonl(data_, opts);
  const Matrix points = model ? embed_dataset(model->encoder, data) : normalize_rows(data.features());
  const std::vector<std::size_t> rows = subsample(data, per_subclass_, viz_seed_);
  const fs::path out = resolve_output(out_path_);
  std::optional<fs::path> csv;
  if (!csv_.empty()) csv = resolve_output(csv_);
  render_scatter(points, data, rows, out, csv, title_);
  out_ << "plotted " << rows.size() << " points to " << out.string() << "\n";
  if (model) outcome_.record.inputs.push_back(model_);
  outcome_.record.inputs.push_back(data_);
  outcome_.record.outputs.push_back(out);
  if (csv) outcome_.record.outputs.push_back(*csv);
  outcome_.record.seed = viz_seed_;
  outcome_.manifest = manifest_path_for(out);
}

void Runner::cmd_bench() {
  struct Entry {
    std::string tag;
    std::string mode;
    std::optional<std::string> pretrain;
  };
  std::vector<Entry> entries;
  for (const std::string& spec : split_list(modes_)) {
    Entry e{spec, spec, std::nullopt};
    if (const auto at = spec.find('@'); at != std::string::npos) {
      e.mode = spec.substr(0, at);
      e.pretrain = spec.substr(at + 1);
      if (e.mode != "two-stage" || !parse_pretrain(*e.pretrain)) {
        throw Error(ErrorKind::InvalidArgument, "bad --modes entry '" + spec + "'");
      }
    }
    if (!parse_train_mode(e.mode)) {
      throw Error(ErrorKind::InvalidArgument, "unknown mode '" + e.mode + "' in --modes");
    }
    entries.push_back(std::move(e));
  }
  if (entries.empty()) throw Error(ErrorKind::InvalidArgument, "--modes is empty");

  Dataset train_data;
  Dataset test_data;
  ojson dataset_info;
  if (!data_.empty()) {
    if (test_.empty()) throw Error(ErrorKind::InvalidArgument, "--data requires --test");
    train_data = load_jsonl(data_, load_options(mnli_));
    test_data = load_jsonl(test_, load_options(mnli_, train_data.class_names, train_data.input_dim));
    dataset_info = {{"train", data_}, {"test", test_}};
    outcome_.record.inputs = {data_, test_};
  } else {
    gen_.gen.seed = bench_seed_;
    train_data = generate_synthetic(gen_.gen, Split::Train);
    test_data = generate_synthetic(gen_.test_config(), Split::Test);
    dataset_info = {{"synthetic", true},
                    {"classes", gen_.gen.num_classes},
                    {"dim", gen_.gen.input_dim},
                    {"per_subclass", gen_.gen.per_subclass_count},
                    {"test_per_subclass", gen_.test_per_subclass},
                    {"alpha", gen_.gen.polarity_offset},
                    {"sigma", gen_.gen.noise_sigma},
                    {"seed", bench_seed_}};
  }
  dataset_info["train_samples"] = train_data.size();
  dataset_info["test_samples"] = test_data.size();

  const fs::path dir = resolve_output(out_dir_ + "/");
  const ScoreMode score_mode = unsigned_score_ ? ScoreMode::Unsigned : ScoreMode::Signed;
  const std::vector<HierLabel> test_labels = test_data.labels();
  const std::vector<std::size_t> viz_rows =
      viz_ ? subsample(test_data, per_subclass_, bench_seed_) : std::vector<std::size_t>{};

  std::vector<MaeReport> reports;
  ojson models = ojson::array();
  for (const Entry& e : entries) {
    const TrainConfig cfg = train_.build(bench_seed_, e.mode, e.pretrain);
    if (!common_.quiet) out_ << "== " << e.tag << "\n";
    const TrainedModel model = train(train_data, cfg, epoch_printer(out_, cfg, common_.quiet, "  "));
    const SubclassCentroids centroids = compute_centroids(model.encoder, train_data);
    const Matrix emb = embed_dataset(model.encoder, test_data);
    const Matrix pred = score_embeddings(emb, centroids, score_mode, common_.threads);
    MaeReport report = mae_from_scores(pred, true_scores(test_data), e.tag, test_data.class_names);
    const PolarityGeometry geometry = polarity_geometry(emb, test_labels, centroids);
    models.push_back({{"tag", e.tag},
                      {"mae", to_json(report)},
                      {"geometry", to_json(geometry)},
                      {"train", to_json(model.report)}});
    if (viz_) {
      const fs::path svg = dir / ("mds_" + e.tag + ".svg");
      std::string name = svg.filename().string();
      std::replace(name.begin(), name.end(), '@', '_');
      const fs::path svg_path = dir / name;
      fs::path csv_path = svg_path;
      csv_path.replace_extension(".csv");
      render_scatter(emb, test_data, viz_rows, svg_path, csv_path, e.tag);
      outcome_.record.outputs.push_back(svg_path);
      outcome_.record.outputs.push_back(csv_path);
    }
    reports.push_back(std::move(report));
  }

  const std::string table = format_mae_table(reports);
  ojson doc;
  doc["dataset"] = dataset_info;
  doc["score_mode"] = unsigned_score_ ? "unsigned" : "signed";
  doc["models"] = models;
  doc["table"] = table;
  const fs::path report_path = dir / "bench_report.json";
  const fs::path table_path = dir / "bench_table.txt";
  write_file_atomic(report_path, doc.dump(2) + "\n");
  write_file_atomic(table_path, table);
  out_ << table;
  outcome_.record.outputs.insert(outcome_.record.outputs.begin(), {report_path, table_path});
  outcome_.record.seed = bench_seed_;
  outcome_.manifest = dir / "bench.manifest.json";
}

void Runner::finish(const CLI::App* sub, const std::vector<std::string>& args) {
  if (!outcome_.manifest) return;
  RunManifest& m = outcome_.record;
  m.command = sub->get_name();
  m.argv = args;
  ojson config;
  config["options"] = options_echo(sub);
  for (auto& [k, v] : m.config.items()) config[k] = v;
  m.config = config;
  m.wall_time_seconds = std::chrono::duration<double>(Clock::now() - start_).count();
  write_manifest(*outcome_.manifest, m);
}

int exit_code_for(const Error& e) {
  switch (category(e.kind())) {
    case ErrorCategory::Usage:
      return kUsageError;
    case ErrorCategory::Numeric:
      return kNumericError;
    case ErrorCategory::Data:
      break;
  }
  return kDataError;
}

std::string one_line(std::string text) {
  std::replace(text.begin(), text.end(), '\n', ' ');
  return text;
}

// Splices the options of a --config file in right after the sub-command name.
std::vector<std::string> expand_config(const CLI::App& app, const std::vector<std::string>& args) {
  if (args.empty()) return args;
  const CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(args.front());
  } catch (const CLI::OptionNotFound&) {
    return args;
  }
  std::optional<std::string> path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    }
  }
  if (!path) return args;
  std::vector<std::string> out{args.front()};
  for (std::string& a : config_args(*sub, *path, args)) out.push_back(std::move(a));
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

int Runner::run(const std::vector<std::string>& args) {
  CLI::App app{"Hierarchical polarity-aware metric learning toolkit", "hiermetric"};
  setup(app);
  std::vector<std::string> full = args;
  std::vector<const char*> argv{"hiermetric"};
  try {
    full = expand_config(app, args);
    for (const std::string& a : full) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
    const std::vector<CLI::App*> subs = app.get_subcommands();
    if (!subs.empty()) finish(subs.front(), full);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out_, err_);
    return code == 0 ? kOk : kUsageError;
  } catch (const Error& e) {
    err_ << "hiermetric: error: " << one_line(e.what()) << "\n";
    return exit_code_for(e);
  } catch (const nlohmann::json::exception& e) {
    err_ << "hiermetric: error: ParseError: " << one_line(e.what()) << "\n";
    return kDataError;
  } catch (const fs::filesystem_error& e) {
    err_ << "hiermetric: error: IoError: " << one_line(e.what()) << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err_ << "hiermetric: error: " << one_line(e.what()) << "\n";
    return kDataError;
  }
  return kOk;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Runner runner(out, err);
  return runner.run(args);
}

int run_command(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + (argc > 0 ? 1 : 0), argv + argc);
  return run_command(args, std::cout, std::cerr);
}

}  // namespace hiermetric::cli
