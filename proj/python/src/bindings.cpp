#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <string>
#include <vector>

#include "hiermetric/checkpoint.hpp"
#include "hiermetric/core_math.hpp"
#include "hiermetric/data.hpp"
#include "hiermetric/dedup.hpp"
#include "hiermetric/error.hpp"
#include "hiermetric/eval.hpp"
#include "hiermetric/losses.hpp"
#include "hiermetric/mds.hpp"
#include "hiermetric/svg.hpp"
#include "hiermetric/trainer.hpp"

namespace py = pybind11;
using namespace hiermetric;

namespace {

std::vector<HierLabel> make_labels(const std::vector<int>& classes, const std::vector<Polarity>& polarities) {
  if (classes.size() != polarities.size()) {
    throw Error(ErrorKind::DimensionMismatch, "classes and polarities differ in length");
  }
  std::vector<HierLabel> labels(classes.size());
  for (std::size_t i = 0; i < classes.size(); ++i) labels[i] = {classes[i], polarities[i]};
  return labels;
}

py::tuple loss_tuple(const LossOutput& out) {
  return py::make_tuple(out.value, out.grad_embeddings);
}

py::dict mae_dict(const MaeReport& r) {
  py::dict d;
  d["model"] = r.model_tag;
  d["class_names"] = r.class_names;
  d["per_class_mae"] = r.per_class_mae;
  d["average_mae"] = r.average_mae;
  d["num_samples"] = r.num_samples;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Hierarchical polarity-aware metric learning";

  static py::exception<Error> error_type(m, "HiermetricError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::handle(error_type)(e.what());
      exc.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  py::enum_<Polarity>(m, "Polarity")
      .value("NEGATIVE", Polarity::Negative)
      .value("NEUTRAL", Polarity::Neutral)
      .value("POSITIVE", Polarity::Positive);

  py::class_<HierLabel>(m, "HierLabel")
      .def(py::init<>())
      .def(py::init([](int c, Polarity p) { return HierLabel{c, p}; }), py::arg("class_id"), py::arg("polarity"))
      .def_readwrite("class_id", &HierLabel::class_id)
      .def_readwrite("polarity", &HierLabel::polarity)
      .def_property_readonly("subclass_index", &HierLabel::subclass_index)
      .def("__eq__", [](const HierLabel& a, const HierLabel& b) { return a == b; })
      .def("__repr__", [](const HierLabel& l) {
        return "HierLabel(" + std::to_string(l.class_id) + ", " + std::string(to_string(l.polarity)) + ")";
      });

  m.def("unit_normalize", &unit_normalize, py::arg("v"));
  m.def("normalize_rows", &normalize_rows, py::arg("m"));
  m.def("cosine_sim", &cosine_sim, py::arg("a"), py::arg("b"));

  m.def(
      "softmax_ce_loss",
      [](const Matrix& logits, const std::vector<int>& targets) { return loss_tuple(softmax_ce_loss(logits, targets)); },
      py::arg("logits"), py::arg("targets"));
  m.def(
      "triplet_loss",
      [](const Vector& a, const Vector& p, const Vector& n, double margin) {
        return loss_tuple(triplet_loss(a, p, n, margin));
      },
      py::arg("anchor"), py::arg("positive"), py::arg("negative"), py::arg("margin") = kTripletMargin);
  m.def("adacos_init_scale", &adacos_init_scale, py::arg("num_classes"));
  m.def("adacos_scale_from_stats", &adacos_scale_from_stats, py::arg("b_avg"), py::arg("theta_med"));
  m.def(
      "adacos_loss",
      [](const Matrix& weights, double scale, const Matrix& embeddings, const std::vector<int>& classes,
         const std::vector<Polarity>& polarities) {
        const std::vector<HierLabel> labels = make_labels(classes, polarities);
        return loss_tuple(adacos_loss_at_scale(weights, scale, embeddings, labels));
      },
      py::arg("weights"), py::arg("scale"), py::arg("embeddings"), py::arg("classes"), py::arg("polarities"));
  m.def(
      "pair_target", [](const HierLabel& a, const HierLabel& b) { return numeric(pair_target(a, b)); },
      py::arg("a"), py::arg("b"));
  m.def(
      "pairwise_cosine_loss",
      [](const Matrix& embeddings, const std::vector<int>& classes, const std::vector<Polarity>& polarities,
         double threshold) {
        const std::vector<HierLabel> labels = make_labels(classes, polarities);
        return loss_tuple(pairwise_cosine_loss(embeddings, labels, threshold));
      },
      py::arg("embeddings"), py::arg("classes"), py::arg("polarities"), py::arg("threshold") = kPairThreshold);

  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly("size", &Dataset::size)
      .def_readonly("num_classes", &Dataset::num_classes)
      .def_readonly("input_dim", &Dataset::input_dim)
      .def_readonly("class_names", &Dataset::class_names)
      .def_property_readonly("features", [](const Dataset& d) { return d.features(); })
      .def_property_readonly("labels", [](const Dataset& d) { return d.labels(); })
      .def_property_readonly("ids", [](const Dataset& d) {
        std::vector<std::string> ids;
        for (const Sample& s : d.samples) ids.push_back(s.id);
        return ids;
      })
      .def("__len__", &Dataset::size);

  m.def(
      "generate_synthetic",
      [](int classes, int dim, int per_subclass, double alpha, double sigma, std::uint64_t seed, bool test) {
        GeneratorConfig cfg;
        cfg.num_classes = classes;
        cfg.input_dim = dim;
        cfg.per_subclass_count = per_subclass;
        cfg.polarity_offset = alpha;
        cfg.noise_sigma = sigma;
        cfg.seed = seed;
        return generate_synthetic(cfg, test ? Split::Test : Split::Train);
      },
      py::arg("classes") = 5, py::arg("dim") = 64, py::arg("per_subclass") = 200, py::arg("alpha") = 1.0,
      py::arg("sigma") = 0.3, py::arg("seed") = 42, py::arg("test") = false);
  m.def(
      "load_jsonl",
      [](const std::filesystem::path& path, std::vector<std::string> class_names, bool mnli_label_map) {
        LoadOptions opts;
        opts.class_names = std::move(class_names);
        opts.entailment_labels = mnli_label_map;
        return load_jsonl(path, opts);
      },
      py::arg("path"), py::arg("class_names") = std::vector<std::string>{}, py::arg("mnli_label_map") = false);
  m.def("save_jsonl", &save_jsonl, py::arg("path"), py::arg("dataset"));

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_property(
          "mode", [](const TrainConfig& c) { return std::string(to_string(c.mode)); },
          [](TrainConfig& c, const std::string& s) {
            const auto mode = parse_train_mode(s);
            if (!mode) throw Error(ErrorKind::InvalidArgument, "unknown mode '" + s + "'");
            c.mode = *mode;
          })
      .def_property(
          "pretrain", [](const TrainConfig& c) { return std::string(to_string(c.pretrain)); },
          [](TrainConfig& c, const std::string& s) {
            const auto p = parse_pretrain(s);
            if (!p) throw Error(ErrorKind::InvalidArgument, "unknown pretrain '" + s + "'");
            c.pretrain = *p;
          })
      .def_readwrite("stage1_epochs", &TrainConfig::stage1_epochs)
      .def_readwrite("stage2_epochs", &TrainConfig::stage2_epochs)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("threshold", &TrainConfig::threshold)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("shuffle", &TrainConfig::shuffle)
      .def_readwrite("dynamic_scale", &TrainConfig::dynamic_scale)
      .def_readwrite("stage2_learning_rate", &TrainConfig::stage2_learning_rate)
      .def_property(
          "learning_rate", [](const TrainConfig& c) { return c.optimizer.learning_rate; },
          [](TrainConfig& c, double lr) { c.optimizer.learning_rate = lr; })
      .def_property(
          "hidden_dims", [](const TrainConfig& c) { return c.encoder.hidden_dims; },
          [](TrainConfig& c, std::vector<int> dims) { c.encoder.hidden_dims = std::move(dims); })
      .def_property(
          "output_dim", [](const TrainConfig& c) { return c.encoder.output_dim; },
          [](TrainConfig& c, int d) { c.encoder.output_dim = d; })
      .def("to_json", [](const TrainConfig& c) { return c.to_json().dump(); });

  py::class_<TrainedModel>(m, "TrainedModel")
      .def_property_readonly("mode", [](const TrainedModel& t) { return std::string(to_string(t.mode)); })
      .def_readonly("class_names", &TrainedModel::class_names)
      .def_property_readonly("stage1_losses", [](const TrainedModel& t) { return t.report.stage1_losses; })
      .def_property_readonly("stage2_losses", [](const TrainedModel& t) { return t.report.stage2_losses; })
      .def_property_readonly("scale_trajectory", [](const TrainedModel& t) { return t.report.scale_trajectory; })
      .def("report_json", [](const TrainedModel& t) { return to_json(t.report).dump(); })
      .def("embed", [](const TrainedModel& t, const Matrix& x) { return encode_batch(t.encoder, x); }, py::arg("x"));

  m.def(
      "train",
      [](const Dataset& data, const TrainConfig& cfg, const EpochCallback& on_epoch) {
        py::gil_scoped_release release;
        EpochCallback cb;
        if (on_epoch) {
          cb = [&on_epoch](const EpochLog& log) {
            py::gil_scoped_acquire acquire;
            on_epoch(log);
          };
        }
        return train(data, cfg, cb);
      },
      py::arg("dataset"), py::arg("config") = TrainConfig{}, py::arg("on_epoch") = EpochCallback{});

  py::class_<EpochLog>(m, "EpochLog")
      .def_readonly("stage", &EpochLog::stage)
      .def_readonly("epoch", &EpochLog::epoch)
      .def_readonly("mean_loss", &EpochLog::mean_loss)
      .def_readonly("scale", &EpochLog::scale);

  m.def("save_checkpoint", &save_checkpoint, py::arg("path"), py::arg("model"));
  m.def("load_checkpoint", &load_checkpoint, py::arg("path"));

  m.def(
      "evaluate",
      [](const TrainedModel& model, const Dataset& train_data, const Dataset& test_data, bool unsigned_score) {
        const SubclassCentroids centroids = compute_centroids(model.encoder, train_data);
        return mae_dict(mae_report(model.encoder, centroids, test_data, std::string(to_string(model.mode)),
                                   unsigned_score ? ScoreMode::Unsigned : ScoreMode::Signed));
      },
      py::arg("model"), py::arg("train"), py::arg("test"), py::arg("unsigned_score") = false);
  m.def(
      "predict",
      [](const TrainedModel& model, const Dataset& train_data, const Dataset& data) {
        const SubclassCentroids centroids = compute_centroids(model.encoder, train_data);
        return predict_all(model.encoder, centroids, data);
      },
      py::arg("model"), py::arg("train"), py::arg("dataset"));

  m.def(
      "classical_mds",
      [](const Matrix& distances) {
        const Mds2D r = classical_mds(distances);
        return py::make_tuple(r.coords, py::make_tuple(r.eigenvalues[0], r.eigenvalues[1]), r.stress);
      },
      py::arg("distances"));
  m.def("pairwise_distances", &pairwise_distances, py::arg("points"));
  m.def(
      "render_svg",
      [](const Matrix& points, const std::vector<HierLabel>& labels, const std::vector<std::string>& class_names,
         const std::string& title) {
        SvgOptions opts;
        opts.title = title;
        return render_svg_scatter(classical_mds_points(points), labels, class_names, opts);
      },
      py::arg("points"), py::arg("labels"), py::arg("class_names"), py::arg("title") = "");

  m.def(
      "tfidf_dedup",
      [](const std::vector<std::pair<std::string, std::string>>& items, double threshold, int threads) {
        std::vector<TextItem> texts;
        texts.reserve(items.size());
        for (const auto& [id, text] : items) texts.push_back({id, text});
        const DedupResult r = tfidf_dedup(texts, threshold, threads);
        std::vector<py::tuple> removed;
        for (const DedupRemoval& d : r.removed) removed.push_back(py::make_tuple(d.removed_id, d.kept_id, d.similarity));
        return py::make_tuple(r.kept_ids, removed);
      },
      py::arg("items"), py::arg("threshold") = kDefaultDedupThreshold, py::arg("threads") = 1);
}
