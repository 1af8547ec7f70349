// Python bindings: grids travel as float64 arrays of shape (n, 8, 24).

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "pmtnet/cluster.hpp"
#include "pmtnet/commands.hpp"
#include "pmtnet/errors.hpp"
#include "pmtnet/metrics.hpp"
#include "pmtnet/models.hpp"
#include "pmtnet/optim.hpp"
#include "pmtnet/preprocess.hpp"
#include "pmtnet/synth.hpp"
#include "pmtnet/tsne.hpp"

namespace py = pybind11;
using namespace pmtnet;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using LabelArray = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;

Array grid_array(std::size_t n) { return Array({n, kRings, kColumns}); }

std::size_t check_grids(const Array& a) {
  if (a.ndim() != 3 || a.shape(1) != static_cast<py::ssize_t>(kRings) || a.shape(2) != static_cast<py::ssize_t>(kColumns))
    throw ShapeError("expected an array of shape (n, 8, 24)");
  return static_cast<std::size_t>(a.shape(0));
}

std::vector<PreprocessedGrid> to_grids(const Array& a) {
  const std::size_t n = check_grids(a);
  std::vector<PreprocessedGrid> out(n);
  const double* p = a.data();
  for (std::size_t i = 0; i < n; ++i) std::copy(p + i * kPmts, p + (i + 1) * kPmts, out[i].values.begin());
  return out;
}

Array from_grids(const std::vector<PreprocessedGrid>& grids) {
  Array a = grid_array(grids.size());
  double* p = a.mutable_data();
  for (std::size_t i = 0; i < grids.size(); ++i) std::copy(grids[i].values.begin(), grids[i].values.end(), p + i * kPmts);
  return a;
}

std::vector<EventLabel> to_labels(const LabelArray& a) {
  std::vector<EventLabel> out;
  for (py::ssize_t i = 0; i < a.size(); ++i) out.push_back(label_from_index(static_cast<std::size_t>(a.data()[i])));
  return out;
}

LabelArray from_labels(const std::vector<EventLabel>& labels) {
  std::vector<std::int64_t> v;
  for (EventLabel l : labels) v.push_back(static_cast<std::int64_t>(l));
  const auto n = static_cast<py::ssize_t>(v.size());
  return LabelArray({n}, {static_cast<py::ssize_t>(sizeof(std::int64_t))}, v.data());
}

Array rows_array(const std::vector<std::vector<double>>& rows, std::size_t width) {
  Array a({rows.size(), width});
  for (std::size_t i = 0; i < rows.size(); ++i) std::copy(rows[i].begin(), rows[i].end(), a.mutable_data() + i * width);
  return a;
}

std::vector<std::vector<double>> to_rows(const Array& a) {
  if (a.ndim() != 2) throw ShapeError("expected a 2-D array");
  const auto n = static_cast<std::size_t>(a.shape(0)), d = static_cast<std::size_t>(a.shape(1));
  std::vector<std::vector<double>> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i].assign(a.data() + i * d, a.data() + (i + 1) * d);
  return rows;
}

py::tuple generate(std::size_t per_class, std::uint64_t seed, double noise_level, bool test) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.noise_level = noise_level;
  cfg.counts.fill(per_class);
  cfg.test_counts.fill(per_class);
  const Dataset d = test ? generate_test_dataset(cfg) : generate_dataset(cfg);
  Array a = grid_array(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) std::copy(d.grids[i].q.begin(), d.grids[i].q.end(), a.mutable_data() + i * kPmts);
  return py::make_tuple(a, from_labels(d.labels));
}

Array prepare_grids(const Array& charges, bool center) {
  const std::size_t n = check_grids(charges);
  Dataset d;
  d.grids.resize(n);
  d.labels.assign(n, EventLabel::Other);
  for (std::size_t i = 0; i < n; ++i) std::copy(charges.data() + i * kPmts, charges.data() + (i + 1) * kPmts, d.grids[i].q.begin());
  return from_grids(prepare(d, center ? PreprocessPath::Supervised : PreprocessPath::Unsupervised).grids);
}

std::vector<double> fit(Model& m, const Array& x, const LabelArray& y, std::size_t epochs, double lr, double momentum,
                        std::size_t batch, std::uint64_t seed) {
  const bool cae = m.kind == ModelKind::ConvAutoencoder;
  SgdConfig cfg = cae ? SgdConfig::cae_defaults() : SgdConfig::cnn_defaults();
  cfg.epochs = epochs;
  if (lr >= 0.0) cfg.learning_rate = lr;
  if (momentum >= 0.0) cfg.momentum = momentum;
  if (batch > 0) cfg.batch_size = batch;
  cfg.seed = seed;
  const auto grids = to_grids(x);
  const std::vector<EventLabel> labels = cae ? std::vector<EventLabel>(grids.size(), EventLabel::Other) : to_labels(y);
  py::gil_scoped_release release;
  return train(m, grids, labels, cfg, cae ? LossKind::SumSquaredError : LossKind::CrossEntropy);
}

}  // namespace

PYBIND11_MODULE(_pmtnet, mod) {
  mod.doc() = "CNN and convolutional autoencoder for 8x24 PMT charge images";

  static py::exception<Error> error(mod, "PmtnetError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      error((std::string(e.kind()) + ": " + e.what()).c_str());
    }
  });

  mod.attr("RINGS") = kRings;
  mod.attr("COLUMNS") = kColumns;
  mod.attr("CLASS_NAMES") = py::make_tuple("muon", "flasher", "ibd_prompt", "ibd_delay", "other");

  mod.def("generate", &generate, py::arg("per_class"), py::arg("seed") = 1, py::arg("noise_level") = 1.0,
          py::arg("test") = false, "Synthetic charges (n, 8, 24) and integer labels, shuffled.");
  mod.def("prepare", &prepare_grids, py::arg("charges"), py::arg("center") = true,
          "ln(1 + q) / 10, then rotate the hottest column to 12 if `center`.");

  py::class_<Model>(mod, "Model")
      .def_static("cnn", [](std::uint64_t seed) { return build_supervised_cnn({InitScheme::GlorotUniform, seed}); }, py::arg("seed") = 1)
      .def_static("cae", [](std::uint64_t seed) { return build_conv_autoencoder({InitScheme::GlorotUniform, seed}); }, py::arg("seed") = 1)
      .def_static("load", [](const std::string& path) { return load_model(path); })
      .def("save", [](const Model& m, const std::string& path) { save_model(m, path); })
      .def_property_readonly("kind", [](const Model& m) { return to_string(m.kind); })
      .def_property_readonly("param_count", &Model::param_count)
      .def("fit", &fit, py::arg("x"), py::arg("y") = LabelArray(0), py::arg("epochs") = 1, py::arg("lr") = -1.0,
           py::arg("momentum") = -1.0, py::arg("batch") = 0, py::arg("seed") = 1, "Returns the per-epoch mean loss.")
      .def("predict_proba", [](const Model& m, const Array& x) {
        const auto preds = predict_batch(m, to_grids(x));
        Array a({preds.size(), kNumClasses});
        for (std::size_t i = 0; i < preds.size(); ++i) std::copy(preds[i].probs.begin(), preds[i].probs.end(), a.mutable_data() + i * kNumClasses);
        return a;
      })
      .def("features", [](const Model& m, const Array& x) {
        const auto grids = to_grids(x);
        const auto f = m.kind == ModelKind::ConvAutoencoder ? encode_batch(m, grids) : extract_features_batch(m, grids);
        return rows_array(f, f.empty() ? 0 : f[0].size());
      })
      .def("reconstruct", [](const Model& m, const Array& x) { return from_grids(reconstruct_batch(m, to_grids(x))); });

  mod.def("macro_f1", [](const LabelArray& truth, const LabelArray& pred) { return macro_f1(confusion(to_labels(truth), to_labels(pred))); });
  mod.def("f1_per_class", [](const LabelArray& truth, const LabelArray& pred) { return f1_per_class(confusion(to_labels(truth), to_labels(pred))); });
  mod.def("kmeans", [](const Array& points, std::size_t k, std::uint64_t seed) {
    const auto a = kmeans(to_rows(points), k, seed).assignment;
    return std::vector<std::int64_t>(a.begin(), a.end());
  }, py::arg("points"), py::arg("k"), py::arg("seed") = 1);
  mod.def("tsne", [](const Array& x, double perplexity, std::size_t iterations, std::size_t dims, std::uint64_t seed) {
    TsneConfig cfg;
    cfg.iterations = iterations;
    cfg.dims = dims;
    cfg.seed = seed;
    const auto rows = to_rows(x);
    TsneResult r;
    {
      py::gil_scoped_release release;
      r = tsne_embed(conditional_affinities(rows, perplexity), cfg);
    }
    Array a({r.embedding.n, dims});
    std::copy(r.embedding.coords.begin(), r.embedding.coords.end(), a.mutable_data());
    return a;
  }, py::arg("x"), py::arg("perplexity") = 30.0, py::arg("iterations") = 1000, py::arg("dims") = 2, py::arg("seed") = 1);
  mod.def("run_command", [](const std::string& name, const std::map<std::string, std::string>& flags, const std::string& config) {
    std::ostringstream log;
    run_command(name, config, flags, log);
    return log.str();
  }, py::arg("name"), py::arg("flags") = std::map<std::string, std::string>{}, py::arg("config") = "",
     "Runs a CLI command in-process and returns its log.");
}
