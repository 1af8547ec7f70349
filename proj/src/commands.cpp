#include "pmtnet/commands.hpp"

#include <cmath>
#include <filesystem>
#include <ostream>

#include "pmtnet/baselines.hpp"
#include "pmtnet/binary_io.hpp"
#include "pmtnet/errors.hpp"
#include "pmtnet/formats.hpp"
#include "pmtnet/metrics.hpp"
#include "pmtnet/models.hpp"
#include "pmtnet/optim.hpp"
#include "pmtnet/preprocess.hpp"
#include "pmtnet/svg.hpp"
#include "pmtnet/synth.hpp"
#include "pmtnet/tsne.hpp"

namespace fs = std::filesystem;

namespace pmtnet {

namespace {

fs::path out_dir(const RunConfig& cfg) {
  const fs::path dir = cfg.str("out");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

// Input files default to well-known names inside the output directory.
fs::path input(const RunConfig& cfg, const std::string& key, const std::string& fallback) {
  return cfg.has(key) ? fs::path(cfg.str(key)) : fs::path(cfg.str("out")) / fallback;
}

PreprocessPath path_for(ModelKind kind) {
  return kind == ModelKind::ConvAutoencoder ? PreprocessPath::Unsupervised : PreprocessPath::Supervised;
}

std::string class_counts(const Dataset& ds) {
  std::array<std::size_t, kNumClasses> n{};
  for (EventLabel l : ds.labels) ++n[index_of(l)];
  std::string s;
  for (EventLabel l : kAllLabels) s += " " + std::string(label_key(l)) + "=" + std::to_string(n[index_of(l)]);
  return s;
}

std::array<std::size_t, kNumClasses> uniform_counts(std::size_t n) { return {n, n, n, n, n}; }

ModelKind parse_model_name(const std::string& name) {
  if (name == "cnn") return ModelKind::SupervisedCnn;
  if (name == "cae") return ModelKind::ConvAutoencoder;
  throw ConfigError("model must be 'cnn' or 'cae', got '" + name + "'");
}

std::string model_name(ModelKind kind) { return kind == ModelKind::ConvAutoencoder ? "cae" : "cnn"; }

double grid_sse(const PreprocessedGrid& a, const PreprocessedGrid& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < kPmts; ++i) s += (a.values[i] - b.values[i]) * (a.values[i] - b.values[i]);
  return s;
}

}  // namespace

void cmd_generate(const RunConfig& cfg, std::ostream& log) {
  const std::string preset = cfg.str("preset");
  SynthConfig sc;
  if (preset == "supervised")
    sc = SynthConfig::supervised_preset();
  else if (preset == "unsupervised")
    sc = SynthConfig::unsupervised_preset();
  else
    throw ConfigError("preset must be 'supervised' or 'unsupervised', got '" + preset + "'");
  sc.seed = cfg.u64("seed");
  sc.noise_level = cfg.real("noise_level");
  if (cfg.has("counts")) {
    const std::size_t n = cfg.size("counts");
    sc.counts = uniform_counts(n);
    sc.test_counts = uniform_counts(std::max<std::size_t>(1, n / 3));
  }
  if (cfg.has("test_counts")) sc.test_counts = uniform_counts(cfg.size("test_counts"));
  sc.validate();

  const fs::path dir = out_dir(cfg);
  const Dataset train = generate_dataset(sc);
  const Dataset test = generate_test_dataset(sc);
  save_dataset(train, dir / "train.dybs");
  save_dataset(test, dir / "test.dybs");
  log << "train " << train.size() << ":" << class_counts(train) << "\n";
  log << "test " << test.size() << ":" << class_counts(test) << "\n";
}

void cmd_train(const RunConfig& cfg, std::ostream& log) {
  const ModelKind kind = parse_model_name(cfg.str("model"));
  const Dataset raw = load_dataset(input(cfg, "data", "train.dybs"));
  const PreparedDataset data = prepare(raw, path_for(kind));

  SgdConfig sgd = kind == ModelKind::ConvAutoencoder ? SgdConfig::cae_defaults() : SgdConfig::cnn_defaults();
  if (cfg.has("epochs")) sgd.epochs = cfg.size("epochs");
  if (cfg.has("lr")) sgd.learning_rate = cfg.real("lr");
  if (cfg.has("momentum")) sgd.momentum = cfg.real("momentum");
  if (cfg.has("batch")) sgd.batch_size = cfg.size("batch");
  sgd.seed = cfg.u64("seed");
  sgd.validate();

  const InitConfig init{InitScheme::GlorotUniform, cfg.u64("seed")};
  Model model = kind == ModelKind::ConvAutoencoder ? build_conv_autoencoder(init) : build_supervised_cnn(init);
  const LossKind loss = kind == ModelKind::ConvAutoencoder ? LossKind::SumSquaredError : LossKind::CrossEntropy;

  std::string csv = "epoch,mean_loss\n";
  const auto trace = train(model, data.grids, data.labels, sgd, loss, [&](std::size_t epoch, double l) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", epoch, l);
    csv += buf;
    log << "epoch " << epoch << " loss " << l << "\n";
  });

  const fs::path dir = out_dir(cfg);
  const std::string name = model_name(kind);
  save_model(model, dir / (name + ".nlns"));
  write_text_file(dir / (name + "_loss.csv"), csv);
  if (kind == ModelKind::SupervisedCnn) {
    const auto preds = predict_batch(model, data.grids);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) hit += preds[i].label == data.labels[i];
    log << "train_accuracy " << static_cast<double>(hit) / static_cast<double>(preds.size()) << "\n";
  }
}

void cmd_baselines(const RunConfig& cfg, std::ostream& log) {
  const PreparedDataset data = prepare(load_dataset(input(cfg, "data", "train.dybs")), PreprocessPath::Supervised);
  FeatureRows rows = flatten(data);
  SvmConfig sc;
  sc.lambda = cfg.real("lambda");
  sc.epochs = cfg.size("svm_epochs");
  sc.seed = cfg.u64("seed");
  const SvmModel svm = svm_train(rows, data.labels, sc);
  const KnnModel knn = knn_fit(std::move(rows), data.labels, cfg.size("k"));
  const fs::path dir = out_dir(cfg);
  save_knn(knn, dir / "knn.nlns");
  save_svm(svm, dir / "svm.nlns");
  log << "knn k=" << knn.k << " rows=" << knn.vectors.size() << "\n";
  log << "svm lambda=" << sc.lambda << " epochs=" << sc.epochs << "\n";
}

void cmd_eval(const RunConfig& cfg, std::ostream& log) {
  const PreparedDataset data = prepare(load_dataset(input(cfg, "data", "test.dybs")), PreprocessPath::Supervised);
  std::vector<MethodReport> reports;
  for (const auto& method : cfg.str_list("methods")) {
    std::vector<EventLabel> pred;
    if (method == "cnn") {
      const Model m = load_model(input(cfg, "cnn_model", "cnn.nlns"));
      if (m.kind != ModelKind::SupervisedCnn) throw KindError("eval needs a cnn model, got " + to_string(m.kind));
      for (const auto& p : predict_batch(m, data.grids)) pred.push_back(p.label);
    } else if (method == "knn") {
      pred = knn_classify_all(load_knn(input(cfg, "knn_model", "knn.nlns")), flatten(data));
    } else if (method == "svm") {
      pred = svm_predict_all(load_svm(input(cfg, "svm_model", "svm.nlns")), flatten(data));
    } else {
      throw ConfigError("unknown method '" + method + "'");
    }
    reports.push_back({method, confusion(data.labels, pred)});
  }
  if (reports.empty()) throw ConfigError("no methods requested");
  const fs::path dir = out_dir(cfg);
  const std::string text = format_report_text(reports);
  write_text_file(dir / "report.txt", text);
  write_text_file(dir / "report.kv", format_report_kv(reports));
  log << text;
}

void cmd_embed(const RunConfig& cfg, std::ostream& log) {
  const Model m = load_model(input(cfg, "model_file", "cnn.nlns"));
  const PreparedDataset data = prepare(load_dataset(input(cfg, "data", "test.dybs")), path_for(m.kind));
  const auto features =
      m.kind == ModelKind::ConvAutoencoder ? encode_batch(m, data.grids) : extract_features_batch(m, data.grids);
  const fs::path dir = out_dir(cfg);
  const fs::path file = dir / (model_name(m.kind) + "_features.csv");
  write_text_file(file, format_labeled_csv(feature_rows(features, data.labels)));
  log << "wrote " << features.size() << " x " << (features.empty() ? 0 : features[0].size()) << " features to "
      << file.string() << "\n";
}

void cmd_tsne(const RunConfig& cfg, std::ostream& log) {
  LabeledRows table = parse_labeled_csv(read_text_file(input(cfg, "features", "cnn_features.csv")));
  const std::size_t limit = cfg.size("max_points");
  if (limit > 0 && table.rows.size() > limit) {
    table.rows.resize(limit);
    table.labels.resize(limit);
  }
  TsneConfig tc;
  tc.dims = cfg.size("dims");
  tc.iterations = cfg.size("iterations");
  tc.learning_rate = cfg.real("learning_rate");
  tc.seed = cfg.u64("seed");
  const AffinityMatrix p = conditional_affinities(table.rows, cfg.real("perplexity"));
  const TsneResult r = tsne_embed(p, tc);

  const fs::path dir = out_dir(cfg);
  const std::string name = cfg.str("name");
  write_text_file(dir / (name + "_embedding.csv"), format_labeled_csv(embedding_rows(r.embedding, table.labels)));
  write_text_file(dir / (name + ".svg"), render_scatter_svg(r.embedding, table.labels, cfg.str("title")));
  log << "points " << r.embedding.n << " final_kl " << (r.kl_trace.empty() ? 0.0 : r.kl_trace.back()) << "\n";
}

void cmd_reconstruct(const RunConfig& cfg, std::ostream& log) {
  const Model m = load_model(input(cfg, "model_file", "cae.nlns"));
  if (m.kind != ModelKind::ConvAutoencoder) throw KindError("reconstruct needs a cae model, got " + to_string(m.kind));
  const PreparedDataset data = prepare(load_dataset(input(cfg, "data", "test.dybs")), PreprocessPath::Unsupervised);
  std::vector<ReconstructionPanel> panels;
  for (std::size_t i : cfg.size_list("indices")) {
    if (i >= data.size())
      throw DataError("event index " + std::to_string(i) + " out of range for " + std::to_string(data.size()) + " events");
    ReconstructionPanel p{data.grids[i], reconstruct(m, data.grids[i]), data.labels[i], i, 0.0};
    p.sse = grid_sse(p.input, p.reconstruction);
    log << "event " << i << " " << label_key(p.label) << " sse " << p.sse << "\n";
    panels.push_back(std::move(p));
  }
  if (panels.empty()) throw ConfigError("no event indices given");
  write_text_file(out_dir(cfg) / "reconstruct.svg", render_reconstruction_svg(panels));
}

const std::vector<CommandInfo>& command_table() {
  static const std::vector<CommandInfo> table{
      {"generate",
       "Write synthetic train.dybs and test.dybs",
       {{"out", "out", "output directory"},
        {"seed", "1", "generator seed"},
        {"preset", "supervised", "supervised (900+300 per class) or unsupervised (634+158 per class)"},
        {"counts", "", "training events per class (test defaults to counts/3)"},
        {"test_counts", "", "test events per class"},
        {"noise_level", "1.0", "mean per-PMT noise charge"}},
       cmd_generate},
      {"train",
       "Train the cnn or the autoencoder",
       {{"out", "out", "output directory"},
        {"data", "", "training dataset [<out>/train.dybs]"},
        {"model", "cnn", "cnn or cae"},
        {"epochs", "", "epochs (cnn 12, cae 30)"},
        {"lr", "", "learning rate (cnn 0.01, cae 0.0005)"},
        {"momentum", "", "momentum coefficient (0.9)"},
        {"batch", "", "mini-batch size (64)"},
        {"seed", "1", "initialisation and shuffling seed"}},
       cmd_train},
      {"baselines",
       "Fit the k-NN and linear SVM baselines",
       {{"out", "out", "output directory"},
        {"data", "", "training dataset [<out>/train.dybs]"},
        {"k", "5", "neighbours (odd)"},
        {"lambda", "1e-4", "svm regularisation"},
        {"svm_epochs", "30", "svm passes over the data"},
        {"seed", "1", "svm shuffling seed"}},
       cmd_baselines},
      {"eval",
       "Per-class F1 and accuracy report",
       {{"out", "out", "output directory"},
        {"data", "", "test dataset [<out>/test.dybs]"},
        {"methods", "cnn,knn,svm", "comma-separated subset of cnn,knn,svm"},
        {"cnn_model", "", "cnn model file [<out>/cnn.nlns]"},
        {"knn_model", "", "k-NN model file [<out>/knn.nlns]"},
        {"svm_model", "", "svm model file [<out>/svm.nlns]"}},
       cmd_eval},
      {"embed",
       "Write learned features to CSV",
       {{"out", "out", "output directory"},
        {"data", "", "dataset [<out>/test.dybs]"},
        {"model_file", "", "cnn or cae model file [<out>/cnn.nlns]"}},
       cmd_embed},
      {"tsne",
       "Embed a feature CSV in 2-D and plot it",
       {{"out", "out", "output directory"},
        {"features", "", "feature CSV from embed [<out>/cnn_features.csv]"},
        {"name", "tsne", "output file stem"},
        {"title", "t-SNE", "plot title"},
        {"perplexity", "30", "target perplexity"},
        {"iterations", "1000", "gradient steps"},
        {"learning_rate", "100", "step size"},
        {"dims", "2", "embedding dimension (2 or 3)"},
        {"max_points", "0", "use only the first N rows (0 = all)"},
        {"seed", "1", "initialisation seed"}},
       cmd_tsne},
      {"reconstruct",
       "Plot autoencoder reconstructions",
       {{"out", "out", "output directory"},
        {"data", "", "dataset [<out>/test.dybs]"},
        {"model_file", "", "cae model file [<out>/cae.nlns]"},
        {"indices", "0,1,2,3,4", "comma-separated event indices"}},
       cmd_reconstruct},
  };
  return table;
}

const CommandInfo& find_command(const std::string& name) {
  for (const auto& c : command_table())
    if (c.name == name) return c;
  throw ConfigError("unknown command '" + name + "'");
}

void run_command(const std::string& name, const std::string& config_path, const std::map<std::string, std::string>& flags,
                 std::ostream& log) {
  const CommandInfo& cmd = find_command(name);
  const auto file = config_path.empty() ? std::map<std::string, std::string>{} : parse_config_text(read_text_file(config_path));
  cmd.run(RunConfig::resolve(cmd.params, file, flags), log);
}

}  // namespace pmtnet
