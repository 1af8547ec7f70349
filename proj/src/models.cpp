#include "pmtnet/models.hpp"

#include <algorithm>

#include "pmtnet/binary_io.hpp"
#include "pmtnet/errors.hpp"

namespace pmtnet {

namespace {

constexpr std::string_view kModelMagic = "NLNS";

void require_kind(const Model& model, ModelKind kind, const char* op) {
  if (model.kind != kind)
    throw KindError(std::string(op) + " requires a " + to_string(kind) + " model, got " + to_string(model.kind));
}

void audit_chain(const Model& model, const std::vector<Shape4>& expected) {
  const auto got = activation_shapes(model);
  if (got != expected) throw BuildError("activation shape chain differs from the architecture table");
}

std::vector<std::vector<double>> rows_of(const Tensor4& t) {
  const std::size_t per = t.shape().per_item();
  std::vector<std::vector<double>> out(t.shape().n);
  for (std::size_t n = 0; n < out.size(); ++n)
    out[n].assign(t.values().begin() + static_cast<std::ptrdiff_t>(n * per),
                  t.values().begin() + static_cast<std::ptrdiff_t>((n + 1) * per));
  return out;
}

bool is_neural(ModelKind kind) { return kind == ModelKind::SupervisedCnn || kind == ModelKind::ConvAutoencoder; }

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::SupervisedCnn: return "cnn";
    case ModelKind::ConvAutoencoder: return "cae";
    case ModelKind::Knn: return "knn";
    case ModelKind::Svm: return "svm";
  }
  return "?";
}

std::size_t Model::param_count() const noexcept {
  std::size_t total = 0;
  for (const auto& l : layers) total += l.state.param_count();
  return total;
}

Model make_model(ModelKind kind, Shape4 input_shape, const std::vector<LayerSpec>& specs, std::size_t feature_layer,
                 const InitConfig& init) {
  if (specs.empty()) throw BuildError("a model needs at least one layer");
  if (feature_layer >= specs.size()) throw BuildError("feature layer index out of range");
  Model model;
  model.kind = kind;
  model.input_shape = {1, input_shape.c, input_shape.h, input_shape.w};
  model.feature_layer = feature_layer;
  Prng prng(init.seed);
  Shape4 shape = model.input_shape;
  for (const auto& spec : specs) {
    try {
      shape = spec.output_shape(shape);
    } catch (const ShapeError& e) {
      throw BuildError(std::string("layer ") + std::to_string(model.layers.size() + 1) + ": " + e.what());
    }
    model.layers.push_back({spec, glorot_layer_state(spec, prng)});
  }
  return model;
}

Model build_supervised_cnn(const InitConfig& init) {
  const std::vector<LayerSpec> specs{
      LayerSpec::conv(1, 71, {3, 3}, {0, 0}, Activation::Tanh),
      LayerSpec::max_pool(),
      LayerSpec::conv(71, 88, {2, 2}, {0, 0}, Activation::Tanh),
      LayerSpec::max_pool(),
      LayerSpec::dense(88 * 1 * 5, 26, Activation::Tanh),
      LayerSpec::dense(26, 5, Activation::Softmax),
  };
  Model m = make_model(ModelKind::SupervisedCnn, {1, 1, kRings, kColumns}, specs, 4, init);
  audit_chain(m, {{1, 71, 6, 22}, {1, 71, 3, 11}, {1, 88, 2, 10}, {1, 88, 1, 5}, {1, 26, 1, 1}, {1, 5, 1, 1}});
  return m;
}

Model build_conv_autoencoder(const InitConfig& init) {
  const std::vector<LayerSpec> specs{
      LayerSpec::conv(1, 16, {5, 5}, {2, 2}, Activation::Relu),
      LayerSpec::max_pool(),
      LayerSpec::conv(16, 16, {3, 3}, {1, 0}, Activation::Relu),
      LayerSpec::max_pool(),
      LayerSpec::dense(16 * 2 * 5, 10, Activation::Relu),
      LayerSpec::transposed_conv(10, 16, {2, 4}, {2, 2}),
      LayerSpec::transposed_conv(16, 16, {2, 5}, {2, 2}),
      LayerSpec::transposed_conv(16, 1, {2, 4}, {2, 2}),
  };
  Model m = make_model(ModelKind::ConvAutoencoder, {1, 1, kRings, kColumns}, specs, 4, init);
  audit_chain(m, {{1, 16, 8, 24},
                  {1, 16, 4, 12},
                  {1, 16, 4, 10},
                  {1, 16, 2, 5},
                  {1, 10, 1, 1},
                  {1, 16, 2, 4},
                  {1, 16, 4, 11},
                  {1, 1, 8, 24}});
  return m;
}

std::vector<Shape4> activation_shapes(const Model& model) {
  std::vector<Shape4> shapes;
  Tensor4 x(model.input_shape);
  for (const auto& l : model.layers) {
    x = layer_apply(x, l.state, l.spec);
    shapes.push_back(x.shape());
  }
  return shapes;
}

Tensor4 forward(const Model& model, const Tensor4& x, std::size_t upto) {
  if (upto >= model.layers.size()) throw ShapeError("layer index out of range");
  Tensor4 y = layer_apply(x, model.layers[0].state, model.layers[0].spec);
  for (std::size_t i = 1; i <= upto; ++i) y = layer_apply(y, model.layers[i].state, model.layers[i].spec);
  return y;
}

Tensor4 forward(const Model& model, const Tensor4& x) { return forward(model, x, model.layers.size() - 1); }

Tensor4 forward_train(Model& model, const Tensor4& x) {
  Tensor4 y = x;
  for (auto& l : model.layers) y = layer_forward(y, l.state, l.spec);
  return y;
}

std::vector<LayerGrads> backward(Model& model, const Tensor4& grad_out, GradWrt wrt) {
  std::vector<LayerGrads> grads(model.layers.size());
  Tensor4 g = grad_out;
  for (std::size_t i = model.layers.size(); i-- > 0;) {
    auto& l = model.layers[i];
    grads[i] = layer_backward(g, l.state, l.spec, i + 1 == model.layers.size() ? wrt : GradWrt::Output);
    g = std::move(grads[i].input);
  }
  return grads;
}

Tensor4 to_tensor(std::span<const PreprocessedGrid> grids) {
  if (grids.empty()) throw ShapeError("no grids to pack");
  Tensor4 t({grids.size(), 1, kRings, kColumns});
  for (std::size_t n = 0; n < grids.size(); ++n)
    std::copy(grids[n].values.begin(), grids[n].values.end(), t.values().begin() + static_cast<std::ptrdiff_t>(n * kPmts));
  return t;
}

Tensor4 to_tensor(const PreprocessedGrid& grid) { return to_tensor(std::span(&grid, 1)); }

std::vector<Prediction> predict_batch(const Model& model, std::span<const PreprocessedGrid> grids) {
  require_kind(model, ModelKind::SupervisedCnn, "predict");
  std::vector<Prediction> out;
  if (grids.empty()) return out;
  const Tensor4 probs = forward(model, to_tensor(grids));
  const std::size_t classes = probs.shape().per_item();
  if (classes != kNumClasses) throw ShapeError("classifier head must have 5 outputs");
  out.resize(grids.size());
  for (std::size_t n = 0; n < grids.size(); ++n) {
    std::size_t best = 0;
    for (std::size_t k = 0; k < classes; ++k) {
      out[n].probs[k] = probs.values()[n * classes + k];
      if (out[n].probs[k] > out[n].probs[best]) best = k;
    }
    out[n].label = label_from_index(best);
  }
  return out;
}

Prediction predict(const Model& model, const PreprocessedGrid& grid) { return predict_batch(model, std::span(&grid, 1))[0]; }

std::vector<std::vector<double>> extract_features_batch(const Model& model, std::span<const PreprocessedGrid> grids) {
  require_kind(model, ModelKind::SupervisedCnn, "extract_features");
  if (grids.empty()) return {};
  return rows_of(forward(model, to_tensor(grids), model.feature_layer));
}

std::vector<double> extract_features(const Model& model, const PreprocessedGrid& grid) {
  return extract_features_batch(model, std::span(&grid, 1))[0];
}

std::vector<std::vector<double>> encode_batch(const Model& model, std::span<const PreprocessedGrid> grids) {
  require_kind(model, ModelKind::ConvAutoencoder, "encode");
  if (grids.empty()) return {};
  return rows_of(forward(model, to_tensor(grids), model.feature_layer));
}

std::vector<double> encode(const Model& model, const PreprocessedGrid& grid) {
  return encode_batch(model, std::span(&grid, 1))[0];
}

std::vector<PreprocessedGrid> reconstruct_batch(const Model& model, std::span<const PreprocessedGrid> grids) {
  require_kind(model, ModelKind::ConvAutoencoder, "reconstruct");
  std::vector<PreprocessedGrid> out;
  if (grids.empty()) return out;
  const Tensor4 y = forward(model, to_tensor(grids));
  if (y.shape().per_item() != kPmts) throw ShapeError("decoder output is not 8x24");
  out.resize(grids.size());
  for (std::size_t n = 0; n < grids.size(); ++n)
    std::copy_n(y.values().begin() + static_cast<std::ptrdiff_t>(n * kPmts), kPmts, out[n].values.begin());
  return out;
}

PreprocessedGrid reconstruct(const Model& model, const PreprocessedGrid& grid) {
  return reconstruct_batch(model, std::span(&grid, 1))[0];
}

// Layout (little-endian):
//   "NLNS" u16 version u8 kind u32 c u32 h u32 w u32 feature_layer u32 layer_count
//   per layer: u8 kind u8 activation u32 kh u32 kw u32 in_channels u32 filters
//              u32 stride_h u32 stride_w u32 pad_h u32 pad_w
//              u64 weight_count f64[weight_count] u64 bias_count f64[bias_count]
std::vector<std::uint8_t> serialize_model(const Model& model) {
  if (!is_neural(model.kind)) throw KindError("serialize_model handles cnn/cae models only");
  ByteWriter w;
  w.tag(kModelMagic);
  w.u16(kModelFormatVersion);
  w.u8(static_cast<std::uint8_t>(model.kind));
  w.u32(static_cast<std::uint32_t>(model.input_shape.c));
  w.u32(static_cast<std::uint32_t>(model.input_shape.h));
  w.u32(static_cast<std::uint32_t>(model.input_shape.w));
  w.u32(static_cast<std::uint32_t>(model.feature_layer));
  w.u32(static_cast<std::uint32_t>(model.layers.size()));
  for (const auto& l : model.layers) {
    const LayerSpec& s = l.spec;
    w.u8(static_cast<std::uint8_t>(s.kind));
    w.u8(static_cast<std::uint8_t>(s.activation));
    for (std::size_t v : {s.filter.h, s.filter.w, s.in_channels, s.filters, s.stride.h, s.stride.w, s.pad.h, s.pad.w})
      w.u32(static_cast<std::uint32_t>(v));
    w.u64(l.state.weights.size());
    w.f64s(l.state.weights.values());
    w.u64(l.state.bias.size());
    w.f64s(l.state.bias);
  }
  return w.take();
}

Model deserialize_model(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_tag(kModelMagic);
  const auto version = r.u16();
  if (version != kModelFormatVersion) throw FormatError("unsupported model format version " + std::to_string(version));
  const auto kind = static_cast<ModelKind>(r.u8());
  if (!is_neural(kind)) {
    if (kind == ModelKind::Knn || kind == ModelKind::Svm)
      throw KindError("container holds a " + to_string(kind) + " baseline, not a neural model");
    throw FormatError("unknown model kind tag");
  }
  Model model;
  model.kind = kind;
  model.input_shape.c = r.u32();
  model.input_shape.h = r.u32();
  model.input_shape.w = r.u32();
  model.feature_layer = r.u32();
  const std::uint32_t count = r.u32();
  if (count == 0 || count > 1024) throw FormatError("implausible layer count");
  for (std::uint32_t i = 0; i < count; ++i) {
    Layer l;
    const std::uint8_t kind_tag = r.u8();
    const std::uint8_t act_tag = r.u8();
    if (kind_tag > static_cast<std::uint8_t>(LayerKind::Activation)) throw FormatError("unknown layer kind tag");
    if (act_tag > static_cast<std::uint8_t>(Activation::Softmax)) throw FormatError("unknown activation tag");
    l.spec.kind = static_cast<LayerKind>(kind_tag);
    l.spec.activation = static_cast<Activation>(act_tag);
    l.spec.filter.h = r.u32();
    l.spec.filter.w = r.u32();
    l.spec.in_channels = r.u32();
    l.spec.filters = r.u32();
    l.spec.stride.h = r.u32();
    l.spec.stride.w = r.u32();
    l.spec.pad.h = r.u32();
    l.spec.pad.w = r.u32();
    const std::uint64_t nw = r.u64();
    std::vector<double> weights = r.f64s(nw);
    const std::uint64_t nb = r.u64();
    l.state.bias = r.f64s(nb);
    try {
      if (l.spec.has_params()) {
        l.state.weights = Tensor4(l.spec.weight_shape(), std::move(weights));
        if (l.state.bias.size() != l.spec.filters) throw FormatError("bias length mismatch");
      } else if (nw != 0 || nb != 0) {
        throw FormatError("parameter-free layer carries parameters");
      }
    } catch (const ShapeError& e) {
      throw FormatError(std::string("layer parameters inconsistent with spec: ") + e.what());
    }
    model.layers.push_back(std::move(l));
  }
  r.expect_end();
  if (model.feature_layer >= model.layers.size()) throw FormatError("feature layer index out of range");
  try {
    (void)activation_shapes(model);
  } catch (const ShapeError& e) {
    throw FormatError(std::string("layer chain inconsistent: ") + e.what());
  }
  return model;
}

void save_model(const Model& model, const std::filesystem::path& path) { write_file_bytes(path, serialize_model(model)); }

Model load_model(const std::filesystem::path& path) { return deserialize_model(read_file_bytes(path)); }

}  // namespace pmtnet
