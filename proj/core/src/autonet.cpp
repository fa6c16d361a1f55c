#include "tsc/autonet.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "tsc/error.hpp"
#include "tsc/rng.hpp"
#include "tsc/text.hpp"

namespace tsc {

namespace {

double activate(Activation a, double z) noexcept {
  switch (a) {
    case Activation::Relu: return z > 0.0 ? z : 0.0;
    case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
    case Activation::Linear: return z;
  }
  return z;
}

// Derivative expressed through the cached pre-/post-activation values.
double activation_slope(Activation a, double z, double out) noexcept {
  switch (a) {
    case Activation::Relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::Sigmoid: return out * (1.0 - out);
    case Activation::Linear: return 1.0;
  }
  return 1.0;
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::ShapeMismatch,
                std::string(what) + ": " + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                    std::to_string(b.cols()));
  }
}

}  // namespace

std::string_view to_string(Activation a) noexcept {
  switch (a) {
    case Activation::Relu: return "relu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Linear: return "linear";
  }
  return "linear";
}

Activation parse_activation(std::string_view tag) {
  if (tag == "relu") return Activation::Relu;
  if (tag == "sigmoid") return Activation::Sigmoid;
  if (tag == "linear") return Activation::Linear;
  throw Error(ErrorKind::FormatError, "unknown activation '" + std::string(tag) + "'");
}

std::size_t DenseNetwork::input_width() const {
  if (layers.empty()) throw Error(ErrorKind::BadWidth, "network has no layers");
  return layers.front().spec.input_width;
}

std::size_t DenseNetwork::output_width() const {
  if (layers.empty()) throw Error(ErrorKind::BadWidth, "network has no layers");
  return layers.back().spec.output_width;
}

DenseNetwork make_network(std::span<const LayerSpec> specs, std::uint64_t seed) {
  if (specs.empty()) throw Error(ErrorKind::BadWidth, "network needs at least one layer");
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].input_width == 0 || specs[i].output_width == 0) {
      throw Error(ErrorKind::BadWidth, "layer " + std::to_string(i) + " has zero width");
    }
    if (i > 0 && specs[i - 1].output_width != specs[i].input_width) {
      throw Error(ErrorKind::BadWidth, "layer " + std::to_string(i) + " does not chain");
    }
  }
  DenseNetwork net;
  net.seed = seed;
  Rng rng(seed);
  for (const auto& spec : specs) {
    DenseLayer layer{spec, Matrix(spec.output_width, spec.input_width),
                     std::vector<double>(spec.output_width, 0.0)};
    const double limit =
        std::sqrt(6.0 / static_cast<double>(spec.input_width + spec.output_width));
    for (auto& w : layer.weights.data()) w = rng.uniform(-limit, limit);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

std::vector<LayerSpec> autoencoder_layers(const AutoencoderShape& shape) {
  const auto bad = [](std::size_t w) { return w == 0; };
  if (bad(shape.input_width) || bad(shape.latent_width) || bad(shape.output_width) ||
      shape.encoder_widths.empty() ||
      std::any_of(shape.encoder_widths.begin(), shape.encoder_widths.end(), bad)) {
    throw Error(ErrorKind::BadWidth, "autoencoder widths must all be >= 1");
  }
  std::vector<LayerSpec> specs;
  std::size_t width = shape.input_width;
  auto push = [&](std::size_t out, Activation a) {
    specs.push_back({width, out, a});
    width = out;
  };
  for (auto w : shape.encoder_widths) push(w, Activation::Relu);
  push(shape.latent_width, Activation::Sigmoid);
  for (auto it = shape.encoder_widths.rbegin(); it != shape.encoder_widths.rend(); ++it) {
    push(*it, Activation::Relu);
  }
  push(shape.output_width, Activation::Linear);
  return specs;
}

DenseNetwork build_autoencoder(const AutoencoderShape& shape, std::uint64_t seed) {
  return make_network(autoencoder_layers(shape), seed);
}

std::size_t count_parameters(const DenseNetwork& net) noexcept {
  std::size_t total = 0;
  for (const auto& layer : net.layers) total += layer.parameter_count();
  return total;
}

ForwardCache forward(const DenseNetwork& net, const Matrix& batch) {
  if (batch.cols() != net.input_width()) {
    throw Error(ErrorKind::ShapeMismatch, "batch has " + std::to_string(batch.cols()) +
                                              " columns, network expects " +
                                              std::to_string(net.input_width()));
  }
  for (double v : batch.data()) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteInput, "non-finite network input");
  }
  ForwardCache cache;
  cache.input = batch;
  cache.pre.reserve(net.layers.size());
  cache.post.reserve(net.layers.size());
  const Matrix* prev = &cache.input;
  for (const auto& layer : net.layers) {
    const std::size_t n = prev->rows(), in = layer.spec.input_width, out = layer.spec.output_width;
    Matrix z(n, out), a(n, out);
    for (std::size_t s = 0; s < n; ++s) {
      const auto x = prev->row(s);
      for (std::size_t o = 0; o < out; ++o) {
        const auto w = layer.weights.row(o);
        double acc = layer.biases[o];
        for (std::size_t i = 0; i < in; ++i) acc += w[i] * x[i];
        z(s, o) = acc;
        a(s, o) = activate(layer.spec.activation, acc);
      }
    }
    cache.pre.push_back(std::move(z));
    cache.post.push_back(std::move(a));
    prev = &cache.post.back();
  }
  return cache;
}

Matrix predict(const DenseNetwork& net, const Matrix& batch) {
  return std::move(forward(net, batch).post.back());
}

double mse_loss(const Matrix& pred, const Matrix& target) {
  require_same_shape(pred, target, "mse_loss");
  if (pred.empty()) throw Error(ErrorKind::EmptyDataset, "mse of an empty matrix");
  double sum = 0.0;
  const auto p = pred.data(), t = target.data();
  for (std::size_t i = 0; i < p.size(); ++i) sum += (p[i] - t[i]) * (p[i] - t[i]);
  return sum / static_cast<double>(p.size());
}

Gradients backward(const DenseNetwork& net, const ForwardCache& cache, const Matrix& target) {
  if (cache.post.size() != net.layers.size()) {
    throw Error(ErrorKind::ShapeMismatch, "cache does not match network depth");
  }
  const Matrix& output = cache.output();
  require_same_shape(output, target, "backward target");

  const std::size_t L = net.layers.size();
  Gradients g;
  g.weights.resize(L);
  g.biases.resize(L);

  // dLoss/dOutput for the mean over every entry.
  Matrix upstream(output.rows(), output.cols());
  const double scale = 2.0 / static_cast<double>(output.size());
  for (std::size_t i = 0; i < output.size(); ++i) {
    upstream.data()[i] = scale * (output.data()[i] - target.data()[i]);
  }

  for (std::size_t l = L; l-- > 0;) {
    const auto& layer = net.layers[l];
    const Matrix& z = cache.pre[l];
    const Matrix& a = cache.post[l];
    const Matrix& prev = l == 0 ? cache.input : cache.post[l - 1];
    const std::size_t n = z.rows(), in = layer.spec.input_width, out = layer.spec.output_width;

    Matrix dz(n, out);
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t o = 0; o < out; ++o) {
        dz(s, o) = upstream(s, o) * activation_slope(layer.spec.activation, z(s, o), a(s, o));
      }
    }

    Matrix dw(out, in);
    std::vector<double> db(out, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      const auto x = prev.row(s);
      for (std::size_t o = 0; o < out; ++o) {
        const double d = dz(s, o);
        db[o] += d;
        auto row = dw.row(o);
        for (std::size_t i = 0; i < in; ++i) row[i] += d * x[i];
      }
    }

    if (l > 0) {
      Matrix down(n, in);
      for (std::size_t s = 0; s < n; ++s) {
        auto drow = down.row(s);
        for (std::size_t o = 0; o < out; ++o) {
          const double d = dz(s, o);
          const auto w = layer.weights.row(o);
          for (std::size_t i = 0; i < in; ++i) drow[i] += d * w[i];
        }
      }
      upstream = std::move(down);
    }
    g.weights[l] = std::move(dw);
    g.biases[l] = std::move(db);
  }
  return g;
}

void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                 std::span<double> v, std::uint64_t step, const AdamConfig& config) {
  if (grads.size() != params.size() || m.size() != params.size() || v.size() != params.size()) {
    throw Error(ErrorKind::ShapeMismatch, "adam buffers differ in size from parameters");
  }
  if (step == 0) throw Error(ErrorKind::Precondition, "adam step count starts at 1");
  const double t = static_cast<double>(step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
    v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    params[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

AdamState AdamState::for_network(const DenseNetwork& net, AdamConfig config) {
  AdamState state;
  state.config = config;
  for (const auto& layer : net.layers) {
    state.m_weights.emplace_back(layer.weights.rows(), layer.weights.cols());
    state.v_weights.emplace_back(layer.weights.rows(), layer.weights.cols());
    state.m_biases.emplace_back(layer.biases.size(), 0.0);
    state.v_biases.emplace_back(layer.biases.size(), 0.0);
  }
  return state;
}

void adam_step(DenseNetwork& net, const Gradients& grads, AdamState& state) {
  const std::size_t L = net.layers.size();
  if (grads.weights.size() != L || grads.biases.size() != L || state.m_weights.size() != L ||
      state.v_weights.size() != L || state.m_biases.size() != L || state.v_biases.size() != L) {
    throw Error(ErrorKind::ShapeMismatch, "gradient/optimizer state depth mismatch");
  }
  ++state.t;
  for (std::size_t l = 0; l < L; ++l) {
    auto& layer = net.layers[l];
    adam_update(layer.weights.data(), grads.weights[l].data(), state.m_weights[l].data(),
                state.v_weights[l].data(), state.t, state.config);
    adam_update(layer.biases, grads.biases[l], state.m_biases[l], state.v_biases[l], state.t,
                state.config);
  }
}

TrainHistory train(DenseNetwork& net, const Matrix& inputs, const Matrix& targets,
                   const TrainOptions& options) {
  if (inputs.rows() == 0) throw Error(ErrorKind::EmptyDataset, "no training samples");
  if (inputs.rows() != targets.rows()) {
    throw Error(ErrorKind::ShapeMismatch, "inputs and targets differ in row count");
  }
  if (targets.cols() != net.output_width()) {
    throw Error(ErrorKind::ShapeMismatch, "target width differs from network output width");
  }
  if (options.epochs < 1 || options.batch_size < 1) {
    throw Error(ErrorKind::Precondition, "epochs and batch_size must be >= 1");
  }

  const std::size_t n = inputs.rows();
  AdamState state = AdamState::for_network(net, options.adam);
  TrainHistory history;
  history.loss.reserve(static_cast<std::size_t>(options.epochs));

  if (options.batch_size >= n) {
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
      const auto cache = forward(net, inputs);
      adam_step(net, backward(net, cache, targets), state);
      history.loss.push_back(mse_loss(predict(net, inputs), targets));
    }
    return history;
  }

  Rng rng = Rng::derive(options.seed, 0x5348554646ULL);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(std::span(order));
    for (std::size_t start = 0; start < n; start += options.batch_size) {
      const std::size_t len = std::min(options.batch_size, n - start);
      Matrix xb(len, inputs.cols()), yb(len, targets.cols());
      for (std::size_t r = 0; r < len; ++r) {
        std::ranges::copy(inputs.row(order[start + r]), xb.row(r).begin());
        std::ranges::copy(targets.row(order[start + r]), yb.row(r).begin());
      }
      const auto cache = forward(net, xb);
      adam_step(net, backward(net, cache, yb), state);
    }
    history.loss.push_back(mse_loss(predict(net, inputs), targets));
  }
  return history;
}

double round_half_even(double x) noexcept {
  const double r = std::round(x);
  if (std::abs(x - std::trunc(x)) == 0.5) return 2.0 * std::round(x / 2.0);
  return r;
}

int label_from_output(double output, int num_clusters) {
  if (num_clusters < 2) throw Error(ErrorKind::Precondition, "need at least 2 clusters");
  if (std::isnan(output)) throw Error(ErrorKind::NonFiniteInput, "network output is NaN");
  const double magnitude = std::abs(round_half_even(output));
  const double top = static_cast<double>(num_clusters - 1);
  return static_cast<int>(std::min(magnitude, top));
}

std::vector<int> labels_from_outputs(const Matrix& outputs, int num_clusters) {
  if (outputs.cols() != 1) {
    throw Error(ErrorKind::ShapeMismatch, "label prediction expects a single output column");
  }
  std::vector<int> labels(outputs.rows());
  for (std::size_t r = 0; r < outputs.rows(); ++r) {
    labels[r] = label_from_output(outputs(r, 0), num_clusters);
  }
  return labels;
}

std::vector<int> predict_labels(const DenseNetwork& net, const Matrix& inputs, int num_clusters) {
  return labels_from_outputs(predict(net, inputs), num_clusters);
}

// ---- model file ------------------------------------------------------------

namespace {

constexpr std::string_view kModelHeader = "tscnet v1";

void append_values(std::string& out, std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ' ';
    out += text::general(values[i], 17);
  }
  out += '\n';
}

std::vector<double> parse_values(std::string_view line, std::size_t expected, std::size_t lineno) {
  std::vector<double> values;
  values.reserve(expected);
  for (auto field : text::split(text::trim(line), ' ')) {
    if (field.empty()) continue;
    const auto v = text::parse_double(field);
    if (!v) throw Error(ErrorKind::FormatError, "model line " + std::to_string(lineno) + ": bad number");
    values.push_back(*v);
  }
  if (values.size() != expected) {
    throw Error(ErrorKind::FormatError, "model line " + std::to_string(lineno) + ": expected " +
                                            std::to_string(expected) + " values");
  }
  return values;
}

}  // namespace

std::string format_model(const DenseNetwork& net) {
  std::string out(kModelHeader);
  out += "\nseed " + std::to_string(net.seed) + "\n";
  out += "layers " + std::to_string(net.layers.size()) + "\n";
  for (const auto& layer : net.layers) {
    out += "dense " + std::to_string(layer.spec.input_width) + " " +
           std::to_string(layer.spec.output_width) + " " +
           std::string(to_string(layer.spec.activation)) + "\n";
    for (std::size_t o = 0; o < layer.weights.rows(); ++o) append_values(out, layer.weights.row(o));
    append_values(out, layer.biases);
  }
  return out;
}

DenseNetwork parse_model(std::string_view model_text) {
  const auto rows = text::lines(model_text);
  std::size_t at = 0;
  auto next = [&]() -> std::string_view {
    if (at >= rows.size()) throw Error(ErrorKind::FormatError, "model file truncated");
    return rows[at++];
  };
  if (text::trim(next()) != kModelHeader) {
    throw Error(ErrorKind::FormatError, "missing 'tscnet v1' header");
  }
  auto keyed = [&](std::string_view key) -> unsigned long long {
    const auto line = text::trim(next());
    const auto parts = text::split(line, ' ');
    if (parts.size() != 2 || parts[0] != key) {
      throw Error(ErrorKind::FormatError, "expected '" + std::string(key) + " <n>'");
    }
    const auto v = text::parse_int(parts[1]);
    if (!v || *v < 0) throw Error(ErrorKind::FormatError, "bad value for " + std::string(key));
    return static_cast<unsigned long long>(*v);
  };

  const auto seed_line = text::split(text::trim(next()), ' ');
  if (seed_line.size() != 2 || seed_line[0] != "seed") {
    throw Error(ErrorKind::FormatError, "expected 'seed <n>'");
  }
  std::uint64_t seed = 0;
  {
    const auto s = seed_line[1];
    const auto res = std::from_chars(s.data(), s.data() + s.size(), seed);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
      throw Error(ErrorKind::FormatError, "bad seed");
    }
  }
  const auto count = keyed("layers");

  std::vector<LayerSpec> specs;
  std::vector<DenseLayer> layers;
  for (unsigned long long l = 0; l < count; ++l) {
    const auto head = text::split(text::trim(next()), ' ');
    if (head.size() != 4 || head[0] != "dense") {
      throw Error(ErrorKind::FormatError, "expected 'dense <in> <out> <activation>'");
    }
    const auto in = text::parse_int(head[1]), out = text::parse_int(head[2]);
    if (!in || !out || *in < 1 || *out < 1) throw Error(ErrorKind::FormatError, "bad layer widths");
    LayerSpec spec{static_cast<std::size_t>(*in), static_cast<std::size_t>(*out),
                   parse_activation(head[3])};
    DenseLayer layer{spec, Matrix(spec.output_width, spec.input_width), {}};
    for (std::size_t o = 0; o < spec.output_width; ++o) {
      const auto row = parse_values(next(), spec.input_width, at);
      std::ranges::copy(row, layer.weights.row(o).begin());
    }
    layer.biases = parse_values(next(), spec.output_width, at);
    specs.push_back(spec);
    layers.push_back(std::move(layer));
  }
  for (; at < rows.size(); ++at) {
    if (!text::trim(rows[at]).empty()) throw Error(ErrorKind::FormatError, "trailing model data");
  }

  // Validates the chain without keeping the re-initialised weights.
  DenseNetwork net = make_network(specs, seed);
  net.layers = std::move(layers);
  return net;
}

void save_model(const DenseNetwork& net, const std::string& path) {
  text::write_file_atomic(path, format_model(net));
}

DenseNetwork load_model(const std::string& path) { return parse_model(text::read_file(path)); }

}  // namespace tsc
