#include <cmath>
#include <fstream>

#include "doctest.h"
#include "oracles.hpp"
#include "tsc/autonet.hpp"
#include "tsc/error.hpp"
#include "tsc/rng.hpp"

using namespace tsc;
using doctest::Approx;

namespace {

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c, double lo = -1, double hi = 1) {
  Matrix m(r, c);
  for (auto& v : m.data()) v = rng.uniform(lo, hi);
  return m;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected tsc::Error");
  return ErrorKind::Io;
}

// Sum over layers of in*out + out, computed from the widths alone.
std::size_t formula_count(const std::vector<std::size_t>& widths) {
  std::size_t total = 0;
  for (std::size_t i = 1; i < widths.size(); ++i) total += widths[i - 1] * widths[i] + widths[i];
  return total;
}

}  // namespace

TEST_CASE("canonical autoencoder layout") {
  const auto net = build_autoencoder({}, 7);
  REQUIRE(net.layers.size() == 8);
  const std::vector<std::size_t> widths{2, 100, 50, 20, 4, 20, 50, 100, 1};
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(net.layers[i].spec.input_width == widths[i]);
    CHECK(net.layers[i].spec.output_width == widths[i + 1]);
  }
  CHECK(net.layers[3].spec.activation == Activation::Sigmoid);
  CHECK(net.layers[7].spec.activation == Activation::Linear);
  for (std::size_t i : {0, 1, 2, 4, 5, 6}) CHECK(net.layers[i].spec.activation == Activation::Relu);
  CHECK(count_parameters(net) == 12805);
}

TEST_CASE("parameter count follows the width formula") {
  Rng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    AutoencoderShape shape;
    shape.input_width = 1 + rng.below(5);
    shape.encoder_widths.clear();
    for (std::uint64_t i = 0, n = 1 + rng.below(3); i < n; ++i) shape.encoder_widths.push_back(1 + rng.below(30));
    shape.latent_width = 1 + rng.below(8);
    shape.output_width = 1 + rng.below(3);
    std::vector<std::size_t> widths{shape.input_width};
    widths.insert(widths.end(), shape.encoder_widths.begin(), shape.encoder_widths.end());
    widths.push_back(shape.latent_width);
    widths.insert(widths.end(), shape.encoder_widths.rbegin(), shape.encoder_widths.rend());
    widths.push_back(shape.output_width);
    CHECK(count_parameters(build_autoencoder(shape, 1)) == formula_count(widths));
  }
}

TEST_CASE("Glorot init bounds and zero biases") {
  const auto net = build_autoencoder({}, 11);
  for (const auto& layer : net.layers) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.spec.input_width + layer.spec.output_width));
    for (double w : layer.weights.data()) CHECK(std::abs(w) <= limit);
    for (double b : layer.biases) CHECK(b == 0.0);
  }
  CHECK(build_autoencoder({}, 11) == net);
  CHECK_FALSE(build_autoencoder({}, 12) == net);
}

TEST_CASE("make_network rejects bad widths") {
  const std::vector<LayerSpec> zero{{2, 0, Activation::Relu}};
  CHECK(kind_of([&] { (void)make_network(zero, 1); }) == ErrorKind::BadWidth);
  const std::vector<LayerSpec> broken{{2, 3, Activation::Relu}, {4, 1, Activation::Linear}};
  CHECK(kind_of([&] { (void)make_network(broken, 1); }) == ErrorKind::BadWidth);
  CHECK(kind_of([&] { (void)make_network(std::vector<LayerSpec>{}, 1); }) == ErrorKind::BadWidth);
}

TEST_CASE("forward matches the nested-vector oracle") {
  Rng rng(5);
  const auto net = build_autoencoder({}, 3);
  const auto x = random_matrix(rng, 9, 2);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < x.rows(); ++i) rows.emplace_back(x.row(i).begin(), x.row(i).end());
  const auto expected = testing::naive_forward(net, rows);
  const auto got = predict(net, x);
  REQUIRE(got.rows() == 9);
  REQUIRE(got.cols() == 1);
  for (std::size_t i = 0; i < 9; ++i) CHECK(got(i, 0) == Approx(expected[i][0]).epsilon(1e-12));
}

TEST_CASE("latent activations lie in (0, 1)") {
  Rng rng(6);
  const auto net = build_autoencoder({}, 4);
  const auto cache = forward(net, random_matrix(rng, 50, 2, -5, 5));
  for (double v : cache.post[3].data()) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("forward validates input") {
  const auto net = build_autoencoder({}, 4);
  CHECK(kind_of([&] { (void)forward(net, Matrix(3, 3)); }) == ErrorKind::ShapeMismatch);
  Matrix nan(1, 2);
  nan(0, 1) = NAN;
  CHECK(kind_of([&] { (void)forward(net, nan); }) == ErrorKind::NonFiniteInput);
}

TEST_CASE("mse_loss") {
  const auto a = Matrix::from_rows({{1}, {2}, {3}});
  const auto b = Matrix::from_rows({{1}, {4}, {0}});
  CHECK(mse_loss(a, b) == Approx(13.0 / 3.0));
  CHECK(mse_loss(a, a) == 0.0);
}

TEST_CASE("backward agrees with central differences") {
  Rng rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    const std::vector<LayerSpec> specs{{2, 6, Activation::Relu}, {6, 3, Activation::Sigmoid},
                                       {3, 5, Activation::Relu}, {5, 1, Activation::Linear}};
    auto net = make_network(specs, rng.next_u64());
    for (auto& layer : net.layers)
      for (auto& b : layer.biases) b = rng.uniform(-0.5, 0.5);
    const auto x = random_matrix(rng, 7, 2);
    const auto y = random_matrix(rng, 7, 1);
    const auto grads = backward(net, forward(net, x), y);
    const auto fd = testing::check_gradients(net, x, y, grads, 1e-5, 1e-4, 1e-7);
    CHECK(fd.checked == 12 + 6 + 18 + 3 + 15 + 5 + 5 + 1);
    CHECK(fd.failed == 0);
  }
}

TEST_CASE("Adam single step against hand computation") {
  // g = 0.5, t = 1: m_hat = g, v_hat = g^2, step = lr * g / (|g| + eps).
  std::vector<double> p{1.0}, g{0.5}, m{0.0}, v{0.0};
  adam_update(p, g, m, v, 1, {});
  CHECK(m[0] == Approx(0.05));
  CHECK(v[0] == Approx(0.00025));
  CHECK(p[0] == Approx(1.0 - 0.001 * 0.5 / (0.5 + 1e-8)).epsilon(1e-15));

  // Second step, g = -0.25.
  g[0] = -0.25;
  adam_update(p, g, m, v, 2, {});
  const double m2 = 0.9 * 0.05 + 0.1 * -0.25;
  const double v2 = 0.999 * 0.00025 + 0.001 * 0.0625;
  const double mh = m2 / (1 - 0.81), vh = v2 / (1 - 0.999 * 0.999);
  CHECK(p[0] == Approx(1.0 - 0.001 * 0.5 / (0.5 + 1e-8) - 0.001 * mh / (std::sqrt(vh) + 1e-8)).epsilon(1e-14));
}

TEST_CASE("training reduces loss and is reproducible") {
  Rng rng(10);
  const auto x = random_matrix(rng, 40, 2, 0, 1);
  Matrix y(40, 1);
  for (std::size_t i = 0; i < 40; ++i) y(i, 0) = x(i, 0) > 0.5 ? 1.0 : 0.0;
  auto net = build_autoencoder({}, 1);
  auto net2 = net;
  const auto h = train(net, x, y, {.epochs = 200});
  REQUIRE(h.loss.size() == 200);
  CHECK(h.loss.back() < h.loss.front());
  const auto h2 = train(net2, x, y, {.epochs = 200});
  CHECK(h.loss == h2.loss);
  CHECK(net == net2);
}

TEST_CASE("mini-batch training is reproducible for a seed") {
  Rng rng(12);
  const auto x = random_matrix(rng, 30, 2, 0, 1);
  const auto y = random_matrix(rng, 30, 1, 0, 3);
  auto a = build_autoencoder({}, 2), b = a, c = a;
  const auto ha = train(a, x, y, {.epochs = 20, .batch_size = 8, .seed = 1});
  const auto hb = train(b, x, y, {.epochs = 20, .batch_size = 8, .seed = 1});
  const auto hc = train(c, x, y, {.epochs = 20, .batch_size = 8, .seed = 2});
  CHECK(ha.loss == hb.loss);
  CHECK(ha.loss != hc.loss);
}

TEST_CASE("train validates its inputs") {
  auto net = build_autoencoder({}, 1);
  CHECK(kind_of([&] { (void)train(net, Matrix(0, 2), Matrix(0, 1), {}); }) == ErrorKind::EmptyDataset);
  CHECK(kind_of([&] { (void)train(net, Matrix(3, 2), Matrix(2, 1), {}); }) == ErrorKind::ShapeMismatch);
  CHECK(kind_of([&] { (void)train(net, Matrix(3, 2), Matrix(3, 1), {.batch_size = 0}); }) ==
        ErrorKind::Precondition);
}

TEST_CASE("label_from_output") {
  CHECK(label_from_output(0.4, 4) == 0);
  CHECK(label_from_output(2.5, 4) == 2);
  CHECK(label_from_output(3.5, 4) == 3);
  CHECK(label_from_output(-0.7, 4) == 1);
  CHECK(label_from_output(9.99868220e-01, 4) == 1);
  CHECK(label_from_output(7.2, 4) == 3);
  CHECK(label_from_output(1.5, 4) == 2);
  CHECK(label_from_output(0.5, 4) == 0);
  CHECK(label_from_output(-2.5, 4) == 2);
  CHECK(kind_of([] { (void)label_from_output(NAN, 4); }) == ErrorKind::NonFiniteInput);
  CHECK(kind_of([] { (void)label_from_output(1.0, 1); }) == ErrorKind::Precondition);
  CHECK(round_half_even(-0.5) == 0.0);
  CHECK(round_half_even(4.5) == 4.0);
  CHECK(round_half_even(4.500001) == 5.0);
}

TEST_CASE("property: every output maps into the label range") {
  Rng rng(14);
  for (int i = 0; i < 1000; ++i) {
    const int c = 2 + static_cast<int>(rng.below(9));
    const int label = label_from_output(rng.uniform(-50, 50), c);
    CHECK(label >= 0);
    CHECK(label < c);
  }
}

TEST_CASE("model text round-trips bitwise") {
  Rng rng(15);
  auto net = build_autoencoder({}, 99);
  for (auto& layer : net.layers)
    for (auto& b : layer.biases) b = rng.normal() * 1e-3;
  const auto text = format_model(net);
  CHECK(text.rfind("tscnet v1\n", 0) == 0);
  CHECK(parse_model(text) == net);

  testing::TempDir dir("autonet");
  save_model(net, dir.file("m.tscnet"));
  CHECK(load_model(dir.file("m.tscnet")) == net);
  const auto x = random_matrix(rng, 5, 2);
  CHECK(predict(load_model(dir.file("m.tscnet")), x) == predict(net, x));
}

TEST_CASE("malformed model text is rejected") {
  CHECK(kind_of([] { (void)parse_model("not a model"); }) == ErrorKind::FormatError);
  auto text = format_model(build_autoencoder({}, 1));
  text.resize(text.size() / 2);
  CHECK(kind_of([&] { (void)parse_model(text); }) == ErrorKind::FormatError);
  CHECK(kind_of([] { (void)load_model("/nonexistent/model.tscnet"); }) == ErrorKind::Io);
}
