#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tsc/matrix.hpp"

namespace tsc {

enum class Activation { Relu, Sigmoid, Linear };

[[nodiscard]] std::string_view to_string(Activation a) noexcept;
[[nodiscard]] Activation parse_activation(std::string_view tag);

struct LayerSpec {
  std::size_t input_width = 1;
  std::size_t output_width = 1;
  Activation activation = Activation::Linear;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct DenseLayer {
  LayerSpec spec;
  Matrix weights;              // output_width x input_width
  std::vector<double> biases;  // output_width

  [[nodiscard]] std::size_t parameter_count() const noexcept {
    return spec.input_width * spec.output_width + spec.output_width;
  }

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct DenseNetwork {
  std::vector<DenseLayer> layers;
  std::uint64_t seed = 0;

  [[nodiscard]] std::size_t input_width() const;
  [[nodiscard]] std::size_t output_width() const;

  friend bool operator==(const DenseNetwork&, const DenseNetwork&) = default;
};

/// Builds a network from chained layer specs. Weights are Glorot-uniform on
/// +-sqrt(6 / (fan_in + fan_out)) drawn layer by layer, row-major, from
/// Rng(seed); biases are zero. Throws BadWidth on zero widths or broken chains.
[[nodiscard]] DenseNetwork make_network(std::span<const LayerSpec> specs, std::uint64_t seed);

struct AutoencoderShape {
  std::size_t input_width = 2;
  std::vector<std::size_t> encoder_widths{100, 50, 20};
  std::size_t latent_width = 4;
  std::size_t output_width = 1;
};

/// Encoder (relu per width) -> latent (sigmoid) -> mirrored decoder (relu)
/// -> linear output layer.
[[nodiscard]] std::vector<LayerSpec> autoencoder_layers(const AutoencoderShape& shape);
[[nodiscard]] DenseNetwork build_autoencoder(const AutoencoderShape& shape, std::uint64_t seed);

[[nodiscard]] std::size_t count_parameters(const DenseNetwork& net) noexcept;

/// Per-layer values kept from the forward pass for backpropagation.
struct ForwardCache {
  Matrix input;
  std::vector<Matrix> pre;   // z = a_prev * W^T + b
  std::vector<Matrix> post;  // a = activation(z)

  [[nodiscard]] const Matrix& output() const { return post.back(); }
};

/// Rows of `batch` are samples. Throws ShapeMismatch, NonFiniteInput.
[[nodiscard]] ForwardCache forward(const DenseNetwork& net, const Matrix& batch);
[[nodiscard]] Matrix predict(const DenseNetwork& net, const Matrix& batch);

/// Mean of squared entrywise differences.
[[nodiscard]] double mse_loss(const Matrix& pred, const Matrix& target);

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
};

/// Exact gradients of mse_loss(forward(net, x).output(), target).
[[nodiscard]] Gradients backward(const DenseNetwork& net, const ForwardCache& cache,
                                 const Matrix& target);

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam update on a flat parameter block. `step` is the already-incremented
/// step count (t >= 1) used for bias correction.
void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                 std::span<double> v, std::uint64_t step, const AdamConfig& config);

struct AdamState {
  AdamConfig config;
  std::uint64_t t = 0;
  std::vector<Matrix> m_weights, v_weights;
  std::vector<std::vector<double>> m_biases, v_biases;

  [[nodiscard]] static AdamState for_network(const DenseNetwork& net, AdamConfig config = {});
};

void adam_step(DenseNetwork& net, const Gradients& grads, AdamState& state);

struct TrainOptions {
  int epochs = 1000;
  std::size_t batch_size = 1024;
  std::uint64_t seed = 7;
  AdamConfig adam;
};

struct TrainHistory {
  std::vector<double> loss;  // full-dataset MSE at the end of each epoch
};

/// Mini-batch Adam on MSE. One batch per epoch (no shuffle) when
/// batch_size >= rows; otherwise batches follow a per-epoch seeded shuffle.
TrainHistory train(DenseNetwork& net, const Matrix& inputs, const Matrix& targets,
                   const TrainOptions& options);

/// Round half to even, independent of the floating-point environment.
[[nodiscard]] double round_half_even(double x) noexcept;

/// clamp(|round_half_even(output)|, 0, num_clusters - 1).
[[nodiscard]] int label_from_output(double output, int num_clusters);

/// Applies label_from_output to column 0 of `outputs`.
[[nodiscard]] std::vector<int> labels_from_outputs(const Matrix& outputs, int num_clusters);
[[nodiscard]] std::vector<int> predict_labels(const DenseNetwork& net, const Matrix& inputs,
                                              int num_clusters);

// Model file: "tscnet v1" text format, weights with 17 significant digits.
[[nodiscard]] std::string format_model(const DenseNetwork& net);
[[nodiscard]] DenseNetwork parse_model(std::string_view text);
void save_model(const DenseNetwork& net, const std::string& path);
[[nodiscard]] DenseNetwork load_model(const std::string& path);

}  // namespace tsc
