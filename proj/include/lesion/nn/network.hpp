#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lesion/nn/tensor.hpp"

namespace lesion::nn {

enum class LayerKind { Conv2d, MaxPool, Flatten, Dense };
enum class Activation { None, Relu, Softmax };

struct LayerSpec {
  LayerKind kind = LayerKind::Dense;
  std::size_t units = 0;  // conv filters or dense units
  std::size_t kernel_h = 1, kernel_w = 1;  // conv kernel or pool window
  std::size_t stride_h = 1, stride_w = 1;
  Activation activation = Activation::None;

  static LayerSpec conv(std::size_t filters, std::size_t k, Activation act = Activation::Relu);
  static LayerSpec pool(std::size_t window, std::size_t stride);
  static LayerSpec flatten();
  static LayerSpec fully_connected(std::size_t units, Activation act = Activation::Relu);

  bool operator==(const LayerSpec&) const = default;
};

struct NetworkSpec {
  Shape input_shape;  // (rows, cols, channels)
  std::vector<LayerSpec> layers;

  /// Output shape after each layer; throws ShapeError naming the layer index.
  std::vector<Shape> propagate() const;
  /// Canonical text form, also the input of the fingerprint.
  std::string describe() const;
  std::uint64_t fingerprint() const;

  bool operator==(const NetworkSpec&) const = default;
};

/// The full-size architecture: 256x256x1 input, six conv/pool blocks,
/// flatten, dense 512-128-64-512-512-64 and a 2-way softmax.
NetworkSpec full_spec();

/// Same layer stack at 64x64 input with every pool 2x2 / stride 2, so the
/// spatial extent still reaches 1x1 before flatten.
NetworkSpec reduced_spec();

struct ParamBlock {
  std::span<float> value;
  std::span<float> grad;
};

class Conv2dLayer {
 public:
  Conv2dLayer(std::size_t rows, std::size_t cols, std::size_t channels, const LayerSpec& spec);
  Tensor forward(const Tensor& input, bool training);
  Tensor backward(const Tensor& grad_out);
  void collect(std::vector<ParamBlock>& out);

  Tensor weights, bias, grad_weights, grad_bias;
  /// When false, backward() returns an empty tensor (first layer).
  bool propagate_input = true;

 private:
  std::size_t rows_, cols_, channels_;
  std::vector<float> columns_;
  std::vector<float> scratch_;
};

class MaxPoolLayer {
 public:
  explicit MaxPoolLayer(const LayerSpec& spec) : spec_(spec) {}
  Tensor forward(const Tensor& input, bool training);
  Tensor backward(const Tensor& grad_out);
  void collect(std::vector<ParamBlock>&) {}

 private:
  LayerSpec spec_;
  Shape input_shape_;
  std::vector<std::size_t> argmax_;
};

class FlattenLayer {
 public:
  Tensor forward(const Tensor& input, bool training);
  Tensor backward(const Tensor& grad_out);
  void collect(std::vector<ParamBlock>&) {}

 private:
  Shape input_shape_;
};

class DenseLayer {
 public:
  DenseLayer(std::size_t inputs, std::size_t units);
  Tensor forward(const Tensor& input, bool training);
  Tensor backward(const Tensor& grad_out);
  void collect(std::vector<ParamBlock>& out);

  Tensor weights, bias, grad_weights, grad_bias;

 private:
  Tensor input_;
};

class ReluLayer {
 public:
  Tensor forward(const Tensor& input, bool training);
  Tensor backward(const Tensor& grad_out);
  void collect(std::vector<ParamBlock>&) {}

 private:
  Tensor input_;
};

using Layer = std::variant<Conv2dLayer, MaxPoolLayer, FlattenLayer, DenseLayer, ReluLayer>;

/// Layer stack built from a NetworkSpec. forward() returns the logits of
/// the final layer; the softmax is applied by predict() and by the loss.
class Network {
 public:
  explicit Network(NetworkSpec spec);

  const NetworkSpec& spec() const { return spec_; }

  Tensor forward(const Tensor& input, bool training = false);
  /// Back-propagates d(loss)/d(logits), accumulating parameter gradients.
  void backward(const Tensor& grad_logits);

  /// Weights then bias of every parameterized layer, in declaration order.
  std::vector<ParamBlock> parameters();
  std::size_t parameter_count();
  void zero_grad();

 private:
  NetworkSpec spec_;
  std::vector<Layer> layers_;
};

/// Shape-checks the spec and initializes parameters: He-uniform for layers
/// feeding a ReLU, Glorot-uniform for the softmax layer, zero biases.
Network build_network(const NetworkSpec& spec, std::uint64_t seed);

/// Class probabilities (softmax of the logits).
Tensor predict(Network& net, const Tensor& input);
/// argmax with ties resolved to the lower class index.
int predicted_class(const Tensor& probs);

// Weight file: "LSNW" magic, u32 version, u64 spec fingerprint, u64 float
// count, then little-endian f32 values in parameter order.
std::vector<std::uint8_t> save_weights(Network& net);
Network load_weights(std::span<const std::uint8_t> bytes, const NetworkSpec& spec);

}  // namespace lesion::nn
