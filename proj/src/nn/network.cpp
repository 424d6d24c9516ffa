#include "lesion/nn/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "lesion/error.hpp"
#include "lesion/nn/ops.hpp"
#include "lesion/random.hpp"

namespace lesion::nn {

LayerSpec LayerSpec::conv(std::size_t filters, std::size_t k, Activation act) {
  return {LayerKind::Conv2d, filters, k, k, 1, 1, act};
}

LayerSpec LayerSpec::pool(std::size_t window, std::size_t stride) {
  return {LayerKind::MaxPool, 0, window, window, stride, stride, Activation::None};
}

LayerSpec LayerSpec::flatten() { return {LayerKind::Flatten, 0, 1, 1, 1, 1, Activation::None}; }

LayerSpec LayerSpec::fully_connected(std::size_t units, Activation act) {
  return {LayerKind::Dense, units, 1, 1, 1, 1, act};
}

namespace {

[[noreturn]] void shape_error(std::size_t layer, const std::string& what) {
  fail(ErrorKind::ShapeError, "layer " + std::to_string(layer) + ": " + what);
}

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Relu: return "relu";
    case Activation::Softmax: return "softmax";
    case Activation::None: break;
  }
  return "none";
}

}  // namespace

std::vector<Shape> NetworkSpec::propagate() const {
  if (input_shape.size() != 3 || element_count(input_shape) == 0)
    fail(ErrorKind::ShapeError, "input shape must be (rows, cols, channels) with positive extents");
  if (layers.empty()) fail(ErrorKind::ShapeError, "network has no layers");

  std::vector<Shape> shapes;
  Shape current = input_shape;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    if (l.activation == Activation::Softmax && i + 1 != layers.size())
      shape_error(i, "softmax is only allowed on the final layer");
    switch (l.kind) {
      case LayerKind::Conv2d:
        if (current.size() != 3) shape_error(i, "conv2d needs a (rows, cols, channels) input");
        if (l.kernel_h < 1 || l.kernel_w < 1) shape_error(i, "conv kernel must be at least 1x1");
        if (l.stride_h != 1 || l.stride_w != 1) shape_error(i, "only stride-1 convolutions are supported");
        if (l.units == 0) shape_error(i, "conv needs at least one filter");
        current = {current[0], current[1], l.units};
        break;
      case LayerKind::MaxPool:
        if (current.size() != 3) shape_error(i, "maxpool needs a (rows, cols, channels) input");
        if (l.kernel_h < 1 || l.kernel_w < 1 || l.stride_h < 1 || l.stride_w < 1)
          shape_error(i, "pool window and strides must be >= 1");
        if (l.kernel_h > current[0] || l.kernel_w > current[1])
          shape_error(i, "pool window exceeds input " + to_string(current));
        current = {pooled_extent(current[0], l.kernel_h, l.stride_h),
                   pooled_extent(current[1], l.kernel_w, l.stride_w), current[2]};
        break;
      case LayerKind::Flatten:
        current = {element_count(current)};
        break;
      case LayerKind::Dense:
        if (current.size() != 1) shape_error(i, "dense needs a flat input; insert flatten first");
        if (l.units == 0) shape_error(i, "dense needs at least one unit");
        current = {l.units};
        break;
    }
    shapes.push_back(current);
  }
  const LayerSpec& last = layers.back();
  if (last.kind != LayerKind::Dense || last.units != 2 || last.activation != Activation::Softmax)
    shape_error(layers.size() - 1, "final layer must be a 2-unit dense softmax");
  return shapes;
}

std::string NetworkSpec::describe() const {
  std::string s = "input=" + std::to_string(input_shape.size() > 0 ? input_shape[0] : 0);
  for (std::size_t i = 1; i < input_shape.size(); ++i) s += "x" + std::to_string(input_shape[i]);
  for (const LayerSpec& l : layers) {
    s += "|";
    switch (l.kind) {
      case LayerKind::Conv2d:
        s += "conv2d:f" + std::to_string(l.units) + ":k" + std::to_string(l.kernel_h) + "x" +
             std::to_string(l.kernel_w) + ":s" + std::to_string(l.stride_h) + "x" +
             std::to_string(l.stride_w) + ":" + activation_name(l.activation);
        break;
      case LayerKind::MaxPool:
        s += "maxpool:k" + std::to_string(l.kernel_h) + "x" + std::to_string(l.kernel_w) + ":s" +
             std::to_string(l.stride_h) + "x" + std::to_string(l.stride_w);
        break;
      case LayerKind::Flatten:
        s += "flatten";
        break;
      case LayerKind::Dense:
        s += "dense:u" + std::to_string(l.units) + ":" + activation_name(l.activation);
        break;
    }
  }
  return s;
}

std::uint64_t NetworkSpec::fingerprint() const { return fnv1a64(describe()); }

namespace {

std::vector<LayerSpec> dense_head() {
  return {LayerSpec::flatten(),
          LayerSpec::fully_connected(512),
          LayerSpec::fully_connected(128),
          LayerSpec::fully_connected(64),
          LayerSpec::fully_connected(512),
          LayerSpec::fully_connected(512),
          LayerSpec::fully_connected(64),
          LayerSpec::fully_connected(2, Activation::Softmax)};
}

NetworkSpec conv_stack(std::size_t input, const std::size_t (&pools)[6][2]) {
  const std::size_t filters[6] = {128, 64, 32, 128, 32, 128};
  const std::size_t kernels[6] = {7, 4, 5, 6, 5, 6};
  NetworkSpec spec{{input, input, 1}, {}};
  for (int i = 0; i < 6; ++i) {
    spec.layers.push_back(LayerSpec::conv(filters[i], kernels[i]));
    spec.layers.push_back(LayerSpec::pool(pools[i][0], pools[i][1]));
  }
  for (const LayerSpec& l : dense_head()) spec.layers.push_back(l);
  return spec;
}

}  // namespace

NetworkSpec full_spec() {
  constexpr std::size_t pools[6][2] = {{3, 3}, {3, 3}, {2, 2}, {3, 3}, {2, 2}, {2, 2}};
  return conv_stack(256, pools);
}

NetworkSpec reduced_spec() {
  constexpr std::size_t pools[6][2] = {{2, 2}, {2, 2}, {2, 2}, {2, 2}, {2, 2}, {2, 2}};
  return conv_stack(64, pools);
}

// ---- layers ---------------------------------------------------------------

Conv2dLayer::Conv2dLayer(std::size_t rows, std::size_t cols, std::size_t channels,
                         const LayerSpec& spec)
    : weights({spec.kernel_h, spec.kernel_w, channels, spec.units}),
      bias({spec.units}),
      grad_weights(weights.shape()),
      grad_bias(bias.shape()),
      rows_(rows),
      cols_(cols),
      channels_(channels) {}

Tensor Conv2dLayer::forward(const Tensor& input, bool training) {
  if (input.shape() != Shape{rows_, cols_, channels_})
    fail(ErrorKind::ShapeMismatch, "conv2d layer got input " + to_string(input.shape()));
  const detail::ConvGeometry g{rows_, cols_, channels_, weights.dim(0), weights.dim(1), weights.dim(3)};
  columns_.resize(g.positions() * g.patch());
  detail::im2col(g, input.data().data(), columns_.data());
  Tensor out({rows_, cols_, g.filters});
  for (std::size_t i = 0; i < g.positions(); ++i)
    std::copy(bias.data().begin(), bias.data().end(),
              out.data().begin() + static_cast<std::ptrdiff_t>(i * g.filters));
  detail::gemm_acc(g.positions(), g.filters, g.patch(), columns_.data(), weights.data().data(),
                   out.data().data());
  if (!training) {
    columns_.clear();
    columns_.shrink_to_fit();
  }
  return out;
}

Tensor Conv2dLayer::backward(const Tensor& grad_out) {
  const detail::ConvGeometry g{rows_, cols_, channels_, weights.dim(0), weights.dim(1), weights.dim(3)};
  if (columns_.size() != g.positions() * g.patch())
    fail(ErrorKind::InvalidArgument, "conv2d backward called without a training forward pass");
  for (std::size_t i = 0; i < g.positions(); ++i) {
    const float* row = grad_out.data().data() + i * g.filters;
    for (std::size_t f = 0; f < g.filters; ++f) grad_bias[f] += row[f];
  }
  detail::gemm_tn_acc(g.positions(), g.filters, g.patch(), columns_.data(), grad_out.data().data(),
                      grad_weights.data().data());

  std::vector<float> wt(g.filters * g.patch());
  for (std::size_t p = 0; p < g.patch(); ++p)
    for (std::size_t f = 0; f < g.filters; ++f) wt[f * g.patch() + p] = weights[p * g.filters + f];
  if (!propagate_input) return {};
  scratch_.assign(g.positions() * g.patch(), 0.0f);
  detail::gemm_acc(g.positions(), g.patch(), g.filters, grad_out.data().data(), wt.data(),
                   scratch_.data());
  Tensor grad_in({rows_, cols_, channels_});
  detail::col2im_acc(g, scratch_.data(), grad_in.data().data());
  return grad_in;
}

void Conv2dLayer::collect(std::vector<ParamBlock>& out) {
  out.push_back({weights.data(), grad_weights.data()});
  out.push_back({bias.data(), grad_bias.data()});
}

Tensor MaxPoolLayer::forward(const Tensor& input, bool training) {
  PoolResult r = maxpool(input, spec_.kernel_h, spec_.kernel_w, spec_.stride_h, spec_.stride_w);
  if (training) {
    input_shape_ = input.shape();
    argmax_ = std::move(r.argmax);
  }
  return std::move(r.output);
}

Tensor MaxPoolLayer::backward(const Tensor& grad_out) {
  return maxpool_backward(input_shape_, argmax_, grad_out);
}

Tensor FlattenLayer::forward(const Tensor& input, bool) {
  input_shape_ = input.shape();
  return input.reshaped({input.size()});
}

Tensor FlattenLayer::backward(const Tensor& grad_out) { return grad_out.reshaped(input_shape_); }

DenseLayer::DenseLayer(std::size_t inputs, std::size_t units)
    : weights({inputs, units}), bias({units}), grad_weights(weights.shape()), grad_bias(bias.shape()) {}

Tensor DenseLayer::forward(const Tensor& input, bool training) {
  if (training) input_ = input;
  return dense(input, weights, bias);
}

Tensor DenseLayer::backward(const Tensor& grad_out) {
  const std::size_t n = weights.dim(0), m = weights.dim(1);
  for (std::size_t j = 0; j < m; ++j) grad_bias[j] += grad_out[j];
  detail::gemm_tn_acc(1, m, n, input_.data().data(), grad_out.data().data(),
                      grad_weights.data().data());
  Tensor grad_in({n});
  for (std::size_t i = 0; i < n; ++i) {
    const float* row = weights.data().data() + i * m;
    float acc = 0.0f;
    for (std::size_t j = 0; j < m; ++j) acc += row[j] * grad_out[j];
    grad_in[i] = acc;
  }
  return grad_in;
}

void DenseLayer::collect(std::vector<ParamBlock>& out) {
  out.push_back({weights.data(), grad_weights.data()});
  out.push_back({bias.data(), grad_bias.data()});
}

Tensor ReluLayer::forward(const Tensor& input, bool training) {
  if (training) input_ = input;
  return relu(input);
}

Tensor ReluLayer::backward(const Tensor& grad_out) { return relu_backward(input_, grad_out); }

// ---- network --------------------------------------------------------------

Network::Network(NetworkSpec spec) : spec_(std::move(spec)) {
  spec_.propagate();
  Shape current = spec_.input_shape;
  for (const LayerSpec& l : spec_.layers) {
    switch (l.kind) {
      case LayerKind::Conv2d:
        layers_.emplace_back(std::in_place_type<Conv2dLayer>, current[0], current[1], current[2], l);
        current = {current[0], current[1], l.units};
        break;
      case LayerKind::MaxPool:
        layers_.emplace_back(std::in_place_type<MaxPoolLayer>, l);
        current = {pooled_extent(current[0], l.kernel_h, l.stride_h),
                   pooled_extent(current[1], l.kernel_w, l.stride_w), current[2]};
        break;
      case LayerKind::Flatten:
        layers_.emplace_back(std::in_place_type<FlattenLayer>);
        current = {element_count(current)};
        break;
      case LayerKind::Dense:
        layers_.emplace_back(std::in_place_type<DenseLayer>, current[0], l.units);
        current = {l.units};
        break;
    }
    if (l.activation == Activation::Relu) layers_.emplace_back(std::in_place_type<ReluLayer>);
  }
  // Nothing consumes the gradient with respect to the network input.
  if (auto* conv = std::get_if<Conv2dLayer>(&layers_.front())) conv->propagate_input = false;
}

Tensor Network::forward(const Tensor& input, bool training) {
  if (input.shape() != spec_.input_shape)
    fail(ErrorKind::ShapeMismatch, "network expects input " + to_string(spec_.input_shape) +
                                       ", got " + to_string(input.shape()));
  Tensor x = input;
  for (Layer& layer : layers_)
    x = std::visit([&](auto& l) { return l.forward(x, training); }, layer);
  return x;
}

void Network::backward(const Tensor& grad_logits) {
  Tensor g = grad_logits;
  for (std::size_t i = layers_.size(); i-- > 0;)
    g = std::visit([&](auto& l) { return l.backward(g); }, layers_[i]);
}

std::vector<ParamBlock> Network::parameters() {
  std::vector<ParamBlock> blocks;
  for (Layer& layer : layers_) std::visit([&](auto& l) { l.collect(blocks); }, layer);
  return blocks;
}

std::size_t Network::parameter_count() {
  std::size_t n = 0;
  for (const ParamBlock& b : parameters()) n += b.value.size();
  return n;
}

void Network::zero_grad() {
  for (ParamBlock& b : parameters()) std::fill(b.grad.begin(), b.grad.end(), 0.0f);
}

Network build_network(const NetworkSpec& spec, std::uint64_t seed) {
  Network net(spec);
  auto blocks = net.parameters();
  // Blocks come in (weights, bias) pairs, one pair per conv/dense layer.
  const std::vector<Shape> shapes = spec.propagate();
  std::size_t block = 0;
  std::size_t layer_index = 0;
  Shape current = spec.input_shape;
  for (const LayerSpec& l : spec.layers) {
    std::size_t fan_in = 0, fan_out = 0;
    if (l.kind == LayerKind::Conv2d) {
      fan_in = l.kernel_h * l.kernel_w * current[2];
      fan_out = l.kernel_h * l.kernel_w * l.units;
    } else if (l.kind == LayerKind::Dense) {
      fan_in = current[0];
      fan_out = l.units;
    }
    if (fan_in > 0) {
      const double limit = l.activation == Activation::Softmax
                               ? std::sqrt(6.0 / static_cast<double>(fan_in + fan_out))
                               : std::sqrt(6.0 / static_cast<double>(fan_in));
      Rng rng = derive_stream(seed, "init", layer_index);
      for (float& w : blocks[block].value) w = static_cast<float>(rng.uniform(-limit, limit));
      std::fill(blocks[block + 1].value.begin(), blocks[block + 1].value.end(), 0.0f);
      block += 2;
    }
    current = shapes[layer_index];
    ++layer_index;
  }
  return net;
}

Tensor predict(Network& net, const Tensor& input) { return softmax(net.forward(input, false)); }

int predicted_class(const Tensor& probs) {
  int best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i)
    if (probs[i] > probs[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  return best;
}

namespace {

constexpr char kMagic[4] = {'L', 'S', 'N', 'W'};
constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i)
    out.push_back(static_cast<std::uint8_t>((value >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) fail(ErrorKind::CorruptStream, "weight stream truncated");
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[pos + i]) << (8 * i);
  pos += sizeof(T);
  return value;
}

}  // namespace

std::vector<std::uint8_t> save_weights(Network& net) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_le<std::uint32_t>(out, kFormatVersion);
  put_le<std::uint64_t>(out, net.spec().fingerprint());
  const auto blocks = net.parameters();
  std::uint64_t count = 0;
  for (const ParamBlock& b : blocks) count += b.value.size();
  put_le<std::uint64_t>(out, count);
  out.reserve(out.size() + count * 4);
  for (const ParamBlock& b : blocks) {
    for (float v : b.value) {
      std::uint32_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      put_le<std::uint32_t>(out, bits);
    }
  }
  return out;
}

Network load_weights(std::span<const std::uint8_t> bytes, const NetworkSpec& spec) {
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    fail(ErrorKind::CorruptStream, "not a weight stream (bad magic)");
  std::size_t pos = sizeof kMagic;
  const auto version = get_le<std::uint32_t>(bytes, pos);
  if (version != kFormatVersion)
    fail(ErrorKind::CorruptStream, "unsupported weight format version " + std::to_string(version));
  const auto fingerprint = get_le<std::uint64_t>(bytes, pos);
  if (fingerprint != spec.fingerprint())
    fail(ErrorKind::SpecMismatch, "weights were saved for a different network spec");
  const auto count = get_le<std::uint64_t>(bytes, pos);

  Network net(spec);
  auto blocks = net.parameters();
  std::uint64_t expected = 0;
  for (const ParamBlock& b : blocks) expected += b.value.size();
  if (count != expected) fail(ErrorKind::CorruptStream, "parameter count does not match the spec");
  if (bytes.size() - pos != count * 4)
    fail(ErrorKind::CorruptStream, bytes.size() - pos < count * 4 ? "weight stream truncated"
                                                                   : "trailing bytes after weights");
  for (ParamBlock& b : blocks) {
    for (float& v : b.value) {
      const auto bits = get_le<std::uint32_t>(bytes, pos);
      std::memcpy(&v, &bits, sizeof v);
    }
  }
  return net;
}

}  // namespace lesion::nn
