#pragma once

#include <cstddef>
#include <vector>

#include "lesion/nn/tensor.hpp"

namespace lesion::nn {

// Stride-1 "same" convolution. input (H, W, C), weights (kh, kw, C, F),
// bias (F) -> (H, W, F). The top/left pad is (k - 1) / 2; even kernels take
// the extra row/column of padding on the bottom/right.
Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias);

struct Conv2dGrads {
  Tensor input;
  Tensor weights;
  Tensor bias;
};
Conv2dGrads conv2d_backward(const Tensor& input, const Tensor& weights, const Tensor& grad_out);

/// Valid max pooling; output extent floor((n - window) / stride) + 1.
struct PoolResult {
  Tensor output;
  std::vector<std::size_t> argmax;  // flat input index per output element
};
PoolResult maxpool(const Tensor& input, std::size_t window_h, std::size_t window_w,
                   std::size_t stride_h, std::size_t stride_w);
Tensor maxpool_backward(const Shape& input_shape, const std::vector<std::size_t>& argmax,
                        const Tensor& grad_out);

/// out = input . weights + bias; input (N), weights (N, M), bias (M).
Tensor dense(const Tensor& input, const Tensor& weights, const Tensor& bias);

struct DenseGrads {
  Tensor input;
  Tensor weights;
  Tensor bias;
};
DenseGrads dense_backward(const Tensor& input, const Tensor& weights, const Tensor& grad_out);

Tensor relu(const Tensor& x);
/// grad_out masked by x > 0 (subgradient 0 at exactly 0).
Tensor relu_backward(const Tensor& x, const Tensor& grad_out);

/// Max-subtracted softmax over a 1-D tensor of K >= 2 logits.
Tensor softmax(const Tensor& logits);

struct LossResult {
  double loss = 0.0;
  Tensor grad_logits;  // probs - onehot(label)
};
/// -ln(max(probs[label], 1e-12)); gradient of softmax + cross-entropy w.r.t. logits.
LossResult sparse_ce_loss(const Tensor& probs, int label);

std::size_t pooled_extent(std::size_t extent, std::size_t window, std::size_t stride);

namespace detail {

// Low-level kernels shared by the functional ops and the layers.
// C (m x n) += A (m x k) . B (k x n)
void gemm_acc(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
              float* c);
// C (k x n) += A^T . B where A is (m x k), B is (m x n)
void gemm_tn_acc(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
                 float* c);

struct ConvGeometry {
  std::size_t rows, cols, channels, kh, kw, filters;
  std::size_t pad_top() const { return (kh - 1) / 2; }
  std::size_t pad_left() const { return (kw - 1) / 2; }
  std::size_t patch() const { return kh * kw * channels; }
  std::size_t positions() const { return rows * cols; }
};

void im2col(const ConvGeometry& g, const float* input, float* columns);
void col2im_acc(const ConvGeometry& g, const float* columns, float* grad_input);

}  // namespace detail

}  // namespace lesion::nn
