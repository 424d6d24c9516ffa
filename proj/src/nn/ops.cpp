#include "lesion/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lesion/error.hpp"

namespace lesion::nn {

namespace detail {

void gemm_acc(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
              float* c) {
  for (std::size_t i = 0; i < m; ++i) {
    float* crow = c + i * n;
    const float* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const float av = arow[p];
      if (av == 0.0f) continue;
      const float* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void gemm_tn_acc(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
                 float* c) {
  for (std::size_t i = 0; i < m; ++i) {
    const float* arow = a + i * k;
    const float* brow = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const float av = arow[p];
      if (av == 0.0f) continue;
      float* crow = c + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void im2col(const ConvGeometry& g, const float* input, float* columns) {
  const std::size_t patch = g.patch();
  const long pad_top = static_cast<long>(g.pad_top());
  const long pad_left = static_cast<long>(g.pad_left());
  const long rows = static_cast<long>(g.rows), cols = static_cast<long>(g.cols);
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      float* dst = columns + static_cast<std::size_t>(r * cols + c) * patch;
      for (std::size_t ky = 0; ky < g.kh; ++ky) {
        const long rr = r - pad_top + static_cast<long>(ky);
        for (std::size_t kx = 0; kx < g.kw; ++kx) {
          const long cc = c - pad_left + static_cast<long>(kx);
          float* out = dst + (ky * g.kw + kx) * g.channels;
          if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) {
            std::fill(out, out + g.channels, 0.0f);
          } else {
            const float* src = input + static_cast<std::size_t>(rr * cols + cc) * g.channels;
            std::copy(src, src + g.channels, out);
          }
        }
      }
    }
  }
}

void col2im_acc(const ConvGeometry& g, const float* columns, float* grad_input) {
  const std::size_t patch = g.patch();
  const long pad_top = static_cast<long>(g.pad_top());
  const long pad_left = static_cast<long>(g.pad_left());
  const long rows = static_cast<long>(g.rows), cols = static_cast<long>(g.cols);
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      const float* src = columns + static_cast<std::size_t>(r * cols + c) * patch;
      for (std::size_t ky = 0; ky < g.kh; ++ky) {
        const long rr = r - pad_top + static_cast<long>(ky);
        if (rr < 0 || rr >= rows) continue;
        for (std::size_t kx = 0; kx < g.kw; ++kx) {
          const long cc = c - pad_left + static_cast<long>(kx);
          if (cc < 0 || cc >= cols) continue;
          const float* in = src + (ky * g.kw + kx) * g.channels;
          float* dst = grad_input + static_cast<std::size_t>(rr * cols + cc) * g.channels;
          for (std::size_t ch = 0; ch < g.channels; ++ch) dst[ch] += in[ch];
        }
      }
    }
  }
}

}  // namespace detail

namespace {

detail::ConvGeometry conv_geometry(const Tensor& input, const Tensor& weights) {
  if (input.rank() != 3 || weights.rank() != 4)
    fail(ErrorKind::ShapeMismatch, "conv2d expects (H, W, C) input and (kh, kw, C, F) weights");
  if (weights.dim(2) != input.dim(2))
    fail(ErrorKind::ShapeMismatch, "conv2d channel mismatch: input " + to_string(input.shape()) +
                                       ", weights " + to_string(weights.shape()));
  if (weights.dim(0) == 0 || weights.dim(1) == 0)
    fail(ErrorKind::ShapeMismatch, "conv2d kernel must be at least 1x1");
  return {input.dim(0), input.dim(1), input.dim(2), weights.dim(0), weights.dim(1), weights.dim(3)};
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  const auto g = conv_geometry(input, weights);
  if (bias.size() != g.filters) fail(ErrorKind::ShapeMismatch, "conv2d bias length mismatch");
  std::vector<float> columns(g.positions() * g.patch());
  detail::im2col(g, input.data().data(), columns.data());
  Tensor out({g.rows, g.cols, g.filters});
  for (std::size_t i = 0; i < g.positions(); ++i)
    std::copy(bias.data().begin(), bias.data().end(), out.data().begin() + static_cast<long>(i * g.filters));
  detail::gemm_acc(g.positions(), g.filters, g.patch(), columns.data(), weights.data().data(),
                   out.data().data());
  return out;
}

Conv2dGrads conv2d_backward(const Tensor& input, const Tensor& weights, const Tensor& grad_out) {
  const auto g = conv_geometry(input, weights);
  if (grad_out.shape() != Shape{g.rows, g.cols, g.filters})
    fail(ErrorKind::ShapeMismatch, "conv2d gradient shape mismatch");
  std::vector<float> columns(g.positions() * g.patch());
  detail::im2col(g, input.data().data(), columns.data());

  Conv2dGrads grads{Tensor(input.shape()), Tensor(weights.shape()), Tensor({g.filters})};
  for (std::size_t i = 0; i < g.positions(); ++i)
    for (std::size_t f = 0; f < g.filters; ++f) grads.bias[f] += grad_out[i * g.filters + f];
  detail::gemm_tn_acc(g.positions(), g.filters, g.patch(), columns.data(), grad_out.data().data(),
                      grads.weights.data().data());

  std::vector<float> wt(g.filters * g.patch());
  for (std::size_t p = 0; p < g.patch(); ++p)
    for (std::size_t f = 0; f < g.filters; ++f) wt[f * g.patch() + p] = weights[p * g.filters + f];
  std::fill(columns.begin(), columns.end(), 0.0f);
  detail::gemm_acc(g.positions(), g.patch(), g.filters, grad_out.data().data(), wt.data(),
                   columns.data());
  detail::col2im_acc(g, columns.data(), grads.input.data().data());
  return grads;
}

std::size_t pooled_extent(std::size_t extent, std::size_t window, std::size_t stride) {
  if (window == 0 || stride == 0) fail(ErrorKind::ShapeMismatch, "pool window and stride must be >= 1");
  if (window > extent)
    fail(ErrorKind::ShapeMismatch, "pool window " + std::to_string(window) +
                                       " exceeds input extent " + std::to_string(extent));
  return (extent - window) / stride + 1;
}

PoolResult maxpool(const Tensor& input, std::size_t window_h, std::size_t window_w,
                   std::size_t stride_h, std::size_t stride_w) {
  if (input.rank() != 3) fail(ErrorKind::ShapeMismatch, "maxpool expects (H, W, C) input");
  const std::size_t rows = input.dim(0), cols = input.dim(1), ch = input.dim(2);
  const std::size_t out_r = pooled_extent(rows, window_h, stride_h);
  const std::size_t out_c = pooled_extent(cols, window_w, stride_w);
  PoolResult result{Tensor({out_r, out_c, ch}), std::vector<std::size_t>(out_r * out_c * ch)};
  for (std::size_t r = 0; r < out_r; ++r) {
    for (std::size_t c = 0; c < out_c; ++c) {
      for (std::size_t k = 0; k < ch; ++k) {
        std::size_t best = (r * stride_h * cols + c * stride_w) * ch + k;
        float best_v = input[best];
        for (std::size_t dy = 0; dy < window_h; ++dy) {
          for (std::size_t dx = 0; dx < window_w; ++dx) {
            const std::size_t idx = ((r * stride_h + dy) * cols + (c * stride_w + dx)) * ch + k;
            if (input[idx] > best_v) {
              best_v = input[idx];
              best = idx;
            }
          }
        }
        const std::size_t o = (r * out_c + c) * ch + k;
        result.output[o] = best_v;
        result.argmax[o] = best;
      }
    }
  }
  return result;
}

Tensor maxpool_backward(const Shape& input_shape, const std::vector<std::size_t>& argmax,
                        const Tensor& grad_out) {
  if (argmax.size() != grad_out.size()) fail(ErrorKind::ShapeMismatch, "maxpool gradient size mismatch");
  Tensor grad(input_shape);
  for (std::size_t i = 0; i < argmax.size(); ++i) grad[argmax[i]] += grad_out[i];
  return grad;
}

Tensor dense(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  if (weights.rank() != 2 || weights.dim(0) != input.size() || bias.size() != weights.dim(1))
    fail(ErrorKind::ShapeMismatch, "dense shape mismatch: input " + to_string(input.shape()) +
                                       ", weights " + to_string(weights.shape()) + ", bias " +
                                       to_string(bias.shape()));
  Tensor out({weights.dim(1)}, std::vector<float>(bias.data().begin(), bias.data().end()));
  detail::gemm_acc(1, weights.dim(1), input.size(), input.data().data(), weights.data().data(),
                   out.data().data());
  return out;
}

DenseGrads dense_backward(const Tensor& input, const Tensor& weights, const Tensor& grad_out) {
  const std::size_t n = input.size();
  if (weights.rank() != 2 || weights.dim(0) != n || grad_out.size() != weights.dim(1))
    fail(ErrorKind::ShapeMismatch, "dense gradient shape mismatch");
  const std::size_t m = weights.dim(1);
  DenseGrads grads{Tensor(input.shape()), Tensor(weights.shape()), Tensor({m})};
  std::copy(grad_out.data().begin(), grad_out.data().end(), grads.bias.data().begin());
  detail::gemm_tn_acc(1, m, n, input.data().data(), grad_out.data().data(),
                      grads.weights.data().data());
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) acc += static_cast<double>(weights[i * m + j]) * grad_out[j];
    grads.input[i] = static_cast<float>(acc);
  }
  return grads;
}

Tensor relu(const Tensor& x) {
  Tensor out = x;
  for (float& v : out.data()) v = v > 0.0f ? v : 0.0f;
  return out;
}

Tensor relu_backward(const Tensor& x, const Tensor& grad_out) {
  if (x.size() != grad_out.size()) fail(ErrorKind::ShapeMismatch, "relu gradient size mismatch");
  Tensor grad(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) grad[i] = x[i] > 0.0f ? grad_out[i] : 0.0f;
  return grad;
}

Tensor softmax(const Tensor& logits) {
  if (logits.size() < 2) fail(ErrorKind::ShapeMismatch, "softmax needs at least 2 logits");
  const float peak = *std::max_element(logits.data().begin(), logits.data().end());
  std::vector<double> e(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    e[i] = std::exp(static_cast<double>(logits[i]) - peak);
    sum += e[i];
  }
  Tensor out(logits.shape());
  for (std::size_t i = 0; i < e.size(); ++i) out[i] = static_cast<float>(e[i] / sum);
  return out;
}

LossResult sparse_ce_loss(const Tensor& probs, int label) {
  if (label < 0 || static_cast<std::size_t>(label) >= probs.size())
    fail(ErrorKind::LabelOutOfRange, "label " + std::to_string(label) + " outside [0, " +
                                         std::to_string(probs.size()) + ")");
  const double p = std::max(static_cast<double>(probs[static_cast<std::size_t>(label)]), 1e-12);
  LossResult result{-std::log(p), probs};
  result.grad_logits[static_cast<std::size_t>(label)] -= 1.0f;
  return result;
}

}  // namespace lesion::nn
