#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lesion/nn/network.hpp"

namespace lesion::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One bias-corrected Adam update of a parameter block. `step` is 1-based;
/// `m` and `v` are the block's first and second moment accumulators.
void adam_step(std::span<float> params, std::span<const float> grads, std::span<float> m,
               std::span<float> v, std::int64_t step, const AdamConfig& cfg);

/// Moment buffers for every parameter block of one network.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(AdamConfig cfg) : cfg_(cfg) {}

  void step(std::vector<ParamBlock>& blocks);
  std::int64_t steps_taken() const { return step_; }

 private:
  AdamConfig cfg_;
  std::int64_t step_ = 0;
  std::vector<std::vector<float>> m_, v_;
};

}  // namespace lesion::nn
