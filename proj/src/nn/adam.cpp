#include "lesion/nn/adam.hpp"

#include <cmath>

#include "lesion/error.hpp"

namespace lesion::nn {

void adam_step(std::span<float> params, std::span<const float> grads, std::span<float> m,
               std::span<float> v, std::int64_t step, const AdamConfig& cfg) {
  if (step < 1) fail(ErrorKind::InvalidArgument, "Adam step counter is 1-based");
  if (grads.size() != params.size() || m.size() != params.size() || v.size() != params.size())
    fail(ErrorKind::ShapeMismatch, "Adam buffers differ in length");
  const double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    const double mi = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
    const double vi = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
    m[i] = static_cast<float>(mi);
    v[i] = static_cast<float>(vi);
    const double update = cfg.learning_rate * (mi / bias1) / (std::sqrt(vi / bias2) + cfg.epsilon);
    params[i] = static_cast<float>(params[i] - update);
  }
}

void AdamOptimizer::step(std::vector<ParamBlock>& blocks) {
  if (m_.empty()) {
    for (const ParamBlock& b : blocks) {
      m_.emplace_back(b.value.size(), 0.0f);
      v_.emplace_back(b.value.size(), 0.0f);
    }
  }
  if (m_.size() != blocks.size()) fail(ErrorKind::ShapeMismatch, "optimizer bound to a different network");
  ++step_;
  for (std::size_t i = 0; i < blocks.size(); ++i)
    adam_step(blocks[i].value, blocks[i].grad, m_[i], v_[i], step_, cfg_);
}

}  // namespace lesion::nn
