#include "lesion/nn/train.hpp"

#include <numeric>

#include "lesion/error.hpp"
#include "lesion/nn/ops.hpp"
#include "lesion/random.hpp"

namespace lesion::nn {

void TrainConfig::validate() const {
  if (epochs < 1) fail(ErrorKind::ConfigError, "epochs must be >= 1");
  if (batch_size < 1) fail(ErrorKind::ConfigError, "batch_size must be >= 1");
  if (!(adam.learning_rate >= 0.0)) fail(ErrorKind::ConfigError, "learning_rate must be >= 0");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0))
    fail(ErrorKind::ConfigError, "Adam betas must lie in [0, 1)");
  if (!(adam.epsilon > 0.0)) fail(ErrorKind::ConfigError, "Adam epsilon must be > 0");
}

std::vector<EpochStats> train(Network& net, const LabeledSet& data, const TrainConfig& cfg,
                              const EpochCallback& on_epoch) {
  cfg.validate();
  if (data.inputs.empty()) fail(ErrorKind::EmptyDataset, "training set is empty");
  if (data.inputs.size() != data.labels.size())
    fail(ErrorKind::LengthMismatch, "inputs and labels differ in length");
  for (int label : data.labels)
    if (label < 0 || label > 1) fail(ErrorKind::LabelOutOfRange, "labels must be 0 (nevus) or 1 (melanoma)");

  AdamOptimizer optimizer(cfg.adam);
  std::vector<EpochStats> history;
  std::vector<std::size_t> order(data.inputs.size());
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = derive_stream(cfg.rng_seed, "shuffle", static_cast<std::uint64_t>(epoch));
    shuffle(order.begin(), order.end(), rng);

    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      net.zero_grad();
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t idx = order[k];
        const Tensor probs = softmax(net.forward(data.inputs[idx], true));
        LossResult loss = sparse_ce_loss(probs, data.labels[idx]);
        loss_sum += loss.loss;
        if (predicted_class(probs) == data.labels[idx]) ++correct;
        net.backward(loss.grad_logits);
      }
      auto blocks = net.parameters();
      const float scale = 1.0f / static_cast<float>(end - start);
      for (ParamBlock& b : blocks)
        for (float& g : b.grad) g *= scale;
      optimizer.step(blocks);
    }
    const EpochStats stats{loss_sum / static_cast<double>(order.size()),
                           static_cast<double>(correct) / static_cast<double>(order.size())};
    history.push_back(stats);
    if (on_epoch && !on_epoch(epoch, stats)) break;
  }
  return history;
}

double evaluate_accuracy(Network& net, const LabeledSet& data) {
  if (data.inputs.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.inputs.size(); ++i)
    if (predicted_class(predict(net, data.inputs[i])) == data.labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(data.inputs.size());
}

}  // namespace lesion::nn
