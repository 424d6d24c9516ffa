#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "lesion/nn/adam.hpp"
#include "lesion/nn/network.hpp"

namespace lesion::nn {

struct TrainConfig {
  int epochs = 40;
  int batch_size = 32;
  AdamConfig adam;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Labels: 0 = nevus, 1 = melanoma.
struct LabeledSet {
  std::vector<Tensor> inputs;
  std::vector<int> labels;
};

struct EpochStats {
  double mean_loss = 0.0;
  double accuracy = 0.0;  // on the batches as they were trained
};

/// Return false to stop after the current epoch.
using EpochCallback = std::function<bool(int epoch, const EpochStats&)>;

/// Mini-batch training with Adam on softmax cross-entropy. Batches come from
/// a per-epoch shuffle seeded by (rng_seed, epoch); gradients are averaged
/// over each batch and accumulated in sample order.
std::vector<EpochStats> train(Network& net, const LabeledSet& data, const TrainConfig& cfg,
                              const EpochCallback& on_epoch = {});

/// Fraction of samples whose predicted class equals the label.
double evaluate_accuracy(Network& net, const LabeledSet& data);

}  // namespace lesion::nn
