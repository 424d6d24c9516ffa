#include <algorithm>
#include <string>

#include "lesion/error.hpp"
#include "lesion/eval.hpp"
#include "lesion/random.hpp"

namespace lesion::eval {

FoldPlan make_folds(std::span<const int> labels, int k, std::uint64_t seed) {
  if (k < 2) fail(ErrorKind::InvalidArgument, "need at least 2 folds");
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != kNevus && labels[i] != kMelanoma)
      fail(ErrorKind::LabelOutOfRange, "labels must be 0 (nevus) or 1 (melanoma)");
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  for (int c = 0; c < 2; ++c) {
    if (by_class[static_cast<std::size_t>(c)].size() < static_cast<std::size_t>(k))
      fail(ErrorKind::TooFewSamples,
           std::string(c == kMelanoma ? "melanoma" : "nevus") + " has " +
               std::to_string(by_class[static_cast<std::size_t>(c)].size()) +
               " samples, fewer than the " + std::to_string(k) + " folds");
  }

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.folds.resize(static_cast<std::size_t>(k));
  std::size_t next = 0;
  for (int c = 0; c < 2; ++c) {
    auto& members = by_class[static_cast<std::size_t>(c)];
    Rng rng = derive_stream(seed, "folds", static_cast<std::uint64_t>(c));
    shuffle(members.begin(), members.end(), rng);
    for (std::size_t idx : members) {
      plan.folds[next].push_back(idx);
      next = (next + 1) % static_cast<std::size_t>(k);
    }
  }
  for (auto& fold : plan.folds) std::sort(fold.begin(), fold.end());
  return plan;
}

}  // namespace lesion::eval
