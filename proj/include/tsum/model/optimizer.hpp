#pragma once

#include <cstddef>
#include <cstdint>

#include "tsum/lvt.hpp"
#include "tsum/model/transformer.hpp"

namespace tsum {

// Adam with linear warmup and inverse-square-root decay:
//   lr(t) = learning_rate * d_model^-0.5 * min(t^-0.5, t * warmup^-1.5)
struct OptimizerConfig {
  double learning_rate = 1.0;
  std::size_t warmup_steps = 4000;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double epsilon = 1e-9;

  void validate() const;
};

// t counts from 1.
double learning_rate_at(std::uint64_t t, std::size_t d_model, const OptimizerConfig& cfg);

// Applies one Adam update from the gradients already in `model`. When
// `active_rows` is given, parameters indexed by decoder vocabulary ids only
// update (values and moments) the rows it contains.
void adam_update(Model& model, const OptimizerConfig& cfg, const BatchVocab* active_rows = nullptr);

struct StepResult {
  double loss = 0.0;
  std::size_t tokens = 0;
  double learning_rate = 0.0;
};

// backward + Adam update + step counter. With `bv`, the step is LVT
// restricted: loss over the batch vocabulary, frozen rows elsewhere.
// Throws TrainingError (state untouched) on a non-finite loss or gradient.
StepResult train_step(const Batch& batch, Model& model, const OptimizerConfig& cfg, const BatchVocab* bv = nullptr);

}  // namespace tsum
