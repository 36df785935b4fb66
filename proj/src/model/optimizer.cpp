#include "tsum/model/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "tsum/errors.hpp"

namespace tsum {

void OptimizerConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("Adam betas must be in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("Adam epsilon must be > 0");
}

double learning_rate_at(std::uint64_t t, std::size_t d_model, const OptimizerConfig& cfg) {
  require(t >= 1, "learning-rate schedule starts at step 1");
  const double step = static_cast<double>(t);
  double factor = 1.0 / std::sqrt(step);
  if (cfg.warmup_steps > 0)
    factor = std::min(factor, step * std::pow(static_cast<double>(cfg.warmup_steps), -1.5));
  return cfg.learning_rate * factor / std::sqrt(static_cast<double>(d_model));
}

void adam_update(Model& model, const OptimizerConfig& cfg, const BatchVocab* active_rows) {
  const std::uint64_t t = model.step() + 1;
  const double lr = learning_rate_at(t, model.config().d_model, cfg);
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));

  auto update_row = [&](Parameter& p, std::size_t r) {
    auto w = p.value.row(r);
    auto g = p.grad.row(r);
    auto m = p.m.row(r);
    auto v = p.v.row(r);
    for (std::size_t c = 0; c < w.size(); ++c) {
      m[c] = cfg.beta1 * m[c] + (1.0 - cfg.beta1) * g[c];
      v[c] = cfg.beta2 * v[c] + (1.0 - cfg.beta2) * g[c] * g[c];
      w[c] -= lr * (m[c] / c1) / (std::sqrt(v[c] / c2) + cfg.epsilon);
    }
  };

  for (auto& p : model.params()) {
    if (p.vocab_rows && active_rows) {
      for (TokenId id : active_rows->local_to_global()) update_row(p, static_cast<std::size_t>(id));
    } else {
      for (std::size_t r = 0; r < p.value.rows(); ++r) update_row(p, r);
    }
  }
}

StepResult train_step(const Batch& batch, Model& model, const OptimizerConfig& cfg, const BatchVocab* bv) {
  std::mt19937_64 rng(model.config().seed ^ ((model.step() + 1) * 0x9E3779B97F4A7C15ULL));
  const LossResult lr = backward(batch, model, Mode::Train, bv, &rng);
  if (!std::isfinite(lr.loss))
    throw TrainingError("non-finite training loss at step " + std::to_string(model.step() + 1));
  StepResult out;
  out.loss = lr.loss;
  out.tokens = lr.tokens;
  out.learning_rate = learning_rate_at(model.step() + 1, model.config().d_model, cfg);
  adam_update(model, cfg, bv);
  model.set_step(model.step() + 1);
  return out;
}

}  // namespace tsum
