#include "fuzzyattn/optim.hpp"

#include <cmath>
#include <numbers>

namespace fuzzyattn {

void OptimConfig::validate() const {
  if (base_lr < 0.0) throw ContractError("OptimConfig: base_lr must be >= 0");
  if (batch_size < 1) throw ContractError("OptimConfig: batch_size must be >= 1");
  if (beta1 <= 0.0 || beta1 >= 1.0 || beta2 <= 0.0 || beta2 >= 1.0) {
    throw ContractError("OptimConfig: betas must lie in (0, 1)");
  }
  if (eps <= 0.0) throw ContractError("OptimConfig: eps must be > 0");
  if (max_epochs < 1) throw ContractError("OptimConfig: max_epochs must be >= 1");
  if (warmup_epochs < 0 || warmup_epochs >= max_epochs) {
    throw ContractError("OptimConfig: warmup_epochs must lie in [0, max_epochs)");
  }
  if (weight_decay < 0.0) throw ContractError("OptimConfig: weight_decay must be >= 0");
}

double effective_lr(const OptimConfig& config) {
  config.validate();
  return config.base_lr * static_cast<double>(config.batch_size * 2) / 256.0;
}

double lr_at(int epoch, const OptimConfig& config) {
  config.validate();
  if (epoch < 0 || epoch > config.max_epochs) {
    throw ContractError("lr_at: epoch " + std::to_string(epoch) +
                        " outside [0, " + std::to_string(config.max_epochs) + "]");
  }
  const double peak = effective_lr(config);
  if (epoch < config.warmup_epochs) {
    return peak * static_cast<double>(epoch) /
           static_cast<double>(config.warmup_epochs);
  }
  const double progress =
      static_cast<double>(epoch - config.warmup_epochs) /
      static_cast<double>(config.max_epochs - config.warmup_epochs);
  return config.lr_min +
         (peak - config.lr_min) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

AdamW::AdamW(ParamList params, const OptimConfig& config)
    : params_(std::move(params)), config_(config) {
  config_.validate();
  slots_.reserve(params_.size());
  for (const ParamRef& p : params_) {
    Slot s;
    s.m.assign(p.tensor.data().size(), 0.0);
    s.v.assign(p.tensor.data().size(), 0.0);
    slots_.push_back(std::move(s));
  }
}

void AdamW::step(double lr) {
  if (lr < 0.0) throw ContractError("AdamW::step: lr must be >= 0");
  for (const ParamRef& p : params_) {
    if (!p.tensor.has_grad()) {
      throw ContractError("AdamW::step: parameter '" + p.name + "' has no gradient");
    }
    for (double g : p.tensor.grad()) {
      if (!std::isfinite(g)) {
        throw NumericError("AdamW::step: non-finite gradient on '" + p.name + "'");
      }
    }
  }

  ++step_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  for (size_t i = 0; i < params_.size(); ++i) {
    ParamRef& p = params_[i];
    Slot& s = slots_[i];
    auto& value = p.tensor.data();
    const auto& grad = p.tensor.grad();
    const double decay = p.decay ? lr * config_.weight_decay : 0.0;
    for (size_t j = 0; j < value.size(); ++j) {
      if (decay != 0.0) value[j] -= decay * value[j];
      s.m[j] = config_.beta1 * s.m[j] + (1.0 - config_.beta1) * grad[j];
      s.v[j] = config_.beta2 * s.v[j] + (1.0 - config_.beta2) * grad[j] * grad[j];
      const double m_hat = s.m[j] / bc1;
      const double v_hat = s.v[j] / bc2;
      value[j] -= lr * m_hat / (std::sqrt(v_hat) + config_.eps);
    }
  }
}

void AdamW::zero_grad() {
  for (ParamRef& p : params_) p.tensor.zero_grad();
}

}  // namespace fuzzyattn
