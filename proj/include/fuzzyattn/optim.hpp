#pragma once

#include <cstdint>
#include <vector>

#include "fuzzyattn/params.hpp"

namespace fuzzyattn {

struct OptimConfig {
  double base_lr = 1e-3;
  std::int64_t batch_size = 32;
  int max_epochs = 800;
  int warmup_epochs = 20;
  double weight_decay = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.95;
  double eps = 1e-8;
  double lr_min = 0.0;
  std::uint64_t seed = 0;

  void validate() const;  // throws ContractError
};

/// Peak learning rate after linear batch-size scaling:
/// base_lr * (batch_size * 2) / 256.
double effective_lr(const OptimConfig& config);

/// Linear ramp from 0 to the peak over the warmup, then half-cosine decay
/// down to lr_min at max_epochs. Continuous at the warmup boundary.
double lr_at(int epoch, const OptimConfig& config);

/// Adam with decoupled weight decay. Decay-exempt parameters (ParamRef::decay
/// == false) receive the plain Adam update only.
class AdamW {
 public:
  AdamW(ParamList params, const OptimConfig& config);

  /// One update from the gradients currently on the parameters. Throws
  /// NumericError on any non-finite gradient, leaving parameters untouched.
  void step(double lr);

  void zero_grad();
  std::int64_t step_count() const { return step_; }

 private:
  struct Slot {
    std::vector<double> m, v;
  };

  ParamList params_;
  OptimConfig config_;
  std::vector<Slot> slots_;
  std::int64_t step_ = 0;
};

}  // namespace fuzzyattn
