#pragma once

#include <string>
#include <vector>

#include "fuzzyattn/tensor.hpp"

namespace fuzzyattn {

// A named learnable tensor. `decay` marks whether weight decay applies;
// biases, normalization affines, rule centers and widths are exempt so that
// regularization never drags the interpretable prototypes toward zero.
struct ParamRef {
  std::string name;
  Tensor tensor;
  bool decay = true;
};

using ParamList = std::vector<ParamRef>;

}  // namespace fuzzyattn
