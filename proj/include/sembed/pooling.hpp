#pragma once

#include <string>
#include <vector>

#include "sembed/tensor.hpp"

namespace sembed {

enum class PoolingStrategy { Cls, Mean, Max };

// CLI/config names: "cls", "mean", "max".
PoolingStrategy parse_pooling(const std::string& name);
std::string pooling_name(PoolingStrategy strategy);

// Collapses hidden[B x T x h] to one vector per row [B x h].
//   CLS:  position 0
//   MEAN: masked average; include_specials=false drops [CLS] and [SEP]
//   MAX:  elementwise max over masked positions, ties to the lowest index
// Differentiable; an all-zero mask row is an InputError.
Tensor pool(const Tensor& hidden, const std::vector<int>& mask,
            PoolingStrategy strategy, bool include_specials = true);

}  // namespace sembed
