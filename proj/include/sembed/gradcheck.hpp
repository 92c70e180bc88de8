#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "sembed/tensor.hpp"

namespace sembed {

struct FiniteDiffReport {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
};

// Scalar-valued function of one tensor. The tensor handed in is already
// watched on the tape for the analytic pass and untracked for the numeric
// evaluations; the function must go through tape-aware ops either way.
using ScalarFn = std::function<Tensor(Tape&, const Tensor&)>;

// Central-difference check of d(f)/d(x): relative error per coordinate is
// |analytic - numeric| / max(1, |numeric|); the report carries the max.
FiniteDiffReport finite_diff_check(const ScalarFn& f, const Tensor& x,
                                   double step);

// Same, restricted to the listed coordinates of x.
FiniteDiffReport finite_diff_check(const ScalarFn& f, const Tensor& x,
                                   double step,
                                   const std::vector<std::size_t>& coords);

}  // namespace sembed
