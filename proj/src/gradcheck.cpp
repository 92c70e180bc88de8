#include "sembed/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace sembed {

namespace {

double eval_at(const ScalarFn& f, const Tensor& x, std::size_t coord,
               double delta) {
  std::vector<double> vals = x.values();
  vals[coord] += delta;
  Tensor shifted(x.shape(), std::move(vals));
  Tape tape;
  Tensor loss = f(tape, shifted);
  return loss.scalar_value();
}

}  // namespace

FiniteDiffReport finite_diff_check(const ScalarFn& f, const Tensor& x,
                                   double step,
                                   const std::vector<std::size_t>& coords) {
  if (!(step > 0.0)) throw InputError("finite_diff_check: step must be > 0");
  std::vector<double> analytic;
  {
    Tape tape;
    Tensor watched = x;  // shares values; watch gives it its own grad slot
    tape.watch(watched);
    Tensor loss = f(tape, watched);
    if (loss.size() != 1) {
      throw ContractError("finite_diff_check: f must return a scalar");
    }
    tape.backward(loss);
    analytic = watched.grad();
  }
  FiniteDiffReport report;
  for (std::size_t c : coords) {
    double up = eval_at(f, x, c, step);
    double down = eval_at(f, x, c, -step);
    double numeric = (up - down) / (2.0 * step);
    double rel = std::fabs(analytic[c] - numeric) /
                 std::max(1.0, std::fabs(numeric));
    if (rel >= report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_index = c;
      report.analytic_at_worst = analytic[c];
      report.numeric_at_worst = numeric;
    }
  }
  return report;
}

FiniteDiffReport finite_diff_check(const ScalarFn& f, const Tensor& x,
                                   double step) {
  std::vector<std::size_t> coords(x.size());
  for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
  return finite_diff_check(f, x, step, coords);
}

}  // namespace sembed
