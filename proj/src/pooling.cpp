#include "sembed/pooling.hpp"

#include <limits>
#include <memory>

#include "sembed/errors.hpp"

namespace sembed {

PoolingStrategy parse_pooling(const std::string& name) {
  if (name == "cls") return PoolingStrategy::Cls;
  if (name == "mean") return PoolingStrategy::Mean;
  if (name == "max") return PoolingStrategy::Max;
  throw InputError("unknown pooling strategy '" + name +
                   "' (expected cls, mean or max)");
}

std::string pooling_name(PoolingStrategy strategy) {
  switch (strategy) {
    case PoolingStrategy::Cls: return "cls";
    case PoolingStrategy::Mean: return "mean";
    case PoolingStrategy::Max: return "max";
  }
  throw ContractError("corrupt PoolingStrategy value");
}

Tensor pool(const Tensor& hidden, const std::vector<int>& mask,
            PoolingStrategy strategy, bool include_specials) {
  if (hidden.rank() != 3) {
    throw ShapeError("pool: hidden must be B x T x h, got " +
                     shape_str(hidden.shape()));
  }
  const std::size_t b = hidden.dim(0), t = hidden.dim(1), h = hidden.dim(2);
  if (mask.size() != b * t) {
    throw ShapeError("pool: mask has " + std::to_string(mask.size()) +
                     " entries for a " + std::to_string(b) + "x" +
                     std::to_string(t) + " batch");
  }

  // Effective positions per row; dropping specials removes the first and
  // last masked positions ([CLS] and [SEP]).
  auto effective = std::make_shared<std::vector<char>>(b * t, 0);
  for (std::size_t r = 0; r < b; ++r) {
    std::size_t first = t, last = t;
    for (std::size_t p = 0; p < t; ++p) {
      if (mask[r * t + p]) {
        if (first == t) first = p;
        last = p;
      }
    }
    if (first == t) {
      throw InputError("pool: all-zero mask in row " + std::to_string(r));
    }
    std::size_t count = 0;
    for (std::size_t p = 0; p < t; ++p) {
      if (!mask[r * t + p]) continue;
      if (!include_specials && (p == first || p == last)) continue;
      (*effective)[r * t + p] = 1;
      ++count;
    }
    if (count == 0) {
      throw InputError("pool: row " + std::to_string(r) +
                       " has no tokens left after dropping specials");
    }
  }

  Tensor out({b, h});
  auto& ov = out.mutable_values();
  const auto& hv = hidden.values();
  auto argmax = std::make_shared<std::vector<std::size_t>>();
  auto counts = std::make_shared<std::vector<double>>();

  switch (strategy) {
    case PoolingStrategy::Cls:
      for (std::size_t r = 0; r < b; ++r) {
        for (std::size_t j = 0; j < h; ++j) {
          ov[r * h + j] = hv[(r * t + 0) * h + j];
        }
      }
      break;
    case PoolingStrategy::Mean: {
      counts->resize(b, 0.0);
      for (std::size_t r = 0; r < b; ++r) {
        double count = 0.0;
        for (std::size_t p = 0; p < t; ++p) {
          if (!(*effective)[r * t + p]) continue;
          count += 1.0;
          for (std::size_t j = 0; j < h; ++j) {
            ov[r * h + j] += hv[(r * t + p) * h + j];
          }
        }
        (*counts)[r] = count;
        for (std::size_t j = 0; j < h; ++j) ov[r * h + j] /= count;
      }
      break;
    }
    case PoolingStrategy::Max: {
      argmax->resize(b * h);
      for (std::size_t r = 0; r < b; ++r) {
        for (std::size_t j = 0; j < h; ++j) {
          double best = -std::numeric_limits<double>::infinity();
          std::size_t best_pos = 0;
          for (std::size_t p = 0; p < t; ++p) {
            if (!(*effective)[r * t + p]) continue;
            const double v = hv[(r * t + p) * h + j];
            if (v > best) {  // strict: ties keep the lowest position
              best = v;
              best_pos = p;
            }
          }
          ov[r * h + j] = best;
          (*argmax)[r * h + j] = best_pos;
        }
      }
      break;
    }
  }

  Tape* tape = hidden.tracked() ? hidden.tape() : nullptr;
  if (!tape) return out;
  return tape->record(
      std::move(out), {&hidden},
      [strategy, effective, argmax, counts, b, t, h](
          const std::vector<double>& g, const Tape::GradSlots& in) {
        if (!in[0]) return;
        auto& dh = *in[0];
        switch (strategy) {
          case PoolingStrategy::Cls:
            for (std::size_t r = 0; r < b; ++r) {
              for (std::size_t j = 0; j < h; ++j) {
                dh[(r * t + 0) * h + j] += g[r * h + j];
              }
            }
            break;
          case PoolingStrategy::Mean:
            for (std::size_t r = 0; r < b; ++r) {
              const double inv = 1.0 / (*counts)[r];
              for (std::size_t p = 0; p < t; ++p) {
                if (!(*effective)[r * t + p]) continue;
                for (std::size_t j = 0; j < h; ++j) {
                  dh[(r * t + p) * h + j] += g[r * h + j] * inv;
                }
              }
            }
            break;
          case PoolingStrategy::Max:
            for (std::size_t r = 0; r < b; ++r) {
              for (std::size_t j = 0; j < h; ++j) {
                const std::size_t p = (*argmax)[r * h + j];
                dh[(r * t + p) * h + j] += g[r * h + j];
              }
            }
            break;
        }
      });
}

}  // namespace sembed
