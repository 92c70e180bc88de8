// Brute-force reference implementations, deliberately written on different
// code paths than the library: the tests compare the two.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "sembed/losses.hpp"
#include "sembed/tensor.hpp"

namespace oracles {

// Rank of x[i] = (count below) + (ties + 1) / 2, O(n^2) on purpose.
inline std::vector<double> ranks_by_counting(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::size_t below = 0, equal = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (x[j] < x[i]) ++below;
      if (x[j] == x[i]) ++equal;
    }
    r[i] = static_cast<double>(below) +
           (static_cast<double>(equal) + 1.0) / 2.0;
  }
  return r;
}

inline double pearson_direct(const std::vector<double>& a,
                             const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
    saa += a[i] * a[i];
    sbb += b[i] * b[i];
    sab += a[i] * b[i];
  }
  const double num = n * sab - sa * sb;
  const double den =
      std::sqrt(n * saa - sa * sa) * std::sqrt(n * sbb - sb * sb);
  return num / den;
}

inline double spearman(const std::vector<double>& x,
                       const std::vector<double>& y) {
  return pearson_direct(ranks_by_counting(x), ranks_by_counting(y));
}

inline double minkowski(const std::vector<double>& a,
                        const std::vector<double>& b, double p) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += std::pow(std::fabs(a[i] - b[i]), p);
  }
  return std::pow(acc, 1.0 / p);
}

// Exhaustive KNN: full distance list, explicit (distance, index) sort,
// linear-scan vote with the same documented tie rules.
inline std::string knn(const std::vector<std::vector<double>>& train,
                       const std::vector<std::string>& labels,
                       const std::vector<double>& query, std::size_t k,
                       double p) {
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    dist.emplace_back(minkowski(train[i], query, p), i);
  }
  std::sort(dist.begin(), dist.end());
  std::map<std::string, std::size_t> counts;
  for (std::size_t i = 0; i < k; ++i) ++counts[labels[dist[i].second]];
  std::size_t best = 0;
  for (const auto& [label, c] : counts) best = std::max(best, c);
  for (std::size_t i = 0; i < k; ++i) {
    if (counts[labels[dist[i].second]] == best) {
      return labels[dist[i].second];
    }
  }
  return {};
}

inline std::pair<std::size_t, double> select_k(
    const std::vector<std::vector<double>>& train,
    const std::vector<std::string>& train_labels,
    const std::vector<std::vector<double>>& val,
    const std::vector<std::string>& val_labels,
    const std::vector<std::size_t>& grid, double p) {
  std::size_t best_k = 0;
  double best_acc = -1.0;
  for (std::size_t k : grid) {
    if (k > train.size()) continue;
    std::size_t hits = 0;
    for (std::size_t q = 0; q < val.size(); ++q) {
      if (knn(train, train_labels, val[q], k, p) == val_labels[q]) ++hits;
    }
    const double acc = static_cast<double>(hits) /
                       static_cast<double>(val.size());
    if (acc > best_acc) {
      best_acc = acc;
      best_k = k;
    }
  }
  return {best_k, best_acc};
}

// Full-logit-table MNRL cross entropy.
inline double mnrl(const sembed::Tensor& a, const sembed::Tensor& p,
                   const sembed::Tensor& n, double scale) {
  const std::size_t b = a.dim(0), h = a.dim(1);
  auto row = [h](const sembed::Tensor& t, std::size_t r) {
    return std::vector<double>(t.values().begin() + r * h,
                               t.values().begin() + (r + 1) * h);
  };
  std::vector<std::vector<double>> logits(b, std::vector<double>(2 * b));
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      logits[i][j] = scale * sembed::cosine(row(a, i), row(p, j));
      logits[i][b + j] = scale * sembed::cosine(row(a, i), row(n, j));
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    double mx = logits[i][0];
    for (double v : logits[i]) mx = std::max(mx, v);
    double z = 0.0;
    for (double v : logits[i]) z += std::exp(v - mx);
    total += -(logits[i][i] - mx - std::log(z));
  }
  return total / static_cast<double>(b);
}

}  // namespace oracles
