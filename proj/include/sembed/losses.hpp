#pragma once

#include <vector>

#include "sembed/tensor.hpp"

namespace sembed {

struct LossConfig {
  double mnrl_scale = 20.0;   // multiplier on cosine logits
  double sts_score_max = 5.0;

  void validate() const;
};

// Plain cosine similarity, clamped to [-1, 1] against rounding.
// Zero vectors are a NumericError.
double cosine(const std::vector<double>& a, const std::vector<double>& b);

// Multiple-negatives ranking loss. For anchor i the candidate set is every
// positive j=1..B followed by every hard negative j=1..B (2B candidates);
// logits are scale * cosine(anchor_i, candidate_j) and the loss is the mean
// cross-entropy against true class i.
Tensor mnrl_loss(const Tensor& anchors, const Tensor& positives,
                 const Tensor& hard_negatives, double scale);

// Mean squared error between rowwise cosine(u_i, v_i) and gold_i/score_max.
Tensor cosine_similarity_loss(const Tensor& u, const Tensor& v,
                              const std::vector<double>& gold,
                              double score_max);

}  // namespace sembed
