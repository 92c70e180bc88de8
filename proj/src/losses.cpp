#include "sembed/losses.hpp"

#include <algorithm>
#include <cmath>

#include "sembed/errors.hpp"

namespace sembed {

void LossConfig::validate() const {
  if (!(mnrl_scale > 0.0)) throw ConfigError("mnrl_scale must be > 0");
  if (!(sts_score_max > 0.0)) throw ConfigError("sts_score_max must be > 0");
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw InputError("cosine: dimension mismatch " + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()));
  }
  if (a.empty()) throw InputError("cosine: empty vectors");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) {
    throw NumericError("cosine: zero vector");
  }
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

Tensor mnrl_loss(const Tensor& anchors, const Tensor& positives,
                 const Tensor& hard_negatives, double scale) {
  if (anchors.rank() != 2 || positives.shape() != anchors.shape() ||
      hard_negatives.shape() != anchors.shape()) {
    throw ShapeError("mnrl_loss: anchors " + shape_str(anchors.shape()) +
                     ", positives " + shape_str(positives.shape()) +
                     ", negatives " + shape_str(hard_negatives.shape()) +
                     " must be equal B x h matrices");
  }
  if (!(scale > 0.0)) throw InputError("mnrl_loss: scale must be > 0");
  const std::size_t b = anchors.dim(0);
  Tensor anchor_unit = l2_normalize_rows(anchors);
  Tensor candidate_unit =
      l2_normalize_rows(concat_rows(positives, hard_negatives));
  // logits[i][j] = scale * cos(anchor_i, candidate_j), shape B x 2B
  Tensor logits =
      sembed::scale(matmul(anchor_unit, transpose(candidate_unit)), scale);
  std::vector<std::size_t> targets(b);
  for (std::size_t i = 0; i < b; ++i) targets[i] = i;
  return softmax_cross_entropy(logits, targets);
}

Tensor cosine_similarity_loss(const Tensor& u, const Tensor& v,
                              const std::vector<double>& gold,
                              double score_max) {
  if (u.rank() != 2 || v.shape() != u.shape()) {
    throw ShapeError("cosine_similarity_loss: u " + shape_str(u.shape()) +
                     " and v " + shape_str(v.shape()) +
                     " must be equal B x h matrices");
  }
  if (!(score_max > 0.0)) {
    throw InputError("cosine_similarity_loss: score_max must be > 0");
  }
  if (gold.size() != u.dim(0)) {
    throw InputError("cosine_similarity_loss: " + std::to_string(gold.size()) +
                     " gold scores for " + std::to_string(u.dim(0)) +
                     " rows");
  }
  std::vector<double> neg_target(gold.size());
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] < 0.0 || gold[i] > score_max) {
      throw InputError("cosine_similarity_loss: gold score " +
                       std::to_string(gold[i]) + " outside [0, " +
                       std::to_string(score_max) + "] at row " +
                       std::to_string(i));
    }
    neg_target[i] = -gold[i] / score_max;
  }
  Tensor diff = add_constant(rowwise_cosine(u, v), neg_target);
  return mean(mul(diff, diff));
}

}  // namespace sembed
