#include "sembed/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>

#include "sembed/errors.hpp"
#include "sembed/kernels.hpp"
#include "sembed/losses.hpp"

namespace sembed {

Embedder make_encoder_embedder(EncoderModel model, Vocabulary vocab,
                               PoolingStrategy pooling) {
  auto shared_model = std::make_shared<EncoderModel>(std::move(model));
  auto shared_vocab = std::make_shared<Vocabulary>(std::move(vocab));
  return [shared_model, shared_vocab, pooling](const std::string& text) {
    TokenBatch batch = encode_batch({text}, *shared_vocab,
                                    shared_model->config().max_len);
    Tensor pooled = pool(encoder_forward(*shared_model, batch), batch.mask,
                         pooling);
    return pooled.values();
  };
}

Embedder make_wordvec_embedder(WordVectorTable table) {
  auto shared = std::make_shared<WordVectorTable>(std::move(table));
  return [shared](const std::string& text) {
    return sentence_embed_avg(*shared, text);
  };
}

std::vector<std::size_t> default_k_grid() {
  std::vector<std::size_t> grid;
  for (std::size_t k = 1; k <= 31; k += 2) grid.push_back(k);
  return grid;
}

std::vector<std::size_t> KnnConfig::effective_grid(
    std::size_t train_size) const {
  if (!(p >= 1.0)) throw InputError("knn: Minkowski order p must be >= 1");
  std::vector<std::size_t> grid = k_grid.empty() ? default_k_grid() : k_grid;
  std::vector<std::size_t> out;
  for (std::size_t k : grid) {
    if (k == 0) throw InputError("knn: k values must be positive");
    if (k <= train_size) out.push_back(k);
  }
  if (out.empty()) {
    throw InputError("knn: no k in the grid fits a training set of " +
                     std::to_string(train_size));
  }
  // ascending and unique so accuracy ties resolve to the smallest k
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

EmbeddingMatrix embed_all(const Embedder& embedder,
                          const std::vector<LabeledText>& records) {
  EmbeddingMatrix m;
  for (const auto& rec : records) {
    std::vector<double> v = embedder(rec.text);
    if (m.dim == 0) {
      m.dim = v.size();
      m.data.reserve(records.size() * m.dim);
    }
    if (v.size() != m.dim) {
      throw NumericError("embedder returned inconsistent dimensions");
    }
    m.data.insert(m.data.end(), v.begin(), v.end());
  }
  return m;
}

// --- spearman -----------------------------------------------------------------

namespace {

// Average ranks, 1-based; ties share the mean rank of their span.
std::vector<double> average_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double shared = (static_cast<double>(i) + static_cast<double>(j)) /
                              2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) {
    throw InputError("spearman: length mismatch " + std::to_string(x.size()) +
                     " vs " + std::to_string(y.size()));
  }
  if (x.size() < 2) throw InputError("spearman: need at least 2 samples");
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw NumericError("spearman: rank variance is zero, correlation "
                       "undefined");
  }
  return sxy / std::sqrt(sxx * syy);
}

double embedding_similarity_score(const Embedder& embedder,
                                  const std::vector<ScoredPair>& pairs) {
  if (pairs.size() < 2) {
    throw InputError("embedding_similarity_score: need at least 2 pairs");
  }
  std::vector<double> predicted, gold;
  predicted.reserve(pairs.size());
  gold.reserve(pairs.size());
  for (const auto& pair : pairs) {
    predicted.push_back(
        cosine(embedder(pair.sentence1), embedder(pair.sentence2)));
    gold.push_back(pair.score);
  }
  return spearman(predicted, gold);
}

// --- knn ----------------------------------------------------------------------

double minkowski(const std::vector<double>& a, const std::vector<double>& b,
                 double p) {
  if (a.size() != b.size()) {
    throw InputError("minkowski: dimension mismatch " +
                     std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  }
  if (!(p >= 1.0)) throw InputError("minkowski: p must be >= 1");
  if (a.empty()) throw InputError("minkowski: empty vectors");
  double out = 0.0;
  kernels::pairwise_minkowski(a.data(), 1, b.data(), 1, a.size(), p, &out);
  return out;
}

namespace {

// Training indices ordered by (distance, index) for one query row of a
// precomputed distance matrix.
std::vector<std::size_t> neighbor_order(const double* dist, std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dist[a] != dist[b]) return dist[a] < dist[b];
    return a < b;
  });
  return order;
}

std::string vote(const std::vector<std::string>& labels,
                 const std::vector<std::size_t>& order, std::size_t k) {
  std::map<std::string, std::size_t> counts;
  for (std::size_t i = 0; i < k; ++i) ++counts[labels[order[i]]];
  std::size_t best = 0;
  for (const auto& [label, count] : counts) best = std::max(best, count);
  // nearest neighbor whose label is in the tied-for-best set
  for (std::size_t i = 0; i < k; ++i) {
    if (counts[labels[order[i]]] == best) return labels[order[i]];
  }
  throw ContractError("knn vote: unreachable");
}

}  // namespace

std::string knn_predict(const EmbeddingMatrix& train,
                        const std::vector<std::string>& labels,
                        const std::vector<double>& query, std::size_t k,
                        double p) {
  if (train.rows() == 0) throw InputError("knn_predict: empty training set");
  if (labels.size() != train.rows()) {
    throw InputError("knn_predict: " + std::to_string(labels.size()) +
                     " labels for " + std::to_string(train.rows()) + " rows");
  }
  if (k == 0 || k > train.rows()) {
    throw InputError("knn_predict: k=" + std::to_string(k) +
                     " outside [1, " + std::to_string(train.rows()) + "]");
  }
  if (query.size() != train.dim) {
    throw InputError("knn_predict: query dimension mismatch");
  }
  std::vector<double> dist(train.rows());
  kernels::pairwise_minkowski(query.data(), 1, train.data.data(), train.rows(),
                              train.dim, p, dist.data());
  return vote(labels, neighbor_order(dist.data(), train.rows()), k);
}

std::pair<std::size_t, double> select_k(
    const EmbeddingMatrix& train, const std::vector<std::string>& train_labels,
    const EmbeddingMatrix& val, const std::vector<std::string>& val_labels,
    const KnnConfig& cfg) {
  if (train.rows() == 0 || val.rows() == 0) {
    throw InputError("select_k: empty split");
  }
  if (train.dim != val.dim) {
    throw InputError("select_k: train/validation dimension mismatch");
  }
  const std::vector<std::size_t> grid = cfg.effective_grid(train.rows());

  // one distance matrix + neighbor ordering, shared across the whole grid
  std::vector<double> dist(val.rows() * train.rows());
  kernels::pairwise_minkowski(val.data.data(), val.rows(), train.data.data(),
                              train.rows(), train.dim, cfg.p, dist.data());
  std::vector<std::vector<std::size_t>> orders;
  orders.reserve(val.rows());
  for (std::size_t q = 0; q < val.rows(); ++q) {
    orders.push_back(neighbor_order(dist.data() + q * train.rows(),
                                    train.rows()));
  }

  std::size_t best_k = grid.front();
  double best_acc = -1.0;
  for (std::size_t k : grid) {
    std::size_t hits = 0;
    for (std::size_t q = 0; q < val.rows(); ++q) {
      if (vote(train_labels, orders[q], k) == val_labels[q]) ++hits;
    }
    const double acc = static_cast<double>(hits) /
                       static_cast<double>(val.rows());
    if (acc > best_acc) {  // strict: ties keep the smallest k
      best_acc = acc;
      best_k = k;
    }
  }
  return {best_k, best_acc};
}

ClassifyResult classify_dataset(const Embedder& embedder,
                                const DatasetSplit<LabeledText>& splits,
                                const KnnConfig& cfg) {
  if (splits.train.empty() || splits.validation.empty() ||
      splits.test.empty()) {
    throw InputError("classify_dataset: every split must be non-empty");
  }
  auto labels_of = [](const std::vector<LabeledText>& recs) {
    std::vector<std::string> out;
    out.reserve(recs.size());
    for (const auto& r : recs) out.push_back(r.label);
    return out;
  };
  const EmbeddingMatrix train = embed_all(embedder, splits.train);
  const EmbeddingMatrix val = embed_all(embedder, splits.validation);
  const EmbeddingMatrix test = embed_all(embedder, splits.test);
  const std::vector<std::string> train_labels = labels_of(splits.train);

  auto [k, val_acc] = select_k(train, train_labels, val,
                               labels_of(splits.validation), cfg);

  std::vector<double> dist(test.rows() * train.rows());
  kernels::pairwise_minkowski(test.data.data(), test.rows(),
                              train.data.data(), train.rows(), train.dim,
                              cfg.p, dist.data());
  const std::vector<std::string> test_labels = labels_of(splits.test);
  std::size_t hits = 0;
  for (std::size_t q = 0; q < test.rows(); ++q) {
    const auto order = neighbor_order(dist.data() + q * train.rows(),
                                      train.rows());
    if (vote(train_labels, order, k) == test_labels[q]) ++hits;
  }
  ClassifyResult result;
  result.accuracy = static_cast<double>(hits) /
                    static_cast<double>(test.rows());
  result.chosen_k = k;
  result.validation_accuracy = val_acc;
  return result;
}

std::vector<PairCosineRow> pairwise_cosine_report(
    const Embedder& embedder,
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::vector<PairCosineRow> rows;
  rows.reserve(pairs.size());
  for (const auto& [a, b] : pairs) {
    rows.push_back({a, b, cosine(embedder(a), embedder(b))});
  }
  return rows;
}

}  // namespace sembed
