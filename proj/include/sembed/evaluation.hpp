#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sembed/datasets.hpp"
#include "sembed/encoder.hpp"
#include "sembed/pooling.hpp"
#include "sembed/static_embed.hpp"
#include "sembed/tokenizer.hpp"

namespace sembed {

// Any text-to-vector source: trained encoder, word-vector average, ...
using Embedder = std::function<std::vector<double>(const std::string&)>;

Embedder make_encoder_embedder(EncoderModel model, Vocabulary vocab,
                               PoolingStrategy pooling);
Embedder make_wordvec_embedder(WordVectorTable table);

struct KnnConfig {
  double p = 2.0;                   // Minkowski order
  std::vector<std::size_t> k_grid;  // empty = odd 1..31

  std::vector<std::size_t> effective_grid(std::size_t train_size) const;
};

std::vector<std::size_t> default_k_grid();

// Fixed-width embedding rows aligned with external labels.
struct EmbeddingMatrix {
  std::size_t dim = 0;
  std::vector<double> data;  // rows x dim
  std::size_t rows() const { return dim == 0 ? 0 : data.size() / dim; }
};

EmbeddingMatrix embed_all(const Embedder& embedder,
                          const std::vector<LabeledText>& records);

struct PairCosineRow {
  std::string text1;
  std::string text2;
  double cosine = 0.0;
};

struct EvalReport {
  std::optional<double> embedding_similarity;
  std::optional<double> accuracy;
  std::optional<std::size_t> chosen_k;
  std::vector<PairCosineRow> pair_cosines;
};

// Pearson correlation of average ranks; ties get the mean rank of their
// span. Zero rank variance on either side is a NumericError.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// spearman(cosine of embedded pairs, gold scores).
double embedding_similarity_score(const Embedder& embedder,
                                  const std::vector<ScoredPair>& pairs);

// (sum |a_i - b_i|^p)^(1/p); shares its arithmetic with the KNN kernels so
// the scalar op and the batched distances agree bitwise.
double minkowski(const std::vector<double>& a, const std::vector<double>& b,
                 double p);

// k nearest by Minkowski distance (distance ties -> lower training index),
// majority vote (vote ties -> label of the nearest tied-label neighbor).
std::string knn_predict(const EmbeddingMatrix& train,
                        const std::vector<std::string>& labels,
                        const std::vector<double>& query, std::size_t k,
                        double p);

// Accuracy of every k in the grid on the validation split; returns the best
// (smallest k on ties) with its validation accuracy.
std::pair<std::size_t, double> select_k(
    const EmbeddingMatrix& train, const std::vector<std::string>& train_labels,
    const EmbeddingMatrix& val, const std::vector<std::string>& val_labels,
    const KnnConfig& cfg);

struct ClassifyResult {
  double accuracy = 0.0;
  std::size_t chosen_k = 0;
  double validation_accuracy = 0.0;
};

// Embeds every split once, picks k on validation, reports test accuracy.
ClassifyResult classify_dataset(const Embedder& embedder,
                                const DatasetSplit<LabeledText>& splits,
                                const KnnConfig& cfg);

std::vector<PairCosineRow> pairwise_cosine_report(
    const Embedder& embedder,
    const std::vector<std::pair<std::string, std::string>>& pairs);

}  // namespace sembed
