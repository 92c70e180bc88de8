#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "sembed/errors.hpp"
#include "sembed/evaluation.hpp"
#include "sembed/rng.hpp"

using namespace sembed;

namespace {

EmbeddingMatrix matrix_from(const std::vector<std::vector<double>>& rows) {
  EmbeddingMatrix m;
  m.dim = rows.empty() ? 0 : rows[0].size();
  for (const auto& r : rows) m.data.insert(m.data.end(), r.begin(), r.end());
  return m;
}

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform() * 2.0 - 1.0;
  return v;
}

}  // namespace

TEST_CASE("spearman trivial cases") {
  CHECK(spearman({1, 2, 3}, {1, 2, 3}) == doctest::Approx(1.0));
  CHECK(spearman({1, 2, 3}, {3, 2, 1}) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(spearman({1, 2}, {1}), InputError);
  CHECK_THROWS_AS(spearman({1, 1, 1}, {1, 2, 3}), NumericError);
}

TEST_CASE("spearman handles ties like the rank-then-pearson oracle") {
  std::vector<double> x = {1, 2, 2, 4};
  std::vector<double> y = {1, 3, 2, 4};
  CHECK(spearman(x, y) ==
        doctest::Approx(oracles::spearman(x, y)).epsilon(1e-12));

  Rng rng(3);
  for (int it = 0; it < 100; ++it) {
    std::size_t n = 2 + rng.index(20);
    std::vector<double> a(n), b(n);
    // coarse grid forces plenty of ties
    for (auto& v : a) v = static_cast<double>(rng.index(5));
    for (auto& v : b) v = static_cast<double>(rng.index(5));
    bool a_const = std::all_of(a.begin(), a.end(),
                               [&](double v) { return v == a[0]; });
    bool b_const = std::all_of(b.begin(), b.end(),
                               [&](double v) { return v == b[0]; });
    if (a_const || b_const) continue;
    CHECK(spearman(a, b) ==
          doctest::Approx(oracles::spearman(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("spearman is invariant under strictly increasing transforms") {
  Rng rng(9);
  std::vector<double> x = random_vec(40, rng), y = random_vec(40, rng);
  double base = spearman(x, y);
  std::vector<double> tx(x.size()), ty(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    tx[i] = std::exp(3.0 * x[i]) + 7.0;
    ty[i] = std::atan(y[i]) * 10.0;
  }
  CHECK(spearman(tx, ty) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("embedding_similarity_score endpoints") {
  // embedder maps "k<i>" to a vector whose cosine against "base" rises in i
  auto embedder = [](const std::string& text) -> std::vector<double> {
    if (text == "base") return {1.0, 0.0};
    double t = static_cast<double>(text.size()) * 0.1;
    return {std::cos(t), std::sin(t)};
  };
  std::vector<ScoredPair> aligned = {
      {"base", "a", 1.0}, {"base", "ab", 2.0}, {"base", "abc", 3.0}};
  // longer second sentence = lower cosine, so gold must be reversed for 1.0
  std::vector<ScoredPair> reversed = {
      {"base", "a", 3.0}, {"base", "ab", 2.0}, {"base", "abc", 1.0}};
  CHECK(embedding_similarity_score(embedder, reversed) ==
        doctest::Approx(1.0));
  CHECK(embedding_similarity_score(embedder, aligned) ==
        doctest::Approx(-1.0));
  CHECK_THROWS_AS(embedding_similarity_score(embedder, {aligned[0]}),
                  InputError);
}

TEST_CASE("random embedder on shuffled gold stays near zero") {
  Rng rng(123);
  auto embedder = [&](const std::string&) {
    // fresh random vector per call: pure noise against gold
    std::vector<double> v(8);
    for (auto& x : v) x = rng.uniform() * 2.0 - 1.0;
    return v;
  };
  std::vector<ScoredPair> pairs;
  for (int i = 0; i < 1000; ++i) {
    pairs.push_back({"s" + std::to_string(i), "t" + std::to_string(i),
                     static_cast<double>(rng.index(11)) * 0.5});
  }
  CHECK(std::fabs(embedding_similarity_score(embedder, pairs)) < 0.1);
}

TEST_CASE("minkowski specializations and oracle equivalence") {
  CHECK(minkowski({1, 2, 3}, {1, 2, 3}, 2.0) == 0.0);
  CHECK(minkowski({0, 0}, {1, 1}, 1.0) == doctest::Approx(2.0));
  CHECK(minkowski({0, 0}, {1, 1}, 2.0) == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(minkowski({1}, {1, 2}, 2.0), InputError);
  CHECK_THROWS_AS(minkowski({1}, {2}, 0.5), InputError);

  Rng rng(17);
  for (int it = 0; it < 50; ++it) {
    auto a = random_vec(6, rng), b = random_vec(6, rng);
    CHECK(minkowski(a, b, 3.0) ==
          doctest::Approx(oracles::minkowski(a, b, 3.0)).epsilon(1e-12));
  }
}

TEST_CASE("knn_predict fixed scenarios") {
  // 3 of class A at distance 1, 2 of class B at distance 0.5: k=3 -> B,B,A
  EmbeddingMatrix train = matrix_from({{1.0, 0.0},
                                       {0.0, 1.0},
                                       {-1.0, 0.0},
                                       {0.5, 0.0},
                                       {0.0, 0.5}});
  std::vector<std::string> labels = {"A", "A", "A", "B", "B"};
  CHECK(knn_predict(train, labels, {0.0, 0.0}, 3, 2.0) == "B");
  // query equals a training point, k=1
  CHECK(knn_predict(train, labels, {-1.0, 0.0}, 1, 2.0) == "A");
  // all labels identical
  std::vector<std::string> mono(5, "only");
  for (std::size_t k = 1; k <= 5; ++k) {
    CHECK(knn_predict(train, mono, {0.3, 0.3}, k, 2.0) == "only");
  }
  CHECK_THROWS_AS(knn_predict(train, labels, {0, 0}, 6, 2.0), InputError);
  CHECK_THROWS_AS(knn_predict(EmbeddingMatrix{}, {}, {0, 0}, 1, 2.0),
                  InputError);
}

TEST_CASE("knn_predict matches the exhaustive oracle") {
  Rng rng(31);
  for (int it = 0; it < 60; ++it) {
    const std::size_t n = 3 + rng.index(20), dim = 1 + rng.index(4);
    std::vector<std::vector<double>> rows;
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < n; ++i) {
      rows.push_back(random_vec(dim, rng));
      labels.push_back("c" + std::to_string(rng.index(3)));
    }
    const auto query = random_vec(dim, rng);
    const std::size_t k = 1 + rng.index(n);
    const double p = 1.0 + rng.uniform() * 2.0;
    CHECK(knn_predict(matrix_from(rows), labels, query, k, p) ==
          oracles::knn(rows, labels, query, k, p));
  }
}

TEST_CASE("knn prediction is invariant under common positive rescaling") {
  Rng rng(37);
  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  for (int i = 0; i < 12; ++i) {
    rows.push_back(random_vec(3, rng));
    labels.push_back(i % 2 ? "x" : "y");
  }
  auto query = random_vec(3, rng);
  for (double p : {1.0, 2.0, 3.5}) {
    auto base = knn_predict(matrix_from(rows), labels, query, 5, p);
    const double c = 17.5;
    auto scaled_rows = rows;
    for (auto& r : scaled_rows) {
      for (auto& v : r) v *= c;
    }
    auto scaled_query = query;
    for (auto& v : scaled_query) v *= c;
    CHECK(knn_predict(matrix_from(scaled_rows), labels, scaled_query, 5, p) ==
          base);
  }
}

TEST_CASE("select_k picks max accuracy with smallest-k tie breaking") {
  // validation identical to training: k=1 is a perfect self-match
  std::vector<std::vector<double>> rows = {{0, 0}, {1, 1}, {2, 2}, {3, 3}};
  std::vector<std::string> labels = {"a", "b", "a", "b"};
  KnnConfig cfg;
  cfg.k_grid = {1, 3};
  auto [k, acc] = select_k(matrix_from(rows), labels, matrix_from(rows),
                           labels, cfg);
  CHECK(k == 1);
  CHECK(acc == doctest::Approx(1.0));

  // single-class data: every k scores 1.0, the smallest wins even when the
  // grid arrives unsorted
  std::vector<std::string> mono(4, "m");
  KnnConfig cfg2;
  cfg2.k_grid = {7, 4, 3, 5};  // 5 and 7 exceed the train size of 4
  auto [k2, acc2] = select_k(matrix_from(rows), mono, matrix_from(rows),
                             mono, cfg2);
  CHECK(k2 == 3);
  CHECK(acc2 == doctest::Approx(1.0));
}

TEST_CASE("select_k matches a brute-force grid search on gaussian blobs") {
  Rng rng(41);
  for (int it = 0; it < 8; ++it) {
    std::vector<std::vector<double>> train, val;
    std::vector<std::string> train_labels, val_labels;
    for (int i = 0; i < 30; ++i) {
      const bool cls = rng.index(2) == 1;
      const double cx = cls ? 1.0 : -1.0;
      std::vector<double> v = {cx + rng.normal(0.0, 0.8),
                               rng.normal(0.0, 0.8)};
      if (i < 20) {
        train.push_back(v);
        train_labels.push_back(cls ? "pos" : "neg");
      } else {
        val.push_back(v);
        val_labels.push_back(cls ? "pos" : "neg");
      }
    }
    KnnConfig cfg;  // default odd grid 1..31, filtered to <= 20
    auto got = select_k(matrix_from(train), train_labels, matrix_from(val),
                        val_labels, cfg);
    auto expect = oracles::select_k(train, train_labels, val, val_labels,
                                    default_k_grid(), cfg.p);
    CHECK(got.first == expect.first);
    CHECK(got.second == doctest::Approx(expect.second).epsilon(1e-12));
  }
}

TEST_CASE("classify_dataset: train==test reaches accuracy 1 at k=1") {
  std::map<std::string, std::vector<double>> table = {
      {"alpha", {0.0, 0.0}}, {"beta", {5.0, 5.0}},
      {"gamma", {9.0, 0.0}}, {"delta", {0.0, 9.0}}};
  auto embedder = [&](const std::string& text) { return table.at(text); };
  DatasetSplit<LabeledText> splits;
  splits.train = {{"alpha", "lo"}, {"beta", "hi"}, {"gamma", "lo"},
                  {"delta", "hi"}};
  splits.validation = splits.train;
  splits.test = splits.train;
  KnnConfig cfg;
  cfg.k_grid = {1};
  auto result = classify_dataset(embedder, splits, cfg);
  CHECK(result.accuracy == doctest::Approx(1.0));
  CHECK(result.chosen_k == 1);
}

TEST_CASE("classify_dataset on permuted labels lands near chance") {
  Rng rng(57);
  // 3 balanced classes, labels carry no signal
  auto embedder = [&](const std::string&) { return random_vec(4, rng); };
  DatasetSplit<LabeledText> splits;
  for (int i = 0; i < 300; ++i) {
    LabeledText rec{"t" + std::to_string(i),
                    "c" + std::to_string(i % 3)};
    if (i < 180) splits.train.push_back(rec);
    else if (i < 240) splits.validation.push_back(rec);
    else splits.test.push_back(rec);
  }
  KnnConfig cfg;
  auto result = classify_dataset(embedder, splits, cfg);
  CHECK(result.accuracy >= 0.2);
  CHECK(result.accuracy <= 0.47);

  // determinism: identical inputs, identical outputs
  Rng rng2(57);
  auto embedder2 = [&](const std::string&) { return random_vec(4, rng2); };
  auto again = classify_dataset(embedder2, splits, cfg);
  CHECK(again.accuracy == result.accuracy);
  CHECK(again.chosen_k == result.chosen_k);
}

TEST_CASE("pairwise cosine report emits rows in input order") {
  std::map<std::string, std::vector<double>> table = {
      {"same", {1.0, 0.0}}, {"other", {0.0, 1.0}}, {"mix", {1.0, 1.0}}};
  auto embedder = [&](const std::string& text) { return table.at(text); };
  std::vector<std::pair<std::string, std::string>> pairs = {
      {"same", "same"}, {"same", "other"}, {"same", "mix"}};
  auto rows = pairwise_cosine_report(embedder, pairs);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].cosine == doctest::Approx(1.0));
  CHECK(rows[1].cosine == doctest::Approx(0.0));
  // recomputed outside the report path
  CHECK(rows[2].cosine ==
        doctest::Approx(cosine(table["same"], table["mix"])));
  CHECK(rows[0].text1 == "same");
  CHECK(rows[2].text2 == "mix");
}
