#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "sembed/errors.hpp"
#include "sembed/gradcheck.hpp"
#include "sembed/losses.hpp"
#include "sembed/rng.hpp"

using namespace sembed;

namespace {

Tensor random_rows(std::size_t b, std::size_t h, Rng& rng) {
  std::vector<double> v(b * h);
  for (auto& x : v) x = rng.uniform() * 2.0 - 1.0;
  return Tensor({b, h}, std::move(v));
}

std::vector<double> row_of(const Tensor& t, std::size_t r) {
  const std::size_t h = t.dim(1);
  return std::vector<double>(t.values().begin() + r * h,
                             t.values().begin() + (r + 1) * h);
}

// Brute-force oracle: materialize the full B x 2B logit table and compute
// the cross entropy directly.
double mnrl_oracle(const Tensor& a, const Tensor& p, const Tensor& n,
                   double scale) {
  const std::size_t b = a.dim(0);
  std::vector<std::vector<double>> logits(b, std::vector<double>(2 * b));
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      logits[i][j] = scale * cosine(row_of(a, i), row_of(p, j));
      logits[i][b + j] = scale * cosine(row_of(a, i), row_of(n, j));
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

}  // namespace

TEST_CASE("cosine basics and hand-computed value") {
  std::vector<double> a = {1, 2, 3};
  CHECK(cosine(a, a) == doctest::Approx(1.0));
  CHECK(cosine({1, 0}, {0, 1}) == doctest::Approx(0.0));
  // 32 / (sqrt(14) * sqrt(77))
  double expected = 32.0 / (std::sqrt(14.0) * std::sqrt(77.0));
  CHECK(cosine({1, 2, 3}, {4, 5, 6}) ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK(cosine({1, 2, 3}, {4, 5, 6}) == doctest::Approx(0.974632).epsilon(1e-6));
  CHECK_THROWS_AS(cosine({0, 0}, {1, 1}), NumericError);
  CHECK_THROWS_AS(cosine({1, 2}, {1, 2, 3}), InputError);
}

TEST_CASE("cosine stays within [-1, 1] under rounding") {
  Rng rng(12);
  for (int it = 0; it < 200; ++it) {
    std::vector<double> a(8), b(8);
    for (auto& x : a) x = rng.uniform() * 1e8;
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = a[i] * 3.0;
    double c = cosine(a, b);
    CHECK(c <= 1.0);
    CHECK(c >= -1.0);
  }
}

TEST_CASE("mnrl two-candidate closed form") {
  // cos(a,p) = 1, cos(a,n) = 0, scale 20 -> ln(1 + e^-20)
  Tensor a({1, 2}, {1, 0});
  Tensor p({1, 2}, {1, 0});
  Tensor n({1, 2}, {0, 1});
  double loss = mnrl_loss(a, p, n, 20.0).scalar_value();
  double expected = std::log1p(std::exp(-20.0));
  CHECK(loss == doctest::Approx(expected).epsilon(1e-12));
  CHECK(loss == doctest::Approx(2.061e-9).epsilon(1e-3));
}

TEST_CASE("mnrl symmetric tie gives ln 2") {
  Tensor a({1, 3}, {1, 2, 3});
  Tensor p({1, 3}, {0.5, 0.5, 0.5});
  Tensor n = p;
  double loss = mnrl_loss(a, p, n, 20.0).scalar_value();
  CHECK(loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("mnrl matches the brute-force oracle on random batches") {
  Rng rng(77);
  for (int it = 0; it < 30; ++it) {
    std::size_t b = 1 + rng.index(5), h = 2 + rng.index(6);
    Tensor a = random_rows(b, h, rng);
    Tensor p = random_rows(b, h, rng);
    Tensor n = random_rows(b, h, rng);
    double got = mnrl_loss(a, p, n, 20.0).scalar_value();
    double expected = mnrl_oracle(a, p, n, 20.0);
    CHECK(got == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("mnrl is non-negative and ln(2B) on identical candidates") {
  Rng rng(5);
  for (std::size_t b : {std::size_t{1}, std::size_t{2}, std::size_t{4}}) {
    Tensor a = random_rows(b, 4, rng);
    std::vector<double> same;
    for (std::size_t r = 0; r < b; ++r) {
      same.insert(same.end(), {0.3, -0.1, 0.8, 0.2});
    }
    Tensor p({b, 4}, same);
    Tensor n({b, 4}, same);
    double loss = mnrl_loss(a, p, n, 20.0).scalar_value();
    CHECK(loss >= 0.0);
    CHECK(loss ==
          doctest::Approx(std::log(2.0 * static_cast<double>(b)))
              .epsilon(1e-12));
  }
}

TEST_CASE("mnrl is invariant to positive rescaling of individual rows") {
  Rng rng(13);
  Tensor a = random_rows(3, 5, rng);
  Tensor p = random_rows(3, 5, rng);
  Tensor n = random_rows(3, 5, rng);
  double base = mnrl_loss(a, p, n, 20.0).scalar_value();

  auto rescale_rows = [&](const Tensor& t) {
    std::vector<double> v = t.values();
    for (std::size_t r = 0; r < 3; ++r) {
      double c = 0.1 + rng.uniform() * 10.0;
      for (std::size_t j = 0; j < 5; ++j) v[r * 5 + j] *= c;
    }
    return Tensor({3, 5}, v);
  };
  double scaled = mnrl_loss(rescale_rows(a), rescale_rows(p), rescale_rows(n),
                            20.0).scalar_value();
  CHECK(std::fabs(base - scaled) < 1e-10);
}

TEST_CASE("mnrl rejects zero-norm rows") {
  Tensor a({1, 2}, {0, 0});
  Tensor p({1, 2}, {1, 0});
  CHECK_THROWS_AS(mnrl_loss(a, p, p, 20.0), NumericError);
}

TEST_CASE("cosine_similarity_loss fixed cases") {
  Tensor u({1, 2}, {0.3, 0.4});
  CHECK(cosine_similarity_loss(u, u, {5.0}, 5.0).scalar_value() ==
        doctest::Approx(0.0).epsilon(1e-12));

  Tensor x({1, 2}, {1, 0});
  Tensor y({1, 2}, {0, 1});
  CHECK(cosine_similarity_loss(x, y, {0.0}, 5.0).scalar_value() ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(cosine_similarity_loss(x, y, {5.0}, 5.0).scalar_value() ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cosine_similarity_loss validates gold range") {
  Tensor u({1, 2}, {1, 0});
  CHECK_THROWS_AS(cosine_similarity_loss(u, u, {5.1}, 5.0), InputError);
  CHECK_THROWS_AS(cosine_similarity_loss(u, u, {-0.1}, 5.0), InputError);
}

TEST_CASE("cosine_similarity_loss is invariant to positive row rescaling") {
  Rng rng(19);
  Tensor u = random_rows(4, 3, rng);
  Tensor v = random_rows(4, 3, rng);
  std::vector<double> gold = {0.5, 2.0, 3.5, 5.0};
  double base = cosine_similarity_loss(u, v, gold, 5.0).scalar_value();
  std::vector<double> uv = u.values(), vv = v.values();
  for (std::size_t r = 0; r < 4; ++r) {
    double cu = 0.2 + rng.uniform() * 5.0, cv = 0.2 + rng.uniform() * 5.0;
    for (std::size_t j = 0; j < 3; ++j) {
      uv[r * 3 + j] *= cu;
      vv[r * 3 + j] *= cv;
    }
  }
  double scaled = cosine_similarity_loss(Tensor({4, 3}, uv),
                                         Tensor({4, 3}, vv), gold, 5.0)
                      .scalar_value();
  CHECK(std::fabs(base - scaled) < 1e-10);
}

TEST_CASE("both losses pass finite-difference gradient checks") {
  Rng rng(29);
  Tensor a = random_rows(3, 4, rng);
  Tensor p = random_rows(3, 4, rng);
  Tensor n = random_rows(3, 4, rng);
  for (int slot = 0; slot < 3; ++slot) {
    auto f = [&, slot](Tape&, const Tensor& x) {
      return mnrl_loss(slot == 0 ? x : a, slot == 1 ? x : p,
                       slot == 2 ? x : n, 20.0);
    };
    const Tensor& target = slot == 0 ? a : (slot == 1 ? p : n);
    CHECK(finite_diff_check(f, target, 1e-5).max_rel_error < 1e-6);
  }

  Tensor u = random_rows(3, 4, rng);
  Tensor v = random_rows(3, 4, rng);
  std::vector<double> gold = {1.0, 2.5, 4.0};
  auto fu = [&](Tape&, const Tensor& x) {
    return cosine_similarity_loss(x, v, gold, 5.0);
  };
  auto fv = [&](Tape&, const Tensor& x) {
    return cosine_similarity_loss(u, x, gold, 5.0);
  };
  CHECK(finite_diff_check(fu, u, 1e-5).max_rel_error < 1e-6);
  CHECK(finite_diff_check(fv, v, 1e-5).max_rel_error < 1e-6);
}
