#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <vector>

#include "sembed/errors.hpp"
#include "sembed/gradcheck.hpp"
#include "sembed/pooling.hpp"
#include "sembed/rng.hpp"

using namespace sembed;

namespace {

Tensor random_hidden(std::size_t b, std::size_t t, std::size_t h, Rng& rng) {
  std::vector<double> v(b * t * h);
  for (auto& x : v) x = rng.uniform() * 2.0 - 1.0;
  return Tensor({b, t, h}, std::move(v));
}

// mask rows: prefix of `len` ones
std::vector<int> prefix_mask(std::size_t b, std::size_t t,
                             const std::vector<std::size_t>& lens) {
  std::vector<int> m(b * t, 0);
  for (std::size_t r = 0; r < b; ++r) {
    for (std::size_t p = 0; p < lens[r]; ++p) m[r * t + p] = 1;
  }
  return m;
}

}  // namespace

TEST_CASE("strategy names parse and print round-trip") {
  for (auto s : {PoolingStrategy::Cls, PoolingStrategy::Mean,
                 PoolingStrategy::Max}) {
    CHECK(parse_pooling(pooling_name(s)) == s);
  }
  CHECK_THROWS_AS(parse_pooling("avg"), InputError);
}

TEST_CASE("single-position rows make all strategies agree") {
  Rng rng(3);
  Tensor hidden = random_hidden(2, 1, 4, rng);
  std::vector<int> mask = {1, 1};
  for (auto s : {PoolingStrategy::Cls, PoolingStrategy::Mean,
                 PoolingStrategy::Max}) {
    Tensor out = pool(hidden, mask, s);
    CHECK(out.shape() == std::vector<std::size_t>{2, 4});
    CHECK(out.values() == hidden.values());
  }
}

TEST_CASE("mean of v and -v is zero") {
  std::vector<double> v = {1.0, -2.0, 3.0};
  std::vector<double> data;
  for (double x : v) data.push_back(x);
  for (double x : v) data.push_back(-x);
  Tensor hidden({1, 2, 3}, data);
  Tensor out = pool(hidden, {1, 1}, PoolingStrategy::Mean);
  for (double x : out.values()) CHECK(x == 0.0);
}

TEST_CASE("max with a padded row equals max on the unpadded row") {
  Rng rng(9);
  Tensor narrow = random_hidden(1, 3, 5, rng);
  std::vector<double> wide_data = narrow.values();
  wide_data.resize(1 * 6 * 5, 123.0);  // junk in padded positions
  Tensor wide({1, 6, 5}, wide_data);
  Tensor a = pool(narrow, prefix_mask(1, 3, {3}), PoolingStrategy::Max);
  Tensor b = pool(wide, prefix_mask(1, 6, {3}), PoolingStrategy::Max);
  CHECK(a.values() == b.values());
}

TEST_CASE("padding invariance is exact for every strategy") {
  Rng rng(17);
  for (int it = 0; it < 25; ++it) {
    std::size_t b = 1 + rng.index(3), t = 2 + rng.index(4),
                h = 1 + rng.index(6);
    std::vector<std::size_t> lens(b);
    for (auto& l : lens) l = 1 + rng.index(t);
    Tensor narrow = random_hidden(b, t, h, rng);
    const std::size_t wide_t = t + 1 + rng.index(3);
    std::vector<double> wide_data(b * wide_t * h);
    for (auto& x : wide_data) x = rng.uniform() * 100.0;
    for (std::size_t r = 0; r < b; ++r) {
      for (std::size_t p = 0; p < t; ++p) {
        for (std::size_t j = 0; j < h; ++j) {
          wide_data[(r * wide_t + p) * h + j] =
              narrow.values()[(r * t + p) * h + j];
        }
      }
    }
    Tensor wide({b, wide_t, h}, std::move(wide_data));
    for (auto s : {PoolingStrategy::Cls, PoolingStrategy::Mean,
                   PoolingStrategy::Max}) {
      Tensor x = pool(narrow, prefix_mask(b, t, lens), s);
      Tensor y = pool(wide, prefix_mask(b, wide_t, lens), s);
      CHECK(x.values() == y.values());
    }
  }
}

TEST_CASE("mean output sits inside the coordinatewise hull of masked rows") {
  Rng rng(23);
  std::size_t b = 2, t = 5, h = 4;
  Tensor hidden = random_hidden(b, t, h, rng);
  std::vector<std::size_t> lens = {3, 5};
  auto mask = prefix_mask(b, t, lens);
  Tensor out = pool(hidden, mask, PoolingStrategy::Mean);
  for (std::size_t r = 0; r < b; ++r) {
    for (std::size_t j = 0; j < h; ++j) {
      double lo = 1e300, hi = -1e300;
      for (std::size_t p = 0; p < lens[r]; ++p) {
        lo = std::min(lo, hidden.values()[(r * t + p) * h + j]);
        hi = std::max(hi, hidden.values()[(r * t + p) * h + j]);
      }
      CHECK(out.values()[r * h + j] >= lo - 1e-15);
      CHECK(out.values()[r * h + j] <= hi + 1e-15);
    }
  }
}

TEST_CASE("pool gradients pass finite-difference checks") {
  Rng rng(31);
  Tensor hidden = random_hidden(2, 4, 3, rng);  // random: ties have measure 0
  auto mask = prefix_mask(2, 4, {3, 4});
  std::vector<double> w(2 * 3);
  for (auto& x : w) x = rng.uniform() * 2.0 - 1.0;
  for (auto s : {PoolingStrategy::Cls, PoolingStrategy::Mean,
                 PoolingStrategy::Max}) {
    auto f = [&](Tape&, const Tensor& x) {
      Tensor wt(std::vector<std::size_t>{2, 3}, w);
      return sum(mul(pool(x, mask, s), wt));
    };
    CHECK(finite_diff_check(f, hidden, 1e-6).max_rel_error < 1e-6);
  }
}

TEST_CASE("max subgradient at a tie routes to the lowest position") {
  Tensor hidden({1, 3, 1}, {2.0, 5.0, 5.0});
  Tape tape;
  tape.watch(hidden);
  Tensor loss = sum(pool(hidden, {1, 1, 1}, PoolingStrategy::Max));
  tape.backward(loss);
  CHECK(hidden.grad()[0] == 0.0);
  CHECK(hidden.grad()[1] == 1.0);
  CHECK(hidden.grad()[2] == 0.0);
}

TEST_CASE("all-zero mask row is rejected") {
  Rng rng(37);
  Tensor hidden = random_hidden(2, 3, 2, rng);
  std::vector<int> mask = {1, 1, 1, 0, 0, 0};
  CHECK_THROWS_AS(pool(hidden, mask, PoolingStrategy::Mean), InputError);
}

TEST_CASE("dropping specials averages interior tokens only") {
  // row: CLS tok1 tok2 SEP -> mean of positions 1 and 2
  Tensor hidden({1, 4, 1}, {10.0, 2.0, 4.0, 10.0});
  std::vector<int> mask = {1, 1, 1, 1};
  Tensor with = pool(hidden, mask, PoolingStrategy::Mean, true);
  Tensor without = pool(hidden, mask, PoolingStrategy::Mean, false);
  CHECK(with.values()[0] == doctest::Approx(6.5));
  CHECK(without.values()[0] == doctest::Approx(3.0));
  // two-position row leaves nothing once specials are gone
  Tensor tiny({1, 2, 1}, {1.0, 2.0});
  CHECK_THROWS_AS(pool(tiny, {1, 1}, PoolingStrategy::Mean, false),
                  InputError);
}
