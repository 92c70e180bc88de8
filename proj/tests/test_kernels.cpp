#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "sembed/kernels.hpp"
#include "sembed/rng.hpp"

using namespace sembed;

namespace {

std::vector<double> random_buffer(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform() * 2.0 - 1.0;
  return v;
}

// Independent oracle: plain triple loop, written here on purpose.
std::vector<double> matmul_oracle(const std::vector<double>& a,
                                  const std::vector<double>& b, std::size_t m,
                                  std::size_t k, std::size_t n) {
  std::vector<double> c(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) {
        s += a[i * k + p] * b[p * n + j];
      }
      c[i * n + j] = s;
    }
  }
  return c;
}

bool bits_equal(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("serial matmul matches triple-loop oracle") {
  Rng rng(11);
  for (int it = 0; it < 20; ++it) {
    std::size_t m = 1 + rng.index(9), k = 1 + rng.index(9),
                n = 1 + rng.index(9);
    auto a = random_buffer(m * k, rng);
    auto b = random_buffer(k * n, rng);
    std::vector<double> c(m * n);
    kernels::serial::matmul(a.data(), b.data(), c.data(), m, k, n);
    auto expect = matmul_oracle(a, b, m, k, n);
    for (std::size_t i = 0; i < c.size(); ++i) {
      CHECK(c[i] == doctest::Approx(expect[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("omp kernels are bit-identical to serial") {
  Rng rng(23);
  for (int it = 0; it < 10; ++it) {
    std::size_t m = 1 + rng.index(40), k = 1 + rng.index(40),
                n = 1 + rng.index(40);
    auto a = random_buffer(m * k, rng);
    auto b = random_buffer(k * n, rng);
    std::vector<double> cs(m * n), cp(m * n);
    kernels::serial::matmul(a.data(), b.data(), cs.data(), m, k, n);
    kernels::omp::matmul(a.data(), b.data(), cp.data(), m, k, n);
    CHECK(bits_equal(cs, cp));

    auto dc = random_buffer(m * n, rng);
    std::vector<double> das(m * k, 0.0), dap(m * k, 0.0);
    kernels::serial::matmul_grad_a(dc.data(), b.data(), das.data(), m, k, n);
    kernels::omp::matmul_grad_a(dc.data(), b.data(), dap.data(), m, k, n);
    CHECK(bits_equal(das, dap));

    std::vector<double> dbs(k * n, 0.0), dbp(k * n, 0.0);
    kernels::serial::matmul_grad_b(a.data(), dc.data(), dbs.data(), m, k, n);
    kernels::omp::matmul_grad_b(a.data(), dc.data(), dbp.data(), m, k, n);
    CHECK(bits_equal(dbs, dbp));
  }

  for (int it = 0; it < 10; ++it) {
    std::size_t rows = 1 + rng.index(60), n = 1 + rng.index(30);
    auto x = random_buffer(rows * n, rng);
    std::vector<double> ys(rows * n), yp(rows * n);
    kernels::serial::softmax_rows(x.data(), ys.data(), rows, n);
    kernels::omp::softmax_rows(x.data(), yp.data(), rows, n);
    CHECK(bits_equal(ys, yp));

    std::vector<double> gs(rows * n), gp(rows * n);
    kernels::serial::gelu(x.data(), gs.data(), rows * n);
    kernels::omp::gelu(x.data(), gp.data(), rows * n);
    CHECK(bits_equal(gs, gp));
  }

  for (double p : {1.0, 2.0, 3.0}) {
    std::size_t nq = 17, np = 29, dim = 8;
    auto q = random_buffer(nq * dim, rng);
    auto t = random_buffer(np * dim, rng);
    std::vector<double> ds(nq * np), dp(nq * np);
    kernels::serial::pairwise_minkowski(q.data(), nq, t.data(), np, dim, p,
                                        ds.data());
    kernels::omp::pairwise_minkowski(q.data(), nq, t.data(), np, dim, p,
                                     dp.data());
    CHECK(bits_equal(ds, dp));
  }
}

TEST_CASE("dispatching entry points are bit-identical to serial") {
  Rng rng(31);
  std::size_t m = 48, k = 48, n = 48;
  auto a = random_buffer(m * k, rng);
  auto b = random_buffer(k * n, rng);
  std::vector<double> cs(m * n), cd(m * n);
  kernels::serial::matmul(a.data(), b.data(), cs.data(), m, k, n);
  kernels::matmul(a.data(), b.data(), cd.data(), m, k, n);
  CHECK(bits_equal(cs, cd));
}

TEST_CASE("softmax rows sum to one and stay stable under huge logits") {
  std::vector<double> x = {1000.0, 0.0, 0.0};
  std::vector<double> y(3);
  kernels::serial::softmax_rows(x.data(), y.data(), 1, 3);
  CHECK(y[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(y[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(y[2] == doctest::Approx(0.0).epsilon(1e-12));

  Rng rng(5);
  auto z = random_buffer(40, rng);
  std::vector<double> s(40);
  kernels::serial::softmax_rows(z.data(), s.data(), 8, 5);
  for (std::size_t r = 0; r < 8; ++r) {
    double total = 0.0;
    for (std::size_t j = 0; j < 5; ++j) {
      CHECK(s[r * 5 + j] >= 0.0);
      total += s[r * 5 + j];
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("minkowski specializations") {
  std::vector<double> a = {0.0, 0.0}, b = {1.0, 1.0};
  double d1, d2;
  kernels::serial::pairwise_minkowski(a.data(), 1, b.data(), 1, 2, 1.0, &d1);
  kernels::serial::pairwise_minkowski(a.data(), 1, b.data(), 1, 2, 2.0, &d2);
  CHECK(d1 == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(d2 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}
