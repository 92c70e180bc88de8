// Times the OpenMP kernels against the serial reference and reports the
// speedup per kernel and size. The two must agree bit for bit; this tool
// also spot-checks that while timing.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "sembed/kernels.hpp"
#include "sembed/rng.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm-up
  auto t0 = Clock::now();
  for (int i = 0; i < reps; ++i) fn();
  auto t1 = Clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

std::vector<double> random_buffer(std::size_t n, sembed::Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform() * 2.0 - 1.0;
  return v;
}

bool bits_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

void bench_matmul(std::size_t n, int reps, sembed::Rng& rng) {
  auto a = random_buffer(n * n, rng);
  auto b = random_buffer(n * n, rng);
  std::vector<double> c_serial(n * n), c_omp(n * n);
  double ts = time_ms([&] {
    sembed::kernels::serial::matmul(a.data(), b.data(), c_serial.data(), n, n, n);
  }, reps);
  double tp = time_ms([&] {
    sembed::kernels::omp::matmul(a.data(), b.data(), c_omp.data(), n, n, n);
  }, reps);
  std::printf("matmul %4zux%-4zu  serial %9.3f ms  omp %9.3f ms  speedup %5.2fx  bitwise %s\n",
              n, n, ts, tp, ts / tp, bits_equal(c_serial, c_omp) ? "ok" : "MISMATCH");
}

void bench_softmax(std::size_t rows, std::size_t n, int reps, sembed::Rng& rng) {
  auto x = random_buffer(rows * n, rng);
  std::vector<double> y_serial(rows * n), y_omp(rows * n);
  double ts = time_ms([&] {
    sembed::kernels::serial::softmax_rows(x.data(), y_serial.data(), rows, n);
  }, reps);
  double tp = time_ms([&] {
    sembed::kernels::omp::softmax_rows(x.data(), y_omp.data(), rows, n);
  }, reps);
  std::printf("softmax %5zux%-4zu serial %9.3f ms  omp %9.3f ms  speedup %5.2fx  bitwise %s\n",
              rows, n, ts, tp, ts / tp, bits_equal(y_serial, y_omp) ? "ok" : "MISMATCH");
}

void bench_minkowski(std::size_t nq, std::size_t np, std::size_t dim, double p,
                     int reps, sembed::Rng& rng) {
  auto q = random_buffer(nq * dim, rng);
  auto t = random_buffer(np * dim, rng);
  std::vector<double> d_serial(nq * np), d_omp(nq * np);
  double ts = time_ms([&] {
    sembed::kernels::serial::pairwise_minkowski(q.data(), nq, t.data(), np, dim, p, d_serial.data());
  }, reps);
  double tp = time_ms([&] {
    sembed::kernels::omp::pairwise_minkowski(q.data(), nq, t.data(), np, dim, p, d_omp.data());
  }, reps);
  std::printf("minkowski p=%.0f %4zux%-5zu serial %8.3f ms  omp %9.3f ms  speedup %5.2fx  bitwise %s\n",
              p, nq, np, ts, tp, ts / tp, bits_equal(d_serial, d_omp) ? "ok" : "MISMATCH");
}

}  // namespace

int main() {
  std::printf("openmp compiled: %s, max threads: %d\n",
              sembed::kernels::openmp_compiled() ? "yes" : "no",
              sembed::kernels::max_threads());
  sembed::Rng rng(7);
  bench_matmul(128, 5, rng);
  bench_matmul(256, 3, rng);
  bench_matmul(512, 2, rng);
  bench_softmax(4096, 256, 5, rng);
  bench_minkowski(512, 2048, 64, 2.0, 3, rng);
  bench_minkowski(512, 2048, 64, 3.0, 3, rng);
  return 0;
}
