#include "sembed/kernels.hpp"

#include <cmath>
#include <cstdint>

#ifdef SEMBED_HAVE_OPENMP
#include <omp.h>
#endif

namespace sembed::kernels {

namespace {

// Shared per-element reductions. Both variants call these so the floating
// point operation order of one output cell is the same everywhere.

inline double dot_row_col(const double* a_row, const double* b, std::size_t k,
                          std::size_t n, std::size_t j) {
  double acc = 0.0;
  for (std::size_t p = 0; p < k; ++p) {
    acc += a_row[p] * b[p * n + j];
  }
  return acc;
}

inline double dot_rows(const double* x, const double* y, std::size_t len) {
  double acc = 0.0;
  for (std::size_t p = 0; p < len; ++p) {
    acc += x[p] * y[p];
  }
  return acc;
}

inline void softmax_one_row(const double* x, double* y, std::size_t n) {
  double mx = x[0];
  for (std::size_t j = 1; j < n; ++j) {
    if (x[j] > mx) mx = x[j];
  }
  double z = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    y[j] = std::exp(x[j] - mx);
    z += y[j];
  }
  for (std::size_t j = 0; j < n; ++j) {
    y[j] /= z;
  }
}

constexpr double kGeluCoef = 0.044715;
// sqrt(2/pi)
constexpr double kGeluScale = 0.7978845608028653558798921198687637;

inline double gelu_one(double x) {
  double u = kGeluScale * (x + kGeluCoef * x * x * x);
  return 0.5 * x * (1.0 + std::tanh(u));
}

inline double gelu_grad_one(double x) {
  double u = kGeluScale * (x + kGeluCoef * x * x * x);
  double t = std::tanh(u);
  double du = kGeluScale * (1.0 + 3.0 * kGeluCoef * x * x);
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
}

inline double minkowski_one(const double* a, const double* b, std::size_t dim,
                            double p) {
  if (p == 2.0) {
    double acc = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      double diff = a[d] - b[d];
      acc += diff * diff;
    }
    return std::sqrt(acc);
  }
  if (p == 1.0) {
    double acc = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      acc += std::fabs(a[d] - b[d]);
    }
    return acc;
  }
  double acc = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    acc += std::pow(std::fabs(a[d] - b[d]), p);
  }
  return std::pow(acc, 1.0 / p);
}

// Work sizes below this run serially even when OpenMP is available.
constexpr std::size_t kParallelCutoff = 1u << 15;

}  // namespace

namespace serial {

void matmul(const double* a, const double* b, double* c, std::size_t m,
            std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      c[i * n + j] = dot_row_col(a + i * k, b, k, n, j);
    }
  }
}

void matmul_grad_a(const double* dc, const double* b, double* da,
                   std::size_t m, std::size_t k, std::size_t n) {
  // da[i,j] += sum_p dc[i,p] * b[j,p]
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      da[i * k + j] += dot_rows(dc + i * n, b + j * n, n);
    }
  }
}

void matmul_grad_b(const double* a, const double* dc, double* db,
                   std::size_t m, std::size_t k, std::size_t n) {
  // db[i,j] += sum_p a[p,i] * dc[p,j]
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < m; ++p) {
        acc += a[p * k + i] * dc[p * n + j];
      }
      db[i * n + j] += acc;
    }
  }
}

void softmax_rows(const double* x, double* y, std::size_t rows,
                  std::size_t n) {
  for (std::size_t r = 0; r < rows; ++r) {
    softmax_one_row(x + r * n, y + r * n, n);
  }
}

void gelu(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = gelu_one(x[i]);
  }
}

void gelu_grad(const double* x, const double* dy, double* dx, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    dx[i] += dy[i] * gelu_grad_one(x[i]);
  }
}

void pairwise_minkowski(const double* queries, std::size_t nq,
                        const double* points, std::size_t np, std::size_t dim,
                        double p, double* dist) {
  for (std::size_t q = 0; q < nq; ++q) {
    for (std::size_t t = 0; t < np; ++t) {
      dist[q * np + t] = minkowski_one(queries + q * dim, points + t * dim,
                                       dim, p);
    }
  }
}

}  // namespace serial

namespace omp {

void matmul(const double* a, const double* b, double* c, std::size_t m,
            std::size_t k, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(m); ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      c[i * n + j] = dot_row_col(a + i * k, b, k, n, j);
    }
  }
}

void matmul_grad_a(const double* dc, const double* b, double* da,
                   std::size_t m, std::size_t k, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(m); ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      da[i * k + j] += dot_rows(dc + i * n, b + j * n, n);
    }
  }
}

void matmul_grad_b(const double* a, const double* dc, double* db,
                   std::size_t m, std::size_t k, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(k); ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < m; ++p) {
        acc += a[p * k + i] * dc[p * n + j];
      }
      db[i * n + j] += acc;
    }
  }
}

void softmax_rows(const double* x, double* y, std::size_t rows,
                  std::size_t n) {
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < static_cast<std::int64_t>(rows); ++r) {
    softmax_one_row(x + r * n, y + r * n, n);
  }
}

void gelu(const double* x, double* y, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    y[i] = gelu_one(x[i]);
  }
}

void gelu_grad(const double* x, const double* dy, double* dx, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    dx[i] += dy[i] * gelu_grad_one(x[i]);
  }
}

void pairwise_minkowski(const double* queries, std::size_t nq,
                        const double* points, std::size_t np, std::size_t dim,
                        double p, double* dist) {
#pragma omp parallel for schedule(static)
  for (std::int64_t q = 0; q < static_cast<std::int64_t>(nq); ++q) {
    for (std::size_t t = 0; t < np; ++t) {
      dist[q * np + t] = minkowski_one(queries + q * dim, points + t * dim,
                                       dim, p);
    }
  }
}

}  // namespace omp

bool openmp_compiled() {
#ifdef SEMBED_HAVE_OPENMP
  return true;
#else
  return false;
#endif
}

int max_threads() {
#ifdef SEMBED_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace {

inline bool go_parallel(std::size_t work) {
  return openmp_compiled() && work >= kParallelCutoff && max_threads() > 1;
}

}  // namespace

void matmul(const double* a, const double* b, double* c, std::size_t m,
            std::size_t k, std::size_t n) {
  if (go_parallel(m * k * n)) {
    omp::matmul(a, b, c, m, k, n);
  } else {
    serial::matmul(a, b, c, m, k, n);
  }
}

void matmul_grad_a(const double* dc, const double* b, double* da,
                   std::size_t m, std::size_t k, std::size_t n) {
  if (go_parallel(m * k * n)) {
    omp::matmul_grad_a(dc, b, da, m, k, n);
  } else {
    serial::matmul_grad_a(dc, b, da, m, k, n);
  }
}

void matmul_grad_b(const double* a, const double* dc, double* db,
                   std::size_t m, std::size_t k, std::size_t n) {
  if (go_parallel(m * k * n)) {
    omp::matmul_grad_b(a, dc, db, m, k, n);
  } else {
    serial::matmul_grad_b(a, dc, db, m, k, n);
  }
}

void softmax_rows(const double* x, double* y, std::size_t rows,
                  std::size_t n) {
  if (go_parallel(rows * n)) {
    omp::softmax_rows(x, y, rows, n);
  } else {
    serial::softmax_rows(x, y, rows, n);
  }
}

void gelu(const double* x, double* y, std::size_t n) {
  if (go_parallel(n)) {
    omp::gelu(x, y, n);
  } else {
    serial::gelu(x, y, n);
  }
}

void gelu_grad(const double* x, const double* dy, double* dx, std::size_t n) {
  if (go_parallel(n)) {
    omp::gelu_grad(x, dy, dx, n);
  } else {
    serial::gelu_grad(x, dy, dx, n);
  }
}

void pairwise_minkowski(const double* queries, std::size_t nq,
                        const double* points, std::size_t np, std::size_t dim,
                        double p, double* dist) {
  if (go_parallel(nq * np * dim)) {
    omp::pairwise_minkowski(queries, nq, points, np, dim, p, dist);
  } else {
    serial::pairwise_minkowski(queries, nq, points, np, dim, p, dist);
  }
}

}  // namespace sembed::kernels
