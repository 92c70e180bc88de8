#pragma once

#include <cstddef>

namespace sembed::kernels {

// Dense numeric kernels on raw row-major buffers. Two implementations share
// every signature: `serial` is the reference, `omp` parallelizes across
// independent output cells. Each output element is produced by a fixed-order
// scalar reduction in both variants, so omp results are bit-identical to
// serial regardless of thread count (the project compiles with
// -ffp-contract=off to keep per-element rounding independent of context).
// The unqualified entry points dispatch between the two.

namespace serial {

// c[m x n] = a[m x k] * b[k x n]
void matmul(const double* a, const double* b, double* c, std::size_t m,
            std::size_t k, std::size_t n);

// da[m x k] += dc[m x n] * b^T; db[k x n] += a^T * dc
void matmul_grad_a(const double* dc, const double* b, double* da,
                   std::size_t m, std::size_t k, std::size_t n);
void matmul_grad_b(const double* a, const double* dc, double* db,
                   std::size_t m, std::size_t k, std::size_t n);

// Row-wise softmax with max subtraction, y and x may alias.
void softmax_rows(const double* x, double* y, std::size_t rows,
                  std::size_t n);

// Elementwise tanh-approximation GELU and its derivative.
void gelu(const double* x, double* y, std::size_t n);
void gelu_grad(const double* x, const double* dy, double* dx, std::size_t n);

// dist[nq x np], Minkowski order p >= 1.
void pairwise_minkowski(const double* queries, std::size_t nq,
                        const double* points, std::size_t np, std::size_t dim,
                        double p, double* dist);

}  // namespace serial

namespace omp {

void matmul(const double* a, const double* b, double* c, std::size_t m,
            std::size_t k, std::size_t n);
void matmul_grad_a(const double* dc, const double* b, double* da,
                   std::size_t m, std::size_t k, std::size_t n);
void matmul_grad_b(const double* a, const double* dc, double* db,
                   std::size_t m, std::size_t k, std::size_t n);
void softmax_rows(const double* x, double* y, std::size_t rows,
                  std::size_t n);
void gelu(const double* x, double* y, std::size_t n);
void gelu_grad(const double* x, const double* dy, double* dx, std::size_t n);
void pairwise_minkowski(const double* queries, std::size_t nq,
                        const double* points, std::size_t np, std::size_t dim,
                        double p, double* dist);

}  // namespace omp

// Dispatching entry points used by the rest of the library.
void matmul(const double* a, const double* b, double* c, std::size_t m,
            std::size_t k, std::size_t n);
void matmul_grad_a(const double* dc, const double* b, double* da,
                   std::size_t m, std::size_t k, std::size_t n);
void matmul_grad_b(const double* a, const double* dc, double* db,
                   std::size_t m, std::size_t k, std::size_t n);
void softmax_rows(const double* x, double* y, std::size_t rows, std::size_t n);
void gelu(const double* x, double* y, std::size_t n);
void gelu_grad(const double* x, const double* dy, double* dx, std::size_t n);
void pairwise_minkowski(const double* queries, std::size_t nq,
                        const double* points, std::size_t np, std::size_t dim,
                        double p, double* dist);

bool openmp_compiled();
int max_threads();

}  // namespace sembed::kernels
