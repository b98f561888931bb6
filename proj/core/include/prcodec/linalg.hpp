// Dense row-major kernels used by the recurrent predictor. Fixed loop
// order keeps results bit-reproducible across runs.
#pragma once

#include <cstddef>

namespace prcodec {

// y = M x, M is rows x cols row-major.
inline void matvec(const double* m, const double* x, int rows, int cols,
                   double* y) {
  for (int r = 0; r < rows; ++r) {
    const double* row = m + static_cast<size_t>(r) * cols;
    double acc = 0.0;
    for (int c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

// y += M x.
inline void matvec_add(const double* m, const double* x, int rows, int cols,
                       double* y) {
  for (int r = 0; r < rows; ++r) {
    const double* row = m + static_cast<size_t>(r) * cols;
    double acc = 0.0;
    for (int c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] += acc;
  }
}

// y += M^T v, M is rows x cols row-major, v has rows entries, y has cols.
inline void matvec_transpose_add(const double* m, const double* v, int rows,
                                 int cols, double* y) {
  for (int r = 0; r < rows; ++r) {
    const double* row = m + static_cast<size_t>(r) * cols;
    const double s = v[r];
    for (int c = 0; c < cols; ++c) y[c] += s * row[c];
  }
}

// M += v x^T (outer product accumulate).
inline void outer_add(const double* v, const double* x, int rows, int cols,
                      double* m) {
  for (int r = 0; r < rows; ++r) {
    double* row = m + static_cast<size_t>(r) * cols;
    const double s = v[r];
    for (int c = 0; c < cols; ++c) row[c] += s * x[c];
  }
}

}  // namespace prcodec
