#pragma once

#include "wtn/common.hpp"

namespace wtn::linalg {

/// All singular values, descending (dense divide-and-conquer SVD).
Vector singular_values(const Matrix& a);

double trace_norm(const Matrix& a);

/// Largest singular value from a full SVD.
double spectral_norm_exact(const Matrix& a);

struct PowerIterationOptions {
  double rel_tol = 1e-8;
  int max_iters = 10000;
  std::uint64_t seed = 0;
};

/// Largest singular value by power iteration on A^T A from a seeded random start.
double spectral_norm_power(const Matrix& a, const PowerIterationOptions& opts = {});

/// Exact SVD up to `exact_limit` rows/columns, power iteration above it.
double spectral_norm(const Matrix& a, Index exact_limit = 128, const PowerIterationOptions& opts = {});

/// Result of soft-thresholding the singular values of a matrix at tau.
struct Thresholded {
  Matrix value;                // U diag((sigma - tau)_+) V^T
  double trace_norm = 0.0;     // sum of the shrunk singular values
  Index rank = 0;
};

/// Singular-value soft-thresholding through a full SVD.
Thresholded soft_threshold(const Matrix& a, double tau);

/// Same map computed from the eigendecomposition of the smaller Gram matrix;
/// faster for the solver's inner loop. Singular values below ~1e-8 * sigma_max
/// are resolved less accurately than by a full SVD, but those are only ever
/// shrunk to zero for the thresholds the solvers use.
Thresholded soft_threshold_gram(const Matrix& a, double tau);

/// Euclidean (Frobenius) projection onto {Z : ||Z||_tr <= radius}: the singular
/// values are projected onto the l1 ball and the singular vectors kept.
Matrix project_trace_ball(const Matrix& a, double radius);

}  // namespace wtn::linalg
