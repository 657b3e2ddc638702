#include "wtn/linalg.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace wtn::linalg {

namespace {

// Thin SVD through LAPACK dgesdd. Eigen's divide-and-conquer SVD returns
// wrong singular values on some sparse inputs, so it is not used here.
struct ThinSvd {
  Vector sigma;
  Matrix u;   // rows x k
  Matrix vt;  // k x cols
};

ThinSvd lapack_svd(const Matrix& a, bool vectors) {
  const lapack_int rows = static_cast<lapack_int>(a.rows());
  const lapack_int cols = static_cast<lapack_int>(a.cols());
  const lapack_int k = std::min(rows, cols);
  Matrix work = a;  // dgesdd overwrites its input
  ThinSvd out;
  out.sigma.resize(k);
  if (vectors) {
    out.u.resize(rows, k);
    out.vt.resize(k, cols);
  }
  const lapack_int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, vectors ? 'S' : 'N', rows, cols, work.data(), rows,
                                         out.sigma.data(), vectors ? out.u.data() : nullptr, rows,
                                         vectors ? out.vt.data() : nullptr, k);
  if (info != 0) throw SolverError("SVD failed to converge (dgesdd info " + std::to_string(info) + ")");
  return out;
}

}  // namespace

Vector singular_values(const Matrix& a) {
  if (a.size() == 0) return Vector();
  return lapack_svd(a, false).sigma;
}

double trace_norm(const Matrix& a) { return singular_values(a).sum(); }

double spectral_norm_exact(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return singular_values(a)(0);
}

double spectral_norm_power(const Matrix& a, const PowerIterationOptions& opts) {
  if (a.size() == 0) return 0.0;
  Rng rng = make_rng(opts.seed);
  std::normal_distribution<double> gauss;
  Vector v(a.cols());
  for (Index k = 0; k < v.size(); ++k) v(k) = gauss(rng);
  v.normalize();

  double estimate = 0.0;
  for (int it = 0; it < opts.max_iters; ++it) {
    const Vector u = a * v;
    Vector w = a.transpose() * u;
    const double norm_w = w.norm();
    if (norm_w == 0.0) return 0.0;
    // Rayleigh quotient of A^T A at v is ||Av||^2.
    const double next = std::sqrt(u.squaredNorm());
    v = w / norm_w;
    if (it > 0 && std::abs(next - estimate) <= opts.rel_tol * next) {
      estimate = next;
      break;
    }
    estimate = next;
  }
  return std::max(estimate, (a * v).norm());
}

double spectral_norm(const Matrix& a, Index exact_limit, const PowerIterationOptions& opts) {
  if (std::max(a.rows(), a.cols()) <= exact_limit) return spectral_norm_exact(a);
  return spectral_norm_power(a, opts);
}

Thresholded soft_threshold(const Matrix& a, double tau) {
  Thresholded out;
  out.value = Matrix::Zero(a.rows(), a.cols());
  if (a.size() == 0) return out;
  const ThinSvd svd = lapack_svd(a, true);
  const Vector& sigma = svd.sigma;
  // Values within a few ulps of tau are ties; the vector and value-only SVD paths differ at that level.
  const double cut = tau * (1.0 + 8.0 * std::numeric_limits<double>::epsilon());
  Index rank = 0;
  while (rank < sigma.size() && sigma(rank) > cut) ++rank;
  if (rank == 0) return out;
  const Vector shrunk = (sigma.head(rank).array() - tau).matrix();
  out.value = svd.u.leftCols(rank) * shrunk.asDiagonal() * svd.vt.topRows(rank);
  out.trace_norm = shrunk.sum();
  out.rank = rank;
  return out;
}

Thresholded soft_threshold_gram(const Matrix& a, double tau) {
  if (a.rows() < a.cols()) {
    Thresholded t = soft_threshold_gram(a.transpose(), tau);
    t.value.transposeInPlace();
    return t;
  }
  Thresholded out;
  out.value = Matrix::Zero(a.rows(), a.cols());
  if (a.size() == 0) return out;
  Matrix gram(a.cols(), a.cols());
  gram.noalias() = a.transpose() * a;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  const Vector& ev = eig.eigenvalues();  // ascending
  const Index k = ev.size();
  Index rank = 0;
  while (rank < k && ev(k - 1 - rank) > tau * tau) ++rank;
  if (rank == 0) return out;
  Matrix v(a.cols(), rank);
  Vector sigma(rank);
  for (Index r = 0; r < rank; ++r) {
    v.col(r) = eig.eigenvectors().col(k - 1 - r);
    sigma(r) = std::sqrt(ev(k - 1 - r));
  }
  // U = A V S^-1, hence U diag(sigma - tau) V^T = A V diag(1 - tau / sigma) V^T.
  Matrix av(a.rows(), rank);
  av.noalias() = a * v;
  const Vector scale = (1.0 - tau / sigma.array()).matrix();
  out.value.noalias() = av * scale.asDiagonal() * v.transpose();
  out.trace_norm = (sigma.array() - tau).sum();
  out.rank = rank;
  return out;
}

Matrix project_trace_ball(const Matrix& a, double radius) {
  require(radius > 0.0, "ball radius must be positive");
  const Vector sigma = singular_values(a);
  if (sigma.sum() <= radius) return a;
  // Shift theta with sum_k (sigma_k - theta)_+ = radius; sigma is sorted descending.
  double prefix = 0.0, theta = 0.0;
  for (Index k = 0; k < sigma.size(); ++k) {
    prefix += sigma(k);
    const double candidate = (prefix - radius) / static_cast<double>(k + 1);
    if (k + 1 == sigma.size() || sigma(k + 1) <= candidate) {
      theta = candidate;
      break;
    }
  }
  return soft_threshold(a, theta).value;
}

}  // namespace wtn::linalg
