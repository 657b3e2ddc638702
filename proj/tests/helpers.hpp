#pragma once

#include "wtn/weighting.hpp"

#include <Eigen/SVD>

#include <random>

namespace wtn::testing {

inline Vector random_simplex(Index n, Rng& rng) {
  std::exponential_distribution<double> e;
  Vector v(n);
  for (Index k = 0; k < n; ++k) v(k) = e(rng);
  return v / v.sum();
}

inline MarginalWeights random_weights(Index n, Index m, Rng& rng) {
  MarginalWeights w;
  w.row = random_simplex(n, rng);
  w.col = random_simplex(m, rng);
  return w;
}

inline Matrix gaussian_matrix(Index n, Index m, Rng& rng) {
  std::normal_distribution<double> g;
  Matrix x(n, m);
  for (Index k = 0; k < x.size(); ++k) x.data()[k] = g(rng);
  return x;
}

/// Every cell observed exactly once, in row-major order.
inline SampleSet observe_all(const Matrix& y) {
  SampleSet s;
  s.n = y.rows();
  s.m = y.cols();
  for (Index i = 0; i < y.rows(); ++i)
    for (Index j = 0; j < y.cols(); ++j) {
      s.indexes.push_back({i, j});
      s.values.push_back(y(i, j));
    }
  return s;
}

inline double jacobi_trace_norm(const Matrix& x) { return Eigen::JacobiSVD<Matrix>(x).singularValues().sum(); }

}  // namespace wtn::testing
