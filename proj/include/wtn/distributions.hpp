#pragma once

#include "wtn/common.hpp"

#include <span>
#include <vector>

namespace wtn {

struct Cell {
  Index i = 0;
  Index j = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Probability mass over an n x m index grid with cached marginals and a
/// flattened cumulative table for inverse-CDF sampling.
class JointDistribution {
 public:
  /// Validates `mass` (nonnegative, sums to 1) and computes marginals.
  static JointDistribution from_mass(Matrix mass);

  /// Uses caller-supplied marginals; they must agree with the row/column
  /// sums of `mass` within 1e-12.
  static JointDistribution with_marginals(Matrix mass, Vector row_marginals, Vector col_marginals);

  Index rows() const { return mass_.rows(); }
  Index cols() const { return mass_.cols(); }
  const Matrix& mass() const { return mass_; }
  double operator()(Index i, Index j) const { return mass_(i, j); }
  const Vector& row_marginals() const { return row_; }
  const Vector& col_marginals() const { return col_; }

  /// Draws one cell by inverse CDF (binary search over the row-major cumulative mass).
  Cell draw(Rng& rng) const;

 private:
  JointDistribution(Matrix mass, Vector row, Vector col);

  Matrix mass_;
  Vector row_;
  Vector col_;
  std::vector<double> cumulative_;
};

struct SampleSet {
  Index n = 0;
  Index m = 0;
  std::vector<Cell> indexes;
  std::vector<double> values;

  std::size_t size() const { return indexes.size(); }
  bool empty() const { return indexes.empty(); }
  /// Throws unless indexes/values agree in length and lie inside the grid.
  void validate() const;
};

struct TransductivePool {
  SampleSet pool;
  SampleSet train;
  SampleSet test;
};

JointDistribution make_product(const Vector& row_marginals, const Vector& col_marginals);

JointDistribution make_uniform(Index n, Index m);

/// mixing * (P / n) + (1 - mixing) * uniform, with P the permutation matrix of `perm`
/// (perm[i] is the column carrying row i's permutation mass).
JointDistribution make_permutation_mixture(std::span<const Index> perm, double mixing);

/// Square distribution with uniform marginals; dependent rows/columns for
/// mixing > 0. The permutation is Fisher-Yates shuffled from `seed`.
JointDistribution make_uniform_marginal_nonproduct(Index n, double mixing, std::uint64_t seed);

/// Fisher-Yates permutation of 0..n-1.
std::vector<Index> random_permutation(Index n, std::uint64_t seed);

/// s i.i.d. draws with replacement.
std::vector<Cell> sample_indexes(const JointDistribution& dist, std::size_t s, Rng& rng);

/// s i.i.d. draws with replacement, values read from `truth`.
SampleSet sample(const JointDistribution& dist, std::size_t s, const Matrix& truth, std::uint64_t seed);

/// Attach values from `truth` to a list of indexes.
SampleSet observe(std::span<const Cell> indexes, const Matrix& truth);

/// Uniformly random equal split of a pool of 2s distinct indexes.
TransductivePool transductive_split(std::span<const Cell> pool_indexes, const Matrix& truth,
                                    std::uint64_t seed);

}  // namespace wtn
