#pragma once

#include "wtn/distributions.hpp"

#include <limits>
#include <string>

namespace wtn {

enum class WeightKind { True, Smoothed, Empirical, SmoothedEmpirical, TransductiveSmoothed };

std::string to_string(WeightKind kind);
WeightKind weight_kind_from_string(const std::string& name);

/// Row/column weights defining a weighted trace norm. `alpha` records the
/// smoothing applied (1 for unsmoothed kinds).
struct MarginalWeights {
  Vector row;
  Vector col;
  WeightKind kind = WeightKind::True;
  double alpha = 1.0;

  Index rows() const { return row.size(); }
  Index cols() const { return col.size(); }
  bool strictly_positive() const { return (row.array() > 0.0).all() && (col.array() > 0.0).all(); }
  /// Throws unless both vectors are nonnegative and sum to 1, and smoothed
  /// kinds respect their (1 - alpha)/n floors.
  void validate() const;
};

struct SmoothingConfig {
  double alpha = 0.5;
};

/// Trace-norm ball {X : ||X||_tr,w <= sqrt(r)}.
struct NormBudget {
  double r = 1.0;
  double radius() const;
};

/// Smoothing weight used by applied solves.
inline constexpr double kAppliedAlpha = 0.9;
/// Smoothing weight used by theory-facing operations.
inline constexpr double kTheoryAlpha = 0.5;

MarginalWeights true_marginals(const JointDistribution& dist);
MarginalWeights uniform_weights(Index n, Index m);

/// alpha * p + (1 - alpha) * uniform, for rows and columns separately.
MarginalWeights smooth(const MarginalWeights& weights, SmoothingConfig cfg);

/// Row/column frequencies of the sample (duplicates counted).
MarginalWeights empirical_marginals(const SampleSet& sample);
MarginalWeights empirical_marginals(std::span<const Cell> indexes, Index n, Index m);

/// Empirical marginals smoothed with alpha = 1/2.
MarginalWeights smooth_empirical(const SampleSet& sample);

/// Smoothed empirical marginals of the whole pool (train and test indexes).
MarginalWeights transductive_weights(const TransductivePool& pool);

/// ||diag(row)^1/2 X diag(col)^1/2||_tr. Returns +infinity when X has a
/// nonzero entry in a row or column of zero weight.
double weighted_trace_norm(const Matrix& x, const MarginalWeights& w);

/// ||diag(row)^1/2 X diag(col)^1/2||_F, with the same zero-weight convention.
double weighted_frobenius_norm(const Matrix& x, const MarginalWeights& w);

/// diag(row)^1/2 X diag(col)^1/2.
Matrix reweight(const Matrix& x, const MarginalWeights& w);
/// Inverse of reweight; requires strictly positive weights.
Matrix unweight(const Matrix& z, const MarginalWeights& w);

/// Entry threshold log(n) / (s sqrt(nm)) below which cells are truncated.
double truncation_threshold(Index n, Index m, std::size_t s);

/// Zeroes the entries of X whose probability falls below the truncation threshold.
Matrix truncate_low_probability(const Matrix& x, const JointDistribution& dist, std::size_t s);

/// Rescales X onto the ball boundary when it lies outside.
Matrix project_to_ball(const Matrix& x, const MarginalWeights& w, NormBudget budget);

struct DominationReport {
  bool holds = false;
  /// min over rows and columns of smoothed-empirical / smoothed-true weight.
  double worst_ratio = 0.0;
};

/// Checks smooth(empirical(S)) >= 1/2 * smooth(true(dist)) entrywise.
DominationReport check_marginal_domination(const SampleSet& sample, const JointDistribution& dist,
                                           SmoothingConfig cfg = {});

}  // namespace wtn
