#include "wtn/weighting.hpp"

#include "wtn/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace wtn {

namespace {

constexpr std::array<std::pair<WeightKind, const char*>, 5> kKindNames{{
    {WeightKind::True, "true"},
    {WeightKind::Smoothed, "smoothed"},
    {WeightKind::Empirical, "empirical"},
    {WeightKind::SmoothedEmpirical, "smoothed_empirical"},
    {WeightKind::TransductiveSmoothed, "transductive_smoothed"},
}};

bool is_smoothed(WeightKind kind) {
  return kind == WeightKind::Smoothed || kind == WeightKind::SmoothedEmpirical ||
         kind == WeightKind::TransductiveSmoothed;
}

void require_shape(const Matrix& x, const MarginalWeights& w) {
  require(x.rows() == w.rows() && x.cols() == w.cols(), "matrix shape does not match the weights");
}

// True when every row/column with zero weight is identically zero in x.
bool supported(const Matrix& x, const MarginalWeights& w) {
  for (Index i = 0; i < x.rows(); ++i)
    if (w.row(i) == 0.0 && !x.row(i).isZero(0.0)) return false;
  for (Index j = 0; j < x.cols(); ++j)
    if (w.col(j) == 0.0 && !x.col(j).isZero(0.0)) return false;
  return true;
}

Vector counts_to_frequencies(const std::vector<long long>& counts, std::size_t total) {
  Vector out(static_cast<Index>(counts.size()));
  for (std::size_t k = 0; k < counts.size(); ++k)
    out(static_cast<Index>(k)) = static_cast<double>(counts[k]) / static_cast<double>(total);
  return out;
}

}  // namespace

std::string to_string(WeightKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "unknown";
}

WeightKind weight_kind_from_string(const std::string& name) {
  for (const auto& [k, n] : kKindNames)
    if (name == n) return k;
  throw InvalidArgument("unknown weight kind: " + name);
}

void MarginalWeights::validate() const {
  require(row.size() > 0 && col.size() > 0, "weights must be nonempty");
  require((row.array() >= 0.0).all() && (col.array() >= 0.0).all(), "weights must be nonnegative");
  require(std::abs(row.sum() - 1.0) <= kNormalizationTol, "row weights must sum to 1");
  require(std::abs(col.sum() - 1.0) <= kNormalizationTol, "column weights must sum to 1");
  require(alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0,1]");
  if (is_smoothed(kind)) {
    const double row_floor = (1.0 - alpha) / static_cast<double>(row.size());
    const double col_floor = (1.0 - alpha) / static_cast<double>(col.size());
    require(row.minCoeff() >= row_floor - kNormalizationTol, "smoothed row weight below its floor");
    require(col.minCoeff() >= col_floor - kNormalizationTol, "smoothed column weight below its floor");
  }
}

double NormBudget::radius() const {
  require(r > 0.0, "norm budget r must be positive");
  return std::sqrt(r);
}

MarginalWeights true_marginals(const JointDistribution& dist) {
  return {dist.row_marginals(), dist.col_marginals(), WeightKind::True, 1.0};
}

MarginalWeights uniform_weights(Index n, Index m) {
  require(n > 0 && m > 0, "grid dimensions must be positive");
  return {Vector::Constant(n, 1.0 / static_cast<double>(n)), Vector::Constant(m, 1.0 / static_cast<double>(m)),
          WeightKind::True, 1.0};
}

MarginalWeights smooth(const MarginalWeights& weights, SmoothingConfig cfg) {
  require(cfg.alpha >= 0.0 && cfg.alpha <= 1.0, "alpha must lie in [0,1]");
  weights.validate();
  const double a = cfg.alpha;
  const double n = static_cast<double>(weights.rows());
  const double m = static_cast<double>(weights.cols());
  MarginalWeights out;
  out.row = (a * weights.row.array() + (1.0 - a) / n).matrix();
  out.col = (a * weights.col.array() + (1.0 - a) / m).matrix();
  switch (weights.kind) {
    case WeightKind::Empirical:
    case WeightKind::SmoothedEmpirical: out.kind = WeightKind::SmoothedEmpirical; break;
    case WeightKind::TransductiveSmoothed: out.kind = WeightKind::TransductiveSmoothed; break;
    default: out.kind = WeightKind::Smoothed; break;
  }
  // Composed smoothing: a2 * (a1 p + (1 - a1) u) + (1 - a2) u = a1 a2 p + (1 - a1 a2) u.
  out.alpha = weights.alpha * a;
  return out;
}

MarginalWeights empirical_marginals(std::span<const Cell> indexes, Index n, Index m) {
  require(!indexes.empty(), "empirical marginals need a nonempty sample");
  require(n > 0 && m > 0, "grid dimensions must be positive");
  std::vector<long long> rows(static_cast<std::size_t>(n), 0), cols(static_cast<std::size_t>(m), 0);
  for (const Cell& c : indexes) {
    require(c.i >= 0 && c.i < n && c.j >= 0 && c.j < m, "sample index outside the grid");
    ++rows[static_cast<std::size_t>(c.i)];
    ++cols[static_cast<std::size_t>(c.j)];
  }
  return {counts_to_frequencies(rows, indexes.size()), counts_to_frequencies(cols, indexes.size()),
          WeightKind::Empirical, 1.0};
}

MarginalWeights empirical_marginals(const SampleSet& sample) {
  return empirical_marginals(sample.indexes, sample.n, sample.m);
}

MarginalWeights smooth_empirical(const SampleSet& sample) {
  return smooth(empirical_marginals(sample), {kTheoryAlpha});
}

MarginalWeights transductive_weights(const TransductivePool& pool) {
  MarginalWeights w = smooth_empirical(pool.pool);
  w.kind = WeightKind::TransductiveSmoothed;
  return w;
}

Matrix reweight(const Matrix& x, const MarginalWeights& w) {
  require_shape(x, w);
  return w.row.cwiseSqrt().asDiagonal() * x * w.col.cwiseSqrt().asDiagonal();
}

Matrix unweight(const Matrix& z, const MarginalWeights& w) {
  require_shape(z, w);
  require(w.strictly_positive(), "unweighting needs strictly positive weights");
  return w.row.cwiseSqrt().cwiseInverse().asDiagonal() * z * w.col.cwiseSqrt().cwiseInverse().asDiagonal();
}

double weighted_trace_norm(const Matrix& x, const MarginalWeights& w) {
  require_shape(x, w);
  if (!supported(x, w)) return std::numeric_limits<double>::infinity();
  return linalg::trace_norm(reweight(x, w));
}

double weighted_frobenius_norm(const Matrix& x, const MarginalWeights& w) {
  require_shape(x, w);
  if (!supported(x, w)) return std::numeric_limits<double>::infinity();
  return reweight(x, w).norm();
}

double truncation_threshold(Index n, Index m, std::size_t s) {
  require(s > 0, "sample size must be positive");
  return std::log(static_cast<double>(n)) /
         (static_cast<double>(s) * std::sqrt(static_cast<double>(n) * static_cast<double>(m)));
}

Matrix truncate_low_probability(const Matrix& x, const JointDistribution& dist, std::size_t s) {
  require(x.rows() == dist.rows() && x.cols() == dist.cols(), "matrix shape does not match the distribution");
  const double threshold = truncation_threshold(dist.rows(), dist.cols(), s);
  return (dist.mass().array() >= threshold).select(x, 0.0);
}

Matrix project_to_ball(const Matrix& x, const MarginalWeights& w, NormBudget budget) {
  const double radius = budget.radius();
  const double norm = weighted_trace_norm(x, w);
  require(std::isfinite(norm), "cannot project a matrix of infinite weighted trace norm");
  if (norm <= radius) return x;
  return x * (radius / norm);
}

DominationReport check_marginal_domination(const SampleSet& sample, const JointDistribution& dist,
                                           SmoothingConfig cfg) {
  require(sample.n == dist.rows() && sample.m == dist.cols(), "sample grid does not match the distribution");
  const MarginalWeights checked = smooth(empirical_marginals(sample), cfg);
  const MarginalWeights reference = smooth(true_marginals(dist), cfg);
  const double ratio = std::min((checked.row.array() / reference.row.array()).minCoeff(),
                                (checked.col.array() / reference.col.array()).minCoeff());
  return {ratio >= 0.5, ratio};
}

}  // namespace wtn
