#include "wtn/complexity.hpp"

#include "wtn/linalg.hpp"

#include <cmath>
#include <vector>

namespace wtn {

namespace {

void check_inputs(std::span<const Cell> indexes, const MarginalWeights& w) {
  require(!indexes.empty(), "Rademacher estimate needs a nonempty sample");
  for (const Cell& c : indexes) {
    require(c.i >= 0 && c.i < w.rows() && c.j >= 0 && c.j < w.cols(), "sample index outside the grid");
    require(w.row(c.i) > 0.0 && w.col(c.j) > 0.0, "zero weight at a sampled index");
  }
}

std::vector<double> draw_signs(std::size_t s, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::vector<double> signs(s);
  for (double& x : signs) x = coin(rng) ? 1.0 : -1.0;
  return signs;
}

double draw_norm(std::span<const Cell> indexes, const MarginalWeights& w, std::uint64_t seed, int draw) {
  const auto signs = draw_signs(indexes.size(), derive_seed(seed, static_cast<std::uint64_t>(draw)));
  return signed_sum_spectral_norm(indexes, w, signs);
}

RademacherEstimate summarize(const std::vector<double>& norms, double scale) {
  RademacherEstimate est;
  est.num_draws = static_cast<int>(norms.size());
  double mean = 0.0;
  for (double v : norms) mean += v;
  mean /= static_cast<double>(norms.size());
  double var = 0.0;
  for (double v : norms) var += (v - mean) * (v - mean);
  const double d = static_cast<double>(norms.size());
  var = norms.size() > 1 ? var / (d - 1.0) : 0.0;
  est.mean = scale * mean;
  est.std_error = scale * std::sqrt(var / d);
  return est;
}

}  // namespace

double signed_sum_spectral_norm(std::span<const Cell> indexes, const MarginalWeights& w, std::span<const double> signs) {
  require(indexes.size() == signs.size(), "one sign per sample is required");
  Matrix a = Matrix::Zero(w.rows(), w.cols());
  for (std::size_t t = 0; t < indexes.size(); ++t) {
    const Cell c = indexes[t];
    a(c.i, c.j) += signs[t] / std::sqrt(w.row(c.i) * w.col(c.j));
  }
  return linalg::spectral_norm(a);
}

RademacherEstimate estimate_rademacher_serial(std::span<const Cell> indexes, const MarginalWeights& w,
                                              NormBudget budget, int num_draws, std::uint64_t seed) {
  check_inputs(indexes, w);
  require(num_draws >= 1, "need at least one sign draw");
  std::vector<double> norms;
  norms.reserve(static_cast<std::size_t>(num_draws));
  for (int d = 0; d < num_draws; ++d) norms.push_back(draw_norm(indexes, w, seed, d));
  return summarize(norms, budget.radius() / static_cast<double>(indexes.size()));
}

RademacherEstimate estimate_rademacher(std::span<const Cell> indexes, const MarginalWeights& w, NormBudget budget,
                                       int num_draws, std::uint64_t seed, Execution exec) {
  if (exec == Execution::Serial) return estimate_rademacher_serial(indexes, w, budget, num_draws, seed);
  check_inputs(indexes, w);
  require(num_draws >= 1, "need at least one sign draw");
  std::vector<double> norms(static_cast<std::size_t>(num_draws));
#pragma omp parallel for schedule(dynamic)
  for (int d = 0; d < num_draws; ++d) norms[static_cast<std::size_t>(d)] = draw_norm(indexes, w, seed, d);
  return summarize(norms, budget.radius() / static_cast<double>(indexes.size()));
}

BoundDiagnostics bound_diagnostics(const JointDistribution& dist, const MarginalWeights& w, std::size_t s,
                                   NormBudget budget) {
  require(w.rows() == dist.rows() && w.cols() == dist.cols(), "weights do not match the distribution");
  require(w.strictly_positive(), "bound diagnostics need strictly positive weights");
  require(s > 0, "sample size must be positive");
  BoundDiagnostics out;
  out.R_value = 1.0 / std::sqrt(w.row.minCoeff() * w.col.minCoeff());

  // E[Q Q^T] and E[Q^T Q] are diagonal with entries sum_j p/(row col), sum_i p/(row col).
  const Matrix ratio = w.row.cwiseInverse().asDiagonal() * dist.mass() * w.col.cwiseInverse().asDiagonal();
  const double row_max = ratio.rowwise().sum().maxCoeff();
  const double col_max = ratio.colwise().sum().maxCoeff();
  const double sd = static_cast<double>(s);
  out.sigma_sq = sd * std::max(row_max, col_max);

  const double log_n = std::log(static_cast<double>(dist.rows()));
  out.predicted_rate = budget.radius() / sd * (std::sqrt(out.sigma_sq * log_n) + out.R_value * log_n);
  return out;
}

std::vector<RateRow> rate_table(Index n, Index m, std::size_t s, NormBudget budget, const LossSpec& loss) {
  require(n > 0 && m > 0 && s > 0, "rate table needs positive n, m, s");
  const double big = static_cast<double>(std::max(n, m));
  const double ratio = budget.r * big * std::log(big) / static_cast<double>(s);
  const double square_root = std::sqrt(ratio);
  return {
      {"product", square_root},
      {"uniform_marginals", square_root},
      {"arbitrary", loss.bounded() ? std::cbrt(ratio) : 1.0},
  };
}

}  // namespace wtn
