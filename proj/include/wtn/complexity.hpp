#pragma once

#include "wtn/losses.hpp"
#include "wtn/weighting.hpp"

#include <span>

namespace wtn {

struct RademacherEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int num_draws = 0;
};

struct BoundDiagnostics {
  double R_value = 0.0;     // almost-sure bound on the spectral norm of one summand
  double sigma_sq = 0.0;    // matrix variance proxy
  double predicted_rate = 0.0;
};

inline constexpr int kDefaultSignDraws = 64;

/// Spectral norm of sum_t signs[t] e_{i_t j_t} / sqrt(row_i col_j).
double signed_sum_spectral_norm(std::span<const Cell> indexes, const MarginalWeights& w, std::span<const double> signs);

/// Monte-Carlo estimate of the empirical Rademacher complexity of the ball
/// {||X||_tr,w <= sqrt(r)} via spectral/trace norm duality:
/// (sqrt(r)/s) E_sigma || sum_t sigma_t e_{i_t j_t} / sqrt(row_i col_j) ||_sp.
/// Sign draw d uses the substream derive_seed(seed, d); draws are evaluated
/// with OpenMP and reduced in draw order.
RademacherEstimate estimate_rademacher(std::span<const Cell> indexes, const MarginalWeights& w, NormBudget budget,
                                       int num_draws, std::uint64_t seed, Execution exec = Execution::Parallel);

/// Reference implementation: one plain loop over the draws.
RademacherEstimate estimate_rademacher_serial(std::span<const Cell> indexes, const MarginalWeights& w,
                                              NormBudget budget, int num_draws, std::uint64_t seed);

BoundDiagnostics bound_diagnostics(const JointDistribution& dist, const MarginalWeights& w, std::size_t s,
                                   NormBudget budget);

struct RateRow {
  std::string scenario;
  double rate = 0.0;
};

/// Excess-error rates for product, uniform-marginal and arbitrary sampling
/// (constants set to 1, natural log).
std::vector<RateRow> rate_table(Index n, Index m, std::size_t s, NormBudget budget, const LossSpec& loss);

}  // namespace wtn
