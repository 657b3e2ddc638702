#pragma once

#include "wtn/losses.hpp"
#include "wtn/weighting.hpp"

#include <functional>
#include <optional>
#include <variant>
#include <vector>

namespace wtn {

struct FactorPair {
  Matrix U;  // n x k
  Matrix V;  // m x k
};

/// Estimate X-hat, stored densely or as factors with X-hat = U V^T.
class CompletionModel {
 public:
  static CompletionModel dense(Matrix x);
  static CompletionModel factored(Matrix u, Matrix v);

  bool is_factored() const { return std::holds_alternative<FactorPair>(rep_); }
  Index rows() const;
  Index cols() const;
  Index rank_cap() const;  // k for factored models, min(n, m) for dense ones
  double at(Index i, Index j) const;
  Matrix to_dense() const;
  const Matrix& dense_matrix() const { return std::get<Matrix>(rep_); }
  const FactorPair& factors() const { return std::get<FactorPair>(rep_); }

 private:
  explicit CompletionModel(std::variant<Matrix, FactorPair> rep) : rep_(std::move(rep)) {}
  std::variant<Matrix, FactorPair> rep_;
};

struct SolverConfig {
  double lambda = 0.0;
  std::optional<Index> rank_cap;
  int max_iters = 2000;  // iterations (proximal, ERM) or epochs (SGD)
  double tol = 1e-7;     // relative objective change
  double step_size = 0.005;
  std::uint64_t seed = 0;

  void validate() const;
  /// 200 epochs at step 0.005 with the given rank cap.
  static SolverConfig sgd(Index rank, double lambda, std::uint64_t seed = 0);
};

struct NoiseConfig {
  double nu = 0.0;
};

/// argmin_Z 1/2 ||Z - X||_F,w^2 + tau ||Z||_tr,w: soft-threshold the singular
/// values of diag(row)^1/2 X diag(col)^1/2 and map back.
Matrix prox_weighted_trace(const Matrix& x, const MarginalWeights& w, double tau);

struct ProximalFit {
  CompletionModel model = CompletionModel::dense(Matrix());
  std::vector<double> objective;  // accepted objective values, one per iteration
  int iterations = 0;
  bool converged = false;
  double training_loss = 0.0;
  double weighted_norm = 0.0;
};

/// Minimizes L_S(X) + lambda ||X||_tr,w (squared loss) by accelerated
/// impute-then-shrink iterations in the reweighted coordinates, with a
/// function-value safeguard so the accepted objective never increases.
ProximalFit fit_proximal(const SampleSet& sample, const MarginalWeights& w, const LossSpec& loss,
                         const SolverConfig& cfg, const std::optional<Matrix>& initial = std::nullopt);

/// Factored objective L_S(U V^T) + lambda/2 (||diag(row)^1/2 U||_F^2 + ||diag(col)^1/2 V||_F^2).
double factored_objective(const SampleSet& sample, const MarginalWeights& w, const LossSpec& loss,
                          double lambda, const Matrix& u, const Matrix& v);

/// Full-batch gradient (or subgradient) of factored_objective.
FactorPair factored_gradient(const SampleSet& sample, const MarginalWeights& w, const LossSpec& loss,
                             double lambda, const Matrix& u, const Matrix& v);

struct FactoredFit {
  CompletionModel model = CompletionModel::dense(Matrix());
  std::vector<double> objective;  // initial value then one per epoch
};

/// Rank-k SGD on the factored objective with shuffled passes over the sample.
FactoredFit fit_factored_sgd(const SampleSet& sample, const MarginalWeights& w, const LossSpec& loss,
                             const SolverConfig& cfg);

struct MinNormOptions {
  /// Training-loss allowance added to eps(1 + 1e-3), relative to mean(y^2).
  double abs_tol = 1e-8;
  int max_depth = 40;
  double lambda_floor = 1e-8;  // lowest lambda tried, relative to lambda_max
  double path_ratio = 0.1;     // geometric step while searching for a feasible lambda
  double bracket_ratio = 1.02; // bisection stops once hi / lo falls below this
  int max_iters = 2000;        // per lambda
  double tol = 1e-7;           // per lambda
};

struct MinNormFit {
  CompletionModel model = CompletionModel::dense(Matrix());
  double norm = 0.0;           // ||X-hat||_tr,w
  double training_loss = 0.0;  // squared loss
  double lambda = 0.0;         // regularization weight that produced X-hat
  double lambda_max = 0.0;
  bool feasible = false;
  int solves = 0;
  int iterations = 0;
};

/// Approximately solves min ||X||_tr,w s.t. L_S(X) <= eps by a warm-started
/// lambda search over fit_proximal, returning the smallest-norm iterate whose
/// training loss is within the allowance.
MinNormFit min_norm_fit(const SampleSet& sample, const MarginalWeights& w, double eps,
                        const MinNormOptions& opts = {});

/// Smallest lambda for which zero minimizes L_S(X) + lambda ||X||_tr,w (squared loss).
double lambda_max(const SampleSet& sample, const MarginalWeights& w);

struct ErmFit {
  CompletionModel model = CompletionModel::dense(Matrix());
  double training_loss = 0.0;
  double weighted_norm = 0.0;
  std::vector<double> best_loss;  // best-so-far training loss per iteration
};

/// Projected subgradient descent on L_S over {||X||_tr,w <= sqrt(r)} with
/// steps c / sqrt(t); returns the best iterate by training loss.
ErmFit erm_in_ball(const SampleSet& sample, const MarginalWeights& w, NormBudget budget, const LossSpec& loss,
                   const SolverConfig& cfg, const std::optional<Matrix>& initial = std::nullopt);

}  // namespace wtn
