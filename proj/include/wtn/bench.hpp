#pragma once

#include "wtn/solvers.hpp"

#include <json.hpp>

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace wtn {

/// Rank-2 signal with singular values n / sqrt(2), so ||M||_F = n.
struct SignalSpec {
  Index n = 60;
  Index rank = 2;
  std::uint64_t seed = 0;
};

Matrix make_signal(const SignalSpec& spec);

double exact_expected_loss(const CompletionModel& x, const Matrix& truth, const JointDistribution& dist,
                           const LossSpec& loss);
double empirical_loss(const CompletionModel& x, const SampleSet& sample, const LossSpec& loss);

/// ||X - M||_F^2 / (nm)
double reconstruction_error(const Matrix& estimate, const Matrix& signal);

enum class Weighting { Uniform, SmoothedEmpirical };
std::string to_string(Weighting w);
Weighting weighting_from_string(const std::string& name);
MarginalWeights weights_for(Weighting kind, const SampleSet& sample);

struct RepetitionStats {
  double mean = 0.0;
  double std_error = 0.0;
  int count = 0;
};

RepetitionStats summarize(const std::vector<double>& values);

/// 64-bit FNV-1a of `text`, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

struct ExperimentReport {
  std::string scenario;
  // grid point; unused coordinates stay at their defaults
  Index n = 0;
  std::size_t s = 0;
  double nu = 0.0;
  double alpha = 1.0;
  std::string weighting;
  Index k = 0;
  std::string metric;  // name of the quantity summarized by `stats`
  RepetitionStats stats;
  std::map<std::string, double> extra;  // secondary metrics (runtime, norms, chosen lambda, ...)
  bool saturated = false;
  std::uint64_t base_seed = 0;
  int num_seeds = 0;
  std::string config_hash;
};

void write_reports_csv(std::ostream& out, const std::vector<ExperimentReport>& reports);

struct SampleComplexityConfig {
  std::vector<Index> ns{60, 120};
  double target_error = 0.1;
  std::vector<Weighting> weightings{Weighting::Uniform, Weighting::SmoothedEmpirical};
  int seeds = 100;
  std::uint64_t base_seed = 0;
  MinNormOptions fit{.abs_tol = 1e-6, .tol = 1e-5};
  int block = 10;  // seeds evaluated between early-rejection checks

  nlohmann::json to_json() const;
  /// Fields missing from `doc` keep their value in `base`.
  static SampleComplexityConfig from_json(const nlohmann::json& doc, SampleComplexityConfig base);
  static SampleComplexityConfig from_json(const nlohmann::json& doc) { return from_json(doc, SampleComplexityConfig{}); }
};

/// Mean reconstruction error of noiseless min-norm fits at sample size s,
/// one fit per seed. With `reject_above` set, stops as soon as the running
/// sum proves the mean exceeds it (the returned stats are then partial).
RepetitionStats sample_complexity_probe(Index n, std::size_t s, Weighting weighting,
                                        const SampleComplexityConfig& cfg, std::optional<double> reject_above,
                                        Execution exec = Execution::Parallel);

/// Smallest multiple of n/2 whose mean error reaches the target, per (n, weighting).
std::vector<ExperimentReport> run_sample_complexity(const SampleComplexityConfig& cfg,
                                                    Execution exec = Execution::Parallel);

struct ExcessErrorConfig {
  Index n = 200;
  std::vector<double> nu_grid{0.0, 0.05, 0.1, 0.2};
  std::vector<std::size_t> s_grid{3000, 4000, 6000, 8000, 12000, 16000};
  std::vector<Weighting> weightings{Weighting::Uniform, Weighting::SmoothedEmpirical};
  int seeds = 20;
  std::uint64_t base_seed = 0;
  MinNormOptions fit{.abs_tol = 1e-6, .tol = 1e-5};

  nlohmann::json to_json() const;
  /// Fields missing from `doc` keep their value in `base`.
  static ExcessErrorConfig from_json(const nlohmann::json& doc, ExcessErrorConfig base);
  static ExcessErrorConfig from_json(const nlohmann::json& doc) { return from_json(doc, ExcessErrorConfig{}); }
};

std::vector<ExperimentReport> run_excess_error(const ExcessErrorConfig& cfg, Execution exec = Execution::Parallel);

enum class SweepFamily { BlockNonProduct, Uniform };

struct SmoothingSweepConfig {
  SweepFamily family = SweepFamily::BlockNonProduct;
  Index n = 200;
  Index m = 200;
  Index true_rank = 5;
  double noise = 0.5;
  std::size_t train = 8000;
  std::size_t validation = 2000;
  std::size_t test = 10000;
  std::vector<double> alpha_grid{1.0, 0.9, 0.5, 0.3, 0.0};
  std::vector<Index> k_grid{10};
  // lambda grid: points_per_decade * decades + 1 values from lambda_min
  double lambda_min = 1e-3;
  int decades = 4;
  int points_per_decade = 8;
  int epochs = 200;
  double step_size = 0.005;
  int seeds = 10;
  std::uint64_t base_seed = 0;

  std::vector<double> lambda_grid() const;
  nlohmann::json to_json() const;
  /// Fields missing from `doc` keep their value in `base`.
  static SmoothingSweepConfig from_json(const nlohmann::json& doc, SmoothingSweepConfig base);
  static SmoothingSweepConfig from_json(const nlohmann::json& doc) { return from_json(doc, SmoothingSweepConfig{}); }
};

/// n x m distribution split into a 4 x 4 grid of blocks; block (a, b) has
/// per-cell mass proportional to 8 / 2^max(a, b).
JointDistribution make_block_nonproduct(Index n, Index m);

/// Test RMSE per (alpha, k) with lambda chosen on a validation sample.
std::vector<ExperimentReport> run_smoothing_sweep(const SmoothingSweepConfig& cfg,
                                                  Execution exec = Execution::Parallel);

struct TransductiveConfig {
  Index n = 60;
  std::size_t half = 900;  // s; the pool holds 2s distinct cells
  double r_scale = 1.0;    // budget r = r_scale * ||M||_tr,w^2 for the rank-2 signal M
  double noise = 0.1;      // entrywise Gaussian noise added to M
  std::string loss = "absolute";
  int splits = 50;
  std::uint64_t base_seed = 0;
  int max_iters = 300;
  bool swap_roles = false;  // fit on the test half, evaluate on the train half

  nlohmann::json to_json() const;
  /// Fields missing from `doc` keep their value in `base`.
  static TransductiveConfig from_json(const nlohmann::json& doc, TransductiveConfig base);
  static TransductiveConfig from_json(const nlohmann::json& doc) { return from_json(doc, TransductiveConfig{}); }
};

/// Pool of `count` distinct cells drawn uniformly without replacement.
std::vector<Cell> make_pool(Index n, Index m, std::size_t count, std::uint64_t seed);

/// Per-split test losses of erm_in_ball trained on one half of a fixed pool,
/// with weights from the whole pool. Split t uses derive_seed(cfg.base_seed, t).
std::vector<double> transductive_losses(const std::vector<Cell>& pool, const Matrix& values, NormBudget budget,
                                        const TransductiveConfig& cfg, Execution exec = Execution::Parallel);

ExperimentReport run_transductive(const TransductiveConfig& cfg, Execution exec = Execution::Parallel);

}  // namespace wtn
