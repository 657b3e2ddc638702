#pragma once

#include "wtn/losses.hpp"
#include "wtn/weighting.hpp"

namespace wtn {

/// Block-constant distribution on an n x n grid: mass 1/(2s) on the a x n/2
/// upper-left sign block, the rest spread over the (n-a) x n/2 lower-right
/// block. The target is the sign block padded with zeros.
struct Example1Instance {
  Index n = 0;
  std::size_t s = 0;
  Index a = 0;
  Matrix A;  // a x n/2 sign matrix
  Matrix Y;  // n x n target
  JointDistribution dist = make_uniform(1, 1);
};

/// Mass 1/s at (0,0), zero elsewhere on the first row and column, the rest
/// spread uniformly over the lower-right (n-1) x (n-1) block. Target is zero;
/// the adversary puts s at (0,0).
struct Example2Instance {
  Index n = 0;
  std::size_t s = 0;
  Matrix Y;
  Matrix A;
  JointDistribution dist = make_uniform(1, 1);
};

/// floor((2s/n)^(2/3)).
Index example1_block_height(Index n, std::size_t s);

Example1Instance build_example1(Index n, std::size_t s, std::uint64_t seed);

/// Y^S: the target restricted to the observed cells (zero elsewhere).
Matrix example1_erm(const Example1Instance& inst, const SampleSet& sample);

/// (1/8) (n/s)^(1/3).
double example1_lower_bound(Index n, std::size_t s);

/// E[L_p(Y^S)] = (a n/2) (1 - 1/(2s))^s / (2s).
double example1_expected_loss(const Example1Instance& inst);

Example2Instance build_example2(Index n, std::size_t s);

/// A when (0,0) was not observed, the zero matrix otherwise.
Matrix example2_erm(const Example2Instance& inst, const SampleSet& sample);

/// (1 - 1/s)^s, the probability that (0,0) is missed.
double example2_expected_loss(std::size_t s);

inline constexpr double kExample2LowerBound = 0.25;

struct TrialSummary {
  std::vector<double> losses;  // L_p per trial
  double mean = 0.0;
  double std_error = 0.0;
};

TrialSummary summarize_trials(std::vector<double> losses);

/// L_p of the constructed ERM over independent samples; trial t draws with
/// derive_seed(seed, t).
TrialSummary run_example1_trials(const Example1Instance& inst, int trials, std::uint64_t seed,
                                 Execution exec = Execution::Parallel);
TrialSummary run_example2_trials(const Example2Instance& inst, int trials, std::uint64_t seed,
                                 Execution exec = Execution::Parallel);

}  // namespace wtn
