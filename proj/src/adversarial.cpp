#include "wtn/adversarial.hpp"

#include <cmath>

namespace wtn {

Index example1_block_height(Index n, std::size_t s) {
  require(n > 0 && s > 0, "n and s must be positive");
  const double ratio = 2.0 * static_cast<double>(s) / static_cast<double>(n);
  // Guard against cbrt/pow landing just below an exact integer.
  return static_cast<Index>(std::floor(std::pow(ratio, 2.0 / 3.0) + 1e-9));
}

Example1Instance build_example1(Index n, std::size_t s, std::uint64_t seed) {
  require(n >= 2 && n % 2 == 0, "Example 1 needs an even n");
  require(s >= 1, "sample size must be positive");
  require(static_cast<double>(s) <= static_cast<double>(n) * static_cast<double>(n), "Example 1 needs s <= n^2");
  const Index a = example1_block_height(n, s);
  const Index half = n / 2;
  require(a >= 1, "block height a must be at least 1");
  require(a < n, "block height a must be below n");
  const double sd = static_cast<double>(s);
  const double block_mass = static_cast<double>(a) * static_cast<double>(n) / (4.0 * sd);
  require(block_mass < 1.0, "a n / (4 s) must be below 1");

  Example1Instance inst;
  inst.n = n;
  inst.s = s;
  inst.a = a;

  Rng rng = make_rng(seed);
  std::bernoulli_distribution coin(0.5);
  inst.A.resize(a, half);
  for (Index i = 0; i < a; ++i)
    for (Index j = 0; j < half; ++j) inst.A(i, j) = coin(rng) ? 1.0 : -1.0;
  inst.Y = Matrix::Zero(n, n);
  inst.Y.topLeftCorner(a, half) = inst.A;

  Matrix mass = Matrix::Zero(n, n);
  mass.topLeftCorner(a, half).setConstant(1.0 / (2.0 * sd));
  const double rest = (1.0 - block_mass) / (static_cast<double>(n - a) * static_cast<double>(half));
  mass.bottomRightCorner(n - a, half).setConstant(rest);
  inst.dist = JointDistribution::from_mass(std::move(mass));
  return inst;
}

Matrix example1_erm(const Example1Instance& inst, const SampleSet& sample) {
  require(sample.n == inst.n && sample.m == inst.n, "sample grid does not match the instance");
  Matrix ys = Matrix::Zero(inst.n, inst.n);
  for (const Cell& c : sample.indexes) ys(c.i, c.j) = inst.Y(c.i, c.j);
  return ys;
}

double example1_lower_bound(Index n, std::size_t s) {
  require(n > 0 && s > 0, "n and s must be positive");
  return std::cbrt(static_cast<double>(n) / static_cast<double>(s)) / 8.0;
}

double example1_expected_loss(const Example1Instance& inst) {
  const double sd = static_cast<double>(inst.s);
  const double cells = static_cast<double>(inst.a) * static_cast<double>(inst.n / 2);
  return cells * std::pow(1.0 - 1.0 / (2.0 * sd), sd) / (2.0 * sd);
}

Example2Instance build_example2(Index n, std::size_t s) {
  require(n >= 2, "Example 2 needs n >= 2");
  require(s >= 2, "Example 2 needs s >= 2");
  const double sd = static_cast<double>(s);
  Example2Instance inst;
  inst.n = n;
  inst.s = s;
  inst.Y = Matrix::Zero(n, n);
  inst.A = Matrix::Zero(n, n);
  inst.A(0, 0) = sd;

  Matrix mass = Matrix::Zero(n, n);
  mass(0, 0) = 1.0 / sd;
  const double rest = (1.0 - 1.0 / sd) / (static_cast<double>(n - 1) * static_cast<double>(n - 1));
  mass.bottomRightCorner(n - 1, n - 1).setConstant(rest);
  inst.dist = JointDistribution::from_mass(std::move(mass));
  return inst;
}

Matrix example2_erm(const Example2Instance& inst, const SampleSet& sample) {
  require(sample.n == inst.n && sample.m == inst.n, "sample grid does not match the instance");
  for (const Cell& c : sample.indexes)
    if (c.i == 0 && c.j == 0) return Matrix::Zero(inst.n, inst.n);
  return inst.A;
}

double example2_expected_loss(std::size_t s) {
  require(s >= 1, "sample size must be positive");
  const double sd = static_cast<double>(s);
  return std::pow(1.0 - 1.0 / sd, sd);
}

TrialSummary summarize_trials(std::vector<double> losses) {
  require(!losses.empty(), "need at least one trial");
  TrialSummary out;
  const double count = static_cast<double>(losses.size());
  double mean = 0.0;
  for (double v : losses) mean += v;
  mean /= count;
  double var = 0.0;
  for (double v : losses) var += (v - mean) * (v - mean);
  out.mean = mean;
  out.std_error = losses.size() > 1 ? std::sqrt(var / (count - 1.0) / count) : 0.0;
  out.losses = std::move(losses);
  return out;
}

namespace {

template <class TrialFn>
std::vector<double> run_trials(int trials, Execution exec, TrialFn trial) {
  require(trials >= 1, "need at least one trial");
  std::vector<double> losses(static_cast<std::size_t>(trials));
  if (exec == Execution::Serial) {
    for (int t = 0; t < trials; ++t) losses[static_cast<std::size_t>(t)] = trial(t);
  } else {
#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < trials; ++t) losses[static_cast<std::size_t>(t)] = trial(t);
  }
  return losses;
}

}  // namespace

TrialSummary run_example1_trials(const Example1Instance& inst, int trials, std::uint64_t seed, Execution exec) {
  const LossSpec loss = LossSpec::clipped_absolute();
  return summarize_trials(run_trials(trials, exec, [&](int t) {
    const SampleSet s = sample(inst.dist, inst.s, inst.Y, derive_seed(seed, static_cast<std::uint64_t>(t)));
    return expected_loss(example1_erm(inst, s), inst.Y, inst.dist, loss);
  }));
}

TrialSummary run_example2_trials(const Example2Instance& inst, int trials, std::uint64_t seed, Execution exec) {
  const LossSpec loss = LossSpec::absolute();
  return summarize_trials(run_trials(trials, exec, [&](int t) {
    const SampleSet s = sample(inst.dist, inst.s, inst.Y, derive_seed(seed, static_cast<std::uint64_t>(t)));
    return expected_loss(example2_erm(inst, s), inst.Y, inst.dist, loss);
  }));
}

}  // namespace wtn
