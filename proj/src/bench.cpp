#include "wtn/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

namespace wtn {

using nlohmann::json;

namespace {

// Runs body(t) for t in [0, count). Every task writes only its own slot.
template <typename Body>
void for_each_task(int count, Execution exec, Body&& body) {
  if (exec == Execution::Serial) {
    for (int t = 0; t < count; ++t) body(t);
    return;
  }
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < count; ++t) {
    try {
      body(t);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Matrix gaussian(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> g;
  Matrix x(rows, cols);
  for (Index k = 0; k < x.size(); ++k) x.data()[k] = g(rng);
  return x;
}

json fit_json(const MinNormOptions& o) {
  return {{"abs_tol", o.abs_tol},   {"max_depth", o.max_depth},         {"lambda_floor", o.lambda_floor},
          {"path_ratio", o.path_ratio}, {"bracket_ratio", o.bracket_ratio}, {"max_iters", o.max_iters},
          {"tol", o.tol}};
}

MinNormOptions fit_from_json(const json& doc, MinNormOptions o) {
  o.abs_tol = doc.value("abs_tol", o.abs_tol);
  o.max_depth = doc.value("max_depth", o.max_depth);
  o.lambda_floor = doc.value("lambda_floor", o.lambda_floor);
  o.path_ratio = doc.value("path_ratio", o.path_ratio);
  o.bracket_ratio = doc.value("bracket_ratio", o.bracket_ratio);
  o.max_iters = doc.value("max_iters", o.max_iters);
  o.tol = doc.value("tol", o.tol);
  return o;
}

json weightings_json(const std::vector<Weighting>& ws) {
  json arr = json::array();
  for (Weighting w : ws) arr.push_back(to_string(w));
  return arr;
}

std::vector<Weighting> weightings_from_json(const json& arr) {
  std::vector<Weighting> out;
  for (const auto& v : arr) out.push_back(weighting_from_string(v.get<std::string>()));
  return out;
}

// Seeds of repetition r: signal, noise and sample streams.
std::uint64_t signal_seed(std::uint64_t base, int r) { return derive_seed(derive_seed(base, 1), r); }
std::uint64_t noise_seed(std::uint64_t base, int r) { return derive_seed(derive_seed(base, 2), r); }
std::uint64_t sample_seed(std::uint64_t base, int r) { return derive_seed(derive_seed(base, 3), r); }

}  // namespace

Matrix make_signal(const SignalSpec& spec) {
  require(spec.n >= spec.rank && spec.rank >= 1, "signal needs 1 <= rank <= n");
  Rng rng = make_rng(spec.seed);
  Eigen::HouseholderQR<Matrix> qa(gaussian(spec.n, spec.rank, rng));
  Eigen::HouseholderQR<Matrix> qb(gaussian(spec.n, spec.rank, rng));
  const Matrix u = qa.householderQ() * Matrix::Identity(spec.n, spec.rank);
  const Matrix v = qb.householderQ() * Matrix::Identity(spec.n, spec.rank);
  // rank equal singular values n / sqrt(rank) give ||M||_F = n; rank 2 gives n / sqrt(2)
  const double sigma = static_cast<double>(spec.n) / std::sqrt(static_cast<double>(spec.rank));
  return sigma * u * v.transpose();
}

double exact_expected_loss(const CompletionModel& x, const Matrix& truth, const JointDistribution& dist,
                           const LossSpec& loss) {
  require(x.rows() == truth.rows() && x.cols() == truth.cols(), "model and target shapes differ");
  return expected_loss(x.to_dense(), truth, dist, loss);
}

double empirical_loss(const CompletionModel& x, const SampleSet& sample, const LossSpec& loss) {
  require(!sample.empty(), "empirical loss of an empty sample");
  require(x.rows() == sample.n && x.cols() == sample.m, "model and sample shapes differ");
  double total = 0.0;
  for (std::size_t t = 0; t < sample.size(); ++t)
    total += loss.value(x.at(sample.indexes[t].i, sample.indexes[t].j), sample.values[t]);
  return total / static_cast<double>(sample.size());
}

double reconstruction_error(const Matrix& estimate, const Matrix& signal) {
  require(estimate.rows() == signal.rows() && estimate.cols() == signal.cols(), "shape mismatch");
  return (estimate - signal).squaredNorm() / static_cast<double>(signal.size());
}

std::string to_string(Weighting w) { return w == Weighting::Uniform ? "uniform" : "smoothed_empirical"; }

Weighting weighting_from_string(const std::string& name) {
  if (name == "uniform") return Weighting::Uniform;
  if (name == "smoothed_empirical") return Weighting::SmoothedEmpirical;
  throw InvalidArgument("unknown weighting: " + name);
}

MarginalWeights weights_for(Weighting kind, const SampleSet& sample) {
  return kind == Weighting::Uniform ? uniform_weights(sample.n, sample.m) : smooth_empirical(sample);
}

RepetitionStats summarize(const std::vector<double>& values) {
  require(!values.empty(), "no repetitions to summarize");
  RepetitionStats st;
  st.count = static_cast<int>(values.size());
  st.mean = std::accumulate(values.begin(), values.end(), 0.0) / st.count;
  if (st.count > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - st.mean) * (v - st.mean);
    st.std_error = std::sqrt(ss / (st.count - 1) / st.count);
  }
  return st;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_reports_csv(std::ostream& out, const std::vector<ExperimentReport>& reports) {
  std::vector<std::string> extra_keys;
  for (const auto& r : reports)
    for (const auto& [key, value] : r.extra)
      if (std::find(extra_keys.begin(), extra_keys.end(), key) == extra_keys.end()) extra_keys.push_back(key);
  std::sort(extra_keys.begin(), extra_keys.end());

  out << "scenario,n,s,nu,alpha,weighting,k,metric,mean,std_error,count,saturated";
  for (const auto& key : extra_keys) out << ',' << key;
  out << ",base_seed,num_seeds,config_hash\n";
  const auto old_precision = out.precision(12);
  for (const auto& r : reports) {
    out << r.scenario << ',' << r.n << ',' << r.s << ',' << r.nu << ',' << r.alpha << ',' << r.weighting << ','
        << r.k << ',' << r.metric << ',' << r.stats.mean << ',' << r.stats.std_error << ',' << r.stats.count << ','
        << (r.saturated ? 1 : 0);
    for (const auto& key : extra_keys) {
      out << ',';
      if (auto it = r.extra.find(key); it != r.extra.end()) out << it->second;
    }
    out << ',' << r.base_seed << ',' << r.num_seeds << ',' << r.config_hash << '\n';
  }
  out.precision(old_precision);
}

// ---------------------------------------------------------------- sample complexity

json SampleComplexityConfig::to_json() const {
  return {{"ns", ns},       {"target_error", target_error}, {"weightings", weightings_json(weightings)},
          {"seeds", seeds}, {"base_seed", base_seed},       {"fit", fit_json(fit)},
          {"block", block}};
}

SampleComplexityConfig SampleComplexityConfig::from_json(const json& doc, SampleComplexityConfig c) {
  c.ns = doc.value("ns", c.ns);
  c.target_error = doc.value("target_error", c.target_error);
  if (doc.contains("weightings")) c.weightings = weightings_from_json(doc.at("weightings"));
  c.seeds = doc.value("seeds", c.seeds);
  c.base_seed = doc.value("base_seed", c.base_seed);
  if (doc.contains("fit")) c.fit = fit_from_json(doc.at("fit"), c.fit);
  c.block = doc.value("block", c.block);
  require(c.seeds >= 1 && c.block >= 1 && c.target_error > 0.0, "invalid sample-complexity config");
  return c;
}

RepetitionStats sample_complexity_probe(Index n, std::size_t s, Weighting weighting, const SampleComplexityConfig& cfg,
                                        std::optional<double> reject_above, Execution exec) {
  const JointDistribution dist = make_uniform(n, n);
  std::vector<double> errors;
  double total = 0.0;
  for (int start = 0; start < cfg.seeds; start += cfg.block) {
    const int count = std::min(cfg.block, cfg.seeds - start);
    std::vector<double> chunk(static_cast<std::size_t>(count));
    for_each_task(count, exec, [&](int t) {
      const int r = start + t;
      const Matrix m = make_signal({n, 2, signal_seed(cfg.base_seed, r)});
      const SampleSet set = sample(dist, s, m, sample_seed(cfg.base_seed, r));
      const MinNormFit fit = min_norm_fit(set, weights_for(weighting, set), 0.0, cfg.fit);
      chunk[static_cast<std::size_t>(t)] = reconstruction_error(fit.model.to_dense(), m);
    });
    for (double e : chunk) {
      errors.push_back(e);
      total += e;
    }
    // errors are nonnegative, so the final mean can only exceed total / seeds
    if (reject_above && total > *reject_above * cfg.seeds) break;
  }
  return summarize(errors);
}

std::vector<ExperimentReport> run_sample_complexity(const SampleComplexityConfig& cfg, Execution exec) {
  const std::string hash = fnv1a_hex(cfg.to_json().dump());
  std::vector<ExperimentReport> reports;
  for (Index n : cfg.ns) {
    require(n >= 2 && n % 2 == 0, "sample-complexity n must be even");
    const std::size_t grain = static_cast<std::size_t>(n / 2);
    const std::size_t top = static_cast<std::size_t>(n * n) / grain;  // s = nm in grid units
    for (Weighting weighting : cfg.weightings) {
      const auto start = std::chrono::steady_clock::now();
      int probes = 0;
      auto probe = [&](std::size_t units) {
        ++probes;
        return sample_complexity_probe(n, units * grain, weighting, cfg, cfg.target_error, exec);
      };
      auto passes = [&](const RepetitionStats& st) {
        return st.count == cfg.seeds && st.mean <= cfg.target_error;
      };

      // Doubling search for a passing size, then bisection on the grid.
      std::size_t lo = 0, hi = 1;
      RepetitionStats hi_stats = probe(hi);
      bool saturated = false;
      while (!passes(hi_stats)) {
        if (hi == top) {
          saturated = true;
          break;
        }
        lo = hi;
        hi = std::min(2 * hi, top);
        hi_stats = probe(hi);
      }
      while (!saturated && hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        RepetitionStats st = probe(mid);
        if (passes(st)) {
          hi = mid;
          hi_stats = st;
        } else {
          lo = mid;
        }
      }

      ExperimentReport rep;
      rep.scenario = "samplecomplexity";
      rep.n = n;
      rep.s = hi * grain;
      rep.weighting = to_string(weighting);
      rep.metric = "reconstruction_error";
      rep.stats = hi_stats;
      rep.saturated = saturated;
      rep.extra["samples_per_row"] = static_cast<double>(rep.s) / static_cast<double>(n);
      rep.extra["probes"] = probes;
      rep.extra["runtime_sec"] = seconds_since(start);
      rep.base_seed = cfg.base_seed;
      rep.num_seeds = cfg.seeds;
      rep.config_hash = hash;
      reports.push_back(std::move(rep));
    }
  }
  return reports;
}

// ---------------------------------------------------------------- excess error

json ExcessErrorConfig::to_json() const {
  return {{"n", n},         {"nu_grid", nu_grid},     {"s_grid", s_grid},    {"weightings", weightings_json(weightings)},
          {"seeds", seeds}, {"base_seed", base_seed}, {"fit", fit_json(fit)}};
}

ExcessErrorConfig ExcessErrorConfig::from_json(const json& doc, ExcessErrorConfig c) {
  c.n = doc.value("n", c.n);
  c.nu_grid = doc.value("nu_grid", c.nu_grid);
  c.s_grid = doc.value("s_grid", c.s_grid);
  if (doc.contains("weightings")) c.weightings = weightings_from_json(doc.at("weightings"));
  c.seeds = doc.value("seeds", c.seeds);
  c.base_seed = doc.value("base_seed", c.base_seed);
  if (doc.contains("fit")) c.fit = fit_from_json(doc.at("fit"), c.fit);
  require(c.n >= 2 && c.seeds >= 1, "invalid excess-error config");
  for (double nu : c.nu_grid) require(nu >= 0.0, "noise level must be nonnegative");
  return c;
}

std::vector<ExperimentReport> run_excess_error(const ExcessErrorConfig& cfg, Execution exec) {
  const std::string hash = fnv1a_hex(cfg.to_json().dump());
  const Index n = cfg.n;
  const JointDistribution dist = make_uniform(n, n);
  const std::size_t ns = cfg.s_grid.size(), nw = cfg.weightings.size(), nn = cfg.nu_grid.size();
  const std::size_t cells = nn * ns * nw;
  const int seeds = cfg.seeds;

  struct Outcome {
    double error = 0.0, norm = 0.0, training_loss = 0.0, seconds = 0.0;
    bool feasible = false;
  };
  std::vector<Outcome> outcomes(cells * static_cast<std::size_t>(seeds));
  // One task per (grid point, seed). Signal and noise depend only on the seed,
  // so every curve is evaluated on the same matrices.
  for_each_task(static_cast<int>(outcomes.size()), exec, [&](int task) {
    const std::size_t cell = static_cast<std::size_t>(task) / seeds;
    const int r = task % seeds;
    const std::size_t in = cell / (ns * nw), is = (cell / nw) % ns, iw = cell % nw;
    const double nu = cfg.nu_grid[in];
    const auto start = std::chrono::steady_clock::now();
    const Matrix m = make_signal({n, 2, signal_seed(cfg.base_seed, r)});
    Matrix y = m;
    if (nu > 0.0) {
      Rng rng = make_rng(noise_seed(cfg.base_seed, r));
      y += nu * gaussian(n, n, rng);
    }
    const SampleSet set = sample(dist, cfg.s_grid[is], y, sample_seed(cfg.base_seed, r));
    const MinNormFit fit = min_norm_fit(set, weights_for(cfg.weightings[iw], set), nu * nu, cfg.fit);
    Outcome& o = outcomes[static_cast<std::size_t>(task)];
    o.error = reconstruction_error(fit.model.to_dense(), m);
    o.norm = fit.norm;
    o.training_loss = fit.training_loss;
    o.feasible = fit.feasible;
    o.seconds = seconds_since(start);
  });

  std::vector<ExperimentReport> reports;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    const std::size_t in = cell / (ns * nw), is = (cell / nw) % ns, iw = cell % nw;
    std::vector<double> errors, norms, losses;
    double seconds = 0.0;
    int infeasible = 0;
    for (int r = 0; r < seeds; ++r) {
      const Outcome& o = outcomes[cell * seeds + static_cast<std::size_t>(r)];
      errors.push_back(o.error);
      norms.push_back(o.norm);
      losses.push_back(o.training_loss);
      seconds += o.seconds;
      infeasible += o.feasible ? 0 : 1;
    }
    ExperimentReport rep;
    rep.scenario = "excesserror";
    rep.n = n;
    rep.s = cfg.s_grid[is];
    rep.nu = cfg.nu_grid[in];
    rep.weighting = to_string(cfg.weightings[iw]);
    rep.metric = "reconstruction_error";
    rep.stats = summarize(errors);
    rep.extra["achieved_norm"] = summarize(norms).mean;
    rep.extra["training_loss"] = summarize(losses).mean;
    rep.extra["infeasible"] = infeasible;
    rep.extra["runtime_sec"] = seconds;
    rep.base_seed = cfg.base_seed;
    rep.num_seeds = seeds;
    rep.config_hash = hash;
    reports.push_back(std::move(rep));
  }
  return reports;
}

// ---------------------------------------------------------------- smoothing sweep

std::vector<double> SmoothingSweepConfig::lambda_grid() const {
  std::vector<double> grid;
  const int count = decades * points_per_decade + 1;
  for (int k = 0; k < count; ++k)
    grid.push_back(lambda_min * std::pow(10.0, static_cast<double>(k) / points_per_decade));
  return grid;
}

json SmoothingSweepConfig::to_json() const {
  return {{"family", family == SweepFamily::Uniform ? "uniform" : "block_nonproduct"},
          {"n", n},
          {"m", m},
          {"true_rank", true_rank},
          {"noise", noise},
          {"train", train},
          {"validation", validation},
          {"test", test},
          {"alpha_grid", alpha_grid},
          {"k_grid", k_grid},
          {"lambda_min", lambda_min},
          {"decades", decades},
          {"points_per_decade", points_per_decade},
          {"epochs", epochs},
          {"step_size", step_size},
          {"seeds", seeds},
          {"base_seed", base_seed}};
}

SmoothingSweepConfig SmoothingSweepConfig::from_json(const json& doc, SmoothingSweepConfig c) {
  if (doc.contains("family")) {
    const std::string f = doc.at("family").get<std::string>();
    require(f == "uniform" || f == "block_nonproduct", "unknown sweep family: " + f);
    c.family = f == "uniform" ? SweepFamily::Uniform : SweepFamily::BlockNonProduct;
  }
  c.n = doc.value("n", c.n);
  c.m = doc.value("m", c.m);
  c.true_rank = doc.value("true_rank", c.true_rank);
  c.noise = doc.value("noise", c.noise);
  c.train = doc.value("train", c.train);
  c.validation = doc.value("validation", c.validation);
  c.test = doc.value("test", c.test);
  c.alpha_grid = doc.value("alpha_grid", c.alpha_grid);
  c.k_grid = doc.value("k_grid", c.k_grid);
  c.lambda_min = doc.value("lambda_min", c.lambda_min);
  c.decades = doc.value("decades", c.decades);
  c.points_per_decade = doc.value("points_per_decade", c.points_per_decade);
  c.epochs = doc.value("epochs", c.epochs);
  c.step_size = doc.value("step_size", c.step_size);
  c.seeds = doc.value("seeds", c.seeds);
  c.base_seed = doc.value("base_seed", c.base_seed);
  require(c.seeds >= 1 && c.train > 0 && c.validation > 0 && c.test > 0, "invalid smoothing-sweep config");
  for (double a : c.alpha_grid) require(a >= 0.0 && a <= 1.0, "alpha must lie in [0, 1]");
  return c;
}

JointDistribution make_block_nonproduct(Index n, Index m) {
  require(n >= 4 && m >= 4, "block distribution needs at least 4 rows and columns");
  Matrix mass(n, m);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j) {
      const Index a = 4 * i / n, b = 4 * j / m;
      mass(i, j) = std::ldexp(8.0, -static_cast<int>(std::max(a, b)));
    }
  mass /= mass.sum();
  return JointDistribution::from_mass(std::move(mass));
}

std::vector<ExperimentReport> run_smoothing_sweep(const SmoothingSweepConfig& cfg, Execution exec) {
  const std::string hash = fnv1a_hex(cfg.to_json().dump());
  const JointDistribution dist =
      cfg.family == SweepFamily::Uniform ? make_uniform(cfg.n, cfg.m) : make_block_nonproduct(cfg.n, cfg.m);
  const MarginalWeights truth_w = true_marginals(dist);
  const std::vector<double> lambdas = cfg.lambda_grid();
  const std::size_t na = cfg.alpha_grid.size(), nk = cfg.k_grid.size();
  const int seeds = cfg.seeds;

  struct Outcome {
    double test_rmse = 0.0, lambda = 0.0, seconds = 0.0;
  };
  std::vector<Outcome> outcomes(static_cast<std::size_t>(seeds) * na * nk);
  auto rmse = [](const CompletionModel& model, const SampleSet& set) {
    return std::sqrt(empirical_loss(model, set, LossSpec::squared()));
  };

  for_each_task(static_cast<int>(outcomes.size()), exec, [&](int task) {
    const int r = task / static_cast<int>(na * nk);
    const std::size_t ia = (static_cast<std::size_t>(task) / nk) % na, ik = static_cast<std::size_t>(task) % nk;
    const auto start = std::chrono::steady_clock::now();

    // Ratings: clip(U V^T + noise) with unit-variance entries before noise.
    Rng rng = make_rng(signal_seed(cfg.base_seed, r));
    const double scale = std::pow(static_cast<double>(cfg.true_rank), -0.25);
    const Matrix u = scale * gaussian(cfg.n, cfg.true_rank, rng);
    const Matrix v = scale * gaussian(cfg.m, cfg.true_rank, rng);
    Matrix y = u * v.transpose() + cfg.noise * gaussian(cfg.n, cfg.m, rng);
    y = y.cwiseMax(-2.5).cwiseMin(2.5);

    const std::uint64_t base = sample_seed(cfg.base_seed, r);
    const SampleSet train = sample(dist, cfg.train, y, derive_seed(base, 0));
    const SampleSet validation = sample(dist, cfg.validation, y, derive_seed(base, 1));
    const SampleSet test = sample(dist, cfg.test, y, derive_seed(base, 2));
    const MarginalWeights w = smooth(truth_w, {cfg.alpha_grid[ia]});

    double best_val = std::numeric_limits<double>::infinity();
    Outcome& o = outcomes[static_cast<std::size_t>(task)];
    for (double lambda : lambdas) {
      SolverConfig sc = SolverConfig::sgd(cfg.k_grid[ik], lambda, derive_seed(base, 3));
      sc.max_iters = cfg.epochs;
      sc.step_size = cfg.step_size;
      const FactoredFit fit = fit_factored_sgd(train, w, LossSpec::squared(), sc);
      const double val = rmse(fit.model, validation);
      if (val < best_val) {
        best_val = val;
        o.lambda = lambda;
        o.test_rmse = rmse(fit.model, test);
      }
    }
    o.seconds = seconds_since(start);
  });

  std::vector<ExperimentReport> reports;
  for (std::size_t ia = 0; ia < na; ++ia)
    for (std::size_t ik = 0; ik < nk; ++ik) {
      std::vector<double> rmses, chosen;
      double seconds = 0.0;
      for (int r = 0; r < seeds; ++r) {
        const Outcome& o = outcomes[static_cast<std::size_t>(r) * na * nk + ia * nk + ik];
        rmses.push_back(o.test_rmse);
        chosen.push_back(std::log10(o.lambda));
        seconds += o.seconds;
      }
      ExperimentReport rep;
      rep.scenario = cfg.family == SweepFamily::Uniform ? "smoothing_uniform" : "smoothing_block";
      rep.n = cfg.n;
      rep.s = cfg.train;
      rep.alpha = cfg.alpha_grid[ia];
      rep.weighting = "smoothed_true";
      rep.k = cfg.k_grid[ik];
      rep.metric = "test_rmse";
      rep.stats = summarize(rmses);
      rep.extra["log10_lambda"] = summarize(chosen).mean;
      rep.extra["runtime_sec"] = seconds;
      rep.base_seed = cfg.base_seed;
      rep.num_seeds = seeds;
      rep.config_hash = hash;
      reports.push_back(std::move(rep));
    }
  return reports;
}

// ---------------------------------------------------------------- transductive

json TransductiveConfig::to_json() const {
  return {{"n", n},           {"half", half},         {"r_scale", r_scale},
          {"noise", noise},   {"loss", loss},         {"splits", splits},
          {"base_seed", base_seed}, {"max_iters", max_iters}, {"swap_roles", swap_roles}};
}

TransductiveConfig TransductiveConfig::from_json(const json& doc, TransductiveConfig c) {
  c.n = doc.value("n", c.n);
  c.half = doc.value("half", c.half);
  c.r_scale = doc.value("r_scale", c.r_scale);
  c.noise = doc.value("noise", c.noise);
  c.loss = doc.value("loss", c.loss);
  c.splits = doc.value("splits", c.splits);
  c.base_seed = doc.value("base_seed", c.base_seed);
  c.max_iters = doc.value("max_iters", c.max_iters);
  c.swap_roles = doc.value("swap_roles", c.swap_roles);
  require(c.splits >= 1 && c.half >= 1 && c.r_scale > 0.0 && c.noise >= 0.0, "invalid transductive config");
  require(2 * c.half <= static_cast<std::size_t>(c.n * c.n), "pool larger than the grid");
  (void)loss_kind_from_string(c.loss);
  return c;
}

std::vector<Cell> make_pool(Index n, Index m, std::size_t count, std::uint64_t seed) {
  const std::size_t total = static_cast<std::size_t>(n * m);
  require(count <= total, "pool larger than the grid");
  // Partial Fisher-Yates over the flattened grid.
  std::vector<std::size_t> flat(total);
  std::iota(flat.begin(), flat.end(), std::size_t{0});
  Rng rng = make_rng(seed);
  std::vector<Cell> pool;
  pool.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, total - 1);
    std::swap(flat[k], flat[pick(rng)]);
    pool.push_back({static_cast<Index>(flat[k] / m), static_cast<Index>(flat[k] % m)});
  }
  return pool;
}

std::vector<double> transductive_losses(const std::vector<Cell>& pool, const Matrix& values, NormBudget budget,
                                        const TransductiveConfig& cfg, Execution exec) {
  const LossSpec loss = [&] {
    switch (loss_kind_from_string(cfg.loss)) {
      case LossKind::Squared: return LossSpec::squared();
      case LossKind::Absolute: return LossSpec::absolute();
      case LossKind::ClippedAbsolute: return LossSpec::clipped_absolute();
    }
    return LossSpec::absolute();
  }();
  std::vector<double> losses(static_cast<std::size_t>(cfg.splits));
  for_each_task(cfg.splits, exec, [&](int t) {
    TransductivePool split = transductive_split(pool, values, derive_seed(cfg.base_seed, static_cast<std::uint64_t>(t)));
    if (cfg.swap_roles) std::swap(split.train, split.test);
    const MarginalWeights w = transductive_weights(split);
    SolverConfig sc;
    sc.max_iters = cfg.max_iters;
    const ErmFit fit = erm_in_ball(split.train, w, budget, loss, sc);
    losses[static_cast<std::size_t>(t)] = empirical_loss(fit.model, split.test, loss);
  });
  return losses;
}

ExperimentReport run_transductive(const TransductiveConfig& cfg, Execution exec) {
  const auto start = std::chrono::steady_clock::now();
  const Index n = cfg.n;
  const std::vector<Cell> pool = make_pool(n, n, 2 * cfg.half, derive_seed(cfg.base_seed, 4));
  // Entries of M have unit mean square.
  const Matrix m = make_signal({n, 2, signal_seed(cfg.base_seed, 0)}) / std::sqrt(static_cast<double>(n));
  Matrix y = m;
  if (cfg.noise > 0.0) {
    Rng rng = make_rng(noise_seed(cfg.base_seed, 0));
    y += cfg.noise * gaussian(n, n, rng);
  }
  const MarginalWeights pool_w = smooth_empirical(observe(pool, y));
  const double signal_norm = weighted_trace_norm(m, pool_w);
  const NormBudget budget{cfg.r_scale * signal_norm * signal_norm};

  ExperimentReport rep;
  rep.scenario = cfg.swap_roles ? "transductive_swapped" : "transductive";
  rep.n = n;
  rep.s = cfg.half;
  rep.nu = cfg.noise;
  rep.alpha = kTheoryAlpha;
  rep.weighting = to_string(WeightKind::TransductiveSmoothed);
  rep.metric = "test_loss_" + cfg.loss;
  rep.stats = summarize(transductive_losses(pool, y, budget, cfg, exec));
  rep.extra["r"] = budget.r;
  rep.extra["runtime_sec"] = seconds_since(start);
  rep.base_seed = cfg.base_seed;
  rep.num_seeds = cfg.splits;
  rep.config_hash = fnv1a_hex(cfg.to_json().dump());
  return rep;
}

}  // namespace wtn
