#include "wtn/solvers.hpp"

#include "wtn/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace wtn {

// ---------------------------------------------------------------------------
// CompletionModel

CompletionModel CompletionModel::dense(Matrix x) { return CompletionModel(std::move(x)); }

CompletionModel CompletionModel::factored(Matrix u, Matrix v) {
  require(u.cols() == v.cols(), "factor ranks differ");
  require(u.cols() <= std::min(u.rows(), v.rows()), "factor rank exceeds min(n, m)");
  return CompletionModel(FactorPair{std::move(u), std::move(v)});
}

Index CompletionModel::rows() const {
  return is_factored() ? factors().U.rows() : dense_matrix().rows();
}

Index CompletionModel::cols() const {
  return is_factored() ? factors().V.rows() : dense_matrix().cols();
}

Index CompletionModel::rank_cap() const {
  return is_factored() ? factors().U.cols() : std::min(rows(), cols());
}

double CompletionModel::at(Index i, Index j) const {
  if (!is_factored()) return dense_matrix()(i, j);
  const FactorPair& f = factors();
  return f.U.row(i).dot(f.V.row(j));
}

Matrix CompletionModel::to_dense() const {
  if (!is_factored()) return dense_matrix();
  const FactorPair& f = factors();
  return f.U * f.V.transpose();
}

// ---------------------------------------------------------------------------
// Config

void SolverConfig::validate() const {
  require(lambda >= 0.0, "lambda must be nonnegative");
  require(tol > 0.0, "tol must be positive");
  require(max_iters >= 1, "max_iters must be at least 1");
  require(step_size > 0.0, "step size must be positive");
  if (rank_cap) require(*rank_cap >= 1, "rank cap must be at least 1");
}

SolverConfig SolverConfig::sgd(Index rank, double lambda, std::uint64_t seed) {
  SolverConfig cfg;
  cfg.lambda = lambda;
  cfg.rank_cap = rank;
  cfg.max_iters = 200;
  cfg.step_size = 0.005;
  cfg.seed = seed;
  return cfg;
}

// ---------------------------------------------------------------------------
// Squared-loss objective in reweighted coordinates Z = diag(row)^1/2 X diag(col)^1/2.

namespace {

struct ObservedCell {
  Index i = 0;
  Index j = 0;
  double count = 0.0;
  double mean = 0.0;
  double scale = 1.0;  // sqrt(row_i col_j)
};

struct SquaredObjective {
  Index n = 0;
  Index m = 0;
  double s = 0.0;
  double within_cell = 0.0;  // sum_t (y_t - mean of its cell)^2
  double mean_square = 0.0;  // (1/s) sum_t y_t^2
  std::vector<ObservedCell> cells;

  SquaredObjective(const SampleSet& sample, const MarginalWeights& w) : n(sample.n), m(sample.m) {
    sample.validate();
    require(!sample.empty(), "solver needs a nonempty sample");
    require(w.rows() == n && w.cols() == m, "weights do not match the sample grid");
    require(w.strictly_positive(), "solver needs strictly positive weights");
    s = static_cast<double>(sample.size());

    std::map<std::pair<Index, Index>, std::vector<double>> grouped;
    for (std::size_t t = 0; t < sample.size(); ++t) {
      grouped[{sample.indexes[t].i, sample.indexes[t].j}].push_back(sample.values[t]);
      mean_square += sample.values[t] * sample.values[t];
    }
    mean_square /= s;
    cells.reserve(grouped.size());
    for (const auto& [key, ys] : grouped) {
      ObservedCell c;
      c.i = key.first;
      c.j = key.second;
      c.count = static_cast<double>(ys.size());
      c.mean = std::accumulate(ys.begin(), ys.end(), 0.0) / c.count;
      for (double y : ys) within_cell += (y - c.mean) * (y - c.mean);
      c.scale = std::sqrt(w.row(c.i) * w.col(c.j));
      cells.push_back(c);
    }
  }

  // L_S at X = Z / scale on the observed cells.
  double value(const Matrix& z) const {
    double total = within_cell;
    for (const ObservedCell& c : cells) {
      const double d = z(c.i, c.j) / c.scale - c.mean;
      total += c.count * d * d;
    }
    return total / s;
  }

  // Largest diagonal curvature of the objective in Z coordinates.
  double lipschitz() const {
    double l = 0.0;
    for (const ObservedCell& c : cells) l = std::max(l, 2.0 * c.count / (s * c.scale * c.scale));
    return l;
  }

  // b <- b - step * grad(z); only observed cells carry gradient.
  void add_gradient_step(const Matrix& z, double step, Matrix& b) const {
    for (const ObservedCell& c : cells) {
      const double g = 2.0 * c.count * (z(c.i, c.j) / c.scale - c.mean) / (s * c.scale);
      b(c.i, c.j) -= step * g;
    }
  }

  Matrix gradient(const Matrix& z) const {
    Matrix g = Matrix::Zero(n, m);
    add_gradient_step(z, -1.0, g);
    return g;
  }
};

// Called with every proximal point produced: (Z, L_S, ||Z||_tr).
using IterateObserver = std::function<void(const Matrix&, double, double)>;

struct ProxRun {
  Matrix z;
  double loss = 0.0;
  double norm = 0.0;
  std::vector<double> objective;
  int iterations = 0;
  bool converged = false;
};

// Monotone accelerated proximal gradient with adaptive restart.
ProxRun run_proximal(const SquaredObjective& obj, double lambda, Matrix z0, int max_iters, double tol,
                     const IterateObserver& observe) {
  const double lip = obj.lipschitz();
  const double step = 1.0 / lip;

  ProxRun run;
  run.z = std::move(z0);
  run.loss = obj.value(run.z);
  run.norm = linalg::trace_norm(run.z);
  double current = run.loss + lambda * run.norm;
  run.objective.push_back(current);

  Matrix previous = run.z;
  Matrix y = run.z;
  double t = 1.0;
  int stalled = 0;

  for (int it = 1; it <= max_iters; ++it) {
    run.iterations = it;
    Matrix b = y;
    obj.add_gradient_step(y, step, b);
    linalg::Thresholded prox = linalg::soft_threshold_gram(b, step * lambda);
    const double prox_loss = obj.value(prox.value);
    const double candidate = prox_loss + lambda * prox.trace_norm;
    if (observe) observe(prox.value, prox_loss, prox.trace_norm);

    if (candidate > current) {
      // Momentum overshot: restart from the accepted point. The next step is a
      // plain proximal-gradient step, which cannot increase the objective.
      if (t == 1.0) {
        // Already a plain step; only roundoff separates candidate and current.
        if (candidate > current + 1e-10 * std::max(1.0, std::abs(current)))
          throw std::logic_error("proximal objective increased on a plain step (" + std::to_string(candidate) +
                                 " > " + std::to_string(current) + ")");
        run.objective.push_back(current);
        run.converged = true;
        break;
      }
      t = 1.0;
      y = run.z;
      previous = run.z;
      run.objective.push_back(current);
      continue;
    }

    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double decrease = current - candidate;
    previous = std::move(run.z);
    run.z = std::move(prox.value);
    run.loss = prox_loss;
    run.norm = prox.trace_norm;
    y = run.z + ((t - 1.0) / t_next) * (run.z - previous);
    t = t_next;
    current = candidate;
    run.objective.push_back(current);

    if (decrease <= tol * std::max(std::abs(current), 1e-300)) {
      if (++stalled >= 2) {
        run.converged = true;
        break;
      }
    } else {
      stalled = 0;
    }
  }
  return run;
}

Matrix to_x(const Matrix& z, const MarginalWeights& w) { return unweight(z, w); }

}  // namespace

// ---------------------------------------------------------------------------

Matrix prox_weighted_trace(const Matrix& x, const MarginalWeights& w, double tau) {
  require(tau >= 0.0, "tau must be nonnegative");
  require(x.rows() == w.rows() && x.cols() == w.cols(), "matrix shape does not match the weights");
  require(w.strictly_positive(), "prox needs strictly positive weights");
  if (tau == 0.0) return x;
  return unweight(linalg::soft_threshold(reweight(x, w), tau).value, w);
}

ProximalFit fit_proximal(const SampleSet& sample, const MarginalWeights& w, const LossSpec& loss,
                         const SolverConfig& cfg, const std::optional<Matrix>& initial) {
  require(loss.kind == LossKind::Squared, "the proximal solver supports the squared loss only");
  cfg.validate();
  const SquaredObjective obj(sample, w);
  Matrix z0 = Matrix::Zero(sample.n, sample.m);
  if (initial) z0 = reweight(*initial, w);
  ProxRun run = run_proximal(obj, cfg.lambda, std::move(z0), cfg.max_iters, cfg.tol, {});

  ProximalFit fit;
  fit.model = CompletionModel::dense(to_x(run.z, w));
  fit.objective = std::move(run.objective);
  fit.iterations = run.iterations;
  fit.converged = run.converged;
  fit.training_loss = run.loss;
  fit.weighted_norm = run.norm;
  return fit;
}

double lambda_max(const SampleSet& sample, const MarginalWeights& w) {
  const SquaredObjective obj(sample, w);
  return linalg::spectral_norm_exact(obj.gradient(Matrix::Zero(obj.n, obj.m)));
}

MinNormFit min_norm_fit(const SampleSet& sample, const MarginalWeights& w, double eps, const MinNormOptions& opts) {
  require(eps >= 0.0, "training-loss ceiling must be nonnegative");
  require(opts.max_depth >= 1, "bisection depth must be positive");
  const SquaredObjective obj(sample, w);
  const double target = eps * (1.0 + 1e-3) + opts.abs_tol * obj.mean_square;

  MinNormFit out;
  const Matrix zero = Matrix::Zero(obj.n, obj.m);
  const double zero_loss = obj.value(zero);
  if (zero_loss <= target) {
    out.model = CompletionModel::dense(zero);
    out.training_loss = zero_loss;
    out.feasible = true;
    return out;
  }

  const double lmax = linalg::spectral_norm_exact(obj.gradient(zero));
  out.lambda_max = lmax;

  bool have_best = false;
  Matrix best_z;
  double best_norm = 0.0, best_loss = 0.0, best_lambda = 0.0;
  double active_lambda = lmax;
  const IterateObserver observe = [&](const Matrix& z, double l, double norm) {
    if (l <= target && (!have_best || norm < best_norm)) {
      have_best = true;
      best_z = z;
      best_norm = norm;
      best_loss = l;
      best_lambda = active_lambda;
    }
  };

  auto solve = [&](double lambda, const Matrix& start) {
    active_lambda = lambda;
    ProxRun run = run_proximal(obj, lambda, start, opts.max_iters, opts.tol, observe);
    ++out.solves;
    out.iterations += run.iterations;
    return run;
  };

  // Walk down from lambda_max until the fit meets the ceiling.
  double hi = lmax;
  double lo = 0.0;
  Matrix z_lo;
  Matrix z = zero;
  int depth = 0;
  while (depth < opts.max_depth) {
    const double lambda = hi * opts.path_ratio;
    if (lambda < opts.lambda_floor * lmax) break;
    ProxRun run = solve(lambda, z);
    ++depth;
    z = std::move(run.z);
    if (run.loss <= target) {
      lo = lambda;
      z_lo = z;
      break;
    }
    hi = lambda;
  }

  // Geometric bisection between the feasible and infeasible lambdas.
  if (lo > 0.0) {
    while (depth < opts.max_depth && hi / lo > opts.bracket_ratio) {
      const double mid = std::sqrt(hi * lo);
      ProxRun run = solve(mid, z_lo);
      ++depth;
      if (run.loss <= target) {
        lo = mid;
        z_lo = std::move(run.z);
      } else {
        hi = mid;
      }
    }
  }

  if (have_best) {
    out.model = CompletionModel::dense(to_x(best_z, w));
    out.norm = best_norm;
    out.training_loss = best_loss;
    out.lambda = best_lambda;
    out.feasible = true;
  } else {
    out.model = CompletionModel::dense(to_x(z, w));
    out.norm = linalg::trace_norm(z);
    out.training_loss = obj.value(z);
    out.lambda = hi * opts.path_ratio;
    out.feasible = false;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Factored SGD

namespace {

struct FactorSetup {
  std::vector<double> row_count;
  std::vector<double> col_count;
};

FactorSetup count_visits(const SampleSet& sample) {
  FactorSetup f;
  f.row_count.assign(static_cast<std::size_t>(sample.n), 0.0);
  f.col_count.assign(static_cast<std::size_t>(sample.m), 0.0);
  for (const Cell& c : sample.indexes) {
    f.row_count[static_cast<std::size_t>(c.i)] += 1.0;
    f.col_count[static_cast<std::size_t>(c.j)] += 1.0;
  }
  return f;
}

void check_factored_inputs(const SampleSet& sample, const MarginalWeights& w, const Matrix& u, const Matrix& v) {
  sample.validate();
  require(!sample.empty(), "solver needs a nonempty sample");
  require(w.rows() == sample.n && w.cols() == sample.m, "weights do not match the sample grid");
  require(u.rows() == sample.n && v.rows() == sample.m && u.cols() == v.cols(), "factor shapes do not match");
}

}  // namespace

double factored_objective(const SampleSet& sample, const MarginalWeights& w, const LossSpec& loss, double lambda,
                          const Matrix& u, const Matrix& v) {
  check_factored_inputs(sample, w, u, v);
  double data = 0.0;
  for (std::size_t t = 0; t < sample.size(); ++t) {
    const Cell c = sample.indexes[t];
    data += loss.value(u.row(c.i).dot(v.row(c.j)), sample.values[t]);
  }
  data /= static_cast<double>(sample.size());
  const double penalty = (w.row.asDiagonal() * u.cwiseAbs2()).sum() + (w.col.asDiagonal() * v.cwiseAbs2()).sum();
  return data + 0.5 * lambda * penalty;
}

FactorPair factored_gradient(const SampleSet& sample, const MarginalWeights& w, const LossSpec& loss, double lambda,
                             const Matrix& u, const Matrix& v) {
  check_factored_inputs(sample, w, u, v);
  FactorPair g{lambda * (w.row.asDiagonal() * u), lambda * (w.col.asDiagonal() * v)};
  const double inv_s = 1.0 / static_cast<double>(sample.size());
  for (std::size_t t = 0; t < sample.size(); ++t) {
    const Cell c = sample.indexes[t];
    const double d = inv_s * loss.subgradient(u.row(c.i).dot(v.row(c.j)), sample.values[t]);
    g.U.row(c.i) += d * v.row(c.j);
    g.V.row(c.j) += d * u.row(c.i);
  }
  return g;
}

FactoredFit fit_factored_sgd(const SampleSet& sample, const MarginalWeights& w, const LossSpec& loss,
                             const SolverConfig& cfg) {
  cfg.validate();
  require(cfg.rank_cap.has_value(), "factored SGD needs a rank cap");
  require(w.strictly_positive(), "factored SGD needs strictly positive weights");
  const Index k = *cfg.rank_cap;
  require(k <= std::min(sample.n, sample.m), "rank cap exceeds min(n, m)");

  Rng rng = make_rng(cfg.seed);
  std::normal_distribution<double> init(0.0, 1.0 / std::sqrt(static_cast<double>(k)));
  Matrix u(sample.n, k), v(sample.m, k);
  for (Index a = 0; a < u.size(); ++a) u.data()[a] = init(rng);
  for (Index a = 0; a < v.size(); ++a) v.data()[a] = init(rng);

  const FactorSetup visits = count_visits(sample);
  // Unvisited rows/columns only feel the penalty, whose minimizer is zero.
  for (Index i = 0; i < sample.n; ++i)
    if (visits.row_count[static_cast<std::size_t>(i)] == 0.0) u.row(i).setZero();
  for (Index j = 0; j < sample.m; ++j)
    if (visits.col_count[static_cast<std::size_t>(j)] == 0.0) v.row(j).setZero();

  // Per-visit share of the penalty so that one epoch applies it exactly once.
  const double s = static_cast<double>(sample.size());
  Vector row_decay(sample.n), col_decay(sample.m);
  for (Index i = 0; i < sample.n; ++i) {
    const double c = visits.row_count[static_cast<std::size_t>(i)];
    row_decay(i) = c > 0.0 ? cfg.lambda * s * w.row(i) / c : 0.0;
  }
  for (Index j = 0; j < sample.m; ++j) {
    const double c = visits.col_count[static_cast<std::size_t>(j)];
    col_decay(j) = c > 0.0 ? cfg.lambda * s * w.col(j) / c : 0.0;
  }

  FactoredFit fit;
  const double initial = factored_objective(sample, w, loss, cfg.lambda, u, v);
  fit.objective.push_back(initial);

  std::vector<std::size_t> order(sample.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const double eta = cfg.step_size;
  Eigen::RowVectorXd ui(k);
  for (int epoch = 0; epoch < cfg.max_iters; ++epoch) {
    for (std::size_t a = order.size() - 1; a > 0; --a) {
      std::uniform_int_distribution<std::size_t> pick(0, a);
      std::swap(order[a], order[pick(rng)]);
    }
    for (std::size_t t : order) {
      const Cell c = sample.indexes[t];
      const double g = loss.subgradient(u.row(c.i).dot(v.row(c.j)), sample.values[t]);
      ui = u.row(c.i);
      u.row(c.i) -= eta * (g * v.row(c.j) + row_decay(c.i) * ui);
      v.row(c.j) -= eta * (g * ui + col_decay(c.j) * v.row(c.j));
    }
    const double value = factored_objective(sample, w, loss, cfg.lambda, u, v);
    fit.objective.push_back(value);
    if (!std::isfinite(value) || value > 10.0 * initial)
      throw SolverError("factored SGD diverged; reduce the step size");
  }
  fit.model = CompletionModel::factored(std::move(u), std::move(v));
  return fit;
}

// ---------------------------------------------------------------------------
// Constrained ERM

ErmFit erm_in_ball(const SampleSet& sample, const MarginalWeights& w, NormBudget budget, const LossSpec& loss,
                   const SolverConfig& cfg, const std::optional<Matrix>& initial) {
  cfg.validate();
  loss.validate();
  sample.validate();
  require(!sample.empty(), "ERM needs a nonempty sample");
  require(w.rows() == sample.n && w.cols() == sample.m, "weights do not match the sample grid");
  require(w.strictly_positive(), "ERM in the ball needs strictly positive weights");
  const double radius = budget.radius();

  // Steps run on Z = D_r^1/2 X D_c^1/2, where the ball is a plain trace-norm ball.
  Matrix x = initial ? *initial : Matrix::Zero(sample.n, sample.m);
  require(x.rows() == sample.n && x.cols() == sample.m, "initial point has the wrong shape");
  Matrix z = reweight(x, w);
  if (linalg::trace_norm(z) > radius) {
    z = linalg::project_trace_ball(z, radius);
    x = unweight(z, w);
  }
  const Vector row_scale = w.row.cwiseSqrt().cwiseInverse();
  const Vector col_scale = w.col.cwiseSqrt().cwiseInverse();

  const double inv_s = 1.0 / static_cast<double>(sample.size());
  auto subgradient_z = [&](const Matrix& at) {
    Matrix g = Matrix::Zero(at.rows(), at.cols());
    for (std::size_t t = 0; t < sample.size(); ++t) {
      const Cell c = sample.indexes[t];
      g(c.i, c.j) += inv_s * loss.subgradient(at(c.i, c.j), sample.values[t]) * row_scale(c.i) * col_scale(c.j);
    }
    return g;
  };

  ErmFit fit;
  Matrix best = x;
  double best_loss = empirical_loss(x, sample, loss);
  fit.best_loss.push_back(best_loss);

  double c = 0.0;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    const Matrix g = subgradient_z(x);
    const double gnorm = g.norm();
    if (gnorm == 0.0) break;
    // The ball has Frobenius diameter at most 2 * radius.
    if (c == 0.0) c = radius / gnorm;
    z = linalg::project_trace_ball(z - (c / std::sqrt(static_cast<double>(it))) * g, radius);
    x = unweight(z, w);
    const double l = empirical_loss(x, sample, loss);
    if (l < best_loss) {
      best_loss = l;
      best = x;
    }
    fit.best_loss.push_back(best_loss);
    if (best_loss <= cfg.tol) break;
  }
  fit.training_loss = best_loss;
  fit.weighted_norm = weighted_trace_norm(best, w);
  fit.model = CompletionModel::dense(std::move(best));
  return fit;
}

}  // namespace wtn
