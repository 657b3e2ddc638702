#include "wtn/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

namespace wtn {

namespace {

void require_normalized(const Vector& v, const char* what) {
  require(v.size() > 0, std::string(what) + " must be nonempty");
  require((v.array() >= 0.0).all(), std::string(what) + " has negative entries");
  require(std::abs(v.sum() - 1.0) <= kNormalizationTol, std::string(what) + " does not sum to 1");
}

Index uniform_index(Rng& rng, Index upper_inclusive) {
  std::uniform_int_distribution<Index> pick(0, upper_inclusive);
  return pick(rng);
}

}  // namespace

JointDistribution::JointDistribution(Matrix mass, Vector row, Vector col)
    : mass_(std::move(mass)), row_(std::move(row)), col_(std::move(col)) {
  cumulative_.resize(static_cast<std::size_t>(mass_.size()));
  double acc = 0.0;
  std::size_t k = 0;
  for (Index i = 0; i < mass_.rows(); ++i)
    for (Index j = 0; j < mass_.cols(); ++j) {
      acc += mass_(i, j);
      cumulative_[k++] = acc;
    }
}

JointDistribution JointDistribution::from_mass(Matrix mass) {
  require(mass.rows() > 0 && mass.cols() > 0, "distribution grid must be nonempty");
  require((mass.array() >= 0.0).all(), "distribution mass must be nonnegative");
  require(std::abs(mass.sum() - 1.0) <= kNormalizationTol, "distribution mass must sum to 1");
  Vector row = mass.rowwise().sum();
  Vector col = mass.colwise().sum().transpose();
  return JointDistribution(std::move(mass), std::move(row), std::move(col));
}

JointDistribution JointDistribution::with_marginals(Matrix mass, Vector row, Vector col) {
  require(mass.rows() > 0 && mass.cols() > 0, "distribution grid must be nonempty");
  require(row.size() == mass.rows() && col.size() == mass.cols(), "marginal length mismatch");
  require((mass.array() >= 0.0).all(), "distribution mass must be nonnegative");
  require(std::abs(mass.sum() - 1.0) <= kNormalizationTol, "distribution mass must sum to 1");
  const Vector row_sums = mass.rowwise().sum();
  const Vector col_sums = mass.colwise().sum().transpose();
  require((row_sums - row).cwiseAbs().maxCoeff() <= kNormalizationTol, "row marginals disagree with mass");
  require((col_sums - col).cwiseAbs().maxCoeff() <= kNormalizationTol, "column marginals disagree with mass");
  return JointDistribution(std::move(mass), std::move(row), std::move(col));
}

Cell JointDistribution::draw(Rng& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng) * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) {
    // u rounded onto the total; take the last cell that carries mass.
    it = std::prev(cumulative_.end());
    while (it != cumulative_.begin() && *std::prev(it) == *it) --it;
  }
  const auto k = static_cast<Index>(it - cumulative_.begin());
  return {k / mass_.cols(), k % mass_.cols()};
}

void SampleSet::validate() const {
  require(indexes.size() == values.size(), "sample indexes and values differ in length");
  for (const Cell& c : indexes)
    require(c.i >= 0 && c.i < n && c.j >= 0 && c.j < m, "sample index outside the grid");
}

JointDistribution make_product(const Vector& row_marginals, const Vector& col_marginals) {
  require_normalized(row_marginals, "row marginals");
  require_normalized(col_marginals, "column marginals");
  Matrix mass = row_marginals * col_marginals.transpose();
  return JointDistribution::with_marginals(std::move(mass), row_marginals, col_marginals);
}

JointDistribution make_uniform(Index n, Index m) {
  require(n > 0 && m > 0, "grid dimensions must be positive");
  return make_product(Vector::Constant(n, 1.0 / static_cast<double>(n)),
                      Vector::Constant(m, 1.0 / static_cast<double>(m)));
}

JointDistribution make_permutation_mixture(std::span<const Index> perm, double mixing) {
  require(mixing >= 0.0 && mixing <= 1.0, "mixing must lie in [0,1]");
  const auto n = static_cast<Index>(perm.size());
  require(n > 0, "permutation must be nonempty");
  std::vector<bool> seen(perm.size(), false);
  for (Index c : perm) {
    require(c >= 0 && c < n && !seen[static_cast<std::size_t>(c)], "not a permutation");
    seen[static_cast<std::size_t>(c)] = true;
  }
  const double dn = static_cast<double>(n);
  Matrix mass = Matrix::Constant(n, n, (1.0 - mixing) / (dn * dn));
  for (Index i = 0; i < n; ++i) mass(i, perm[static_cast<std::size_t>(i)]) += mixing / dn;
  Vector uniform = Vector::Constant(n, 1.0 / dn);
  return JointDistribution::with_marginals(std::move(mass), uniform, uniform);
}

std::vector<Index> random_permutation(Index n, std::uint64_t seed) {
  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  Rng rng = make_rng(seed);
  for (Index i = n - 1; i > 0; --i) std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(uniform_index(rng, i))]);
  return perm;
}

JointDistribution make_uniform_marginal_nonproduct(Index n, double mixing, std::uint64_t seed) {
  require(n > 0, "n must be positive");
  const auto perm = random_permutation(n, seed);
  return make_permutation_mixture(perm, mixing);
}

std::vector<Cell> sample_indexes(const JointDistribution& dist, std::size_t s, Rng& rng) {
  std::vector<Cell> cells;
  cells.reserve(s);
  for (std::size_t t = 0; t < s; ++t) cells.push_back(dist.draw(rng));
  return cells;
}

SampleSet observe(std::span<const Cell> indexes, const Matrix& truth) {
  SampleSet set;
  set.n = truth.rows();
  set.m = truth.cols();
  set.indexes.assign(indexes.begin(), indexes.end());
  set.values.reserve(indexes.size());
  for (const Cell& c : indexes) {
    require(c.i >= 0 && c.i < set.n && c.j >= 0 && c.j < set.m, "index outside the truth matrix");
    set.values.push_back(truth(c.i, c.j));
  }
  return set;
}

SampleSet sample(const JointDistribution& dist, std::size_t s, const Matrix& truth, std::uint64_t seed) {
  require(truth.rows() == dist.rows() && truth.cols() == dist.cols(),
          "truth matrix shape does not match the distribution");
  Rng rng = make_rng(seed);
  const auto cells = sample_indexes(dist, s, rng);
  return observe(cells, truth);
}

TransductivePool transductive_split(std::span<const Cell> pool_indexes, const Matrix& truth,
                                    std::uint64_t seed) {
  const std::size_t total = pool_indexes.size();
  require(total >= 2 && total % 2 == 0, "transductive pool must have even, positive size");
  std::set<std::pair<Index, Index>> distinct;
  for (const Cell& c : pool_indexes) distinct.emplace(c.i, c.j);
  require(distinct.size() == total, "transductive pool indexes must be distinct");

  std::vector<Cell> shuffled(pool_indexes.begin(), pool_indexes.end());
  Rng rng = make_rng(seed);
  for (std::size_t k = total - 1; k > 0; --k)
    std::swap(shuffled[k], shuffled[static_cast<std::size_t>(uniform_index(rng, static_cast<Index>(k)))]);

  const std::size_t half = total / 2;
  TransductivePool out;
  out.pool = observe(pool_indexes, truth);
  out.train = observe(std::span<const Cell>(shuffled).first(half), truth);
  out.test = observe(std::span<const Cell>(shuffled).subspan(half), truth);
  return out;
}

}  // namespace wtn
