#include "wtn/adversarial.hpp"
#include "wtn/weighting.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace wtn;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index k = 0;
  for (double x : xs) v(k++) = x;
  return v;
}

MarginalWeights weights(Vector row, Vector col, WeightKind kind = WeightKind::True) {
  MarginalWeights w;
  w.row = std::move(row);
  w.col = std::move(col);
  w.kind = kind;
  return w;
}

Vector random_simplex(Index n, Rng& rng) {
  std::exponential_distribution<double> e;
  Vector v(n);
  for (Index k = 0; k < n; ++k) v(k) = e(rng);
  return v / v.sum();
}

// Independent oracle for the trace norm.
double jacobi_trace_norm(const Matrix& x) { return Eigen::JacobiSVD<Matrix>(x).singularValues().sum(); }

SampleSet sample_at(std::initializer_list<Cell> cells, Index n, Index m) {
  SampleSet s;
  s.n = n;
  s.m = m;
  for (const Cell& c : cells) {
    s.indexes.push_back(c);
    s.values.push_back(0.0);
  }
  return s;
}

}  // namespace

TEST_CASE("smooth") {
  const auto w = weights(vec({0.5, 0.5, 0.0, 0.0}), vec({0.25, 0.75}));
  SUBCASE("alpha 1 is the identity") {
    const auto s = smooth(w, {1.0});
    CHECK(s.row == w.row);
    CHECK(s.col == w.col);
  }
  SUBCASE("alpha 0 is uniform") {
    const auto s = smooth(w, {0.0});
    CHECK((s.row.array() - 0.25).abs().maxCoeff() < 1e-15);
    CHECK((s.col.array() - 0.5).abs().maxCoeff() < 1e-15);
  }
  SUBCASE("worked example") {
    const auto s = smooth(w, {0.5});
    CHECK(s.row(0) == doctest::Approx(0.375));
    CHECK(s.row(1) == doctest::Approx(0.375));
    CHECK(s.row(2) == doctest::Approx(0.125));
    CHECK(s.row(3) == doctest::Approx(0.125));
    CHECK(s.kind == WeightKind::Smoothed);
    CHECK(s.alpha == 0.5);
    CHECK_NOTHROW(s.validate());
  }
  SUBCASE("affine in alpha") {
    Rng rng = make_rng(5);
    const auto base = weights(random_simplex(6, rng), random_simplex(4, rng));
    const auto a = smooth(base, {0.2}), b = smooth(base, {0.8}), mid = smooth(base, {0.5});
    CHECK(((a.row + b.row) / 2 - mid.row).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(((a.col + b.col) / 2 - mid.col).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("floors hold") {
    Rng rng = make_rng(8);
    for (double alpha : {0.0, 0.3, 0.5, 0.9, 1.0}) {
      const auto s = smooth(weights(random_simplex(7, rng), random_simplex(3, rng)), {alpha});
      CHECK(s.row.minCoeff() >= (1 - alpha) / 7 - 1e-15);
      CHECK(s.col.minCoeff() >= (1 - alpha) / 3 - 1e-15);
      CHECK(std::abs(s.row.sum() - 1) < 1e-12);
    }
  }
  SUBCASE("rejects alpha outside [0, 1]") { CHECK_THROWS_AS(smooth(w, {1.5}), InvalidArgument); }
}

TEST_CASE("empirical marginals") {
  SUBCASE("counting example") {
    const auto w = empirical_marginals(sample_at({{0, 0}, {0, 1}, {1, 0}, {0, 0}}, 2, 2));
    CHECK(w.row == vec({0.75, 0.25}));
    CHECK(w.col == vec({0.75, 0.25}));
    CHECK(w.kind == WeightKind::Empirical);
  }
  SUBCASE("single sample") {
    const auto w = empirical_marginals(sample_at({{2, 1}}, 3, 2));
    CHECK(w.row == vec({0, 0, 1}));
    CHECK(w.col == vec({0, 1}));
  }
  SUBCASE("empty sample") { CHECK_THROWS_AS(empirical_marginals(sample_at({}, 2, 2)), InvalidArgument); }
  SUBCASE("uniform 50x50 concentration") {
    const std::size_t s = 100000;
    const auto set = sample(make_uniform(50, 50), s, Matrix::Zero(50, 50), 99);
    const auto w = empirical_marginals(set);
    const double bound = 3.0 * 5.0 * std::sqrt(1.0 / (50.0 * s));
    CHECK((w.row.array() - 1.0 / 50).abs().maxCoeff() < bound);
    CHECK((w.col.array() - 1.0 / 50).abs().maxCoeff() < bound);
  }
  SUBCASE("smoothed empirical") {
    const auto w = smooth_empirical(sample_at({{0, 0}}, 2, 2));
    CHECK(w.row == vec({0.75, 0.25}));
    CHECK(w.kind == WeightKind::SmoothedEmpirical);
    CHECK(w.alpha == 0.5);
    const auto u = smooth_empirical(sample_at({{0, 0}, {1, 1}}, 2, 2));
    CHECK(u.row == vec({0.5, 0.5}));
    const auto set = sample(make_uniform(9, 5), 30, Matrix::Zero(9, 5), 1);
    const auto f = smooth_empirical(set);
    CHECK(f.row.minCoeff() >= 1.0 / 18 - 1e-15);
    CHECK(f.col.minCoeff() >= 1.0 / 10 - 1e-15);
  }
}

TEST_CASE("weighted trace norm") {
  SUBCASE("uniform weights, identity") {
    CHECK(weighted_trace_norm(Matrix::Identity(2, 2), uniform_weights(2, 2)) == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("example 2 adversary has unit norm") {
    const auto inst = build_example2(6, 40);
    CHECK(weighted_trace_norm(inst.A, true_marginals(inst.dist)) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("rank-1 sign matrices have norm at most 1") {
    Rng rng = make_rng(17);
    std::bernoulli_distribution coin;
    for (int rep = 0; rep < 200; ++rep) {
      Vector u(6), v(4);
      for (Index k = 0; k < 6; ++k) u(k) = coin(rng) ? 1.0 : -1.0;
      for (Index k = 0; k < 4; ++k) v(k) = coin(rng) ? 1.0 : -1.0;
      const auto w = weights(random_simplex(6, rng), random_simplex(4, rng));
      CHECK(weighted_trace_norm(u * v.transpose(), w) <= 1.0 + 1e-12);
    }
  }
  SUBCASE("zero weights") {
    const auto w = weights(vec({1.0, 0.0}), vec({0.5, 0.5}));
    Matrix x = Matrix::Zero(2, 2);
    x(0, 1) = 3.0;
    CHECK(std::isfinite(weighted_trace_norm(x, w)));
    x(1, 0) = 1.0;
    CHECK(weighted_trace_norm(x, w) == std::numeric_limits<double>::infinity());
    CHECK(weighted_frobenius_norm(x, w) == std::numeric_limits<double>::infinity());
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(weighted_trace_norm(Matrix::Zero(3, 2), uniform_weights(2, 2)), InvalidArgument);
  }
  SUBCASE("matches an independent SVD") {
    Rng rng = make_rng(4);
    for (int rep = 0; rep < 50; ++rep) {
      const auto w = weights(random_simplex(9, rng), random_simplex(7, rng));
      const Matrix x = Matrix::Random(9, 7);
      const Matrix z = w.row.cwiseSqrt().asDiagonal() * x * w.col.cwiseSqrt().asDiagonal();
      CHECK(weighted_trace_norm(x, w) == doctest::Approx(jacobi_trace_norm(z)).epsilon(1e-12));
    }
  }
  SUBCASE("sparse matrix with many zero rows") {
    // A shape that once broke a divide-and-conquer SVD.
    Rng rng = make_rng(123);
    std::uniform_int_distribution<Index> cell(0, 59);
    std::normal_distribution<double> g;
    for (int rep = 0; rep < 20; ++rep) {
      Matrix x = Matrix::Zero(60, 60);
      for (int t = 0; t < 35; ++t) x(cell(rng), cell(rng)) = 1e-3 * g(rng);
      const auto w = uniform_weights(60, 60);
      CHECK(weighted_trace_norm(x, w) == doctest::Approx(jacobi_trace_norm(x) / 60.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("norm properties") {
  Rng rng = make_rng(31);
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  for (int rep = 0; rep < 100; ++rep) {
    const auto w = weights(random_simplex(6, rng), random_simplex(5, rng));
    const Matrix x = Matrix::Random(6, 5), y = Matrix::Random(6, 5);
    const double c = coef(rng);
    const double nx = weighted_trace_norm(x, w);
    CHECK(std::abs(weighted_trace_norm(c * x, w) - std::abs(c) * nx) <= 1e-10 * std::abs(c) * nx);
    CHECK(weighted_trace_norm(x + y, w) <= nx + weighted_trace_norm(y, w) + 1e-10);
    CHECK(weighted_frobenius_norm(x, w) <= nx + 1e-12);
    const auto u = uniform_weights(6, 5);
    CHECK(weighted_trace_norm(x, u) == doctest::Approx(jacobi_trace_norm(x) / std::sqrt(30.0)).epsilon(1e-10));
  }
}

TEST_CASE("weighted Frobenius norm") {
  CHECK(weighted_frobenius_norm(Matrix::Identity(2, 2), uniform_weights(2, 2)) ==
        doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-14));
  CHECK(weighted_frobenius_norm(Matrix::Zero(3, 3), uniform_weights(3, 3)) == 0.0);
}

TEST_CASE("truncation") {
  SUBCASE("threshold formula") {
    CHECK(truncation_threshold(4, 9, 10) == doctest::Approx(std::log(4.0) / (10.0 * 6.0)));
  }
  SUBCASE("all above or all below") {
    const Matrix x = Matrix::Constant(3, 3, 2.0);
    CHECK(truncate_low_probability(x, make_uniform(3, 3), 1000) == x);
    CHECK(truncate_low_probability(x, make_uniform(3, 3), 1).isZero());
  }
  SUBCASE("mixed 2x2 with one sub-threshold cell") {
    // threshold log(2) / (s * 2) = 0.0866 at s = 4
    Matrix m(2, 2);
    m << 0.05, 0.25, 0.3, 0.4;
    const auto d = JointDistribution::from_mass(m);
    const Matrix x = Matrix::Constant(2, 2, 1.0);
    Matrix expected = x;
    expected(0, 0) = 0.0;
    CHECK(truncate_low_probability(x, d, 4) == expected);
  }
}

TEST_CASE("projection onto the norm ball") {
  const auto w = uniform_weights(3, 3);
  const NormBudget budget{4.0};
  const Matrix inside = 0.1 * Matrix::Identity(3, 3);
  CHECK(project_to_ball(inside, w, budget) == inside);
  CHECK(project_to_ball(Matrix::Zero(3, 3), w, budget).isZero());
  const Matrix x = Matrix::Random(3, 3);
  const Matrix scaled = x * (2.0 * budget.radius() / weighted_trace_norm(x, w));
  const Matrix p = project_to_ball(scaled, w, budget);
  CHECK(std::abs(weighted_trace_norm(p, w) - budget.radius()) <= 1e-10);
  CHECK((p - scaled / 2.0).cwiseAbs().maxCoeff() < 1e-12);
  const auto zero_w = weights(vec({1.0, 0.0, 0.0}), vec({1.0 / 3, 1.0 / 3, 1.0 / 3}));
  CHECK_THROWS_AS(project_to_ball(Matrix::Ones(3, 3), zero_w, budget), InvalidArgument);
  CHECK_THROWS_AS(NormBudget{0.0}.radius(), InvalidArgument);
}

TEST_CASE("marginal domination") {
  SUBCASE("large uniform sample holds with ratio near 1") {
    const auto d = make_uniform(10, 10);
    const auto set = sample(d, 200000, Matrix::Zero(10, 10), 3);
    const auto r = check_marginal_domination(set, d);
    CHECK(r.holds);
    CHECK(r.worst_ratio > 0.97);
  }
  SUBCASE("single sample on a 2x2 uniform grid sits exactly on the boundary") {
    // Unsampled row: 1/2 (0 + 1/2) = 1/4, and half of 1/2 (1/2 + 1/2) is also 1/4.
    const auto d = make_uniform(2, 2);
    const auto r = check_marginal_domination(sample_at({{0, 0}}, 2, 2), d);
    CHECK(r.worst_ratio == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(r.holds);
  }
  SUBCASE("sample missing a heavy row fails") {
    const auto d = make_product(vec({0.9, 0.1}), vec({0.5, 0.5}));
    // Row 0: smoothed empirical 1/4, smoothed true 0.7, ratio 0.357.
    const auto r = check_marginal_domination(sample_at({{1, 0}}, 2, 2), d);
    CHECK_FALSE(r.holds);
    CHECK(r.worst_ratio == doctest::Approx(0.25 / 0.7).epsilon(1e-12));
  }
}

TEST_CASE("weights validation") {
  CHECK_THROWS_AS(weights(vec({0.5, 0.6}), vec({1.0})).validate(), InvalidArgument);
  auto s = weights(vec({0.9, 0.1}), vec({1.0}), WeightKind::Smoothed);
  s.alpha = 0.5;  // floor 0.25 violated
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  CHECK(weight_kind_from_string(to_string(WeightKind::TransductiveSmoothed)) == WeightKind::TransductiveSmoothed);
  CHECK_THROWS_AS(weight_kind_from_string("bogus"), InvalidArgument);
}
