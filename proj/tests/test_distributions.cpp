#include "wtn/distributions.hpp"
#include "wtn/weighting.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

using namespace wtn;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index k = 0;
  for (double x : xs) v(k++) = x;
  return v;
}

// Upper quantile of the chi-square distribution (Wilson-Hilferty).
double chi_square_quantile(double df, double z) {
  const double a = 2.0 / (9.0 * df);
  return df * std::pow(1.0 - a + z * std::sqrt(a), 3.0);
}

}  // namespace

TEST_CASE("make_product multiplies marginals") {
  SUBCASE("uniform 2x2") {
    const auto d = make_product(vec({0.5, 0.5}), vec({0.5, 0.5}));
    for (Index i = 0; i < 2; ++i)
      for (Index j = 0; j < 2; ++j) CHECK(d(i, j) == 0.25);
  }
  SUBCASE("point mass") {
    const auto d = make_product(vec({1, 0}), vec({1, 0}));
    CHECK(d(0, 0) == 1.0);
    CHECK(d.mass().sum() == 1.0);
    CHECK(d(1, 1) == 0.0);
  }
  SUBCASE("asymmetric") {
    const auto d = make_product(vec({0.7, 0.3}), vec({0.6, 0.4}));
    CHECK(d(0, 0) == doctest::Approx(0.42).epsilon(1e-15));
    CHECK(d(1, 1) == doctest::Approx(0.12).epsilon(1e-15));
  }
  SUBCASE("marginals recovered bitwise") {
    Rng rng = make_rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
      Vector r(7), c(5);
      for (Index k = 0; k < r.size(); ++k) r(k) = u(rng);
      for (Index k = 0; k < c.size(); ++k) c(k) = u(rng);
      r /= r.sum();
      c /= c.sum();
      const auto d = make_product(r, c);
      CHECK(d.row_marginals() == r);
      CHECK(d.col_marginals() == c);
    }
  }
  SUBCASE("rejects invalid marginals") {
    CHECK_THROWS_AS(make_product(vec({1.2, -0.2}), vec({1.0})), InvalidArgument);
    CHECK_THROWS_AS(make_product(vec({0.5, 0.4}), vec({1.0})), InvalidArgument);
  }
}

TEST_CASE("from_mass validates and caches marginals") {
  Matrix m(2, 3);
  m << 0.1, 0.2, 0.1, 0.3, 0.2, 0.1;
  const auto d = JointDistribution::from_mass(m);
  CHECK(std::abs(d.row_marginals()(0) - 0.4) < 1e-12);
  CHECK(std::abs(d.col_marginals()(1) - 0.4) < 1e-12);
  Matrix bad = m;
  bad(0, 0) = -0.1;
  CHECK_THROWS_AS(JointDistribution::from_mass(bad), InvalidArgument);
  CHECK_THROWS_AS(JointDistribution::from_mass(2.0 * m), InvalidArgument);
}

TEST_CASE("uniform-marginal non-product family") {
  SUBCASE("mixing 0 is uniform") {
    const auto d = make_uniform_marginal_nonproduct(5, 0.0, 1);
    CHECK((d.mass().array() - 1.0 / 25.0).abs().maxCoeff() < 1e-15);
  }
  SUBCASE("identity permutation, mixing 1, n = 2") {
    const std::vector<Index> id{0, 1};
    const auto d = make_permutation_mixture(id, 1.0);
    CHECK(d(0, 0) == 0.5);
    CHECK(d(1, 1) == 0.5);
    CHECK(d(0, 1) == 0.0);
  }
  SUBCASE("marginals uniform and dependence present") {
    for (double mixing : {0.1, 0.5, 0.9, 1.0}) {
      const auto d = make_uniform_marginal_nonproduct(8, mixing, 42);
      CHECK((d.row_marginals().array() - 1.0 / 8).abs().maxCoeff() < 1e-12);
      CHECK((d.col_marginals().array() - 1.0 / 8).abs().maxCoeff() < 1e-12);
      CHECK((d.mass().array() - 1.0 / 64).abs().maxCoeff() > 1e-3);
    }
  }
  SUBCASE("permutation is a permutation") {
    auto p = random_permutation(50, 9);
    std::sort(p.begin(), p.end());
    for (Index k = 0; k < 50; ++k) CHECK(p[static_cast<std::size_t>(k)] == k);
  }
}

TEST_CASE("sampling") {
  SUBCASE("point mass") {
    const auto d = make_product(vec({0, 1, 0}), vec({0, 0, 1}));
    const auto s = sample(d, 100, Matrix::Ones(3, 3), 5);
    for (const Cell& c : s.indexes) CHECK((c == Cell{1, 2}));
  }
  SUBCASE("deterministic given seed") {
    const auto d = make_uniform(6, 4);
    const Matrix y = Matrix::Random(6, 4);
    const auto a = sample(d, 500, y, 11), b = sample(d, 500, y, 11), c = sample(d, 500, y, 12);
    CHECK(a.indexes == b.indexes);
    CHECK(a.values == b.values);
    CHECK_FALSE(a.indexes == c.indexes);
  }
  SUBCASE("values read from truth") {
    const auto d = make_uniform(4, 4);
    const Matrix y = Matrix::Random(4, 4);
    const auto s = sample(d, 50, y, 1);
    for (std::size_t t = 0; t < s.size(); ++t) CHECK(s.values[t] == y(s.indexes[t].i, s.indexes[t].j));
  }
  SUBCASE("shape mismatch") { CHECK_THROWS_AS(sample(make_uniform(3, 3), 5, Matrix::Zero(2, 3), 0), InvalidArgument); }
  SUBCASE("uniform 50x50 cell frequencies") {
    const std::size_t s = 100000;
    const auto d = make_uniform(50, 50);
    Rng rng = make_rng(2024);
    const auto cells = sample_indexes(d, s, rng);
    Matrix counts = Matrix::Zero(50, 50);
    for (const Cell& c : cells) counts(c.i, c.j) += 1.0;
    const double expected = static_cast<double>(s) / 2500.0;
    const double sd = std::sqrt(expected * (1.0 - 1.0 / 2500.0));
    const Index inside = ((counts.array() - expected).abs() <= 5.0 * sd).count();
    CHECK(inside >= static_cast<Index>(0.99 * 2500));
    const double chi2 = ((counts.array() - expected).square() / expected).sum();
    CHECK(chi2 < chi_square_quantile(2499.0, 3.0902));  // 99.9%
  }
  SUBCASE("non-uniform distribution chi-square") {
    Matrix m(3, 4);
    m << 0.05, 0.10, 0.02, 0.03, 0.20, 0.05, 0.05, 0.10, 0.15, 0.05, 0.10, 0.10;
    const auto d = JointDistribution::from_mass(m);
    const std::size_t s = 100000;
    Rng rng = make_rng(77);
    Matrix counts = Matrix::Zero(3, 4);
    for (const Cell& c : sample_indexes(d, s, rng)) counts(c.i, c.j) += 1.0;
    const Matrix expected = static_cast<double>(s) * m;
    const double chi2 = ((counts - expected).array().square() / expected.array()).sum();
    CHECK(chi2 < chi_square_quantile(11.0, 3.0902));
  }
}

TEST_CASE("transductive split") {
  const Matrix y = Matrix::Random(4, 4);
  SUBCASE("two-element pool") {
    const std::vector<Cell> pool{{0, 0}, {1, 1}};
    const auto p = transductive_split(pool, y, 3);
    CHECK(p.train.size() == 1);
    CHECK(p.test.size() == 1);
    CHECK_FALSE(p.train.indexes[0] == p.test.indexes[0]);
  }
  SUBCASE("invariants") {
    const std::vector<Cell> pool{{0, 0}, {0, 1}, {1, 2}, {2, 3}, {3, 3}, {3, 0}};
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto p = transductive_split(pool, y, seed);
      REQUIRE(p.train.size() == 3);
      REQUIRE(p.test.size() == 3);
      std::set<std::pair<Index, Index>> all;
      for (const auto& c : p.train.indexes) all.insert({c.i, c.j});
      for (const auto& c : p.test.indexes) all.insert({c.i, c.j});
      CHECK(all.size() == 6);
      for (std::size_t t = 0; t < 3; ++t) CHECK(p.train.values[t] == y(p.train.indexes[t].i, p.train.indexes[t].j));
    }
  }
  SUBCASE("equal partitions of a 4-element pool are equally likely") {
    const std::vector<Cell> pool{{0, 0}, {1, 1}, {2, 2}, {3, 3}};
    // Oracle: the 6 two-element training subsets, enumerated directly.
    std::map<std::pair<Index, Index>, int> freq;
    for (Index a = 0; a < 4; ++a)
      for (Index b = a + 1; b < 4; ++b) freq[{a, b}] = 0;
    const int splits = 10000;
    for (int k = 0; k < splits; ++k) {
      const auto p = transductive_split(pool, y, static_cast<std::uint64_t>(k));
      Index a = p.train.indexes[0].i, b = p.train.indexes[1].i;
      if (a > b) std::swap(a, b);
      REQUIRE(freq.count({a, b}) == 1);
      ++freq[{a, b}];
    }
    const double se = std::sqrt((1.0 / 6) * (5.0 / 6) / splits);
    for (const auto& [key, count] : freq) CHECK(std::abs(count / double(splits) - 1.0 / 6) <= 3 * se);
  }
  SUBCASE("errors") {
    const std::vector<Cell> odd{{0, 0}, {1, 1}, {2, 2}};
    CHECK_THROWS_AS(transductive_split(odd, y, 0), InvalidArgument);
    const std::vector<Cell> dup{{0, 0}, {0, 0}};
    CHECK_THROWS_AS(transductive_split(dup, y, 0), InvalidArgument);
    CHECK_THROWS_AS(transductive_split(std::vector<Cell>{}, y, 0), InvalidArgument);
  }
}
