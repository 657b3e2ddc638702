#include "helpers.hpp"
#include "wtn/complexity.hpp"

#include <doctest.h>

#include <cmath>

using namespace wtn;
using namespace wtn::testing;

namespace {

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += std::log(x[k]);
    my += std::log(y[k]);
  }
  mx /= x.size();
  my /= y.size();
  double num = 0, den = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    num += (std::log(x[k]) - mx) * (std::log(y[k]) - my);
    den += (std::log(x[k]) - mx) * (std::log(x[k]) - mx);
  }
  return num / den;
}

}  // namespace

TEST_CASE("single-sample estimate is exact") {
  const std::vector<Cell> one{{2, 3}};
  const auto w = uniform_weights(6, 6);
  for (double r : {1.0, 4.0}) {
    const auto est = estimate_rademacher(one, w, {r}, 16, 1);
    CHECK(est.mean == doctest::Approx(std::sqrt(r) * 6.0).epsilon(1e-12));
    CHECK(est.std_error == doctest::Approx(0.0));
    CHECK(est.num_draws == 16);
  }
}

TEST_CASE("budget scaling is exact") {
  Rng rng = make_rng(1);
  const auto cells = sample_indexes(make_uniform(10, 10), 80, rng);
  const auto w = uniform_weights(10, 10);
  const auto a = estimate_rademacher(cells, w, {1.0}, 32, 5);
  const auto b = estimate_rademacher(cells, w, {4.0}, 32, 5);
  CHECK(b.mean == doctest::Approx(2.0 * a.mean).epsilon(1e-14));
  CHECK(b.std_error == doctest::Approx(2.0 * a.std_error).epsilon(1e-12));
}

TEST_CASE("sign flip leaves the spectral norm unchanged") {
  Rng rng = make_rng(2);
  const auto cells = sample_indexes(make_uniform(12, 9), 60, rng);
  const auto w = smooth(random_weights(12, 9, rng), {0.5});
  std::bernoulli_distribution coin;
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> signs(cells.size()), flipped(cells.size());
    for (std::size_t t = 0; t < signs.size(); ++t) {
      signs[t] = coin(rng) ? 1.0 : -1.0;
      flipped[t] = -signs[t];
    }
    CHECK(signed_sum_spectral_norm(cells, w, signs) == doctest::Approx(signed_sum_spectral_norm(cells, w, flipped)));
  }
}

TEST_CASE("parallel and serial estimates are bitwise identical") {
  Rng rng = make_rng(3);
  const auto cells = sample_indexes(make_uniform(30, 30), 400, rng);
  const auto w = uniform_weights(30, 30);
  const auto par = estimate_rademacher(cells, w, {1.0}, 24, 9, Execution::Parallel);
  const auto ser = estimate_rademacher_serial(cells, w, {1.0}, 24, 9);
  const auto ser2 = estimate_rademacher(cells, w, {1.0}, 24, 9, Execution::Serial);
  CHECK(par.mean == ser.mean);
  CHECK(par.std_error == ser.std_error);
  CHECK(ser2.mean == ser.mean);
}

TEST_CASE("zero weight at a sampled index is rejected") {
  MarginalWeights w;
  w.row = Vector::Zero(2);
  w.row(0) = 1.0;
  w.col = Vector::Constant(2, 0.5);
  const std::vector<Cell> cells{{1, 0}};
  CHECK_THROWS_AS(estimate_rademacher(cells, w, {1.0}, 4, 0), InvalidArgument);
}

TEST_CASE("estimate decays like s^-1/2 on a small uniform grid") {
  const auto w = uniform_weights(30, 30);
  std::vector<double> ss, est;
  for (std::size_t s : {150, 300, 600, 1200, 2400}) {
    Rng rng = make_rng(s);
    const auto cells = sample_indexes(make_uniform(30, 30), s, rng);
    ss.push_back(static_cast<double>(s));
    est.push_back(estimate_rademacher(cells, w, {1.0}, 32, s).mean);
  }
  const double b = slope(ss, est);
  CHECK(b >= -0.6);
  CHECK(b <= -0.4);
}

TEST_CASE("standard error shrinks like draws^-1/2") {
  Rng rng = make_rng(4);
  const auto cells = sample_indexes(make_uniform(20, 20), 200, rng);
  const auto w = uniform_weights(20, 20);
  std::vector<double> draws, errs;
  for (int d : {16, 64, 256}) {
    draws.push_back(d);
    errs.push_back(estimate_rademacher(cells, w, {1.0}, d, 77).std_error);
  }
  CHECK(std::abs(slope(draws, errs) + 0.5) <= 0.15);
}

TEST_CASE("bound diagnostics") {
  SUBCASE("uniform p and weights") {
    for (std::size_t s : {10, 1000}) {
      const auto d = make_uniform(7, 7);
      const auto b = bound_diagnostics(d, uniform_weights(7, 7), s, {1.0});
      CHECK(b.sigma_sq == doctest::Approx(static_cast<double>(s) * 7).epsilon(1e-12));
      CHECK(b.R_value == doctest::Approx(7.0).epsilon(1e-12));
      const double rate = (1.0 / s) * (std::sqrt(b.sigma_sq * std::log(7.0)) + 7.0 * std::log(7.0));
      CHECK(b.predicted_rate == doctest::Approx(rate).epsilon(1e-12));
    }
  }
  SUBCASE("smoothed weights satisfy the variance and range bounds") {
    Rng rng = make_rng(5);
    for (int rep = 0; rep < 50; ++rep) {
      std::exponential_distribution<double> e(0.3);
      Matrix mass(9, 6);
      for (Index k = 0; k < mass.size(); ++k) mass.data()[k] = std::pow(e(rng), 4);
      const auto d = JointDistribution::from_mass(mass / mass.sum());
      const auto w = smooth(true_marginals(d), {0.5});
      const auto b = bound_diagnostics(d, w, 500, {1.0});
      CHECK(b.sigma_sq <= 4.0 * 500 * 9 + 1e-9);
      CHECK(b.R_value <= 2.0 * std::sqrt(54.0) + 1e-9);
    }
  }
  SUBCASE("zero weights rejected") {
    const auto d = make_uniform(2, 2);
    MarginalWeights w = uniform_weights(2, 2);
    w.row << 1.0, 0.0;
    CHECK_THROWS_AS(bound_diagnostics(d, w, 10, {1.0}), InvalidArgument);
  }
}

TEST_CASE("rate table") {
  const double n = 100, s = 5000;
  const double ratio = 2.0 * n * std::log(n) / s;
  const auto bounded = rate_table(100, 100, 5000, {2.0}, LossSpec::clipped_absolute());
  REQUIRE(bounded.size() == 3);
  CHECK(bounded[0].scenario == "product");
  CHECK(bounded[0].rate == doctest::Approx(std::sqrt(ratio)));
  CHECK(bounded[1].rate == doctest::Approx(std::sqrt(ratio)));
  CHECK(bounded[2].rate == doctest::Approx(std::cbrt(ratio)));
  const auto unbounded = rate_table(100, 100, 5000, {2.0}, LossSpec::absolute());
  CHECK(unbounded[2].rate == 1.0);
  // s = r n log n makes the product rate exactly 1
  const double r = 1000.0 / (50.0 * std::log(50.0));
  CHECK(rate_table(50, 50, 1000, {r}, LossSpec::absolute())[0].rate == doctest::Approx(1.0).epsilon(1e-12));
}
