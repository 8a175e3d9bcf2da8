#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "blockid/errors.hpp"
#include "blockid/numcore/distributions.hpp"
#include "blockid/numcore/linalg.hpp"
#include "oracles.hpp"

namespace nc = blockid::numcore;
using nc::RngStream;

TEST_CASE("normal_cdf reference values") {
  CHECK(nc::normal_cdf(0.0) == 0.5);
  CHECK(nc::normal_cdf(1.96) == doctest::Approx(0.9750021048517795).epsilon(1e-12));
  CHECK(nc::normal_cdf(-3.0) == doctest::Approx(0.0013498980316301).epsilon(1e-10));
  for (double x = -8.0; x <= 8.0; x += 0.37) {
    CHECK(std::abs(nc::normal_cdf(-x) - (1.0 - nc::normal_cdf(x))) < 1e-12);
  }
}

TEST_CASE("normal_quantile inverts the CDF") {
  for (double p : {1e-12, 1e-6, 0.001, 0.1, 0.3, 0.5, 0.77, 0.999, 1 - 1e-9}) {
    CHECK(nc::normal_cdf(nc::normal_quantile(p)) == doctest::Approx(p).epsilon(1e-9));
  }
  CHECK(nc::normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-10));
  CHECK(nc::normal_quantile(0.0) == -std::numeric_limits<double>::infinity());
  CHECK(nc::normal_quantile(1.0) == std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(nc::normal_quantile(1.5), std::domain_error);
}

TEST_CASE("standard normal moments, determinism and KS") {
  RngStream a(1), b(1);
  const auto xs = nc::sample_standard_normal(a, 1'000'000);
  CHECK(xs == nc::sample_standard_normal(b, 1'000'000));
  CHECK(std::abs(oracle::mean(xs)) < 0.01);
  CHECK(std::abs(oracle::variance(xs) - 1.0) < 0.02);
  const double n = static_cast<double>(xs.size());
  CHECK(oracle::ks(xs, oracle::phi) < 1.36 / std::sqrt(n) * 1.5);
  CHECK_THROWS_AS(nc::sample_standard_normal(a, 0), blockid::EmptyRequestError);
}

TEST_CASE("uniform range, symmetry and KS") {
  RngStream rng(2);
  const auto xs = nc::sample_uniform(rng, -1.0, 1.0, 1'000'000);
  CHECK(std::abs(oracle::mean(xs)) < 0.01);
  CHECK(oracle::ks(xs, [](double x) { return (x + 1.0) / 2.0; }) < 0.005);
  for (double u : nc::sample_uniform(rng, 0.0, 1.0, 100000)) {
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
  CHECK_THROWS_AS(nc::sample_uniform(rng, 1.0, 1.0, 3), std::domain_error);
  CHECK(nc::sample_uniform(rng, 0.0, 1.0, 0).empty());
}

TEST_CASE("truncated normal matches closed-form moments") {
  RngStream rng(3);
  auto draws = [&](double mu, double sigma, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = nc::sample_truncated_normal(rng, mu, sigma, -1.0, 1.0);
    return v;
  };
  SUBCASE("always inside the interval") {
    for (double x : draws(0.0, 0.5, 100000)) {
      REQUIRE(x >= -1.0);
      REQUIRE(x <= 1.0);
    }
  }
  SUBCASE("mu = 0.35, sigma = 0.5") {
    const auto xs = draws(0.35, 0.5, 100000);
    CHECK(std::abs(oracle::mean(xs) - oracle::truncated_mean(0.35, 0.5, -1, 1)) < 0.01);
  }
  SUBCASE("mu far outside the interval") {
    const auto xs = draws(5.0, 0.5, 100000);
    CHECK(oracle::mean(xs) > 0.9);
    CHECK(std::abs(oracle::mean(xs) - oracle::truncated_mean(5.0, 0.5, -1, 1)) < 0.01);
  }
  SUBCASE("library moments agree with the oracle") {
    for (double mu : {-4.0, -0.7, 0.0, 0.35, 2.0}) {
      for (double sigma : {0.2, 0.5, 1.0}) {
        CHECK(nc::truncated_normal_mean(mu, sigma, -1, 1) ==
              doctest::Approx(oracle::truncated_mean(mu, sigma, -1, 1)).epsilon(1e-9));
        CHECK(nc::truncated_normal_variance(mu, sigma, -1, 1) ==
              doctest::Approx(oracle::truncated_variance(mu, sigma, -1, 1)).epsilon(1e-7));
      }
    }
  }
  SUBCASE("KS against the truncated CDF") {
    const double mu = -0.35, sigma = 0.5;
    const auto xs = draws(mu, sigma, 100000);
    const double a = oracle::phi((-1 - mu) / sigma), b = oracle::phi((1 - mu) / sigma);
    const double d = oracle::ks(xs, [&](double x) { return (oracle::phi((x - mu) / sigma) - a) / (b - a); });
    CHECK(d < 1.95 / std::sqrt(100000.0));
  }
  CHECK_THROWS(nc::sample_truncated_normal(rng, 0.0, -1.0, -1.0, 1.0));
  CHECK_THROWS(nc::sample_truncated_normal(rng, 0.0, 1.0, 1.0, -1.0));
}

TEST_CASE("wishart") {
  RngStream rng(4);
  SUBCASE("1-D is chi-squared with one degree of freedom") {
    std::vector<double> xs(100000);
    for (auto& x : xs) {
      const auto w = nc::sample_wishart(rng, 1, 1);
      REQUIRE(w(0, 0) > 0.0);
      x = w(0, 0);
    }
    // chi^2_1 CDF is 2 Phi(sqrt x) - 1.
    CHECK(oracle::ks(xs, [](double x) { return 2.0 * oracle::phi(std::sqrt(x)) - 1.0; }) <
          1.95 / std::sqrt(100000.0));
  }
  SUBCASE("mean is df * I") {
    nc::Matrix mean(5, 5);
    const int n = 10000;
    for (int i = 0; i < n; ++i) mean = mean + nc::sample_wishart(rng, 5, 5);
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < 5; ++j) {
        CHECK(std::abs(mean(i, j) / n - (i == j ? 5.0 : 0.0)) < 0.15);
      }
    }
  }
  SUBCASE("draws are symmetric positive definite") {
    for (int i = 0; i < 1000; ++i) {
      const auto w = nc::sample_wishart(rng, 5, 5);
      REQUIRE(w == w.transposed());
      REQUIRE_NOTHROW(nc::cholesky(w));
      REQUIRE(nc::singular_values(w).back() > 0.0);
    }
  }
  CHECK_THROWS_AS(nc::sample_wishart(rng, 5, 4), std::domain_error);
}
