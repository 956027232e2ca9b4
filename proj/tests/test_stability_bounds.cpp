#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sbc/cluster_weights.hpp"
#include "sbc/kmm.hpp"
#include "sbc/stability_bounds.hpp"

#include <cmath>
#include <random>

using namespace sbc;

namespace {

Eigen::VectorXd uniform_dist(int m) {
  return Eigen::VectorXd::Constant(m, 1.0 / m);
}

Eigen::VectorXd leave_one_out(int m) {
  Eigen::VectorXd w = Eigen::VectorXd::Constant(m, 1.0 / (m - 1));
  w[0] = 0.0;
  return w;
}

Eigen::VectorXd random_simplex(int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  Eigen::VectorXd w(m);
  for (int i = 0; i < m; ++i) w[i] = expo(rng);
  return w / w.sum();
}

}  // namespace

TEST_CASE("uniform vs leave-one-out closed forms") {
  for (int m : {2, 5, 100}) {
    const double d1 = l1_distance(uniform_dist(m), leave_one_out(m));
    const double d2 = l2_distance(uniform_dist(m), leave_one_out(m));
    CHECK(std::abs(d1 - 2.0 / m) < 1e-12);
    CHECK(std::abs(d2 - 1.0 / std::sqrt(double(m) * (m - 1))) < 1e-12);
  }
  // the worked instances
  CHECK(l1_distance(uniform_dist(4), leave_one_out(4)) ==
        doctest::Approx(0.5).epsilon(1e-14));
  CHECK(l2_distance(uniform_dist(2), leave_one_out(2)) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("distances match scalar loop oracles") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd a = random_simplex(9, 100 + t);
    Eigen::VectorXd b = random_simplex(9, 200 + t);
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < 9; ++i) {
      s1 += std::abs(a[i] - b[i]);
      s2 += (a[i] - b[i]) * (a[i] - b[i]);
    }
    CHECK(std::abs(l1_distance(a, b) - s1) < 1e-12);
    CHECK(std::abs(l2_distance(a, b) - std::sqrt(s2)) < 1e-12);
    (void)unif;
  }
}

TEST_CASE("distances are metrics on the simplex") {
  for (std::uint64_t t = 0; t < 30; ++t) {
    Eigen::VectorXd a = random_simplex(7, 300 + t);
    Eigen::VectorXd b = random_simplex(7, 400 + t);
    Eigen::VectorXd c = random_simplex(7, 500 + t);
    CHECK(l1_distance(a, a) == 0.0);
    CHECK(l2_distance(b, b) == 0.0);
    CHECK(l1_distance(a, b) >= 0.0);
    CHECK(l1_distance(a, b) == doctest::Approx(l1_distance(b, a)).epsilon(1e-15));
    CHECK(l2_distance(a, b) == doctest::Approx(l2_distance(b, a)).epsilon(1e-15));
    CHECK(l1_distance(a, c) <= l1_distance(a, b) + l1_distance(b, c) + 1e-14);
    CHECK(l2_distance(a, c) <= l2_distance(a, b) + l2_distance(b, c) + 1e-14);
    CHECK(l2_distance(a, b) <= l1_distance(a, b) + 1e-14);
  }
  CHECK_THROWS_AS(l1_distance(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(3)),
                  std::invalid_argument);
  CHECK_THROWS_AS(l2_distance(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(3)),
                  std::invalid_argument);
}

TEST_CASE("beta coefficients: direct substitution") {
  CHECK(beta_coefficients(1.0, 1.0, 0.5, 1.0).beta_l1 ==
        doctest::Approx(1.0).epsilon(1e-15));
  CHECK(beta_coefficients(2.0, 1.0, 1.0, 4.0).beta_l2 ==
        doctest::Approx(4.0).epsilon(1e-15));

  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> unif(0.1, 5.0);
  for (int t = 0; t < 25; ++t) {
    const double sigma = unif(rng), kappa = unif(rng), lambda = unif(rng),
                 lmax = unif(rng);
    auto r = beta_coefficients(sigma, kappa, lambda, lmax);
    CHECK(r.beta_l2 / r.beta_l1 ==
          doctest::Approx(std::sqrt(lmax) / kappa).epsilon(1e-12));
  }

  CHECK_THROWS_AS(beta_coefficients(1.0, 1.0, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(beta_coefficients(-1.0, 1.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("cluster gap bounds: ratio identity and unit case") {
  // l2 form = l1 form * (sqrt(lambda_max)/kappa) / sqrt(m)
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unif(0.2, 3.0);
  for (int t = 0; t < 20; ++t) {
    const double sigma = unif(rng), kappa = unif(rng), lambda = unif(rng),
                 lmax = unif(rng), B = unif(rng);
    const int mp = 3 + t % 5;
    const double p0 = 0.05, n = 500.0, m = 25.0, delta = 0.1;
    auto [b1, b2] =
        cluster_gap_bounds(sigma, kappa, lambda, lmax, B, mp, p0, n, m, delta);
    CHECK(b1.method == "cluster_l1");
    CHECK(b2.method == "cluster_l2");
    CHECK(b2.value ==
          doctest::Approx(b1.value * std::sqrt(lmax) / kappa / std::sqrt(m))
              .epsilon(1e-12));
  }

  // sigma=kappa=B=1, lambda=0.5, m'=1, delta chosen so the log term equals
  // p0*n: log(2) + log(1/delta) = p0*n  =>  delta = 2*exp(-p0*n)
  const double p0 = 0.01, n = 400.0;
  const double delta = 2.0 * std::exp(-p0 * n);
  auto [l1, l2] = cluster_gap_bounds(1.0, 1.0, 0.5, 1.0, 1.0, 1, p0, n, 9.0, delta);
  CHECK(l1.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(l2.value == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("cluster gap bounds: direct substitution against the formula") {
  // sigma=1, kappa=1, lambda=0.5 -> beta_l1 = 1; B=2, m'=5 clusters of
  // interest expressed through frequency_bound directly
  const double sigma = 1.3, kappa = 0.9, lambda = 0.7, lmax = 2.4, B = 1.8;
  const int mp = 6;
  const double p0 = 0.02, n = 2000.0, m = 40.0, delta = 0.05;
  auto [b1, b2] =
      cluster_gap_bounds(sigma, kappa, lambda, lmax, B, mp, p0, n, m, delta);
  const double freq =
      std::sqrt((std::log(2.0 * mp) + std::log(1.0 / delta)) / (p0 * n));
  const double beta1 = sigma * sigma * kappa * kappa / (2.0 * lambda);
  const double beta2 = sigma * sigma * kappa * std::sqrt(lmax) / (2.0 * lambda);
  CHECK(b1.value == doctest::Approx(beta1 * B * B * freq).epsilon(1e-14));
  CHECK(b2.value ==
        doctest::Approx(beta2 * B * B * freq / std::sqrt(m)).epsilon(1e-14));
}

TEST_CASE("cluster gap bounds: monotonicity sweeps") {
  auto value = [](double n, double p0, double delta) {
    return cluster_gap_bounds(1.0, 1.0, 1.0, 1.0, 1.0, 4, p0, n, 16.0, delta)
        .first.value;
  };
  CHECK(value(1000.0, 0.1, 0.05) > value(4000.0, 0.1, 0.05));   // decreasing in n
  CHECK(value(1000.0, 0.05, 0.05) > value(1000.0, 0.2, 0.05));  // decreasing in p0
  CHECK(value(1000.0, 0.1, 0.01) > value(1000.0, 0.1, 0.5));    // shrinks as delta->1
}

TEST_CASE("kmm gap bound: epsilon=0 equals the cond(K) specialization") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> unif(0.2, 4.0);
  for (int t = 0; t < 40; ++t) {
    const double sigma = unif(rng), kappa = unif(rng), lambda = unif(rng);
    const double lmin = unif(rng);
    const double lmax = lmin * (1.0 + unif(rng));
    const double bp = 1.0 + unif(rng), m = 50.0 + t, n = 200.0 + 3 * t,
                 delta = 0.05;
    GapBoundReport general =
        kmm_gap_bound(sigma, kappa, lambda, lmax, lmin, bp, 0.0, m, n, delta);
    CHECK(general.method == "kmm_eps0");
    // paper's eps=0 display: sigma^2 kappa^{3/2} sqrt(cond K)/lambda *
    // sqrt(B'^2/m + 1/n) * (1 + sqrt(2 log 2/delta))
    const double specialized = sigma * sigma * std::pow(kappa, 1.5) *
                               std::sqrt(lmax / lmin) / lambda *
                               std::sqrt(bp * bp / m + 1.0 / n) *
                               (1.0 + std::sqrt(2.0 * std::log(2.0 / delta)));
    CHECK(std::abs(general.value - specialized) <=
          1e-12 * std::max(1.0, specialized));
  }
}

TEST_CASE("kmm gap bound: delta=2 algebraic probe gives 0.28284") {
  // sigma=1, kappa=1, lambda=1, cond=4 (lmax=1, lmin=0.25), B'=1, m=n=100.
  GapBoundReport r =
      kmm_gap_bound(1.0, 1.0, 1.0, 1.0, 0.25, 1.0, 0.0, 100.0, 100.0, 2.0);
  CHECK(r.value == doctest::Approx(2.0 * std::sqrt(0.02)).epsilon(1e-10));
  CHECK(r.value == doctest::Approx(0.28284).epsilon(1e-4));
}

TEST_CASE("kmm gap bound: scales linearly in B' when B'^2/m dominates 1/n") {
  const double v1 =
      kmm_gap_bound(1.0, 1.0, 1.0, 1.0, 1.0, 100.0, 0.0, 10.0, 1e9, 0.05).value;
  const double v2 =
      kmm_gap_bound(1.0, 1.0, 1.0, 1.0, 1.0, 200.0, 0.0, 10.0, 1e9, 0.05).value;
  CHECK(v2 / v1 == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("kmm gap bound: nonzero epsilon adds the box term") {
  const double base =
      kmm_gap_bound(1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 0.0, 25.0, 100.0, 0.05).value;
  GapBoundReport eps =
      kmm_gap_bound(1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 0.1, 25.0, 100.0, 0.05);
  CHECK(eps.method == "kmm");
  // beta_l2 = 0.5 here; extra term beta_l2 * 2 eps B'/sqrt(m)
  CHECK(eps.value ==
        doctest::Approx(base + 0.5 * 2.0 * 0.1 * 2.0 / 5.0).epsilon(1e-12));
  CHECK_THROWS_AS(
      kmm_gap_bound(1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 0.0, 10.0, 10.0, 0.05),
      std::invalid_argument);
}

TEST_CASE("crossover diagnostic reports the three regimes") {
  const double lmin = 0.3, B = 7.0, mp = 20.0;
  const double thr = lmin * B * std::log(mp);

  CrossoverDiagnostic at = crossover_diagnostic(lmin, B, mp, thr);
  CHECK(at.regime == "boundary");
  CHECK(at.threshold == doctest::Approx(thr).epsilon(1e-15));

  CHECK(crossover_diagnostic(lmin, B, mp, 10.0 * thr).regime ==
        "cluster-favorable");
  CHECK(crossover_diagnostic(lmin, B, mp, thr / 10.0).regime == "kmm-favorable");

  CHECK_THROWS_AS(crossover_diagnostic(0.0, B, mp, 10.0), std::invalid_argument);
}

TEST_CASE("bound calculators are deterministic pure functions") {
  auto a = cluster_gap_bounds(1.1, 0.9, 0.3, 2.0, 1.5, 7, 0.03, 1500.0, 30.0, 0.05);
  auto b = cluster_gap_bounds(1.1, 0.9, 0.3, 2.0, 1.5, 7, 0.03, 1500.0, 30.0, 0.05);
  CHECK(a.first.value == b.first.value);
  CHECK(a.second.value == b.second.value);
  CHECK(kmm_gap_bound(1.1, 0.9, 0.3, 2.0, 0.5, 3.0, 0.2, 40.0, 400.0, 0.05).value ==
        kmm_gap_bound(1.1, 0.9, 0.3, 2.0, 0.5, 3.0, 0.2, 40.0, 400.0, 0.05).value);
}
