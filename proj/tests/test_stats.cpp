#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "mixlab/bounds.hpp"
#include "mixlab/errors.hpp"
#include "mixlab/measures.hpp"
#include "mixlab/random.hpp"
#include "mixlab/stats.hpp"
#include "oracles.hpp"

using namespace mixlab;

namespace {

std::vector<double> normals(std::size_t n, std::uint64_t seed, double mean = 0.0, double sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(mean, sd);
  std::vector<double> v(n);
  for (double& x : v) x = z(rng);
  return v;
}

Cdf std_normal() {
  return [](double x) { return normal_cdf(x); };
}

// Standard normal quantile by bisection on erfc.
double normal_quantile(double p) {
  return oracle::bisect([](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }, p, -40.0, 40.0);
}

}  // namespace

TEST_CASE("chisq_cdf") {
  for (double x : {0.0, 0.1, 1.0, 2.0, 7.5, 40.0})
    CHECK(std::abs(chisq_cdf(2, x) - (1.0 - std::exp(-x / 2.0))) <= 1e-14);
  CHECK(chisq_cdf(2, 2.0) == doctest::Approx(0.6321206).epsilon(1e-7));
  for (std::size_t k : {1, 2, 3, 10, 100}) CHECK(chisq_cdf(k, 0.0) == 0.0);
  CHECK(std::abs(chisq_cdf(3, 3.5) - oracle::chisq_cdf(3, 3.5)) <= 1e-10);
  CHECK(std::abs(chisq_cdf(3, 3.5) - 0.679237879194360) <= 1e-12);
  for (int k : {1, 4, 7, 30})
    for (double x : {0.3, 2.0, 9.0, 35.0})
      CHECK(std::abs(chisq_cdf(k, x) - oracle::chisq_cdf(k, x)) <= 1e-9);
  CHECK_THROWS_AS(chisq_cdf(3, -1e-9), DomainError);
  CHECK_THROWS_AS(chisq_cdf(0, 1.0), DomainError);
}

TEST_CASE("chisq_cdf is a CDF") {
  for (std::size_t k : {1, 2, 3, 5, 16, 64, 512}) {
    double prev = 0.0;
    for (double x = 0.0; x <= 4.0 * k + 200.0; x += 0.25) {
      const double c = chisq_cdf(k, x);
      CHECK(c >= prev);
      CHECK(c <= 1.0);
      prev = c;
    }
    CHECK(chisq_cdf(k, 1e-12) <= 1e-6);
    CHECK(chisq_cdf(k, 4.0 * k + 200.0) >= 1.0 - 1e-12);
  }
}

TEST_CASE("gaussian_pi_term") {
  CHECK(gaussian_pi_term(3, 1.0 + 1e-12, 1.0) <= 1e-15);
  CHECK(gaussian_pi_term(3, 1e4, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  const double q = oracle::bisect([](double x) { return oracle::chisq_cdf(3, x); }, 0.5, 0.0, 20.0);
  CHECK(q == doctest::Approx(2.365973884375338).epsilon(1e-9));
  CHECK(std::abs(gaussian_pi_term(3, std::sqrt(1.0 + q), 1.0) - 0.5) <= 1e-6);
  CHECK_THROWS_AS(gaussian_pi_term(3, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(gaussian_pi_term(3, 0.5, 1.0), DomainError);
}

TEST_CASE("gaussian_pi_term is increasing in r and mu") {
  for (std::size_t k : {1, 3, 8}) {
    double prev = -1.0;
    for (double r = 1.05; r <= 4.0; r += 0.05) {
      const double v = gaussian_pi_term(k, r, 1.0);
      CHECK(v > prev);
      prev = v;
    }
    prev = -1.0;
    for (double mu = 0.1; mu <= 5.0; mu += 0.1) {
      const double v = gaussian_pi_term(k, 2.0, mu);
      CHECK(v > prev);
      prev = v;
    }
  }
}

TEST_CASE("gaussian_pi_term agrees with sampling from the spherical law") {
  struct Triple {
    std::size_t d, k;
    double r, mu;
  };
  const std::vector<Triple> triples{{3, 3, 2.0, 1.0},  {5, 2, 1.5, 0.5},  {8, 3, 3.0, 2.0},
                                    {16, 1, 1.2, 1.0}, {16, 4, 2.5, 0.3}, {32, 3, 1.8, 4.0},
                                    {4, 4, 4.0, 0.2},  {10, 5, 2.2, 1.5}, {64, 2, 1.1, 10.0},
                                    {6, 1, 5.0, 0.05}};
  const std::size_t n = 200000;
  std::uint64_t seed = 900;
  for (const auto& t : triples) {
    const SphericalMeasure pi{t.d, RadialProfile::quadratic(t.mu / 2.0)};
    const Points x = sample_spherical(pi, n, seed++);
    std::size_t hits = 0;
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      if (x.col(j).head(static_cast<Eigen::Index>(t.k)).squaredNorm() <= t.r * t.r - 1.0) ++hits;
    const double mc = static_cast<double>(hits) / n;
    const double exact = gaussian_pi_term(t.k, t.r, t.mu);
    const double se = std::sqrt(exact * (1.0 - exact) / n);
    CHECK(std::abs(mc - exact) <= 3.0 * se + 1e-12);
  }
}

TEST_CASE("empirical_tv_1d basics") {
  const auto a = normals(10000, 1);
  const auto same = empirical_tv_1d(a, a);
  CHECK(same.value == 0.0);
  CHECK(same.bins == 100);
  CHECK(same.n_a == 10000);
  CHECK(same.n_b == 10000);

  const auto far = empirical_tv_1d(normals(100000, 2),
                                   [](double x) { return normal_cdf(x, 10.0, 1.0); }, std::nullopt,
                                   Interval{-5.0, 15.0});
  CHECK(far.value >= 0.999);
  CHECK(far.n_b == 0);

  CHECK_THROWS_AS(empirical_tv_1d(std::vector<double>{}, a), DomainError);
  CHECK_THROWS_AS(empirical_tv_1d(a, std::vector<double>{}), DomainError);
  CHECK_THROWS_AS(empirical_tv_1d(std::vector<double>{}, std_normal()), DomainError);
  CHECK_THROWS_AS(empirical_tv_1d(a, a, std::size_t{1}), DomainError);
  // [-1, 1] leaves about 32% of a standard normal outside.
  CHECK_THROWS_AS(empirical_tv_1d(a, a, std::nullopt, Interval{-1.0, 1.0}), DomainError);
  CHECK_THROWS_AS(empirical_tv_1d(a, std_normal(), std::nullopt, Interval{-1.0, 1.0}), DomainError);
}

TEST_CASE("empirical_tv_1d stays in [0, 1] and matches two-Gaussian TV") {
  for (double shift : {0.0, 0.25, 0.5, 1.0, 2.0, 4.0}) {
    const auto tv = empirical_tv_1d(normals(200000, 10 + static_cast<std::uint64_t>(shift * 4)),
                                    [shift](double x) { return normal_cdf(x, shift, 1.0); }, 200,
                                    Interval{-6.0, 10.0});
    CHECK(tv.value >= 0.0);
    CHECK(tv.value <= 1.0);
    // Null binning bias at n = 2e5 with 200 bins is about 0.013.
    CHECK(std::abs(tv.value - oracle::normal_tv(0.0, 1.0, shift, 1.0)) <= 0.02);
  }
}

TEST_CASE("empirical_tv_1d null binning bias at n = 1e6") {
  const auto tv = empirical_tv_1d(normals(1000000, 31), std_normal());
  CHECK(tv.bins == 1000);
  CHECK(tv.value <= 0.01);
  CHECK(tv.standard_error > 0.0);
}

TEST_CASE("empirical_tv_1d symmetry and shift invariance") {
  const auto a = normals(50000, 41, 0.0, 1.0);
  const auto b = normals(40000, 42, 0.7, 1.3);
  const Interval range{-8.0, 9.0};
  const auto ab = empirical_tv_1d(a, b, 150, range);
  const auto ba = empirical_tv_1d(b, a, 150, range);
  CHECK(ab.value == doctest::Approx(ba.value).epsilon(1e-12));
  CHECK(empirical_tv_1d(a, b).value == doctest::Approx(empirical_tv_1d(b, a).value).epsilon(1e-12));

  // Dyadic shift keeps every bin assignment exact.
  const double s = 4.0;
  auto as = a, bs = b;
  for (double& x : as) x += s;
  for (double& x : bs) x += s;
  const auto shifted = empirical_tv_1d(as, bs, 150, Interval{range.first + s, range.second + s});
  CHECK(shifted.value == doctest::Approx(ab.value).epsilon(1e-12));
}

TEST_CASE("projected_tv_vs_gaussian") {
  const std::size_t d = 8;
  Vector dir = Vector::Zero(d);
  dir(0) = 1.0;
  const Points mass = dir * 10.0 * Eigen::RowVectorXd::Ones(1000);
  CHECK(projected_tv_vs_gaussian(mass, dir, 1.0).value >= 0.99);

  const SphericalMeasure pi{d, RadialProfile::quadratic(0.5)};
  const Points g = sample_spherical(pi, 1000000, 51);
  const auto tv0 = projected_tv_vs_gaussian(g, dir, 1.0);
  CHECK(tv0.value <= 0.01);

  Vector other = Vector::Ones(d) / std::sqrt(static_cast<double>(d));
  const auto tv1 = projected_tv_vs_gaussian(g, other, 1.0);
  CHECK(std::abs(tv1.value - tv0.value) <= 3.0 * std::hypot(tv0.standard_error, tv1.standard_error) + 1e-3);

  const SphericalMeasure pi2{d, RadialProfile::quadratic(1.0)};
  CHECK(projected_tv_vs_gaussian(sample_spherical(pi2, 1000000, 52), dir, 2.0).value <= 0.01);

  CHECK_THROWS_AS(projected_tv_vs_gaussian(g, dir * 1.001, 1.0), DomainError);
  CHECK_THROWS_AS(projected_tv_vs_gaussian(g, Vector::Ones(3) / std::sqrt(3.0), 1.0), StructuralError);
}

TEST_CASE("ks_statistic on exact quantiles") {
  for (std::size_t n : {1, 7, 100, 5000}) {
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) q[i] = normal_quantile((i + 0.5) / n);
    std::shuffle(q.begin(), q.end(), std::mt19937_64(n));
    const auto res = ks_statistic(q, std_normal());
    CHECK(res.statistic == doctest::Approx(0.5 / n).epsilon(1e-9));
    CHECK(res.n == n);
  }
}

TEST_CASE("ks_statistic degenerate and invalid input") {
  const auto res = ks_statistic(std::vector<double>(100000, 0.0), std_normal());
  CHECK(res.statistic == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(res.p_value <= 1e-100);
  CHECK_THROWS_AS(ks_statistic({}, std_normal()), DomainError);
  CHECK_THROWS_AS(ks_statistic({0.0, std::nan("")}, std_normal()), DomainError);
  CHECK_THROWS_AS(ks_statistic({INFINITY}, std_normal()), DomainError);
}

TEST_CASE("kolmogorov_survival") {
  CHECK(kolmogorov_survival(0.0) == 1.0);
  CHECK(kolmogorov_survival(-1.0) == 1.0);
  // Standard critical values.
  CHECK(kolmogorov_survival(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(kolmogorov_survival(1.6276) == doctest::Approx(0.01).epsilon(1e-3));
  CHECK(kolmogorov_survival(1.2238) == doctest::Approx(0.10).epsilon(1e-3));
  // Both series agree at the switch point.
  CHECK(kolmogorov_survival(1.0 - 1e-12) == doctest::Approx(kolmogorov_survival(1.0)).epsilon(1e-9));
  double prev = 1.0;
  for (double l = 0.05; l <= 4.0; l += 0.05) {
    const double s = kolmogorov_survival(l);
    CHECK(s <= prev);
    CHECK(s >= 0.0);
    prev = s;
  }
}

TEST_CASE("ks_statistic null p-values at n = 1e6") {
  const std::size_t reps = 200, n = 1000000;
  std::size_t above = 0;
  std::vector<double> pvals;
  for (std::size_t r = 0; r < reps; ++r) {
    const double p = ks_statistic(normals(n, derive_seed(77, r)), std_normal()).p_value;
    pvals.push_back(p);
    if (p > 0.001) ++above;
  }
  CHECK(above >= 198);
  // Null p-values are roughly uniform.
  CHECK(median(pvals) == doctest::Approx(0.5).epsilon(0.25));
}

TEST_CASE("ks_statistic is invariant under a joint increasing transform") {
  const auto x = normals(5000, 61);
  const auto base = ks_statistic(x, std_normal());
  auto y = x;
  for (double& v : y) v = std::exp(v);
  const auto logn = ks_statistic(y, [](double v) { return v > 0.0 ? normal_cdf(std::log(v)) : 0.0; });
  CHECK(logn.statistic == doctest::Approx(base.statistic).epsilon(1e-12));
  auto z = x;
  for (double& v : z) v = 3.0 * v + 7.0;
  const auto lin = ks_statistic(z, [](double v) { return normal_cdf(v, 7.0, 3.0); });
  CHECK(lin.statistic == doctest::Approx(base.statistic).epsilon(1e-12));
  CHECK(lin.p_value == doctest::Approx(base.p_value).epsilon(1e-9));
}

TEST_CASE("median") {
  CHECK(median({3.0}) == 3.0);
  CHECK(median({5.0, 1.0, 3.0}) == 3.0);
  CHECK(median({4.0, 1.0, 3.0, 2.0}) == 2.5);
  CHECK_THROWS_AS(median({}), DomainError);
}

TEST_CASE("ks_sweep along an OU relaxation") {
  const std::size_t d = 1024;
  const double mu = 1.0, R = 255.0;
  const OUProcess ou{mu, d};
  const HorizonSet hz = horizons(mu, R, 0.01, 0.05, d);
  const std::vector<double> times{0.0, hz.T_b / 2.0, hz.T_b, hz.T_OU_prop};
  const Vector x0 = Vector::Constant(d, R / std::sqrt(static_cast<double>(d)));
  const std::size_t reps = 20;
  const auto rows = ks_sweep(exact_endpoints(ou), x0, mu, times, reps, 2024);
  REQUIRE(rows.size() == times.size() * reps);

  std::vector<double> med;
  std::size_t small_at_ou = 0;
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    std::vector<double> s;
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& row = rows[ti * reps + r];
      CHECK(row.t == times[ti]);
      CHECK(row.rep == r);
      CHECK(row.raw.n == d);
      s.push_back(row.raw.statistic);
      if (ti == 0) CHECK(row.raw.statistic >= 0.3);
      if (ti == 3 && row.raw.statistic <= 0.05) ++small_at_ou;
    }
    med.push_back(median(s));
  }
  // Null D_n at d = 1024 exceeds 0.05 with probability about 0.012.
  CHECK(small_at_ou >= 18);
  for (std::size_t i = 1; i < med.size(); ++i) CHECK(med[i] <= med[i - 1]);

  const auto again = ks_sweep(exact_endpoints(ou), x0, mu, times, reps, 2024);
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(again[i].raw.statistic == rows[i].raw.statistic);
  CHECK_THROWS_AS(ks_sweep(exact_endpoints(ou), x0, 0.0, times, reps, 1), DomainError);
}
