#include "mixlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "mixlab/errors.hpp"
#include "mixlab/parallel.hpp"
#include "mixlab/random.hpp"

namespace mixlab {

double chisq_cdf(std::size_t k, double x) {
  if (k == 0) throw DomainError("chi-square needs k >= 1");
  if (std::isnan(x) || x < 0.0) throw DomainError("chi-square CDF needs x >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return boost::math::gamma_p(0.5 * static_cast<double>(k), 0.5 * x);
}

double gaussian_pi_term(std::size_t k, double r, double mu) {
  if (!(r > 1.0)) throw DomainError("pi-term needs r > 1");
  if (!(mu > 0.0)) throw DomainError("pi-term needs mu > 0");
  return chisq_cdf(k, mu * (r * r - 1.0));
}

double normal_cdf(double x, double mean, double sd) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

// ---------------------------------------------------------------------------

namespace {

void check_samples(const std::vector<double>& xs, const char* side) {
  if (xs.empty()) throw DomainError(std::string("empirical TV: sample ") + side + " is empty");
  for (double x : xs)
    if (!std::isfinite(x))
      throw DomainError(std::string("empirical TV: sample ") + side + " has non-finite values");
}

std::size_t resolve_bins(std::optional<std::size_t> bins, std::size_t n) {
  const std::size_t b =
      bins ? *bins : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  if (b < 2) throw DomainError("empirical TV needs at least 2 bins");
  return b;
}

Interval span_of(const std::vector<double>& a, const std::vector<double>* b) {
  auto [lo, hi] = std::minmax_element(a.begin(), a.end());
  double l = *lo;
  double h = *hi;
  if (b) {
    auto [blo, bhi] = std::minmax_element(b->begin(), b->end());
    l = std::min(l, *blo);
    h = std::max(h, *bhi);
  }
  if (h <= l) {
    l -= 0.5;
    h += 0.5;
  }
  return {l, h};
}

// Widens `range` outward until the CDF leaves at most 2.5e-4 on either side.
Interval cover_cdf(Interval range, const Cdf& cdf) {
  const double w = range.second - range.first;
  for (double step = w; cdf(range.first) > 2.5e-4 && step < 1e300; step *= 2.0) range.first -= step;
  for (double step = w; 1.0 - cdf(range.second) > 2.5e-4 && step < 1e300; step *= 2.0)
    range.second += step;
  return range;
}

void check_range(const Interval& range) {
  if (!(range.first < range.second) || !std::isfinite(range.first) ||
      !std::isfinite(range.second))
    throw DomainError("empirical TV range must be a finite interval with lo < hi");
}

void check_coverage(double outside, const char* side) {
  if (outside > 1e-3)
    throw DomainError(std::string("empirical TV range leaves ") + std::to_string(outside) +
                      " of sample " + side + " outside (limit 0.001)");
}

// Normalized histogram with clipped mass folded into the edge bins; returns
// the fraction that fell outside the range.
double histogram(const std::vector<double>& xs, const Interval& range, std::size_t bins,
                 std::vector<double>& mass) {
  mass.assign(bins, 0.0);
  const double width = (range.second - range.first) / static_cast<double>(bins);
  std::size_t outside = 0;
  for (double x : xs) {
    if (x < range.first || x > range.second) ++outside;
    const double pos = std::floor((x - range.first) / width);
    const auto idx = static_cast<std::size_t>(
        std::clamp(pos, 0.0, static_cast<double>(bins - 1)));
    mass[idx] += 1.0;
  }
  const auto n = static_cast<double>(xs.size());
  for (double& m : mass) m /= n;
  return static_cast<double>(outside) / n;
}

struct TVParts {
  double value;
  double var_a;  // Var of sum_i s_i 1{x in bin i} under side a
  double var_b;
};

TVParts tv_from_masses(const std::vector<double>& p, const std::vector<double>& q) {
  double sum = 0.0;
  double m_a = 0.0, m2_a = 0.0, m_b = 0.0, m2_b = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double diff = p[i] - q[i];
    sum += std::abs(diff);
    const double s = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
    m_a += s * p[i];
    m2_a += s * s * p[i];
    m_b += s * q[i];
    m2_b += s * s * q[i];
  }
  return {std::clamp(0.5 * sum, 0.0, 1.0), std::max(0.0, m2_a - m_a * m_a),
          std::max(0.0, m2_b - m_b * m_b)};
}

}  // namespace

TVEstimate empirical_tv_1d(const std::vector<double>& a, const std::vector<double>& b,
                           std::optional<std::size_t> bins, std::optional<Interval> range) {
  check_samples(a, "a");
  check_samples(b, "b");
  const Interval r = range ? *range : span_of(a, &b);
  check_range(r);
  TVEstimate est;
  est.n_a = a.size();
  est.n_b = b.size();
  est.bins = resolve_bins(bins, std::min(a.size(), b.size()));
  est.range = r;

  std::vector<double> p, q;
  check_coverage(histogram(a, r, est.bins, p), "a");
  check_coverage(histogram(b, r, est.bins, q), "b");
  const TVParts parts = tv_from_masses(p, q);
  est.value = parts.value;
  est.standard_error = 0.5 * std::sqrt(parts.var_a / static_cast<double>(est.n_a) +
                                       parts.var_b / static_cast<double>(est.n_b));
  return est;
}

TVEstimate empirical_tv_1d(const std::vector<double>& a, const Cdf& cdf_b,
                           std::optional<std::size_t> bins, std::optional<Interval> range) {
  check_samples(a, "a");
  const Interval r = range ? *range : cover_cdf(span_of(a, nullptr), cdf_b);
  check_range(r);
  TVEstimate est;
  est.n_a = a.size();
  est.bins = resolve_bins(bins, a.size());
  est.range = r;

  std::vector<double> p;
  check_coverage(histogram(a, r, est.bins, p), "a");
  check_coverage(cdf_b(r.first) + (1.0 - cdf_b(r.second)), "b");

  std::vector<double> q(est.bins);
  const double width = (r.second - r.first) / static_cast<double>(est.bins);
  double prev = 0.0;
  for (std::size_t i = 0; i < est.bins; ++i) {
    const double upper =
        i + 1 == est.bins ? 1.0 : cdf_b(r.first + width * static_cast<double>(i + 1));
    q[i] = std::max(0.0, upper - prev);
    prev = std::max(prev, upper);
  }
  const TVParts parts = tv_from_masses(p, q);
  est.value = parts.value;
  est.standard_error = 0.5 * std::sqrt(parts.var_a / static_cast<double>(est.n_a));
  return est;
}

TVEstimate projected_tv_vs_gaussian(const Points& samples, const Vector& direction, double mu,
                                    std::optional<std::size_t> bins,
                                    std::optional<Interval> range) {
  if (direction.size() != samples.rows())
    throw StructuralError("projection direction does not match the sample dimension");
  if (std::abs(direction.norm() - 1.0) > 1e-10)
    throw DomainError("projection direction must be a unit vector");
  if (!(mu > 0.0)) throw DomainError("mu must be positive");
  const Eigen::VectorXd proj = samples.transpose() * direction;
  const std::vector<double> xs(proj.data(), proj.data() + proj.size());
  const double sd = 1.0 / std::sqrt(mu);
  return empirical_tv_1d(xs, [sd](double x) { return normal_cdf(x, 0.0, sd); }, bins, range);
}

// ---------------------------------------------------------------------------

double kolmogorov_survival(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  constexpr int kTerms = 100;
  constexpr double kPi = 3.14159265358979323846;
  if (lambda < 1.0) {
    // Theta-function form of the CDF converges fast for small lambda.
    const double c = kPi * kPi / (8.0 * lambda * lambda);
    double sum = 0.0;
    for (int k = 1; k <= kTerms; ++k) {
      const double odd = 2.0 * k - 1.0;
      const double term = std::exp(-odd * odd * c);
      sum += term;
      if (term < 1e-300) break;
    }
    return std::clamp(1.0 - std::sqrt(2.0 * kPi) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k <= kTerms; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-300) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KSResult ks_statistic(std::vector<double> samples, const Cdf& cdf) {
  if (samples.empty()) throw DomainError("KS test needs at least one sample");
  for (double x : samples)
    if (!std::isfinite(x)) throw DomainError("KS test got a non-finite sample");
  std::sort(samples.begin(), samples.end());
  const auto n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    const double hi = static_cast<double>(i + 1) / n;
    const double lo = static_cast<double>(i) / n;
    d = std::max({d, std::abs(hi - f), std::abs(f - lo)});
  }
  KSResult res;
  res.n = samples.size();
  res.statistic = std::clamp(d, 0.0, 1.0);
  res.p_value = kolmogorov_survival(std::sqrt(n) * res.statistic);
  return res;
}

std::vector<KSSweepRow> ks_sweep(const EndpointSampler& sampler, const Vector& x0, double mu,
                                 const std::vector<double>& times, std::size_t reps,
                                 std::uint64_t seed) {
  if (!(mu > 0.0)) throw DomainError("mu must be positive");
  if (x0.size() < 2) throw DomainError("KS sweep needs at least two coordinates");
  const double sd = 1.0 / std::sqrt(mu);
  std::vector<KSSweepRow> rows(times.size() * reps);

  parallel_for(rows.size(), [&](std::size_t task) {
    const std::size_t ti = task / reps;
    const std::size_t rep = task % reps;
    const Points x = sampler(x0, times[ti], 1, derive_seed(seed, task));
    std::vector<double> coords(x.data(), x.data() + x.rows());

    KSSweepRow& row = rows[task];
    row.t = times[ti];
    row.rep = rep;
    row.raw = ks_statistic(coords, [sd](double v) { return normal_cdf(v, 0.0, sd); });

    const double n = static_cast<double>(coords.size());
    const double mean = std::accumulate(coords.begin(), coords.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : coords) ss += (v - mean) * (v - mean);
    const double scale = std::sqrt(ss / (n - 1.0));
    for (double& v : coords) v = scale > 0.0 ? (v - mean) / scale : 0.0;
    row.standardized = ks_statistic(std::move(coords), [](double v) { return normal_cdf(v); });
  });
  return rows;
}

double median(std::vector<double> values) {
  if (values.empty()) throw DomainError("median of an empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace mixlab
