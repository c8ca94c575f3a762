#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "mixlab/forward.hpp"
#include "mixlab/projector.hpp"

namespace mixlab {

/// P(chi^2_k <= x), the regularized lower incomplete gamma P(k/2, x/2).
double chisq_cdf(std::size_t k, double x);

/// pi(H_Y >= 1/r) for pi = N(0, I/mu) and a rank-k projection:
/// P(chi^2_k <= mu (r^2 - 1)).
double gaussian_pi_term(std::size_t k, double r, double mu);

double normal_cdf(double x, double mean = 0.0, double sd = 1.0);

using Cdf = std::function<double(double)>;
using Interval = std::pair<double, double>;

struct TVEstimate {
  double value = 0.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;  // 0 when side b is an exact CDF
  std::size_t bins = 0;
  Interval range{0.0, 0.0};
  /// Delta-method standard error of the plug-in estimate (binning bias excluded).
  double standard_error = 0.0;
};

/// Half the L1 distance between the binned laws of `a` and `b` on `range`,
/// with mass outside the range folded into the edge bins. Default bins are
/// ceil(sqrt(min(n_a, n_b))); the default range spans both samples.
/// Throws DomainError on empty input, bins < 2, or a range that leaves more
/// than 0.1% of either input outside.
TVEstimate empirical_tv_1d(const std::vector<double>& a, const std::vector<double>& b,
                           std::optional<std::size_t> bins = std::nullopt,
                           std::optional<Interval> range = std::nullopt);

/// Same with side b given by its CDF; per-bin masses are exact. The default
/// range spans the sample and all but 5e-4 of the CDF's mass.
TVEstimate empirical_tv_1d(const std::vector<double>& a, const Cdf& cdf_b,
                           std::optional<std::size_t> bins = std::nullopt,
                           std::optional<Interval> range = std::nullopt);

/// TV between <x, direction> over the columns of `samples` and N(0, 1/mu).
TVEstimate projected_tv_vs_gaussian(const Points& samples, const Vector& direction, double mu,
                                    std::optional<std::size_t> bins = std::nullopt,
                                    std::optional<Interval> range = std::nullopt);

struct KSResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

/// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);

/// One-sample Kolmogorov-Smirnov test against `cdf` with the asymptotic p-value.
KSResult ks_statistic(std::vector<double> samples, const Cdf& cdf);

struct KSSweepRow {
  double t = 0.0;
  std::size_t rep = 0;
  /// Coordinates against N(0, 1/mu).
  KSResult raw;
  /// Coordinates centred and scaled by their own mean and deviation, against N(0, 1).
  KSResult standardized;
};

/// For every time and repetition, draws one X_t from x0 and tests its d
/// coordinates as d scalar samples. Rows are ordered by time, then repetition.
std::vector<KSSweepRow> ks_sweep(const EndpointSampler& sampler, const Vector& x0, double mu,
                                 const std::vector<double>& times, std::size_t reps,
                                 std::uint64_t seed);

/// Median of a copy of `values`.
double median(std::vector<double> values);

}  // namespace mixlab
