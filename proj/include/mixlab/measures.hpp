#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "mixlab/projector.hpp"
#include "mixlab/report.hpp"

namespace mixlab {

// ---------------------------------------------------------------------------
// Multi-modal data distributions
// ---------------------------------------------------------------------------

enum class ModeShape { UniformBall, TruncatedGaussian };

/// One mode of the data law: mass `weight` spread over the ball
/// B(center, radius). `radius` is absolute.
///
/// TruncatedGaussian modes are N(center, s^2 I) with s = radius / (2 sqrt(d)),
/// conditioned on the ball.
struct ModeSpec {
  Vector center;
  double radius = 0.0;
  double weight = 0.0;
  ModeShape shape = ModeShape::UniformBall;
};

/// Remaining mass 1 - sum(weights), distributed as N(0, scale^2 I).
/// scale == 0 is a point mass at the origin.
struct BulkSpec {
  double scale = 0.0;
};

/// A data law with a designated furthest mode at distance R(1 + delta) of
/// radius delta R and mass b_rho > 3 eps, and less than eps/2 of its mass
/// outside B(0, R(1 + 2 delta)).
struct MultiModalData {
  std::size_t d = 0;
  double R = 0.0;
  double delta = 0.0;
  double eps = 0.0;
  std::vector<ModeSpec> modes;
  std::size_t designated = 0;
  BulkSpec bulk;

  double mode_weight() const;
  double bulk_weight() const { return 1.0 - mode_weight(); }
  const ModeSpec& designated_mode() const { return modes.at(designated); }
  /// Unit vector pointing at the designated mode.
  Vector designated_direction() const;
  /// R (1 + 2 delta).
  double outer_radius() const { return R * (1.0 + 2.0 * delta); }

  /// One uniform-ball mode of weight b_rho at R(1 + delta) e_1 plus a Gaussian
  /// bulk of scale `bulk_scale`. A negative `bulk_scale` selects the default
  /// R / (4 sqrt(d)).
  static MultiModalData canonical(std::size_t d, double R, double delta, double eps,
                                  double b_rho, double bulk_scale = -1.0);
};

/// Throws StructuralError for dimension mismatches, non-positive weights,
/// total weight above 1, negative radii or a bad designated index. Otherwise
/// reports the designated-mode geometry, b_rho > 3 eps, and a Monte-Carlo
/// estimate of the mass outside B(0, R(1 + 2 delta)) (with its standard
/// error) compared to eps / 2.
Report validate_data_spec(const MultiModalData& spec, std::size_t n_tail = 200000,
                          std::uint64_t seed = 0);

/// n draws from the mixture; deterministic in (spec, n, seed).
Points sample_data(const MultiModalData& spec, std::size_t n, std::uint64_t seed);

/// Samples together with the mixture component each one came from
/// (modes.size() denotes the bulk).
struct LabelledPoints {
  Points points;
  std::vector<std::size_t> component;
};
LabelledPoints sample_data_labelled(const MultiModalData& spec, std::size_t n,
                                    std::uint64_t seed);

struct MassEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

/// rho_0(B(0, radius)). Components that lie entirely inside or outside the
/// ball and the Gaussian bulk are handled in closed form; straddling modes
/// fall back to Monte Carlo with `n` samples.
MassEstimate mass_inside_ball(const MultiModalData& spec, double radius, std::size_t n = 200000,
                              std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Spherically symmetric measures
// ---------------------------------------------------------------------------

/// H(r) = a r^p on [0, inf). Quadratic(a) is the p = 2 case.
class RadialProfile {
 public:
  enum class Kind { Quadratic, PowerTail };

  static RadialProfile quadratic(double a);
  static RadialProfile power_tail(double a, double p);

  Kind kind() const { return kind_; }
  double a() const { return a_; }
  double p() const { return p_; }

  double value(double r) const { return p_ == 2.0 ? a_ * r * r : a_ * std::pow(r, p_); }
  double derivative(double r) const;

 private:
  RadialProfile(Kind kind, double a, double p) : kind_(kind), a_(a), p_(p) {}

  Kind kind_;
  double a_;
  double p_;
};

/// The probability law with density proportional to exp(-H(|x|)) on R^d.
struct SphericalMeasure {
  std::size_t d;
  RadialProfile profile;
};

/// Largest supported Gamma shape d/p for the radial sampler.
inline constexpr double kMaxRadialShape = 1e7;

/// Exact sampler: s = H(|x|) ~ Gamma(d/p, 1), direction uniform on the sphere.
Points sample_spherical(const SphericalMeasure& pi, std::size_t n, std::uint64_t seed);

/// First k coordinates of samples from pi, drawn exactly without forming the
/// full d-vectors (uses |Z_{1..k}| / sqrt(|Z_{1..k}|^2 + chi^2_{d-k})).
Points sample_spherical_marginal(const SphericalMeasure& pi, std::size_t k, std::size_t n,
                                 std::uint64_t seed);

double log_density_unnormalized(const SphericalMeasure& pi, const Vector& x);

/// Monte-Carlo (1 - eps/2)-quantile of the k-dimensional projection of pi.
///
/// `ball_radius` is the order statistic q of |G(x)| at index ceil((1 - eps/2) n),
/// `r_k` = sqrt(1 + q^2) is the level with pi(1 + |G|^2 <= r_k^2) >= 1 - eps/2.
/// Standard errors come from the spread of the neighbouring order statistics
/// at +-1 binomial standard deviation in rank.
struct QuantileEstimate {
  double r_k = 0.0;
  double ball_radius = 0.0;
  double r_k_se = 0.0;
  double ball_radius_se = 0.0;
  std::size_t n = 0;
};

/// Projection onto the first k coordinates (any k-subspace gives the same law).
QuantileEstimate quantile_rk(const SphericalMeasure& pi, std::size_t k, double eps,
                             std::size_t n, std::uint64_t seed);

/// Same estimate for an arbitrary subspace, from full d-dimensional samples.
QuantileEstimate quantile_rk(const SphericalMeasure& pi, const SubspaceProjector& proj,
                             double eps, std::size_t n, std::uint64_t seed);

/// Order-statistic quantile estimate of arbitrary values (sorted in place).
QuantileEstimate quantile_from_norms(std::vector<double>& norms, double eps);

}  // namespace mixlab
