#include "mixlab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "mixlab/errors.hpp"
#include "mixlab/parallel.hpp"
#include "mixlab/random.hpp"
#include "mixlab/stats.hpp"

namespace mixlab {

namespace {

Vector gaussian_vector(std::size_t d, Engine& eng, std::normal_distribution<double>& normal) {
  Vector z(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(eng);
  return z;
}

Vector unit_vector(std::size_t d, Engine& eng, std::normal_distribution<double>& normal) {
  for (;;) {
    Vector z = gaussian_vector(d, eng, normal);
    const double norm = z.norm();
    if (norm > 0.0) return z / norm;
  }
}

Vector draw_mode(const ModeSpec& mode, std::size_t d, Engine& eng,
                 std::normal_distribution<double>& normal,
                 std::uniform_real_distribution<double>& uniform) {
  if (mode.radius == 0.0) return mode.center;
  switch (mode.shape) {
    case ModeShape::UniformBall: {
      const Vector dir = unit_vector(d, eng, normal);
      const double u = uniform(eng);
      return mode.center + mode.radius * std::pow(u, 1.0 / static_cast<double>(d)) * dir;
    }
    case ModeShape::TruncatedGaussian: {
      const double s = mode.radius / (2.0 * std::sqrt(static_cast<double>(d)));
      for (;;) {
        const Vector z = s * gaussian_vector(d, eng, normal);
        if (z.norm() <= mode.radius) return mode.center + z;
      }
    }
  }
  return mode.center;
}

void check_structure(const MultiModalData& spec) {
  if (spec.d == 0) throw StructuralError("data dimension must be positive");
  if (spec.modes.empty()) throw StructuralError("data law needs at least one mode");
  if (spec.designated >= spec.modes.size())
    throw StructuralError("designated mode index out of range");
  for (std::size_t i = 0; i < spec.modes.size(); ++i) {
    const auto& m = spec.modes[i];
    if (static_cast<std::size_t>(m.center.size()) != spec.d)
      throw StructuralError("mode " + std::to_string(i) + " has center of dimension " +
                            std::to_string(m.center.size()) + ", expected " +
                            std::to_string(spec.d));
    if (!(m.weight > 0.0) || m.weight > 1.0)
      throw StructuralError("mode " + std::to_string(i) + " weight must lie in (0, 1]");
    if (!(m.radius >= 0.0))
      throw StructuralError("mode " + std::to_string(i) + " radius must be nonnegative");
  }
  if (spec.mode_weight() > 1.0 + 1e-12) throw StructuralError("mode weights sum above 1");
  if (!(spec.bulk.scale >= 0.0)) throw StructuralError("bulk scale must be nonnegative");
}

Check make_check(std::string name, bool passed, double measured, double threshold, double margin,
                 std::string detail = {}) {
  return Check{std::move(name), passed, measured, threshold, margin, std::move(detail)};
}

}  // namespace

double MultiModalData::mode_weight() const {
  double w = 0.0;
  for (const auto& m : modes) w += m.weight;
  return w;
}

Vector MultiModalData::designated_direction() const {
  const Vector& c = designated_mode().center;
  return c / c.norm();
}

MultiModalData MultiModalData::canonical(std::size_t d, double R, double delta, double eps,
                                         double b_rho, double bulk_scale) {
  MultiModalData spec;
  spec.d = d;
  spec.R = R;
  spec.delta = delta;
  spec.eps = eps;
  ModeSpec mode;
  mode.center = Vector::Zero(static_cast<Eigen::Index>(d));
  if (d > 0) mode.center[0] = R * (1.0 + delta);
  mode.radius = delta * R;
  mode.weight = b_rho;
  spec.modes.push_back(std::move(mode));
  spec.bulk.scale = bulk_scale >= 0.0 ? bulk_scale : R / (4.0 * std::sqrt(static_cast<double>(d)));
  return spec;
}

Report validate_data_spec(const MultiModalData& spec, std::size_t n_tail, std::uint64_t seed) {
  check_structure(spec);
  Report report;
  const auto& x0 = spec.designated_mode();
  const double target = spec.R * (1.0 + spec.delta);
  const double dist = x0.center.norm();

  report.checks.push_back(make_check("R > 2", spec.R > 2.0, spec.R, 2.0, spec.R - 2.0));
  report.checks.push_back(make_check("0 < delta < 1", spec.delta > 0.0 && spec.delta < 1.0,
                                     spec.delta, 1.0, std::min(spec.delta, 1.0 - spec.delta)));
  report.checks.push_back(make_check("0 < eps < 1", spec.eps > 0.0 && spec.eps < 1.0, spec.eps,
                                     1.0, std::min(spec.eps, 1.0 - spec.eps)));

  const double dist_rel = std::abs(dist - target) / target;
  report.checks.push_back(make_check("|x0| = R(1+delta)", dist_rel <= 1e-12, dist, target,
                                     1e-12 - dist_rel, "relative tolerance 1e-12"));
  const double rad_target = spec.delta * spec.R;
  const double rad_rel = std::abs(x0.radius - rad_target) / rad_target;
  report.checks.push_back(make_check("mode radius = delta R", rad_rel <= 1e-12, x0.radius,
                                     rad_target, 1e-12 - rad_rel, "relative tolerance 1e-12"));

  double furthest_other = 0.0;
  for (std::size_t i = 0; i < spec.modes.size(); ++i)
    if (i != spec.designated) furthest_other = std::max(furthest_other, spec.modes[i].center.norm());
  report.checks.push_back(make_check("designated mode is furthest",
                                     furthest_other <= dist * (1.0 + 1e-12), furthest_other, dist,
                                     dist - furthest_other));

  report.checks.push_back(make_check("b_rho > 3 eps", x0.weight > 3.0 * spec.eps, x0.weight,
                                     3.0 * spec.eps, x0.weight - 3.0 * spec.eps));

  const std::size_t n = std::max<std::size_t>(n_tail, 100000);
  const Points xs = sample_data(spec, n, seed);
  const double outer = spec.outer_radius();
  const auto outside =
      (xs.colwise().norm().array() > outer).cast<double>().sum() / static_cast<double>(n);
  const double se = std::sqrt(outside * (1.0 - outside) / static_cast<double>(n));
  const double limit = spec.eps / 2.0;
  report.checks.push_back(make_check("mass outside B(0,R(1+2delta)) < eps/2",
                                     outside + 3.0 * se < limit, outside, limit,
                                     limit - outside - 3.0 * se,
                                     "Monte Carlo n=" + std::to_string(n) +
                                         ", standard error " + std::to_string(se)));
  return report;
}

LabelledPoints sample_data_labelled(const MultiModalData& spec, std::size_t n,
                                    std::uint64_t seed) {
  check_structure(spec);
  const std::size_t d = spec.d;
  LabelledPoints out{Points(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n)),
                     std::vector<std::size_t>(n)};

  std::vector<double> cumulative;
  double acc = 0.0;
  for (const auto& m : spec.modes) cumulative.push_back(acc += m.weight);

  parallel_for(chunk_count(n), [&](std::size_t c) {
    Engine eng = make_engine(seed, stream_tag::data + c);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uniform;
    const std::size_t begin = c * kChunkSize;
    const std::size_t end = std::min(n, begin + kChunkSize);
    for (std::size_t i = begin; i < end; ++i) {
      const double u = uniform(eng);
      const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
      const auto comp = static_cast<std::size_t>(it - cumulative.begin());
      out.component[i] = comp;
      auto col = out.points.col(static_cast<Eigen::Index>(i));
      if (comp < spec.modes.size()) {
        col = draw_mode(spec.modes[comp], d, eng, normal, uniform);
      } else {
        col = spec.bulk.scale * gaussian_vector(d, eng, normal);
      }
    }
  });
  return out;
}

Points sample_data(const MultiModalData& spec, std::size_t n, std::uint64_t seed) {
  return sample_data_labelled(spec, n, seed).points;
}

MassEstimate mass_inside_ball(const MultiModalData& spec, double radius, std::size_t n,
                              std::uint64_t seed) {
  check_structure(spec);
  double mass = 0.0;
  double var = 0.0;
  for (std::size_t i = 0; i < spec.modes.size(); ++i) {
    const auto& m = spec.modes[i];
    const double c = m.center.norm();
    if (c + m.radius <= radius) {
      mass += m.weight;
    } else if (c - m.radius > radius) {
      continue;
    } else {
      Engine eng = make_engine(seed, stream_tag::data + 0x100000 + i);
      std::normal_distribution<double> normal;
      std::uniform_real_distribution<double> uniform;
      std::size_t hits = 0;
      for (std::size_t j = 0; j < n; ++j)
        if (draw_mode(m, spec.d, eng, normal, uniform).norm() <= radius) ++hits;
      const double f = static_cast<double>(hits) / static_cast<double>(n);
      mass += m.weight * f;
      var += m.weight * m.weight * f * (1.0 - f) / static_cast<double>(n);
    }
  }
  const double bulk_w = std::max(0.0, spec.bulk_weight());
  if (spec.bulk.scale == 0.0) {
    mass += radius >= 0.0 ? bulk_w : 0.0;
  } else {
    const double x = (radius / spec.bulk.scale) * (radius / spec.bulk.scale);
    mass += bulk_w * chisq_cdf(spec.d, x);
  }
  return {std::min(1.0, mass), std::sqrt(var)};
}

// ---------------------------------------------------------------------------

RadialProfile RadialProfile::quadratic(double a) {
  if (!(a > 0.0)) throw DomainError("quadratic profile needs a > 0");
  return RadialProfile(Kind::Quadratic, a, 2.0);
}

RadialProfile RadialProfile::power_tail(double a, double p) {
  if (!(a > 0.0)) throw DomainError("power-tail profile needs a > 0");
  if (!(p > 0.0 && p <= 2.0)) throw DomainError("power-tail profile needs p in (0, 2]");
  return RadialProfile(Kind::PowerTail, a, p);
}

double RadialProfile::derivative(double r) const {
  if (p_ == 1.0) return a_;
  if (p_ == 2.0) return 2.0 * a_ * r;
  if (r == 0.0) return p_ > 1.0 ? 0.0 : HUGE_VAL;
  return a_ * p_ * std::pow(r, p_ - 1.0);
}

namespace {

void check_radial_range(const SphericalMeasure& pi) {
  if (pi.d == 0) throw StructuralError("spherical measure needs d > 0");
  const double shape = static_cast<double>(pi.d) / pi.profile.p();
  if (shape > kMaxRadialShape)
    throw RangeError("parameter out of supported range: d/p = " + std::to_string(shape) +
                     " exceeds " + std::to_string(kMaxRadialShape));
}

}  // namespace

Points sample_spherical(const SphericalMeasure& pi, std::size_t n, std::uint64_t seed) {
  check_radial_range(pi);
  const std::size_t d = pi.d;
  const double a = pi.profile.a();
  const double p = pi.profile.p();
  Points out(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n));
  parallel_for(chunk_count(n), [&](std::size_t c) {
    Engine eng = make_engine(seed, stream_tag::stationary + c);
    std::normal_distribution<double> normal;
    std::gamma_distribution<double> radial(static_cast<double>(d) / p, 1.0);
    const std::size_t begin = c * kChunkSize;
    const std::size_t end = std::min(n, begin + kChunkSize);
    for (std::size_t i = begin; i < end; ++i) {
      const double r = std::pow(radial(eng) / a, 1.0 / p);
      out.col(static_cast<Eigen::Index>(i)) = r * unit_vector(d, eng, normal);
    }
  });
  return out;
}

Points sample_spherical_marginal(const SphericalMeasure& pi, std::size_t k, std::size_t n,
                                 std::uint64_t seed) {
  check_radial_range(pi);
  if (k == 0 || k > pi.d) throw StructuralError("marginal rank must lie in [1, d]");
  const std::size_t d = pi.d;
  const double a = pi.profile.a();
  const double p = pi.profile.p();
  Points out(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));
  parallel_for(chunk_count(n), [&](std::size_t c) {
    Engine eng = make_engine(seed, stream_tag::stationary + c);
    std::normal_distribution<double> normal;
    std::gamma_distribution<double> radial(static_cast<double>(d) / p, 1.0);
    const double rest_shape = 0.5 * static_cast<double>(d - k);
    std::gamma_distribution<double> rest(d > k ? rest_shape : 1.0, 2.0);
    const std::size_t begin = c * kChunkSize;
    const std::size_t end = std::min(n, begin + kChunkSize);
    for (std::size_t i = begin; i < end; ++i) {
      const double r = std::pow(radial(eng) / a, 1.0 / p);
      for (;;) {
        const Vector z = gaussian_vector(k, eng, normal);
        const double tail = d > k ? rest(eng) : 0.0;
        const double norm_sq = z.squaredNorm() + tail;
        if (norm_sq > 0.0) {
          out.col(static_cast<Eigen::Index>(i)) = (r / std::sqrt(norm_sq)) * z;
          break;
        }
      }
    }
  });
  return out;
}

double log_density_unnormalized(const SphericalMeasure& pi, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != pi.d)
    throw StructuralError("point dimension does not match the measure");
  return -pi.profile.value(x.norm());
}

QuantileEstimate quantile_from_norms(std::vector<double>& norms, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0, 1)");
  const std::size_t n = norms.size();
  if (n == 0) throw DomainError("quantile of an empty sample");
  std::sort(norms.begin(), norms.end());
  const double level = 1.0 - eps / 2.0;
  const auto nd = static_cast<double>(n);
  auto rank = static_cast<std::size_t>(std::ceil(level * nd - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, n);
  const auto spread = static_cast<std::size_t>(std::ceil(std::sqrt(nd * level * (1.0 - level))));
  const std::size_t idx = rank - 1;
  const std::size_t lo = idx >= spread ? idx - spread : 0;
  const std::size_t hi = std::min(n - 1, idx + spread);

  QuantileEstimate q;
  q.n = n;
  q.ball_radius = norms[idx];
  q.ball_radius_se = 0.5 * (norms[hi] - norms[lo]);
  q.r_k = std::sqrt(1.0 + q.ball_radius * q.ball_radius);
  q.r_k_se = q.ball_radius / q.r_k * q.ball_radius_se;
  return q;
}

QuantileEstimate quantile_rk(const SphericalMeasure& pi, std::size_t k, double eps,
                             std::size_t n, std::uint64_t seed) {
  if (k < 3) throw StructuralError("projection rank k must be at least 3");
  if (k > pi.d) throw StructuralError("projection rank k exceeds dimension d");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0, 1)");
  const Points g = sample_spherical_marginal(pi, k, n, seed);
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) norms[i] = g.col(static_cast<Eigen::Index>(i)).norm();
  return quantile_from_norms(norms, eps);
}

QuantileEstimate quantile_rk(const SphericalMeasure& pi, const SubspaceProjector& proj,
                             double eps, std::size_t n, std::uint64_t seed) {
  if (proj.dim() != pi.d) throw StructuralError("projector dimension does not match measure");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0, 1)");
  const Points xs = sample_spherical(pi, n, seed);
  const Matrix coeffs = proj.basis().transpose() * xs;
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) norms[i] = coeffs.col(static_cast<Eigen::Index>(i)).norm();
  return quantile_from_norms(norms, eps);
}

}  // namespace mixlab
