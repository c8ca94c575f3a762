#include "mixlab/forward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "mixlab/errors.hpp"
#include "mixlab/parallel.hpp"
#include "mixlab/random.hpp"

namespace mixlab {

namespace {

void check_ou(const OUProcess& proc) {
  if (!(proc.mu > 0.0)) throw DomainError("OU rate mu must be positive");
  if (proc.d == 0) throw StructuralError("OU dimension must be positive");
}

void check_tl(const TemperedLangevin& tl) {
  if (tl.d == 0) throw StructuralError("tempered Langevin dimension must be positive");
  if (!(tl.ell >= 0.0)) throw DomainError("temperature ell must be nonnegative");
  if (!(tl.h_floor > 0.0)) throw DomainError("drift floor must be positive");
}

void check_dim(const Vector& x, std::size_t d) {
  if (static_cast<std::size_t>(x.size()) != d)
    throw StructuralError("point has dimension " + std::to_string(x.size()) + ", expected " +
                          std::to_string(d));
}

// phi(r) with H floored, so that b(x) = -phi(r) x / r.
double floored_radial_drift(const TemperedLangevin& tl, double r) {
  const double h = std::max(tl.profile.value(r), tl.h_floor);
  const double scale = tl.ell == 0.0 ? 1.0 / h : std::pow(h, 2.0 * tl.ell - 1.0);
  return scale * (h - 2.0 * tl.ell) * tl.profile.derivative(r);
}

}  // namespace

SphericalMeasure stationary_measure(const OUProcess& proc) {
  check_ou(proc);
  return {proc.d, RadialProfile::quadratic(proc.mu / 2.0)};
}

SphericalMeasure stationary_measure(const TemperedLangevin& tl) {
  check_tl(tl);
  return {tl.d, tl.profile};
}

Points ou_transition_sample(const OUProcess& proc, const Vector& x0, double T, std::uint64_t seed,
                            std::size_t n) {
  check_ou(proc);
  check_dim(x0, proc.d);
  if (!(T >= 0.0)) throw DomainError("time horizon must be nonnegative");
  const double decay = std::exp(-proc.mu * T);
  const double sd = std::sqrt(-std::expm1(-2.0 * proc.mu * T) / proc.mu);
  const Vector mean = decay * x0;
  const auto d = static_cast<Eigen::Index>(proc.d);
  Points out(d, static_cast<Eigen::Index>(n));
  parallel_for(chunk_count(n), [&](std::size_t c) {
    Engine eng = make_engine(seed, stream_tag::noise + c);
    std::normal_distribution<double> normal;
    const std::size_t end = std::min(n, (c + 1) * kChunkSize);
    for (std::size_t i = c * kChunkSize; i < end; ++i) {
      auto col = out.col(static_cast<Eigen::Index>(i));
      for (Eigen::Index j = 0; j < d; ++j) col[j] = mean[j] + sd * normal(eng);
    }
  });
  return out;
}

Points ou_evolve(const OUProcess& proc, const Points& x0s, double T, std::uint64_t seed) {
  check_ou(proc);
  if (static_cast<std::size_t>(x0s.rows()) != proc.d)
    throw StructuralError("initial points do not match the OU dimension");
  if (!(T >= 0.0)) throw DomainError("time horizon must be nonnegative");
  const double decay = std::exp(-proc.mu * T);
  const double sd = std::sqrt(-std::expm1(-2.0 * proc.mu * T) / proc.mu);
  const auto n = static_cast<std::size_t>(x0s.cols());
  const Eigen::Index d = x0s.rows();
  Points out(d, x0s.cols());
  parallel_for(chunk_count(n), [&](std::size_t c) {
    Engine eng = make_engine(seed, stream_tag::noise + c);
    std::normal_distribution<double> normal;
    const std::size_t end = std::min(n, (c + 1) * kChunkSize);
    for (std::size_t i = c * kChunkSize; i < end; ++i) {
      const auto col = static_cast<Eigen::Index>(i);
      for (Eigen::Index j = 0; j < d; ++j) out(j, col) = decay * x0s(j, col) + sd * normal(eng);
    }
  });
  return out;
}

Vector drift(const OUProcess& proc, const Vector& x) {
  check_dim(x, proc.d);
  return -proc.mu * x;
}

Vector drift(const TemperedLangevin& tl, const Vector& x) {
  check_dim(x, tl.d);
  const double r = x.norm();
  if (r == 0.0) return Vector::Zero(x.size());
  return (-floored_radial_drift(tl, r) / r) * x;
}

double dispersion_scalar(const TemperedLangevin& tl, const Vector& x) {
  check_dim(x, tl.d);
  return std::sqrt(2.0) * std::pow(tl.profile.value(x.norm()), tl.ell);
}

double radial_drift(const TemperedLangevin& tl, double r) {
  const double h = tl.profile.value(r);
  const double scale = tl.ell == 0.0 ? 1.0 / h : std::pow(h, 2.0 * tl.ell - 1.0);
  return scale * (h - 2.0 * tl.ell) * tl.profile.derivative(r);
}

// ---------------------------------------------------------------------------

namespace {

struct StepPlan {
  std::size_t full = 0;
  double last = 0.0;  // 0 when T is a multiple of h
};

StepPlan plan_steps(double T, double h) {
  StepPlan plan;
  const double ratio = T / h;
  double full = std::floor(ratio);
  double rest = T - full * h;
  if (rest >= h * (1.0 - 1e-9)) {
    full += 1.0;
    rest = 0.0;
  }
  if (rest <= h * 1e-9) rest = 0.0;
  plan.full = static_cast<std::size_t>(full);
  plan.last = rest;
  return plan;
}

// Advances `x` in place by one Euler-Maruyama step of size h, given r = |x|,
// and returns the new |x|^2.
double em_step(const TemperedLangevin& tl, double* x, Eigen::Index d, double r, double h,
               Engine& eng, std::normal_distribution<double>& normal) {
  const double hval = tl.profile.value(r);
  const double sigma = std::sqrt(2.0 * h) * (tl.ell == 0.0 ? 1.0 : std::pow(hval, tl.ell));
  const double coef = r > 0.0 ? -floored_radial_drift(tl, r) / r * h : 0.0;
  double norm2 = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    const double z = normal(eng);
    x[j] += coef * x[j] + sigma * z;
    norm2 += x[j] * x[j];
  }
  return norm2;
}

void check_finite(double norm, std::size_t step) {
  if (!(norm <= kDivergenceThreshold))
    throw DivergenceError(step, "Euler-Maruyama diverged at step " + std::to_string(step) +
                                    " (|x| = " + std::to_string(norm) + ")");
}

PathResult run_path(const TemperedLangevin& tl, const Vector& x0, double T, double h,
                    Engine& eng, const PathOptions& opts) {
  const StepPlan plan = plan_steps(T, h);
  const std::size_t total = plan.full + (plan.last > 0.0 ? 1 : 0);
  std::normal_distribution<double> normal;
  Vector x = x0;
  double r = x.norm();

  PathResult result;
  std::vector<Vector> kept;
  const std::size_t every = std::max<std::size_t>(1, opts.record_every);
  if (opts.record) kept.push_back(x);

  for (std::size_t s = 0; s < total; ++s) {
    const double dt = s < plan.full ? h : plan.last;
    r = std::sqrt(em_step(tl, x.data(), x.size(), r, dt, eng, normal));
    check_finite(r, s + 1);
    if (opts.record && (s + 1) % every == 0) kept.push_back(x);
  }

  result.endpoint = std::move(x);
  result.steps = total;
  if (opts.record) {
    Points path(x0.size(), static_cast<Eigen::Index>(kept.size()));
    for (std::size_t i = 0; i < kept.size(); ++i) path.col(static_cast<Eigen::Index>(i)) = kept[i];
    result.path = std::move(path);
  }
  return result;
}

void check_integration(const TemperedLangevin& tl, const Vector& x0, double T,
                       const IntegratorConfig& cfg) {
  check_tl(tl);
  check_dim(x0, tl.d);
  if (!(T >= 0.0)) throw DomainError("time horizon must be nonnegative");
  if (!(cfg.step > 0.0)) throw DomainError("integrator step must be positive");
}

}  // namespace

PathResult simulate_path(const TemperedLangevin& tl, const Vector& x0, double T,
                         const IntegratorConfig& cfg, std::uint64_t seed,
                         const PathOptions& opts) {
  check_integration(tl, x0, T, cfg);
  Engine eng = make_engine(seed, stream_tag::noise);
  return run_path(tl, x0, T, cfg.step, eng, opts);
}

Points simulate_endpoints(const TemperedLangevin& tl, const Vector& x0, double T,
                          const IntegratorConfig& cfg, std::size_t n, std::uint64_t seed) {
  check_integration(tl, x0, T, cfg);
  Points out(x0.size(), static_cast<Eigen::Index>(n));
  parallel_for(chunk_count(n), [&](std::size_t c) {
    const std::size_t end = std::min(n, (c + 1) * kChunkSize);
    for (std::size_t i = c * kChunkSize; i < end; ++i) {
      Engine eng = make_engine(seed, stream_tag::noise + i);
      out.col(static_cast<Eigen::Index>(i)) = run_path(tl, x0, T, cfg.step, eng, {}).endpoint;
    }
  });
  return out;
}

EndpointSampler exact_endpoints(const OUProcess& proc) {
  check_ou(proc);
  return [proc](const Vector& x0, double t, std::size_t n, std::uint64_t seed) {
    return ou_transition_sample(proc, x0, t, seed, n);
  };
}

EndpointSampler euler_endpoints(const TemperedLangevin& tl, IntegratorConfig cfg) {
  check_tl(tl);
  return [tl, cfg](const Vector& x0, double t, std::size_t n, std::uint64_t seed) {
    return simulate_endpoints(tl, x0, t, cfg, n, seed);
  };
}

Diffusion as_diffusion(const OUProcess& proc) {
  check_ou(proc);
  Diffusion diff;
  diff.d = proc.d;
  diff.drift = [proc](const Vector& x) { return drift(proc, x); };
  diff.apply_dispersion = [](const Vector&, const Vector& v) -> Vector { return 2.0 * v; };
  return diff;
}

Diffusion as_diffusion(const TemperedLangevin& tl) {
  check_tl(tl);
  Diffusion diff;
  diff.d = tl.d;
  diff.drift = [tl](const Vector& x) { return drift(tl, x); };
  diff.apply_dispersion = [tl](const Vector& x, const Vector& v) -> Vector {
    return 2.0 * std::pow(tl.profile.value(x.norm()), 2.0 * tl.ell) * v;
  };
  return diff;
}

// ---------------------------------------------------------------------------

Points envelope_points(std::size_t d, std::size_t n, std::uint64_t seed, double scale) {
  if (d == 0) throw StructuralError("envelope dimension must be positive");
  if (!(scale > 0.0)) throw DomainError("envelope scale must be positive");
  Points out(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n));
  parallel_for(chunk_count(n), [&](std::size_t c) {
    Engine eng = make_engine(seed, stream_tag::envelope + c);
    std::normal_distribution<double> normal(0.0, scale);
    const std::size_t end = std::min(n, (c + 1) * kChunkSize);
    for (std::size_t i = c * kChunkSize; i < end; ++i)
      for (Eigen::Index j = 0; j < out.rows(); ++j) out(j, static_cast<Eigen::Index>(i)) = normal(eng);
  });
  return out;
}

LinearGrowthReport check_linear_growth(const Diffusion& proc, double mu, std::size_t n_points,
                                       std::uint64_t seed, double envelope_scale) {
  if (!(mu > 0.0)) throw DomainError("mu must be positive");
  const Points xs = envelope_points(proc.d, n_points, seed, envelope_scale);
  Points us = envelope_points(proc.d, n_points, seed ^ 0x5bd1e995ULL, 1.0);
  us.colwise().normalize();

  LinearGrowthReport rep;
  rep.worst_point = Vector::Zero(static_cast<Eigen::Index>(proc.d));
  rep.worst_direction = rep.worst_point;
  for (Eigen::Index i = 0; i < xs.cols(); ++i) {
    const Vector x = xs.col(i);
    const Vector u = us.col(i);
    const double xu = std::abs(x.dot(u));
    if (xu < 1e-12) continue;
    const double ratio = std::abs(proc.drift(x).dot(u)) / (mu * xu);
    ++rep.evaluated;
    if (!(ratio <= rep.max_ratio)) {
      rep.max_ratio = ratio;
      rep.worst_point = x;
      rep.worst_direction = u;
    }
  }
  rep.passed = rep.max_ratio <= 1.0 + 1e-9;
  return rep;
}

LGReport check_LG_numeric(const TemperedLangevin& tl, double mu, double r_max, std::size_t n_grid,
                          std::optional<double> r_lo) {
  check_tl(tl);
  if (!(r_max > 0.0)) throw DomainError("r_max must be positive");
  if (n_grid < 2) throw DomainError("LG grid needs at least two points");
  const double r_min = r_lo.value_or(1e-6 * r_max);
  if (!(r_min > 0.0 && r_min < r_max)) throw DomainError("LG grid needs 0 < r_min < r_max");
  const double ratio = std::log(r_max / r_min) / static_cast<double>(n_grid - 1);

  LGReport rep;
  rep.max_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n_grid; ++i) {
    const double r = i + 1 == n_grid ? r_max : r_min * std::exp(ratio * static_cast<double>(i));
    const double lhs = radial_drift(tl, r);
    const double excess = lhs - mu * r - 1e-9 * (1.0 + mu * r);
    if (!(excess <= rep.max_excess)) {
      rep.max_excess = excess;
      rep.worst_r = r;
      rep.worst_lhs = lhs;
    }
  }
  rep.passed = rep.max_excess <= 0.0;
  return rep;
}

double lg_max_scale(double mu, double p, double ell) {
  if (!(mu > 0.0) || !(p > 0.0) || !(ell >= 0.0))
    throw DomainError("lg_max_scale needs mu > 0, p > 0, ell >= 0");
  if (ell > 1.0 / p - 0.5)
    throw DomainError("no closed-form LG scale when ell > 1/p - 1/2");
  const double a = std::pow(mu / p, 1.0 / (2.0 * ell + 1.0)) - ell;
  if (!(a > 0.0)) throw DomainError("closed-form LG scale is not positive");
  return a;
}

SigmaBoundReport check_sigma_bound(const Diffusion& proc, const SubspaceProjector& proj,
                                   std::size_t n_points, std::uint64_t seed,
                                   double envelope_scale) {
  if (proj.dim() != proc.d) throw StructuralError("basis dimension does not match the process");
  const Points xs = envelope_points(proc.d, n_points, seed, envelope_scale);
  const Matrix& basis = proj.basis();

  SigmaBoundReport rep;
  rep.max_violation = -std::numeric_limits<double>::infinity();
  rep.worst_point = Vector::Zero(static_cast<Eigen::Index>(proc.d));
  for (Eigen::Index i = 0; i < xs.cols(); ++i) {
    const Vector x = xs.col(i);
    const Vector c = basis.transpose() * x;
    const Vector ghat = basis * c / std::sqrt(1.0 + c.squaredNorm());
    double lhs = 0.0;
    for (Eigen::Index j = 0; j < basis.cols(); ++j) {
      const Vector y = basis.col(j);
      lhs += proc.apply_dispersion(x, y).dot(y);
    }
    const double rhs = 3.0 * proc.apply_dispersion(x, ghat).dot(ghat);
    const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
    const double violation = (rhs - lhs) / scale;
    ++rep.evaluated;
    if (!(violation <= rep.max_violation)) {
      rep.max_violation = violation;
      rep.worst_point = x;
    }
  }
  rep.passed = rep.max_violation <= 1e-9;
  return rep;
}

SigmaBoundReport check_sigma_bound(const Diffusion& proc, const Matrix& basis,
                                   std::size_t n_points, std::uint64_t seed,
                                   double envelope_scale) {
  return check_sigma_bound(proc, SubspaceProjector(basis), n_points, seed, envelope_scale);
}

// ---------------------------------------------------------------------------

Ergodicity classify_ergodicity(double p, double ell) {
  if (!(p > 0.0)) throw StructuralError("tail exponent p must be positive");
  if (!(ell >= 0.0)) throw StructuralError("temperature ell must be nonnegative");
  // Ties within rounding of the printed boundaries count as equal.
  auto below = [](double x, double b) { return x < b - 1e-12 * std::max(1.0, std::abs(b)); };
  auto at_most = [](double x, double b) { return x <= b + 1e-12 * std::max(1.0, std::abs(b)); };

  const double upper = 1.0 / p - 0.5;
  if (p < 1.0) {
    const double lower = 1.0 / p - 1.0;
    if (below(ell, lower))
      return {ErgodicityRegime::Subexponential, p / (2.0 - p - 2.0 * ell * p)};
    if (at_most(ell, upper)) return {ErgodicityRegime::Exponential, 0.0};
    return {ErgodicityRegime::Uniform, 0.0};
  }
  if (p <= 2.0 && at_most(ell, upper)) return {ErgodicityRegime::Exponential, 0.0};
  return {ErgodicityRegime::Uniform, 0.0};
}

const char* to_string(ErgodicityRegime regime) {
  switch (regime) {
    case ErgodicityRegime::Subexponential:
      return "subexponential";
    case ErgodicityRegime::Exponential:
      return "exponential";
    case ErgodicityRegime::Uniform:
      return "uniform";
  }
  return "unknown";
}

}  // namespace mixlab
