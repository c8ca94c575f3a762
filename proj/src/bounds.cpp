#include "mixlab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <Eigen/Cholesky>

#include "mixlab/errors.hpp"
#include "mixlab/parallel.hpp"
#include "mixlab/random.hpp"
#include "mixlab/stats.hpp"

namespace mixlab {

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const Eigen::ArrayXd& v) {
  const auto n = static_cast<double>(v.size());
  MeanSe out;
  out.mean = v.mean();
  if (v.size() > 1) out.se = std::sqrt((v - out.mean).square().sum() / (n - 1.0) / n);
  return out;
}

}  // namespace

GeneratorTerms generator_terms(const Diffusion& proc, const SubspaceProjector& proj,
                               const Vector& x) {
  if (proj.dim() != proc.d || static_cast<std::size_t>(x.size()) != proc.d)
    throw StructuralError("generator: dimensions of process, projector and point differ");
  const Matrix& basis = proj.basis();
  const Vector c = basis.transpose() * x;
  const Vector G = basis * c;
  const double g2 = c.squaredNorm();
  const double H = lyapunov_from_norm_sq(g2);
  const double H3 = H * H * H;

  GeneratorTerms out;
  out.H = H;
  out.drift = -H3 * proc.drift(x).dot(G);
  double trace_sub = 0.0;
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    const Vector y = basis.col(j);
    trace_sub += proc.apply_dispersion(x, y).dot(y);
  }
  const double aGG = g2 > 0.0 ? proc.apply_dispersion(x, G).dot(G) : 0.0;
  out.diffusion = 0.5 * H3 * (3.0 * H * H * aGG - trace_sub);
  out.value = out.drift + out.diffusion;
  return out;
}

double generator_apply_H(const Diffusion& proc, const SubspaceProjector& proj, const Vector& x) {
  return generator_terms(proc, proj, x).value;
}

GeneratorBoundReport check_generator_bound(const Diffusion& proc, const SubspaceProjector& proj,
                                           double mu, std::size_t n_points, std::uint64_t seed,
                                           double envelope_scale) {
  const Points xs = envelope_points(proc.d, n_points, seed, envelope_scale);
  std::vector<double> excess(n_points);
  parallel_for(chunk_count(n_points), [&](std::size_t c) {
    const std::size_t end = std::min(n_points, (c + 1) * kChunkSize);
    for (std::size_t i = c * kChunkSize; i < end; ++i) {
      const auto t = generator_terms(proc, proj, xs.col(static_cast<Eigen::Index>(i)));
      excess[i] = t.value - mu * t.H;
    }
  });

  GeneratorBoundReport rep;
  rep.max_excess = -std::numeric_limits<double>::infinity();
  rep.argmax = Vector::Zero(static_cast<Eigen::Index>(proc.d));
  for (std::size_t i = 0; i < n_points; ++i) {
    if (!(excess[i] <= rep.max_excess)) {
      rep.max_excess = excess[i];
      rep.argmax = xs.col(static_cast<Eigen::Index>(i));
    }
  }
  rep.evaluated = n_points;
  rep.passed = rep.max_excess <= 1e-9;
  return rep;
}

// ---------------------------------------------------------------------------

PiTermEstimate pi_term(const PiTermSource& source, const SubspaceProjector& proj, double r) {
  if (!(r > 1.0)) throw DomainError("pi-term needs r > 1, got r = " + fmt(r));
  const double level = 1.0 / r;
  auto from_lyapunov = [level](const Eigen::ArrayXd& h) {
    const MeanSe m = mean_se((h >= level).cast<double>());
    return PiTermEstimate{m.mean, m.se};
  };

  return std::visit(
      [&](const auto& src) -> PiTermEstimate {
        using S = std::decay_t<decltype(src)>;
        if constexpr (std::is_same_v<S, GaussianPi>) {
          return {gaussian_pi_term(proj.rank(), r, src.mu), 0.0};
        } else if constexpr (std::is_same_v<S, SphericalPi>) {
          if (src.pi.d != proj.dim())
            throw StructuralError("pi and projector dimensions differ");
          // The law of G under a rotation-invariant pi does not depend on the subspace.
          const Points g = sample_spherical_marginal(src.pi, proj.rank(), src.n, src.seed);
          const Eigen::ArrayXd h = (1.0 + g.colwise().squaredNorm().array()).rsqrt().transpose();
          return from_lyapunov(h);
        } else {
          if (static_cast<std::size_t>(src.samples.rows()) != proj.dim())
            throw StructuralError("pi samples and projector dimensions differ");
          if (src.samples.cols() == 0) throw DomainError("pi-term needs at least one sample");
          return from_lyapunov(proj.lyapunov(src.samples));
        }
      },
      source);
}

LowerBoundReport tv_lower_bound(const PiTermSource& pi, const Points& rho0_samples,
                                const SubspaceProjector& proj, const RateFunction& rate,
                                double r, double T) {
  if (static_cast<std::size_t>(rho0_samples.rows()) != proj.dim())
    throw StructuralError("rho0 samples and projector dimensions differ");
  const auto n = static_cast<std::size_t>(rho0_samples.cols());
  if (n == 0) throw DomainError("lower bound needs at least one rho0 sample");

  LowerBoundReport rep;
  rep.T = T;
  rep.r = r;
  rep.n = n;
  rep.threshold = rate.markov_threshold(r, T);
  const PiTermEstimate p = pi_term(pi, proj, r);
  rep.pi_term = p.value;
  rep.pi_se = p.standard_error;

  const Eigen::ArrayXd h = proj.lyapunov(rho0_samples);
  const double C = rep.threshold;
  Eigen::ArrayXd tail(static_cast<Eigen::Index>(n));
  Eigen::ArrayXd inner(static_cast<Eigen::Index>(n));
  parallel_for(chunk_count(n), [&](std::size_t c) {
    const std::size_t end = std::min(n, (c + 1) * kChunkSize);
    for (std::size_t i = c * kChunkSize; i < end; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      const bool above = h[k] >= C;
      tail[k] = above ? 1.0 : 0.0;
      inner[k] = above ? 0.0 : r * rate.flow(h[k], T);
    }
  });

  const MeanSe t = mean_se(tail);
  const MeanSe in = mean_se(inner);
  const MeanSe both = mean_se(tail + inner);
  rep.rho_tail_term = t.mean;
  rep.rho_tail_se = t.se;
  rep.integral_term = in.mean;
  rep.integral_se = in.se;
  rep.total = rep.pi_term - rep.rho_tail_term - rep.integral_term;
  rep.total_se = std::sqrt(rep.pi_se * rep.pi_se + both.se * both.se);
  return rep;
}

LowerBoundReport tv_lower_bound(const PiTermSource& pi, const MultiModalData& rho0,
                                const SubspaceProjector& proj, const RateFunction& rate,
                                double r, double T, std::size_t n, std::uint64_t seed) {
  return tv_lower_bound(pi, sample_data(rho0, n, seed), proj, rate, r, T);
}

ExpectedHReport expected_H_check(const EndpointSampler& sampler, const SubspaceProjector& proj,
                                 const RateFunction& rate, const Vector& x, double t,
                                 std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DomainError("expected_H_check needs n > 0");
  const Points xs = sampler(x, t, n, seed);
  const MeanSe m = mean_se(proj.lyapunov(xs));
  ExpectedHReport rep;
  rep.estimate = m.mean;
  rep.standard_error = m.se;
  rep.bound = rate.flow(proj.lyapunov(x), t);
  rep.passed = rep.estimate <= rep.bound + 3.0 * rep.standard_error;
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

Eigen::LLT<Matrix> spd_factor(const Matrix& S, const char* name) {
  if (S.rows() != S.cols()) throw StructuralError(std::string(name) + " is not square");
  const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
  if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw DomainError(std::string(name) + " is not symmetric");
  Eigen::LLT<Matrix> llt(S);
  if (llt.info() != Eigen::Success || !(llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 0.0))
    throw DomainError(std::string(name) + " is not positive definite");
  return llt;
}

}  // namespace

double kl_gaussians(const Vector& m1, const Matrix& S1, const Vector& m2, const Matrix& S2) {
  const auto d = m1.size();
  if (m2.size() != d || S1.rows() != d || S2.rows() != d)
    throw StructuralError("kl_gaussians: dimensions differ");
  const auto l1 = spd_factor(S1, "S1");
  const auto l2 = spd_factor(S2, "S2");
  const Matrix L1 = l1.matrixL();
  const Matrix M = l2.matrixL().solve(L1);
  const Vector z = l2.matrixL().solve(m1 - m2);
  const double logdet1 = 2.0 * L1.diagonal().array().log().sum();
  const double logdet2 =
      2.0 * l2.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double kl =
      0.5 * (M.squaredNorm() - static_cast<double>(d) + z.squaredNorm() + logdet2 - logdet1);
  return std::max(0.0, kl);
}

UpperBoundReport ou_tv_upper_bound_detail(double mu, const MultiModalData& rho0, double T) {
  if (!(mu > 0.0)) throw DomainError("mu must be positive");
  if (!(mu * T > 0.5 * std::log(2.0)))
    throw DomainError("OU upper bound needs mu T > log(2)/2, got mu T = " + fmt(mu * T));
  const double outer = rho0.outer_radius();
  const MassEstimate inside = mass_inside_ball(rho0, outer);

  UpperBoundReport rep;
  rep.kl_bar = 0.5 * mu * std::exp(-2.0 * mu * T) * outer * outer +
               0.5 * static_cast<double>(rho0.d) * std::exp(-4.0 * mu * T);
  rep.mass_inside = inside.value;
  rep.mass_se = inside.standard_error;
  rep.value = std::min(
      1.0, inside.value * std::sqrt(rep.kl_bar / 2.0) + std::max(0.0, 1.0 - inside.value));
  return rep;
}

double ou_tv_upper_bound(double mu, const MultiModalData& rho0, double T) {
  return ou_tv_upper_bound_detail(mu, rho0, T).value;
}

// ---------------------------------------------------------------------------

double critical_time(double mu, double R, double r_k) {
  if (!(mu > 0.0)) throw DomainError("mu must be positive");
  if (!(R > 2.0 * r_k))
    throw DomainError("T_c needs 2 r_k < R (r_k = " + fmt(r_k) + ", R = " + fmt(R) + ")");
  return std::log(R / (2.0 * r_k)) / mu;
}

HorizonSet horizons(double mu, double R, double delta, double eps, std::size_t d,
                    std::optional<double> r_k, std::optional<double> beta) {
  if (!(mu > 0.0)) throw DomainError("mu must be positive");
  if (!(R > 0.0)) throw DomainError("R must be positive");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0, 1)");
  if (!(delta >= 0.0)) throw DomainError("delta must be nonnegative");
  if (d == 0) throw DomainError("d must be positive");

  HorizonSet h;
  h.mu = mu;
  h.R = R;
  h.delta = delta;
  h.eps = eps;
  h.d = d;
  h.r_k = r_k;
  h.beta = beta;
  if (r_k) {
    try {
      h.T_c = critical_time(mu, R, *r_k);
    } catch (const DomainError& e) {
      h.T_c_error = e.what();
    }
  }
  h.T_b = std::log(R) - std::log(std::max(std::sqrt(2.0 * std::log(1.0 / eps)), 1.0));
  const double dd = static_cast<double>(d);
  h.T_OU_thm = std::max(std::log(2.0 * std::pow(dd, 0.25) / std::sqrt(eps)),
                        std::log(2.0 * R * (1.0 + 2.0 * delta) * std::sqrt(mu) / eps)) /
               mu;
  h.T_OU_prop = std::log(R) + std::log(1.0 + 2.0 * delta) + std::log(1.0 / eps);
  if (beta) {
    h.lower_envelope = (1.0 - *beta) / mu * std::log(R);
    h.upper_envelope = (1.0 + *beta) / mu * std::log(R);
  }
  return h;
}

Report validate_bridge_assumptions(double mu, double R, double delta, double eps, std::size_t d,
                                   double beta, double r_k) {
  Report rep;
  const double need_a = std::sqrt(eps / mu) * std::pow(static_cast<double>(d), 0.25);
  rep.checks.push_back({"R >= (eps/mu)^(1/2) d^(1/4)", R >= need_a, R, need_a, R - need_a, ""});
  const double rb = std::pow(R, beta);
  const double need_b = 2.0 * std::sqrt(mu) * (1.0 + 2.0 * delta) / eps;
  rep.checks.push_back(
      {"R^beta >= 2 sqrt(mu)(1+2delta)/eps", rb >= need_b, rb, need_b, rb - need_b, ""});
  rep.checks.push_back({"2 r_k <= R^beta", 2.0 * r_k <= rb, 2.0 * r_k, rb, rb - 2.0 * r_k, ""});
  return rep;
}

}  // namespace mixlab
