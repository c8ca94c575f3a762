#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "mixlab/forward.hpp"
#include "mixlab/measures.hpp"
#include "mixlab/projector.hpp"
#include "mixlab/rate.hpp"
#include "mixlab/report.hpp"

namespace mixlab {

// --- generator of the Lyapunov function ------------------------------------

struct GeneratorTerms {
  double H = 0.0;
  double drift = 0.0;      // <b, grad H>
  double diffusion = 0.0;  // 1/2 Tr(a Hess H)
  double value = 0.0;      // drift + diffusion
};

/// A H_Y(x) from the closed forms grad H = -H^3 G and
/// Hess H = H^3 (3 H^2 G G^T - sum_j y_j y_j^T).
GeneratorTerms generator_terms(const Diffusion& proc, const SubspaceProjector& proj,
                               const Vector& x);
double generator_apply_H(const Diffusion& proc, const SubspaceProjector& proj, const Vector& x);

struct GeneratorBoundReport {
  double max_excess = 0.0;  // max of A H - mu H
  Vector argmax;
  std::size_t evaluated = 0;
  bool passed = false;
};

/// Evaluates A H_Y - mu H_Y at n_points envelope points N(0, scale^2 I);
/// passes iff the maximum is at most 1e-9.
GeneratorBoundReport check_generator_bound(const Diffusion& proc, const SubspaceProjector& proj,
                                           double mu, std::size_t n_points, std::uint64_t seed,
                                           double envelope_scale);

// --- Markov TV lower bound --------------------------------------------------

/// pi in closed form for N(0, I/mu).
struct GaussianPi {
  double mu = 1.0;
};
/// Monte Carlo over exact draws from a spherical law.
struct SphericalPi {
  SphericalMeasure pi;
  std::size_t n = 100000;
  std::uint64_t seed = 0;
};
/// Monte Carlo over caller-supplied draws from pi (d x n).
struct PiSamples {
  Points samples;
};
using PiTermSource = std::variant<GaussianPi, SphericalPi, PiSamples>;

struct LowerBoundReport {
  double T = 0.0;
  double r = 0.0;
  double threshold = 0.0;      // C_{r,T}
  double pi_term = 0.0;        // pi(H >= 1/r)
  double rho_tail_term = 0.0;  // rho0(H >= C)
  double integral_term = 0.0;  // E_rho0[r gamma(H, T) 1{H < C}]
  double total = 0.0;          // pi_term - rho_tail_term - integral_term
  double pi_se = 0.0;
  double rho_tail_se = 0.0;
  double integral_se = 0.0;
  /// Standard error of `total`; the two rho0 terms share samples.
  double total_se = 0.0;
  std::size_t n = 0;
};

struct PiTermEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};
PiTermEstimate pi_term(const PiTermSource& source, const SubspaceProjector& proj, double r);

/// Lower bound on || P_rho0(X_T in .) - pi ||_TV from the rate of the Lyapunov
/// function. rho0 enters only through the Lyapunov values of its samples.
LowerBoundReport tv_lower_bound(const PiTermSource& pi, const Points& rho0_samples,
                                const SubspaceProjector& proj, const RateFunction& rate,
                                double r, double T);
/// Same with n fresh samples from the data law.
LowerBoundReport tv_lower_bound(const PiTermSource& pi, const MultiModalData& rho0,
                                const SubspaceProjector& proj, const RateFunction& rate,
                                double r, double T, std::size_t n, std::uint64_t seed);

struct ExpectedHReport {
  double estimate = 0.0;
  double standard_error = 0.0;
  double bound = 0.0;  // gamma(H(x), t)
  bool passed = false;
};

/// Monte-Carlo E_x[H_Y(X_t)] against gamma(H_Y(x), t); passes iff the
/// estimate is at most bound + 3 standard errors.
ExpectedHReport expected_H_check(const EndpointSampler& sampler, const SubspaceProjector& proj,
                                 const RateFunction& rate, const Vector& x, double t,
                                 std::size_t n, std::uint64_t seed);

// --- Gaussian KL and the OU upper bound ------------------------------------

/// KL(N(m1, S1) || N(m2, S2)). Throws DomainError unless both covariances
/// are symmetric positive definite.
double kl_gaussians(const Vector& m1, const Matrix& S1, const Vector& m2, const Matrix& S2);

struct UpperBoundReport {
  double value = 0.0;
  double kl_bar = 0.0;
  double mass_inside = 0.0;  // rho0(B(0, R(1 + 2 delta)))
  double mass_se = 0.0;
};

/// rho0(B) sqrt(KLbar / 2) + rho0(B^c), capped at 1, with B = B(0, R(1 + 2 delta)) and
/// KLbar = (mu/2) e^{-2 mu T} R^2 (1 + 2 delta)^2 + (d/2) e^{-4 mu T}.
/// Requires mu T > log(2) / 2.
UpperBoundReport ou_tv_upper_bound_detail(double mu, const MultiModalData& rho0, double T);
double ou_tv_upper_bound(double mu, const MultiModalData& rho0, double T);

// --- horizons ---------------------------------------------------------------

/// (1/mu) log(R / (2 r_k)); DomainError unless R > 2 r_k.
double critical_time(double mu, double R, double r_k);

struct HorizonSet {
  double mu = 0.0, R = 0.0, delta = 0.0, eps = 0.0;
  std::size_t d = 0;
  std::optional<double> r_k, beta;

  std::optional<double> T_c;
  std::string T_c_error;  // why T_c is missing, if it is
  double T_b = 0.0;
  double T_OU_thm = 0.0;
  double T_OU_prop = 0.0;
  /// (1 -+ beta) / mu log R.
  std::optional<double> lower_envelope, upper_envelope;
};

HorizonSet horizons(double mu, double R, double delta, double eps, std::size_t d,
                    std::optional<double> r_k = std::nullopt,
                    std::optional<double> beta = std::nullopt);

/// R >= (eps/mu)^{1/2} d^{1/4}, R^beta >= 2 sqrt(mu) (1 + 2 delta) / eps and 2 r_k <= R^beta.
Report validate_bridge_assumptions(double mu, double R, double delta, double eps, std::size_t d,
                                   double beta, double r_k);

}  // namespace mixlab
