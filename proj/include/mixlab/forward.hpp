#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>

#include "mixlab/measures.hpp"
#include "mixlab/projector.hpp"

namespace mixlab {

/// dX = -mu X dt + sqrt(2) dB. Invariant law N(0, I / mu).
struct OUProcess {
  double mu = 1.0;
  std::size_t d = 1;
};

/// Tempered Langevin diffusion for the spherical law exp(-H(|x|)):
///   b(x) = -H^{2l-1} (H - 2l) H'(|x|) x / |x|,   sigma(x) = sqrt(2) H^l I.
/// `h_floor` bounds H from below in the drift only.
struct TemperedLangevin {
  RadialProfile profile;
  double ell = 0.0;
  std::size_t d = 1;
  double h_floor = 1e-8;
};

struct IntegratorConfig {
  double step = 1e-3;
};

SphericalMeasure stationary_measure(const OUProcess& proc);
SphericalMeasure stationary_measure(const TemperedLangevin& tl);

// --- exact OU transitions ---------------------------------------------------

/// n independent draws of X_T given X_0 = x0:
///   e^{-mu T} x0 + sqrt((1 - e^{-2 mu T}) / mu) Z.
Points ou_transition_sample(const OUProcess& proc, const Vector& x0, double T, std::uint64_t seed,
                            std::size_t n);

/// One draw of X_T for every column of `x0s`.
Points ou_evolve(const OUProcess& proc, const Points& x0s, double T, std::uint64_t seed);

// --- tempered Langevin coefficients -----------------------------------------

Vector drift(const OUProcess& proc, const Vector& x);
Vector drift(const TemperedLangevin& tl, const Vector& x);

/// sqrt(2) H(|x|)^l. No floor: vanishes at the origin when l > 0.
double dispersion_scalar(const TemperedLangevin& tl, const Vector& x);

/// Radial part of the drift, phi(r) = H^{2l-1}(H - 2l) H'(r), without the floor.
double radial_drift(const TemperedLangevin& tl, double r);

// --- Euler-Maruyama ---------------------------------------------------------

inline constexpr double kDivergenceThreshold = 1e12;

struct PathOptions {
  bool record = false;
  /// Keep every n-th state when recording (the initial state is always kept).
  std::size_t record_every = 1;
};

struct PathResult {
  Vector endpoint;
  std::optional<Points> path;
  std::size_t steps = 0;
};

/// Euler-Maruyama on [0, T] with step h; the last step is shortened to
/// T - floor(T/h) h. Throws DivergenceError once |x| exceeds 1e12.
PathResult simulate_path(const TemperedLangevin& tl, const Vector& x0, double T,
                         const IntegratorConfig& cfg, std::uint64_t seed,
                         const PathOptions& opts = {});

/// n independent endpoints; path i uses substream i, so column 0 equals
/// simulate_path(..., seed).endpoint.
Points simulate_endpoints(const TemperedLangevin& tl, const Vector& x0, double T,
                          const IntegratorConfig& cfg, std::size_t n, std::uint64_t seed);

/// Draws n samples of X_t started from x0.
using EndpointSampler =
    std::function<Points(const Vector& x0, double t, std::size_t n, std::uint64_t seed)>;

EndpointSampler exact_endpoints(const OUProcess& proc);
EndpointSampler euler_endpoints(const TemperedLangevin& tl, IntegratorConfig cfg);

// --- generic coefficient oracle --------------------------------------------

/// Drift b and dispersion a = sigma sigma^T of a diffusion, seen only through
/// evaluation. `apply_dispersion(x, v)` returns a(x) v.
struct Diffusion {
  std::size_t d = 0;
  std::function<Vector(const Vector&)> drift;
  std::function<Vector(const Vector&, const Vector&)> apply_dispersion;
};

Diffusion as_diffusion(const OUProcess& proc);
Diffusion as_diffusion(const TemperedLangevin& tl);

// --- structural conditions --------------------------------------------------

struct LinearGrowthReport {
  double max_ratio = 0.0;
  Vector worst_point;
  Vector worst_direction;
  std::size_t evaluated = 0;
  bool passed = false;
};

/// max |<b(x), u>| / (mu |<x, u>|) over envelope points x ~ N(0, scale^2 I) and
/// uniform directions u; pairs with |<x, u>| < 1e-12 are skipped.
/// Passes iff the maximum is at most 1 + 1e-9.
LinearGrowthReport check_linear_growth(const Diffusion& proc, double mu, std::size_t n_points,
                                       std::uint64_t seed, double envelope_scale);

struct LGReport {
  double max_excess = 0.0;  // max of lhs - mu r - tol(r)
  double worst_r = 0.0;
  double worst_lhs = 0.0;
  bool passed = false;
};

/// H^{2l-1}(H - 2l) H' - mu r on a geometric grid of n_grid radii spanning
/// [r_min, r_max] (default r_min = 1e-6 r_max); passes iff every value is
/// <= 1e-9 (1 + mu r).
LGReport check_LG_numeric(const TemperedLangevin& tl, double mu, double r_max, std::size_t n_grid,
                          std::optional<double> r_min = std::nullopt);

/// Largest a in the sufficient condition l <= 1/p - 1/2, a <= (mu/p)^{1/(2l+1)} - l,
/// which guarantees LG_mu for H = a r^p on [1, inf). Below r = 1 a global power
/// profile can still violate it (e.g. l = 0, p < 2 near the origin).
double lg_max_scale(double mu, double p, double ell);

struct SigmaBoundReport {
  double max_violation = 0.0;  // max of (rhs - lhs) / max(|lhs|, |rhs|)
  Vector worst_point;
  std::size_t evaluated = 0;
  bool passed = false;
};

/// sum_j <a y_j, y_j> >= 3 <a G^, G^> with G^ = G / sqrt(1 + |G|^2), at envelope points.
SigmaBoundReport check_sigma_bound(const Diffusion& proc, const SubspaceProjector& proj,
                                   std::size_t n_points, std::uint64_t seed,
                                   double envelope_scale);
/// Validates orthonormality of `basis` (d x k) first; throws StructuralError.
SigmaBoundReport check_sigma_bound(const Diffusion& proc, const Matrix& basis,
                                   std::size_t n_points, std::uint64_t seed,
                                   double envelope_scale);

/// N(0, scale^2 I) points used by the structural checks.
Points envelope_points(std::size_t d, std::size_t n, std::uint64_t seed, double scale);

// --- ergodicity -------------------------------------------------------------

enum class ErgodicityRegime { Subexponential, Exponential, Uniform };

struct Ergodicity {
  ErgodicityRegime regime;
  /// Stretched-exponential exponent p / (2 - p - 2 l p); zero otherwise.
  double exponent = 0.0;
};

/// Regime of the tempered Langevin diffusion whose invariant law has tails
/// exp(-c r^p). Interval endpoints are closed as in the classification:
///   p < 1:  l < 1/p - 1 subexponential, l <= 1/p - 1/2 exponential, else uniform
///   1 <= p <= 2: l <= 1/p - 1/2 exponential, else uniform
///   p > 2:  uniform.
Ergodicity classify_ergodicity(double p, double ell);

const char* to_string(ErgodicityRegime regime);

}  // namespace mixlab
