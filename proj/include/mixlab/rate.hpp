#pragma once

#include <cstddef>
#include <functional>
#include <memory>

namespace mixlab {

/// Diagnostic grid for validating a user-supplied rate.
struct RateGrid {
  double lo = 1e-6;
  double hi = 1e6;
  std::size_t points = 1000;
};

/// A positive, increasing, concave rate xi on (0, inf) and the calculus built on it:
///   Xi(u, v)  = int_u^v ds / xi(s)
///   gamma(u, y) = the v with Xi(u, v) = y
///   eta_T(w)  = the u with gamma(u, T) = w
///   C_{r,T}   = eta_T(1/r)
///
/// Linear(mu) has closed forms for all four. For a general xi, Xi uses adaptive
/// Gauss-Kronrod quadrature in log s and the inverses use bracketed root finding.
/// A user-supplied xi may be called from several threads at once.
class RateFunction {
 public:
  using GridOptions = RateGrid;

  static RateFunction linear(double mu);

  /// Checks positivity, monotonicity and concavity (slope increases of at most
  /// 1e-8) on `points` log-spaced abscissae in [lo, hi]. Throws DomainError.
  static RateFunction concave(std::function<double(double)> xi, GridOptions grid = {});
  static RateFunction concave(std::function<double(double)> xi, double lo, double hi,
                              std::size_t points = 1000) {
    return concave(std::move(xi), GridOptions{lo, hi, points});
  }

  bool is_linear() const { return linear_; }
  /// Slope of a linear rate; NaN otherwise.
  double mu() const { return mu_; }

  double xi(double s) const;

  /// Xi(u, v) for 0 < u <= v; DomainError otherwise.
  double integral(double u, double v) const;
  /// gamma(u, y) for u > 0, y >= 0.
  double flow(double u, double y) const;
  /// eta_T(w): requires gamma(0+, T) <= w <= gamma(1, T).
  double flow_preimage(double w, double T) const;
  /// C_{r,T} = eta_T(1/r) for r >= 1, T >= 0.
  double markov_threshold(double r, double T) const;

  /// Largest v used when bracketing gamma; Xi(u, v) beyond it is treated as out of range.
  static constexpr double kBracketCeiling = 1e150;

 private:
  RateFunction() = default;

  bool linear_ = true;
  double mu_ = 0.0;
  std::shared_ptr<const std::function<double(double)>> xi_;
};

}  // namespace mixlab
