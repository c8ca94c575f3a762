#include "mixlab/rate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "mixlab/errors.hpp"

namespace mixlab {

namespace {

constexpr double kSmallestU = 1e-300;
// Longest stretch of log s handed to a single adaptive quadrature call.
constexpr double kLogPiece = 4.0;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

// int_{log u}^{log v} e^t / xi(e^t) dt, split into pieces of bounded length.
double log_integral(const std::function<double(double)>& xi, double log_u, double log_v) {
  using boost::math::quadrature::gauss_kronrod;
  auto f = [&xi](double t) {
    const double s = std::exp(t);
    return s / xi(s);
  };
  double total = 0.0;
  const double span = log_v - log_u;
  const auto pieces = static_cast<std::size_t>(std::max(1.0, std::ceil(span / kLogPiece)));
  const double step = span / static_cast<double>(pieces);
  for (std::size_t i = 0; i < pieces; ++i) {
    const double a = log_u + step * static_cast<double>(i);
    const double b = i + 1 == pieces ? log_v : a + step;
    total += gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-13);
  }
  return total;
}

}  // namespace

RateFunction RateFunction::linear(double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw DomainError("linear rate needs mu > 0");
  RateFunction rate;
  rate.linear_ = true;
  rate.mu_ = mu;
  return rate;
}

RateFunction RateFunction::concave(std::function<double(double)> xi, GridOptions grid) {
  if (!xi) throw StructuralError("rate function is empty");
  if (!(grid.lo > 0.0) || !(grid.hi > grid.lo) || grid.points < 3)
    throw DomainError("rate grid needs 0 < lo < hi and at least 3 points");

  std::vector<double> s(grid.points), v(grid.points);
  const double ratio = std::log(grid.hi / grid.lo) / static_cast<double>(grid.points - 1);
  for (std::size_t i = 0; i < grid.points; ++i) {
    s[i] = i + 1 == grid.points ? grid.hi : grid.lo * std::exp(ratio * static_cast<double>(i));
    v[i] = xi(s[i]);
    if (!(v[i] > 0.0) || !std::isfinite(v[i]))
      throw DomainError("rate is not positive and finite at s = " + fmt(s[i]));
    if (i > 0 && v[i] < v[i - 1])
      throw DomainError("rate is not increasing near s = " + fmt(s[i]));
  }
  double prev_slope = (v[1] - v[0]) / (s[1] - s[0]);
  for (std::size_t i = 1; i + 1 < grid.points; ++i) {
    const double slope = (v[i + 1] - v[i]) / (s[i + 1] - s[i]);
    if (slope - prev_slope > 1e-8)
      throw DomainError("rate is not concave near s = " + fmt(s[i]));
    prev_slope = slope;
  }

  RateFunction rate;
  rate.linear_ = false;
  rate.mu_ = std::numeric_limits<double>::quiet_NaN();
  rate.xi_ = std::make_shared<const std::function<double(double)>>(std::move(xi));
  return rate;
}

double RateFunction::xi(double s) const { return linear_ ? mu_ * s : (*xi_)(s); }

double RateFunction::integral(double u, double v) const {
  if (!(u > 0.0)) throw DomainError("Xi(u, v) needs u > 0, got u = " + fmt(u));
  if (!(v >= u)) throw DomainError("Xi(u, v) needs v >= u");
  if (u == v) return 0.0;
  if (linear_) return std::log(v / u) / mu_;
  return log_integral(*xi_, std::log(u), std::log(v));
}

double RateFunction::flow(double u, double y) const {
  if (!(u > 0.0)) throw DomainError("gamma(u, y) needs u > 0, got u = " + fmt(u));
  if (!(y >= 0.0)) throw DomainError("gamma(u, y) needs y >= 0, got y = " + fmt(y));
  if (y == 0.0) return u;
  if (linear_) return u * std::exp(mu_ * y);

  const auto& f = *xi_;
  const double log_u = std::log(u);
  const double log_cap = std::log(kBracketCeiling);
  double lo = log_u;
  double base = 0.0;  // Xi(u, e^lo)
  double width = 1.0;
  double hi = lo + width;
  double at_hi = log_integral(f, lo, hi);
  while (base + at_hi < y) {
    if (hi >= log_cap)
      throw DomainError("gamma(u, y) needs y < Xi(u, inf); Xi(u, " + fmt(kBracketCeiling) +
                        ") = " + fmt(base + at_hi) + " is the supremum reached");
    base += at_hi;
    lo = hi;
    width *= 2.0;
    hi = std::min(lo + width, log_cap);
    at_hi = log_integral(f, lo, hi);
  }

  const double lo_fixed = lo;
  auto g = [&](double t) { return base + log_integral(f, lo_fixed, t) - y; };
  std::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      g, lo, hi, base - y, base + at_hi - y, boost::math::tools::eps_tolerance<double>(52), iters);
  return std::exp(0.5 * (a + b));
}

double RateFunction::flow_preimage(double w, double T) const {
  if (!(T >= 0.0)) throw DomainError("eta_T needs T >= 0");
  if (!(w > 0.0)) throw DomainError("eta_T(w) needs w > 0, gamma(0, T) = 0 is excluded");
  if (linear_) {
    const double upper = std::exp(mu_ * T);
    if (w > upper)
      throw DomainError("eta_T(w) needs w <= gamma(1, T) = " + fmt(upper) + ", got " + fmt(w));
    return w * std::exp(-mu_ * T);
  }
  if (T == 0.0) {
    if (w > 1.0) throw DomainError("eta_0(w) needs w <= 1");
    return w;
  }
  if (w > 1.0 && integral(1.0, w) > T)
    throw DomainError("eta_T(w) needs w <= gamma(1, T)");
  const double reach = integral(kSmallestU, w);
  if (reach < T)
    throw DomainError("eta_T(w) needs gamma(0, T) <= w; Xi(0, w) = " + fmt(reach) + " < T");

  const auto& f = *xi_;
  const double log_w = std::log(w);
  auto g = [&](double s) { return log_integral(f, s, log_w) - T; };
  const double lo = std::log(kSmallestU);
  const double hi = std::min(log_w, 0.0);
  const double g_hi = g(hi);
  if (g_hi >= 0.0) return std::exp(hi);
  std::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      g, lo, hi, reach - T, g_hi, boost::math::tools::eps_tolerance<double>(52), iters);
  return std::exp(0.5 * (a + b));
}

double RateFunction::markov_threshold(double r, double T) const {
  if (!(r >= 1.0)) throw DomainError("C_{r,T} needs r >= 1, got r = " + fmt(r));
  return flow_preimage(1.0 / r, T);
}

}  // namespace mixlab
