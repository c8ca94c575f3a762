#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "mixlab/bounds.hpp"
#include "mixlab/errors.hpp"
#include "mixlab/forward.hpp"
#include "mixlab/measures.hpp"
#include "mixlab/parallel.hpp"
#include "mixlab/random.hpp"
#include "mixlab/stats.hpp"

namespace mixlab::cli {

namespace {

constexpr double kInf = 1e308;

// Independent purposes drawn from one master seed.
enum Purpose : std::uint64_t {
  kData = 1,
  kQuantile = 2,
  kPi = 3,
  kValidate = 4,
  kEnvelope = 5,
  kTimeBase = 1000,
};

std::uint64_t sub(const RunContext& ctx, std::uint64_t purpose) {
  return derive_seed(ctx.seed, purpose);
}

KeySpec integer(std::string key, std::string fallback, double min, std::string doc) {
  return {std::move(key), ValueKind::Integer, std::move(fallback), min, kInf, {}, std::move(doc)};
}
KeySpec real(std::string key, std::string fallback, double min, double max, std::string doc) {
  return {std::move(key), ValueKind::Real, std::move(fallback), min, max, {}, std::move(doc)};
}
KeySpec real_auto(std::string key, double min, double max, std::string doc) {
  return {std::move(key), ValueKind::RealOrAuto, "auto", min, max, {}, std::move(doc)};
}
KeySpec real_list(std::string key, std::string fallback, double min, double max, std::string doc) {
  return {std::move(key), ValueKind::RealList, std::move(fallback), min, max, {}, std::move(doc)};
}
KeySpec choice(std::string key, std::vector<std::string> options, std::string doc) {
  std::string fallback = options.front();
  return {std::move(key), ValueKind::Choice, std::move(fallback), 0, 0, std::move(options),
          std::move(doc)};
}

std::vector<KeySpec> data_keys(const std::string& R, const std::string& delta,
                               const std::string& eps) {
  return {
      integer("d", "16", 1, "ambient dimension"),
      real("R", R, 0.0, kInf, "data radius"),
      real("delta", delta, 1e-12, 1.0 - 1e-12, "relative mode radius"),
      real("eps", eps, 1e-12, 1.0 - 1e-12, "target accuracy"),
      real("b_rho", "0.5", 1e-12, 1.0, "weight of the furthest mode"),
      real_auto("bulk_scale", 0.0, kInf, "bulk standard deviation (auto: R / (4 sqrt d))"),
      choice("mode_shape", {"uniform-ball", "truncated-gaussian"}, "shape of the furthest mode"),
  };
}

MultiModalData data_from(const Config& cfg) {
  const double bulk = cfg.real_or_auto("bulk_scale").value_or(-1.0);
  auto spec = MultiModalData::canonical(cfg.count("d"), cfg.real("R"), cfg.real("delta"),
                                        cfg.real("eps"), cfg.real("b_rho"), bulk);
  spec.modes[0].shape = cfg.raw("mode_shape") == "truncated-gaussian"
                            ? ModeShape::TruncatedGaussian
                            : ModeShape::UniformBall;
  return spec;
}

std::vector<double> merge_times(std::vector<double> grid, std::initializer_list<double> extra) {
  for (double t : extra) grid.push_back(t);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

std::size_t index_of(const std::vector<double>& xs, double x) {
  return static_cast<std::size_t>(std::find(xs.begin(), xs.end(), x) - xs.begin());
}

Check check(std::string name, bool passed, double measured, double threshold, double margin,
            std::string detail = {}) {
  return Check{std::move(name), passed, measured, threshold, margin, std::move(detail)};
}

std::string check_line(const Check& c) {
  std::ostringstream s;
  s << (c.passed ? "PASS " : "FAIL ") << c.name << ": measured " << num(c.measured)
    << ", threshold " << num(c.threshold) << ", margin " << num(c.margin);
  if (!c.detail.empty()) s << " (" << c.detail << ")";
  return s.str();
}

SphericalMeasure tempered_pi(const Config& cfg, double& a_out) {
  const double mu = cfg.real("mu");
  const double p = cfg.real("p");
  const double ell = cfg.real("ell");
  a_out = cfg.is_auto("a") ? lg_max_scale(mu, p, ell) : cfg.real("a");
  const auto profile = p == 2.0 ? RadialProfile::quadratic(a_out) : RadialProfile::power_tail(a_out, p);
  return {cfg.count("d"), profile};
}

std::vector<KeySpec> process_keys() {
  return {
      choice("process", {"ou", "tempered"}, "forward process"),
      real("mu", "1", 1e-12, kInf, "OU rate, or the LG rate for the tempered process"),
      real("p", "1", 1e-12, 2.0, "tail exponent of the tempered invariant law"),
      real_auto("a", 1e-12, kInf, "profile scale (auto: closed-form LG boundary)"),
      real("ell", "0.4", 0.0, kInf, "temperature"),
  };
}

}  // namespace

// ---------------------------------------------------------------------------
// cutoff

Schema cutoff_schema() {
  Schema s = data_keys("50", "0.02", "0.05");
  s.push_back(real("mu", "1", 1e-12, kInf, "OU rate"));
  s.push_back(integer("n", "100000", 1, "number of trajectories"));
  s.push_back(real_list("times", "auto", 0.0, kInf,
                        "time grid (auto: 13 points on [0, 1.5 T_OU]); T_b and T_OU always added"));
  s.push_back(real_auto("bins", 2.0, kInf, "histogram bins (auto: ceil(sqrt(n)))"));
  return s;
}

CommandResult run_cutoff(const Config& cfg, const RunContext& ctx) {
  const auto spec = data_from(cfg);
  const double mu = cfg.real("mu");
  const double eps = spec.eps;
  const double R = spec.R;
  const double need = std::max(std::sqrt(eps) * std::pow(static_cast<double>(spec.d), 0.25),
                               std::sqrt(2.0 * std::log(1.0 / eps)));
  if (R < need)
    throw ConfigError("cut-off hypothesis R >= max{eps^(1/2) d^(1/4), sqrt(2 log(1/eps))} = " +
                      num(need) + " violated by R = " + num(R));

  CommandResult res;
  const Report data_report = validate_data_spec(spec, 200000, sub(ctx, kValidate));
  for (const auto& c : data_report.checks) res.checks.checks.push_back(c);

  const HorizonSet hz = horizons(mu, R, spec.delta, eps, spec.d);
  const auto given = cfg.list("times");
  const std::vector<double> times =
      merge_times(given ? *given : linspace(0.0, 1.5 * hz.T_OU_prop, 13), {hz.T_b, hz.T_OU_prop});
  const std::optional<std::size_t> bins =
      cfg.is_auto("bins") ? std::nullopt : std::optional<std::size_t>(cfg.count("bins"));

  const std::size_t n = cfg.count("n");
  const Points x0 = sample_data(spec, n, sub(ctx, kData));
  const OUProcess ou{mu, spec.d};
  const Vector dir = spec.designated_direction();
  const double sd = 1.0 / std::sqrt(mu);
  const double floor_value = (spec.designated_mode().weight - eps) / 2.0;

  CsvTable table({"t", "tv", "tv_se", "bins", "T_b", "T_OU_prop", "floor", "eps"});
  std::vector<TVEstimate> tvs;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const Points xs = ou_evolve(ou, x0, times[i], sub(ctx, kTimeBase + i));
    const Eigen::VectorXd proj = xs.transpose() * dir;
    const Interval range{std::min(-6.0 * sd, proj.minCoeff()), std::max(6.0 * sd, proj.maxCoeff())};
    tvs.push_back(projected_tv_vs_gaussian(xs, dir, mu, bins, range));
    const auto& tv = tvs.back();
    table.add_row({num(times[i]), num(tv.value), num(tv.standard_error),
                   std::to_string(tv.bins), num(hz.T_b), num(hz.T_OU_prop), num(floor_value),
                   num(eps)});
  }

  const auto& at_b = tvs[index_of(times, hz.T_b)];
  const auto& at_ou = tvs[index_of(times, hz.T_OU_prop)];
  const double lo = floor_value - 3.0 * at_b.standard_error;
  res.checks.checks.push_back(check("TV(T_b) >= (b_rho-eps)/2 - 3se", at_b.value >= lo,
                                    at_b.value, lo, at_b.value - lo));
  const double hi = eps + 3.0 * at_ou.standard_error;
  res.checks.checks.push_back(check("TV(T_OU) <= eps + 3se", at_ou.value <= hi, at_ou.value, hi,
                                    hi - at_ou.value));

  res.lines.push_back("T_b = " + num(hz.T_b) + ", T_OU = " + num(hz.T_OU_prop));
  res.tables.emplace_back("cutoff.csv", std::move(table));
  if (ctx.svg) {
    Chart chart{"Projected TV to the invariant law", "t", "TV", times, {}, {}};
    for (const auto& tv : tvs) chart.ys.push_back(tv.value);
    chart.references = {{"(b_rho - eps)/2", floor_value}, {"eps", eps}};
    res.charts.emplace_back("cutoff.svg", render_svg(chart));
  }
  return res;
}

// ---------------------------------------------------------------------------
// lowerbound

Schema lowerbound_schema() {
  Schema s = process_keys();
  for (auto& k : data_keys("200", "0.02", "0.05")) s.push_back(std::move(k));
  s.push_back(integer("k", "3", 3, "rank of the projection"));
  s.push_back(real_auto("r_k", 1.0, kInf, "quantile level (auto: Monte-Carlo estimate)"));
  s.push_back(integer("r_k_samples", "300000", 1, "samples for the r_k estimate"));
  s.push_back(integer("n", "100000", 1, "samples from rho0"));
  s.push_back(integer("pi_samples", "100000", 1, "samples for a Monte-Carlo pi term"));
  s.push_back(real_list("times", "auto", 0.0, kInf, "time grid (auto: 9 points on [0, 2 T_c])"));
  s.push_back(choice("rho0", {"data", "pi"}, "initial law"));
  return s;
}

CommandResult run_lowerbound(const Config& cfg, const RunContext& ctx) {
  const auto spec = data_from(cfg);
  const bool is_ou = cfg.raw("process") == "ou";
  const bool from_pi = cfg.raw("rho0") == "pi";
  const double mu = cfg.real("mu");
  const std::size_t k = cfg.count("k");
  if (k > spec.d) throw ConfigError("projection rank k exceeds d");

  CommandResult res;
  SphericalMeasure pi{spec.d, RadialProfile::quadratic(mu / 2.0)};
  PiTermSource pi_source = GaussianPi{mu};
  if (!is_ou) {
    double a = 0.0;
    pi = tempered_pi(cfg, a);
    pi_source = SphericalPi{pi, cfg.count("pi_samples"), sub(ctx, kPi)};
    const TemperedLangevin tl{pi.profile, cfg.real("ell"), spec.d};
    const LGReport lg = check_LG_numeric(tl, mu, 10.0 * spec.outer_radius(), 2000);
    res.checks.checks.push_back(check("LG_mu", lg.passed, lg.max_excess, 0.0, -lg.max_excess,
                                      "worst r = " + num(lg.worst_r)));
    res.lines.push_back("profile scale a = " + num(a));
  }

  double r_k = 0.0;
  if (auto given = cfg.real_or_auto("r_k")) {
    r_k = *given;
  } else {
    r_k = quantile_rk(pi, k, spec.eps, cfg.count("r_k_samples"), sub(ctx, kQuantile)).r_k;
  }
  double T_c = 0.0;
  try {
    T_c = critical_time(mu, spec.R, r_k);
  } catch (const DomainError&) {
    throw ConfigError("lower-bound hypothesis 2 r_k <= R violated: r_k = " + num(r_k) +
                      ", R = " + num(spec.R));
  }

  const auto proj = SubspaceProjector::aligned_with(spec.designated_direction(), k);
  const RateFunction rate = RateFunction::linear(mu);
  const std::size_t n = cfg.count("n");
  Points rho0;
  if (from_pi) {
    rho0 = sample_spherical(pi, n, sub(ctx, kData));
  } else {
    rho0 = sample_data(spec, n, sub(ctx, kData));
    const Report data_report = validate_data_spec(spec, 200000, sub(ctx, kValidate));
    for (const auto& c : data_report.checks) res.checks.checks.push_back(c);
  }

  const auto given = cfg.list("times");
  std::vector<double> times = given ? *given : linspace(0.0, 2.0 * T_c, 9);
  times.push_back(T_c);

  const double floor_value = (spec.designated_mode().weight - spec.eps) / 2.0;
  CsvTable table({"t", "r_k", "C", "pi_term", "pi_se", "rho_tail_term", "rho_tail_se",
                  "integral_term", "integral_se", "total", "total_se", "upper_bound", "floor"});
  std::vector<LowerBoundReport> reports;
  double worst_excess = -kInf;
  double worst_t = 0.0;
  for (double t : times) {
    reports.push_back(tv_lower_bound(pi_source, rho0, proj, rate, r_k, t));
    const auto& lb = reports.back();
    double upper = std::nan("");
    if (is_ou && !from_pi && mu * t > 0.5 * std::log(2.0)) upper = ou_tv_upper_bound(mu, spec, t);
    table.add_row({num(t), num(r_k), num(lb.threshold), num(lb.pi_term), num(lb.pi_se),
                   num(lb.rho_tail_term), num(lb.rho_tail_se), num(lb.integral_term),
                   num(lb.integral_se), num(lb.total), num(lb.total_se), num(upper),
                   num(floor_value)});
    const double excess = lb.total - 3.0 * lb.total_se;
    if (excess > worst_excess) {
      worst_excess = excess;
      worst_t = t;
    }
  }

  const auto& final_row = reports.back();
  if (from_pi) {
    res.checks.checks.push_back(check("total <= 3se at every t", worst_excess <= 0.0,
                                      worst_excess, 0.0, -worst_excess,
                                      "largest total - 3se at t = " + num(worst_t)));
  } else {
    const double lo = floor_value - 3.0 * final_row.total_se;
    res.checks.checks.push_back(check("total(T_c) >= (b_rho-eps)/2 - 3se", final_row.total >= lo,
                                      final_row.total, lo, final_row.total - lo));
  }
  res.lines.push_back("r_k = " + num(r_k) + ", T_c = " + num(T_c) + ", total(T_c) = " +
                      num(final_row.total) + " +- " + num(final_row.total_se));
  res.tables.emplace_back("lowerbound.csv", std::move(table));
  if (ctx.svg) {
    Chart chart{"Lower bound on the TV distance", "t", "total", {}, {}, {}};
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
      chart.xs.push_back(times[i]);
      chart.ys.push_back(reports[i].total);
    }
    chart.references = {{"(b_rho - eps)/2", floor_value}};
    res.charts.emplace_back("lowerbound.svg", render_svg(chart));
  }
  return res;
}

// ---------------------------------------------------------------------------
// quantile-table

Schema quantile_table_schema() {
  return {
      real_list("p_list", "1.8,1.6,1.4,1.2,1", 1e-12, 2.0, "tail exponents (rows)"),
      real_list("d_list", "3,30,300,3000", 1.0, kInf, "dimensions (columns)"),
      real("a", "1", 1e-12, kInf, "profile scale"),
      real("eps", "0.1", 1e-12, 1.0 - 1e-12, "level parameter"),
      integer("n", "300000", 1, "samples per cell"),
      integer("k", "3", 3, "projection rank"),
  };
}

CommandResult run_quantile_table(const Config& cfg, const RunContext& ctx) {
  const auto ps = *cfg.list("p_list");
  const auto ds = *cfg.list("d_list");
  const double eps = cfg.real("eps");
  const std::size_t n = cfg.count("n");
  const std::size_t k = cfg.count("k");
  for (double d : ds)
    if (d != std::floor(d) || d < static_cast<double>(k))
      throw ConfigError("d_list entries must be integers >= k");

  CsvTable cells({"p", "d", "k", "r_k", "r_k_se", "ball_radius", "ball_radius_se"});
  std::vector<std::string> grid_header{"p"};
  for (double d : ds) grid_header.push_back("d=" + num(d));
  CsvTable grid(grid_header);

  std::size_t cell = 0;
  for (double p : ps) {
    std::vector<std::string> row{num(p)};
    const auto profile = p == 2.0 ? RadialProfile::quadratic(cfg.real("a"))
                                  : RadialProfile::power_tail(cfg.real("a"), p);
    for (double d : ds) {
      const SphericalMeasure pi{static_cast<std::size_t>(d), profile};
      const auto q = quantile_rk(pi, k, eps, n, derive_seed(sub(ctx, kQuantile), cell++));
      cells.add_row({num(p), num(d), std::to_string(k), num(q.r_k), num(q.r_k_se),
                     num(q.ball_radius), num(q.ball_radius_se)});
      row.push_back(num(q.ball_radius));
    }
    grid.add_row(std::move(row));
  }

  CommandResult res;
  res.lines.push_back("ball radius q of the (1 - eps/2) level set of the rank-" +
                      std::to_string(k) + " projection; r_k = sqrt(1 + q^2)");
  res.tables.emplace_back("quantile_table.csv", std::move(cells));
  res.tables.emplace_back("quantile_table_grid.csv", std::move(grid));
  return res;
}

// ---------------------------------------------------------------------------
// ks-sweep

Schema ks_sweep_schema() {
  return {
      integer("d", "1024", 2, "dimension (number of KS samples per draw)"),
      real("R", "255", 0.0, kInf, "distance of the start point (0: start from the invariant law)"),
      real("mu", "1", 1e-12, kInf, "OU rate"),
      real("eps", "0.05", 1e-12, 1.0 - 1e-12, "accuracy used in the horizons"),
      real("delta", "0.01", 0.0, 1.0, "relative mode radius used in the horizons"),
      real_list("times", "auto", 0.0, kInf, "time grid (auto: 0, T_b/2, T_b, T_OU)"),
      integer("reps", "20", 1, "independent repetitions per time"),
  };
}

CommandResult run_ks_sweep(const Config& cfg, const RunContext& ctx) {
  const std::size_t d = cfg.count("d");
  const double R = cfg.real("R");
  const double mu = cfg.real("mu");
  const std::size_t reps = cfg.count("reps");
  const OUProcess ou{mu, d};

  double T_b = 0.0, T_ou = 0.0;
  if (R > 0.0) {
    const HorizonSet hz = horizons(mu, R, cfg.real("delta"), cfg.real("eps"), d);
    T_b = std::max(0.0, hz.T_b);
    T_ou = std::max(0.0, hz.T_OU_prop);
  }
  const auto given = cfg.list("times");
  const bool auto_grid = !given.has_value();
  if (auto_grid && !(R > 1.0)) throw ConfigError("an automatic time grid needs R > 1");
  const std::vector<double> times = auto_grid ? std::vector<double>{0.0, T_b / 2.0, T_b, T_ou}
                                              : *given;

  const Vector x0 = Vector::Constant(static_cast<Eigen::Index>(d), R / std::sqrt(static_cast<double>(d)));
  EndpointSampler sampler = exact_endpoints(ou);
  if (R == 0.0) {
    const SphericalMeasure pi = stationary_measure(ou);
    sampler = [ou, pi](const Vector&, double t, std::size_t n, std::uint64_t seed) {
      return ou_evolve(ou, sample_spherical(pi, n, seed), t, derive_seed(seed, 1));
    };
  }
  const auto rows = ks_sweep(sampler, x0, mu, times, reps, sub(ctx, kData));

  CsvTable table({"t", "rep", "statistic", "p_value", "std_statistic", "std_p_value"});
  for (const auto& r : rows)
    table.add_row({num(r.t), std::to_string(r.rep), num(r.raw.statistic), num(r.raw.p_value),
                   num(r.standardized.statistic), num(r.standardized.p_value)});
  std::vector<double> medians;
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    std::vector<double> s, p, ss, sp;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const auto& r = rows[ti * reps + rep];
      s.push_back(r.raw.statistic);
      p.push_back(r.raw.p_value);
      ss.push_back(r.standardized.statistic);
      sp.push_back(r.standardized.p_value);
    }
    medians.push_back(median(s));
    table.add_row({num(times[ti]), "median", num(medians.back()), num(median(p)),
                   num(median(ss)), num(median(sp))});
  }

  CommandResult res;
  for (std::size_t ti = 0; ti < times.size(); ++ti)
    res.lines.push_back("t = " + num(times[ti]) + ": median KS statistic " + num(medians[ti]));
  if (auto_grid) {
    res.checks.checks.push_back(check("median statistic at t=0 >= 0.3", medians[0] >= 0.3,
                                      medians[0], 0.3, medians[0] - 0.3));
    res.checks.checks.push_back(check("median statistic at T_OU <= 0.05", medians[3] <= 0.05,
                                      medians[3], 0.05, 0.05 - medians[3]));
    double worst = -kInf;
    for (std::size_t i = 1; i < medians.size(); ++i) worst = std::max(worst, medians[i] - medians[i - 1]);
    res.checks.checks.push_back(check("median statistic non-increasing", worst <= 0.0, worst, 0.0,
                                      -worst, "largest increase between grid times"));
  }
  res.tables.emplace_back("ks_sweep.csv", std::move(table));
  if (ctx.svg) {
    Chart chart{"Median KS statistic of the coordinates", "t", "KS statistic", times, medians, {}};
    chart.references = {{"0.05", 0.05}};
    res.charts.emplace_back("ks_sweep.svg", render_svg(chart));
  }
  return res;
}

// ---------------------------------------------------------------------------
// classify

Schema classify_schema() {
  return {
      real("p", "1", -kInf, kInf, "tail exponent"),
      real("ell", "0", -kInf, kInf, "temperature"),
  };
}

CommandResult run_classify(const Config& cfg, const RunContext&) {
  const double p = cfg.real("p");
  const double ell = cfg.real("ell");
  const Ergodicity e = classify_ergodicity(p, ell);
  CsvTable table({"p", "ell", "regime", "exponent"});
  table.add_row({num(p), num(ell), to_string(e.regime), num(e.exponent)});
  CommandResult res;
  std::string line = "p=" + num(p) + " ell=" + num(ell) + " regime=" + to_string(e.regime);
  if (e.regime == ErgodicityRegime::Subexponential) line += " exponent=" + num(e.exponent);
  res.lines.push_back(line);
  res.tables.emplace_back("classify.csv", std::move(table));
  return res;
}

// ---------------------------------------------------------------------------
// validate

Schema validate_schema() {
  Schema s = process_keys();
  for (auto& k : data_keys("10000", "0.02", "0.05")) s.push_back(std::move(k));
  s.push_back(integer("k", "3", 3, "rank of the projection"));
  s.push_back(real("beta", "0.5", 0.0, 1.0, "exponent in the bridge assumptions"));
  s.push_back(real_auto("r_k", 1.0, kInf, "quantile level (auto: Monte-Carlo estimate)"));
  s.push_back(integer("r_k_samples", "300000", 1, "samples for the r_k estimate"));
  s.push_back({"basis", ValueKind::Text, "aligned", 0, 0, {},
               "aligned | coordinate | path to a file with one basis vector per line"});
  s.push_back(integer("n_points", "10000", 1, "envelope points per structural check"));
  s.push_back(real_auto("envelope_scale", 1e-12, kInf, "envelope standard deviation (auto: R)"));
  s.push_back(integer("tail_samples", "200000", 100000, "samples for the data tail check"));
  return s;
}

namespace {

Matrix read_basis(const std::string& path, std::size_t d) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read basis file '" + path + "'");
  std::vector<std::vector<double>> vecs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> v;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) v.push_back(std::stod(cell));
    if (v.size() != d)
      throw ConfigError("basis vector has " + std::to_string(v.size()) + " entries, expected " +
                        std::to_string(d));
    vecs.push_back(std::move(v));
  }
  Matrix B(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(vecs.size()));
  for (std::size_t j = 0; j < vecs.size(); ++j)
    for (std::size_t i = 0; i < d; ++i)
      B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vecs[j][i];
  return B;
}

}  // namespace

CommandResult run_validate(const Config& cfg, const RunContext& ctx) {
  const auto spec = data_from(cfg);
  const bool is_ou = cfg.raw("process") == "ou";
  const double mu = cfg.real("mu");
  const std::size_t k = cfg.count("k");
  const std::size_t d = spec.d;
  if (k > d) throw ConfigError("projection rank k exceeds d");

  const std::string& basis = cfg.raw("basis");
  const SubspaceProjector proj = basis == "aligned"
                                     ? SubspaceProjector::aligned_with(spec.designated_direction(), k)
                                 : basis == "coordinate" ? SubspaceProjector::coordinate(d, k)
                                                         : SubspaceProjector(read_basis(basis, d));

  CommandResult res;
  auto& checks = res.checks.checks;
  for (const auto& c : validate_data_spec(spec, cfg.count("tail_samples"), sub(ctx, kValidate)).checks)
    checks.push_back(c);

  const double scale = cfg.real_or_auto("envelope_scale").value_or(spec.R);
  const std::size_t n_points = cfg.count("n_points");
  Diffusion diff;
  SphericalMeasure pi{d, RadialProfile::quadratic(mu / 2.0)};
  if (is_ou) {
    diff = as_diffusion(OUProcess{mu, d});
    const auto lg = check_linear_growth(diff, mu, n_points, sub(ctx, kEnvelope), scale);
    checks.push_back(check("linear growth", lg.passed, lg.max_ratio, 1.0 + 1e-9,
                           1.0 + 1e-9 - lg.max_ratio));
  } else {
    double a = 0.0;
    pi = tempered_pi(cfg, a);
    const TemperedLangevin tl{pi.profile, cfg.real("ell"), d};
    diff = as_diffusion(tl);
    const auto lg = check_LG_numeric(tl, mu, 10.0 * spec.outer_radius(), 2000);
    checks.push_back(check("LG_mu", lg.passed, lg.max_excess, 0.0, -lg.max_excess,
                           "a = " + num(a) + ", worst r = " + num(lg.worst_r)));
  }
  const auto sb = check_sigma_bound(diff, proj, n_points, sub(ctx, kEnvelope) + 1, scale);
  checks.push_back(check("dispersion balance", sb.passed, sb.max_violation, 1e-9,
                         1e-9 - sb.max_violation));
  const auto gb = check_generator_bound(diff, proj, mu, n_points, sub(ctx, kEnvelope) + 2, scale);
  checks.push_back(check("generator bound A H <= mu H", gb.passed, gb.max_excess, 1e-9,
                         1e-9 - gb.max_excess));

  double r_k = 0.0;
  if (auto given = cfg.real_or_auto("r_k")) {
    r_k = *given;
  } else {
    r_k = quantile_rk(pi, k, spec.eps, cfg.count("r_k_samples"), sub(ctx, kQuantile)).r_k;
  }
  for (const auto& c :
       validate_bridge_assumptions(mu, spec.R, spec.delta, spec.eps, d, cfg.real("beta"), r_k).checks)
    checks.push_back(c);

  CsvTable table({"check", "passed", "measured", "threshold", "margin"});
  for (const auto& c : checks)
    table.add_row({c.name, c.passed ? "1" : "0", num(c.measured), num(c.threshold), num(c.margin)});
  res.tables.emplace_back("validate.csv", std::move(table));
  res.lines.push_back("r_k = " + num(r_k));
  return res;
}

// ---------------------------------------------------------------------------

const std::vector<Command>& commands() {
  static const std::vector<Command> list = {
      {"cutoff", "projected TV of the OU process across the cut-off window", cutoff_schema,
       run_cutoff},
      {"lowerbound", "Monte-Carlo TV lower bound from the Lyapunov rate", lowerbound_schema,
       run_lowerbound},
      {"quantile-table", "r_k quantile grid over tail exponents and dimensions",
       quantile_table_schema, run_quantile_table},
      {"ks-sweep", "Kolmogorov-Smirnov test of the coordinates over time", ks_sweep_schema,
       run_ks_sweep},
      {"classify", "ergodicity regime of a tempered Langevin diffusion", classify_schema,
       run_classify},
      {"validate", "structural checks on the data law and the forward process", validate_schema,
       run_validate},
  };
  return list;
}

const Command* find_command(const std::string& name) {
  for (const auto& c : commands())
    if (c.name == name) return &c;
  return nullptr;
}

int execute(const Invocation& inv, std::ostream& out, std::ostream& err) {
  const Command* cmd = find_command(inv.command);
  if (!cmd) {
    err << "unknown subcommand '" << inv.command << "'\n";
    return kExitConfig;
  }
  set_thread_count(inv.threads);
  const auto start = std::chrono::steady_clock::now();

  CommandResult res;
  Config cfg;
  try {
    cfg = Config::parse(inv.config_text, cmd->schema());
    res = cmd->run(cfg, inv.ctx);
  } catch (const DivergenceError& e) {
    err << "numerical divergence: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const StructuralError& e) {
    err << "structural error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::domain_error& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::out_of_range& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  }

  std::vector<std::string> files;
  for (const auto& [name, _] : res.tables) files.push_back(name);
  for (const auto& [name, _] : res.charts) files.push_back(name);
  std::string file_list;
  for (const auto& f : files) file_list += (file_list.empty() ? "" : " ") + f;

  std::vector<std::string> preamble = {"mixlab " + inv.command, "version " + std::string(kVersion),
                                       "seed " + std::to_string(inv.ctx.seed)};
  for (const auto& [key, value] : cfg.entries()) preamble.push_back("config " + key + " = " + value);
  preamble.push_back("outputs " + file_list);

  std::error_code ec;
  std::filesystem::create_directories(inv.out_dir, ec);
  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream f(inv.out_dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (inv.out_dir / name).string());
    f << content;
  };
  try {
    for (const auto& [name, table] : res.tables) write(name, table.render(preamble));
    for (const auto& [name, svg] : res.charts) write(name, svg);

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    nlohmann::ordered_json manifest;
    manifest["subcommand"] = inv.command;
    manifest["version"] = kVersion;
    manifest["seed"] = inv.ctx.seed;
    manifest["threads"] = inv.threads;
    manifest["duration_seconds"] = seconds;
    for (const auto& [key, value] : cfg.entries()) manifest["config"][key] = value;
    manifest["outputs"] = files;
    write(inv.command + ".manifest.json", manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << "output error: " << e.what() << '\n';
    return kExitConfig;
  }

  for (const auto& line : res.lines) out << line << '\n';
  for (const auto& c : res.checks.checks) out << check_line(c) << '\n';
  return res.checks.passed() ? kExitOk : kExitCheckFailed;
}

}  // namespace mixlab::cli
