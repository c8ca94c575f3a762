// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "commands.hpp"
#include "mixlab/bounds.hpp"
#include "mixlab/random.hpp"
#include "mixlab/stats.hpp"
#include "oracles.hpp"

using namespace mixlab;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = MIXLAB_CONFIG_DIR;
const std::string kBinary = MIXLAB_BINARY;
constexpr std::uint64_t kSeed = 20240611;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int digits = 4) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mixlab_acceptance_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Header-keyed rows of a CSV written by the tool, preamble skipped.
struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw std::runtime_error("no column " + name);
  }
  double at(std::size_t row, const std::string& name) const { return std::stod(rows[row][col(name)]); }
};

Csv read_csv(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  Csv csv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    (csv.header.empty() ? csv.header : csv.rows.emplace_back()) = cells;
  }
  return csv;
}

struct ToolRun {
  int code;
  double seconds;
  std::string out;
};

ToolRun run_tool(const std::string& cmd, const std::string& config, const fs::path& dir,
                 unsigned threads = 1) {
  std::ostringstream out, err;
  const cli::Invocation inv{cmd, slurp(kConfigs / config), {kSeed, false}, dir, threads};
  const auto t0 = std::chrono::steady_clock::now();
  const int code = cli::execute(inv, out, err);
  return {code, seconds_since(t0), out.str() + err.str()};
}

Points random_points(std::size_t d, std::size_t n, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, scale);
  Points xs(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < xs.size(); ++i) xs(i) = z(rng);
  return xs;
}

TemperedLangevin lg_compliant(std::size_t d) {
  return {RadialProfile::power_tail(lg_max_scale(1.0, 1.0, 0.4), 1.0), 0.4, d};
}

// --- criteria ---------------------------------------------------------------

Outcome quantile_table() {
  // Rows p = 1.8, 1.6, 1.4, 1.2, 1; columns d = 3, 30, 300, 3000.
  const double reference[5][4] = {{2.2, 2.4, 2.8, 3.1},
                                  {2.6, 3.2, 4.3, 5.7},
                                  {3.1, 4.6, 7.5, 12.2},
                                  {4.1, 7.7, 16.1, 34.6},
                                  {6.3, 15.9, 48.7, 153.2}};
  const auto dir = scratch("quantile_table");
  const auto run = run_tool("quantile-table", "quantile_table.cfg", dir);
  if (run.code != 0) return {false, "tool exit " + std::to_string(run.code) + ": " + run.out};
  const Csv grid = read_csv(dir / "quantile_table_grid.csv");
  const char* cols[4] = {"d=3", "d=30", "d=300", "d=3000"};
  double worst = 0.0;
  std::string where;
  int within = 0;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      const double rel = std::abs(grid.at(i, cols[j]) / reference[i][j] - 1.0);
      if (rel <= 0.05) ++within;
      if (rel > worst) {
        worst = rel;
        where = "p=" + grid.rows[i][0] + " " + cols[j];
      }
    }
  const double corner = grid.at(4, "d=3000");
  const bool pass = within == 20 && run.seconds < 60.0;
  return {pass, std::to_string(within) + "/20 cells within 5%, worst " + fmt(100 * worst, 3) + "% at " +
                    where + ", p=1 d=3000 -> " + fmt(corner, 5) + ", " + fmt(run.seconds, 3) +
                    " s (limit 60 s)"};
}

Outcome cutoff() {
  const auto dir = scratch("cutoff");
  const auto run = run_tool("cutoff", "cutoff.cfg", dir);
  if (run.code != 0 && run.code != 3) return {false, "tool exit " + std::to_string(run.code) + ": " + run.out};
  const Csv csv = read_csv(dir / "cutoff.csv");
  const double T_b = csv.at(0, "T_b"), T_ou = csv.at(0, "T_OU_prop");
  const double floor = csv.at(0, "floor"), eps = csv.at(0, "eps");
  double tv_b = NAN, se_b = NAN, tv_ou = NAN, se_ou = NAN;
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    if (csv.at(i, "t") == T_b) tv_b = csv.at(i, "tv"), se_b = csv.at(i, "tv_se");
    if (csv.at(i, "t") == T_ou) tv_ou = csv.at(i, "tv"), se_ou = csv.at(i, "tv_se");
  }
  const bool low = tv_b >= floor - 3 * se_b;
  const bool high = tv_ou <= eps + 3 * se_ou;
  const bool pass = low && high && run.seconds < 30.0 && run.code == 0;
  return {pass, "TV(T_b=" + fmt(T_b) + ") = " + fmt(tv_b) + " >= " + fmt(floor - 3 * se_b) + ", TV(T_OU=" +
                    fmt(T_ou) + ") = " + fmt(tv_ou) + " <= " + fmt(eps + 3 * se_ou) + ", " +
                    fmt(run.seconds, 3) + " s (limit 30 s)"};
}

Outcome lower_bound() {
  std::string detail;
  bool pass = true;
  for (const char* cfg : {"lowerbound_ou.cfg", "lowerbound_tempered.cfg"}) {
    const auto dir = scratch(cfg);
    const auto run = run_tool("lowerbound", cfg, dir);
    const Csv csv = read_csv(dir / "lowerbound.csv");
    const std::size_t last = csv.rows.size() - 1;  // the T_c row
    const double total = csv.at(last, "total"), se = csv.at(last, "total_se");
    const double need = csv.at(last, "floor") - 3 * se;
    pass = pass && run.code == 0 && total >= need;
    detail += std::string(cfg) + ": total(T_c=" + fmt(csv.at(last, "t")) + ") = " + fmt(total) +
              " >= " + fmt(need) + "; ";
  }
  const auto dir = scratch("lowerbound_pi");
  const auto run = run_tool("lowerbound", "lowerbound_pi.cfg", dir);
  const Csv csv = read_csv(dir / "lowerbound.csv");
  double worst = -INFINITY;
  for (std::size_t i = 0; i < csv.rows.size(); ++i)
    worst = std::max(worst, csv.at(i, "total") - 3 * csv.at(i, "total_se"));
  pass = pass && run.code == 0 && worst <= 0.0;
  return {pass, detail + "rho0 = pi: max(total - 3se) = " + fmt(worst) + " <= 0"};
}

Outcome bound_ordering() {
  const double mu = 1.0;
  const auto spec = MultiModalData::canonical(16, 50, 0.02, 0.05, 0.5);
  const auto proj = SubspaceProjector::aligned_with(spec.designated_direction(), 3);
  const SphericalMeasure pi{spec.d, RadialProfile::quadratic(mu / 2)};
  const double rk = quantile_rk(pi, 3, spec.eps, 300000, derive_seed(kSeed, 4)).r_k;
  const HorizonSet hz = horizons(mu, spec.R, spec.delta, spec.eps, spec.d, rk);
  const Points rho0 = sample_data(spec, 100000, derive_seed(kSeed, 41));
  const auto rate = RateFunction::linear(mu);
  int compared = 0;
  bool pass = true;
  double worst = -INFINITY;
  for (int i = 0; i < 10; ++i) {
    const double T = 2.0 * hz.T_OU_prop * i / 9.0;
    if (!(mu * T > std::log(2.0) / 2.0)) continue;
    const auto lb = tv_lower_bound(GaussianPi{mu}, rho0, proj, rate, rk, T);
    const auto ub = ou_tv_upper_bound_detail(mu, spec, T);
    const double gap = lb.total - ub.value - 3 * std::hypot(lb.total_se, ub.mass_se);
    worst = std::max(worst, gap);
    pass = pass && gap <= 0.0;
    ++compared;
  }
  return {pass && compared >= 8, std::to_string(compared) + " of 10 grid times on [0, 2 T_OU] have both bounds; "
                                     "max(lower - upper - 3se) = " + fmt(worst) + " <= 0"};
}

Outcome generator() {
  const std::size_t d = 16;
  const auto spec = MultiModalData::canonical(d, 200, 0.02, 0.05, 0.5);
  const auto proj = SubspaceProjector::aligned_with(spec.designated_direction(), 3);
  const auto ou = as_diffusion(OUProcess{1.0, d});
  const auto tl = as_diffusion(lg_compliant(d));
  const auto g_ou = check_generator_bound(ou, proj, 1.0, 10000, derive_seed(kSeed, 51), spec.R);
  const auto g_tl = check_generator_bound(tl, proj, 1.0, 10000, derive_seed(kSeed, 52), spec.R);

  const Points xs = random_points(d, 100, derive_seed(kSeed, 53), 2.0);
  double worst_fd = 0.0;
  for (const auto* diff : {&ou, &tl})
    for (Eigen::Index j = 0; j < xs.cols(); ++j) {
      const Vector x = xs.col(j);
      const double an = generator_apply_H(*diff, proj, x);
      worst_fd = std::max(worst_fd, std::abs(oracle::fd_generator(*diff, proj, x, 1e-3) / an - 1.0));
    }
  const bool pass = g_ou.passed && g_tl.passed && g_ou.max_excess <= 1e-9 && g_tl.max_excess <= 1e-9 &&
                    g_ou.evaluated == 10000 && g_tl.evaluated == 10000 && worst_fd <= 1e-4;
  return {pass, "max(A H - mu H): OU " + fmt(g_ou.max_excess) + ", tempered " + fmt(g_tl.max_excess) +
                    " <= 1e-9 over 1e4 points; finite differences at 100 points x 2 processes: worst relative " +
                    fmt(worst_fd) + " <= 1e-4"};
}

Outcome rate_calculus() {
  std::mt19937_64 rng(derive_seed(kSeed, 6));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto lin = RateFunction::linear(1.3);
  const auto sq = RateFunction::concave([](double s) { return std::sqrt(s); });
  double worst_lin = 0.0, worst_sq = 0.0, worst_inv = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double u = 1e-6 + (1.0 - 1e-6) * unif(rng);
    const double y = 20.0 * unif(rng);
    worst_lin = std::max(worst_lin, std::abs(lin.integral(u, lin.flow(u, y)) - y));
    const double v = sq.flow(u, y);
    worst_sq = std::max({worst_sq, std::abs(sq.integral(u, v) - y),
                         std::abs(v / std::pow(std::sqrt(u) + 0.5 * y, 2) - 1.0),
                         std::abs(sq.integral(u, v) / (2 * std::sqrt(v) - 2 * std::sqrt(u)) - 1.0)});
    const double r = 1.0 + 50.0 * unif(rng);
    const double T = 6.0 * unif(rng);
    worst_inv = std::max(worst_inv, std::abs(lin.flow(lin.markov_threshold(r, T), T) * r - 1.0));
  }
  const bool pass = worst_lin <= 1e-12 && worst_sq <= 1e-8 && worst_inv <= 1e-10;
  return {pass, "1000 points: linear round trip " + fmt(worst_lin) + " <= 1e-12, sqrt rate " + fmt(worst_sq) +
                    " <= 1e-8, C_rT inverse pair " + fmt(worst_inv) + " <= 1e-10"};
}

Outcome kl() {
  std::mt19937_64 rng(derive_seed(kSeed, 7));
  std::normal_distribution<double> z;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    Matrix A(2, 2), B(2, 2);
    Vector a(2), b(2);
    for (int j = 0; j < 4; ++j) A(j) = z(rng), B(j) = z(rng);
    for (int j = 0; j < 2; ++j) a(j) = z(rng), b(j) = z(rng);
    const Matrix S1 = A * A.transpose() + 0.3 * Matrix::Identity(2, 2);
    const Matrix S2 = B * B.transpose() + 0.3 * Matrix::Identity(2, 2);
    const double exact = kl_gaussians(a, S1, b, S2);
    const double mc = oracle::mc_kl(a, S1, b, S2, 1000000, derive_seed(kSeed, 700 + i));
    worst = std::max(worst, std::abs(mc / exact - 1.0));
  }
  Matrix S(2, 2);
  S << 2.0, 0.3, 0.3, 0.5;
  const Vector m = Vector::LinSpaced(2, -1.0, 2.0);
  const double same = std::abs(kl_gaussians(m, S, m, S));
  const Vector m1 = Vector::LinSpaced(3, 1.0, 3.0);
  const Matrix I = Matrix::Identity(3, 3);
  const double shift = std::abs(kl_gaussians(m1, I, Vector::Zero(3), I) - m1.squaredNorm() / 2.0);
  const bool pass = worst <= 0.02 && same <= 1e-12 && shift <= 1e-12;
  return {pass, "20 instances vs Monte Carlo (n=1e6): worst relative " + fmt(worst) +
                    " <= 0.02; KL(P||P) = " + fmt(same) + ", identity-covariance shift error " + fmt(shift)};
}

Outcome expected_h() {
  const std::size_t d = 16;
  const auto proj = SubspaceProjector::coordinate(d, 3);
  const auto rate = RateFunction::linear(1.0);
  const auto sampler = exact_endpoints(OUProcess{1.0, d});
  std::mt19937_64 rng(derive_seed(kSeed, 8));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int passed = 0;
  double worst = -INFINITY;
  for (int i = 0; i < 20; ++i) {
    const double scale = std::exp(std::log(200.0) * unif(rng));
    const Vector x = random_points(d, 1, rng(), scale).col(0);
    const double t = 5.0 * unif(rng);
    const auto rep = expected_H_check(sampler, proj, rate, x, t, 100000, derive_seed(kSeed, 800 + i));
    worst = std::max(worst, (rep.estimate - rep.bound) / std::max(rep.standard_error, 1e-300));
    if (rep.passed && rep.estimate <= rep.bound + 3 * rep.standard_error) ++passed;
  }
  return {passed == 20, std::to_string(passed) + "/20 (x, t) pairs with E_x[H(X_t)] <= gamma(H(x), t) + 3se "
                                                 "(n=1e5 each); worst excess " + fmt(worst) + " se"};
}

Outcome classifier() {
  struct Case {
    double p, ell;
    ErgodicityRegime regime;
    double exponent;
  };
  using R = ErgodicityRegime;
  const std::vector<Case> cases{
      {0.5, 0.0, R::Subexponential, 1.0 / 3.0},
      {0.5, 0.5, R::Subexponential, 0.5 / (2.0 - 0.5 - 0.5)},
      {0.5, 1.0, R::Exponential, 0.0},  // left end 1/p - 1 is closed
      {1.0, 0.5, R::Exponential, 0.0},  // right end 1/p - 1/2 is closed
      {1.0, 0.6, R::Uniform, 0.0},
      {3.0, 0.0, R::Uniform, 0.0},
      {0.5, 1.6, R::Uniform, 0.0},
  };
  int agree = 0;
  std::string bad;
  for (const auto& c : cases) {
    const auto e = classify_ergodicity(c.p, c.ell);
    const bool ok = e.regime == c.regime && std::abs(e.exponent - c.exponent) <= 1e-12;
    agree += ok;
    if (!ok) bad += " (p=" + fmt(c.p) + ", l=" + fmt(c.ell) + ")";
  }
  const int n = static_cast<int>(cases.size());
  return {agree == n, std::to_string(agree) + "/" + std::to_string(n) + " regimes agree" +
                          (bad.empty() ? std::string() : "; mismatches:" + bad)};
}

Outcome ks_sweep_outcome() {
  const auto dir = scratch("ks_sweep");
  const auto run = run_tool("ks-sweep", "ks_sweep.cfg", dir);
  if (run.code != 0 && run.code != 3) return {false, "tool exit " + std::to_string(run.code) + ": " + run.out};
  const Csv csv = read_csv(dir / "ks_sweep.csv");
  std::vector<double> med;
  std::size_t reps = 0;
  for (std::size_t i = 0; i < csv.rows.size(); ++i)
    (csv.rows[i][csv.col("rep")] == "median" ? med.push_back(csv.at(i, "statistic")) : void(++reps));
  if (med.size() != 4) return {false, "expected 4 median rows, got " + std::to_string(med.size())};
  bool monotone = true;
  for (std::size_t i = 1; i < med.size(); ++i) monotone = monotone && med[i] <= med[i - 1];
  const bool pass = reps == 80 && med[0] >= 0.3 && med[3] <= 0.05 && monotone && run.seconds < 60.0;
  return {pass, "medians over 20 seeds at {0, T_b/2, T_b, T_OU}: " + fmt(med[0]) + ", " + fmt(med[1]) + ", " +
                    fmt(med[2]) + ", " + fmt(med[3]) + " (>= 0.3 first, <= 0.05 last, non-increasing), " +
                    fmt(run.seconds, 3) + " s (limit 60 s)"};
}

Outcome determinism() {
  const std::vector<std::pair<std::string, std::string>> runs{
      {"cutoff", "cutoff.cfg"},           {"lowerbound", "lowerbound_ou.cfg"},
      {"lowerbound", "lowerbound_tempered.cfg"}, {"lowerbound", "lowerbound_pi.cfg"},
      {"quantile-table", "quantile_table.cfg"},  {"ks-sweep", "ks_sweep.cfg"},
      {"classify", "classify.cfg"},       {"validate", "validate.cfg"},
  };
  int files = 0, identical = 0;
  std::string bad;
  for (const auto& [cmd, cfg] : runs) {
    std::vector<fs::path> dirs;
    for (unsigned threads : {1u, 8u}) {
      const auto dir = scratch("det_" + cfg + "_" + std::to_string(threads));
      const std::string line = "'" + kBinary + "' " + cmd + " --config '" + (kConfigs / cfg).string() +
                               "' --seed " + std::to_string(kSeed) + " --threads " + std::to_string(threads) +
                               " --out '" + dir.string() + "' > /dev/null 2>&1";
      const int status = std::system(line.c_str());
      if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) bad += " " + cfg + "(exit)";
      dirs.push_back(dir);
    }
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      if (entry.path().extension() != ".csv") continue;
      ++files;
      const auto other = dirs[1] / entry.path().filename();
      if (fs::exists(other) && slurp(entry.path()) == slurp(other))
        ++identical;
      else
        bad += " " + cfg + ":" + entry.path().filename().string();
    }
  }
  return {files >= 9 && identical == files && bad.empty(),
          std::to_string(identical) + "/" + std::to_string(files) + " CSVs byte-identical at --threads 1 vs 8 over " +
              std::to_string(runs.size()) + " runs of all 6 subcommands" + (bad.empty() ? "" : "; differing:" + bad)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"quantile table", quantile_table},
      {"OU cut-off", cutoff},
      {"TV lower bound at T_c", lower_bound},
      {"bound ordering", bound_ordering},
      {"generator inequality", generator},
      {"rate calculus", rate_calculus},
      {"Gaussian KL", kl},
      {"expected Lyapunov value", expected_h},
      {"ergodicity classifier", classifier},
      {"KS sweep", ks_sweep_outcome},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << ": " << o.detail
              << " [" << fmt(seconds_since(t0), 3) << " s]" << std::endl;
  }
  fs::remove_all(fs::temp_directory_path() / ("mixlab_acceptance_" + std::to_string(::getpid())));
  std::cout << (failed ? std::to_string(failed) + " of 11 criteria failed" : std::string("all 11 criteria passed"))
            << std::endl;
  return failed ? 1 : 0;
}
