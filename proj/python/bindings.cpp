#include <optional>
#include <utility>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mixlab/bounds.hpp"
#include "mixlab/errors.hpp"
#include "mixlab/forward.hpp"
#include "mixlab/measures.hpp"
#include "mixlab/parallel.hpp"
#include "mixlab/rate.hpp"
#include "mixlab/stats.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace mixlab;

namespace {

// Python sees point clouds as (n, d) arrays, one point per row.
using RowPoints = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

RowPoints rows(const Points& p) { return p.transpose(); }
Points cols(const RowPoints& p) { return p.transpose(); }

std::vector<double> flat(const Eigen::Ref<const Eigen::VectorXd>& v) {
  return {v.data(), v.data() + v.size()};
}

py::dict as_dict(const TVEstimate& e) {
  return py::dict("value"_a = e.value, "standard_error"_a = e.standard_error, "bins"_a = e.bins,
                  "n_a"_a = e.n_a, "n_b"_a = e.n_b, "range"_a = e.range);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Mixing-time diagnostics for noising diffusions";

  py::register_exception<StructuralError>(m, "StructuralError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<RangeError>(m, "RangeError", PyExc_ValueError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);

  m.def("set_thread_count", &set_thread_count, "threads"_a);
  m.def("thread_count", &thread_count);

  // --- measures -------------------------------------------------------------

  py::class_<RadialProfile>(m, "RadialProfile")
      .def_static("quadratic", &RadialProfile::quadratic, "a"_a)
      .def_static("power_tail", &RadialProfile::power_tail, "a"_a, "p"_a)
      .def_property_readonly("a", &RadialProfile::a)
      .def_property_readonly("p", &RadialProfile::p)
      .def("__call__", &RadialProfile::value, "r"_a)
      .def("derivative", &RadialProfile::derivative, "r"_a);

  py::class_<SphericalMeasure>(m, "SphericalMeasure")
      .def(py::init([](std::size_t d, RadialProfile profile) { return SphericalMeasure{d, profile}; }),
           "d"_a, "profile"_a)
      .def_readonly("d", &SphericalMeasure::d)
      .def_readonly("profile", &SphericalMeasure::profile);

  m.def("sample_spherical",
        [](const SphericalMeasure& pi, std::size_t n, std::uint64_t seed) {
          return rows(sample_spherical(pi, n, seed));
        },
        "pi"_a, "n"_a, "seed"_a);

  py::class_<QuantileEstimate>(m, "QuantileEstimate")
      .def_readonly("r_k", &QuantileEstimate::r_k)
      .def_readonly("ball_radius", &QuantileEstimate::ball_radius)
      .def_readonly("r_k_se", &QuantileEstimate::r_k_se)
      .def_readonly("ball_radius_se", &QuantileEstimate::ball_radius_se)
      .def_readonly("n", &QuantileEstimate::n);

  m.def("quantile_rk",
        py::overload_cast<const SphericalMeasure&, std::size_t, double, std::size_t, std::uint64_t>(
            &quantile_rk),
        "pi"_a, "k"_a, "eps"_a, "n"_a = 300000, "seed"_a = 0);

  py::class_<MultiModalData>(m, "MultiModalData")
      .def_static("canonical", &MultiModalData::canonical, "d"_a, "R"_a, "delta"_a, "eps"_a, "b_rho"_a,
                  "bulk_scale"_a = -1.0)
      .def_readonly("d", &MultiModalData::d)
      .def_readonly("R", &MultiModalData::R)
      .def_readonly("delta", &MultiModalData::delta)
      .def_readonly("eps", &MultiModalData::eps)
      .def_property_readonly("mode_weight", &MultiModalData::mode_weight)
      .def_property_readonly("outer_radius", &MultiModalData::outer_radius)
      .def_property_readonly("designated_direction", &MultiModalData::designated_direction);

  m.def("sample_data",
        [](const MultiModalData& spec, std::size_t n, std::uint64_t seed) {
          return rows(sample_data(spec, n, seed));
        },
        "spec"_a, "n"_a, "seed"_a);

  // --- forward processes ----------------------------------------------------

  py::class_<OUProcess>(m, "OUProcess")
      .def(py::init([](double mu, std::size_t d) { return OUProcess{mu, d}; }), "mu"_a, "d"_a)
      .def_readonly("mu", &OUProcess::mu)
      .def_readonly("d", &OUProcess::d);

  py::class_<TemperedLangevin>(m, "TemperedLangevin")
      .def(py::init([](RadialProfile profile, double ell, std::size_t d) {
             return TemperedLangevin{profile, ell, d};
           }),
           "profile"_a, "ell"_a, "d"_a)
      .def_readonly("profile", &TemperedLangevin::profile)
      .def_readonly("ell", &TemperedLangevin::ell)
      .def_readonly("d", &TemperedLangevin::d);

  m.def("ou_transition_sample",
        [](const OUProcess& proc, const Vector& x0, double T, std::size_t n, std::uint64_t seed) {
          return rows(ou_transition_sample(proc, x0, T, seed, n));
        },
        "proc"_a, "x0"_a, "T"_a, "n"_a, "seed"_a);

  m.def("simulate_endpoints",
        [](const TemperedLangevin& tl, const Vector& x0, double T, std::size_t n, std::uint64_t seed,
           double step) { return rows(simulate_endpoints(tl, x0, T, {step}, n, seed)); },
        "tl"_a, "x0"_a, "T"_a, "n"_a, "seed"_a, "step"_a = 1e-3);

  m.def("lg_max_scale", &lg_max_scale, "mu"_a, "p"_a, "ell"_a);

  m.def("classify_ergodicity",
        [](double p, double ell) {
          const auto e = classify_ergodicity(p, ell);
          return std::make_pair(std::string(to_string(e.regime)), e.exponent);
        },
        "p"_a, "ell"_a);

  // --- rate calculus and bounds ---------------------------------------------

  py::class_<RateFunction>(m, "RateFunction")
      .def_static("linear", &RateFunction::linear, "mu"_a)
      .def("integral", &RateFunction::integral, "u"_a, "v"_a)
      .def("flow", &RateFunction::flow, "u"_a, "y"_a)
      .def("markov_threshold", &RateFunction::markov_threshold, "r"_a, "T"_a);

  m.def("critical_time", &critical_time, "mu"_a, "R"_a, "r_k"_a);

  m.def("horizons",
        [](double mu, double R, double delta, double eps, std::size_t d, std::optional<double> r_k) {
          const auto h = horizons(mu, R, delta, eps, d, r_k);
          py::dict out("T_b"_a = h.T_b, "T_OU_thm"_a = h.T_OU_thm, "T_OU_prop"_a = h.T_OU_prop);
          out["T_c"] = h.T_c ? py::cast(*h.T_c) : py::none();
          return out;
        },
        "mu"_a, "R"_a, "delta"_a, "eps"_a, "d"_a, "r_k"_a = py::none());

  py::class_<LowerBoundReport>(m, "LowerBoundReport")
      .def_readonly("T", &LowerBoundReport::T)
      .def_readonly("r", &LowerBoundReport::r)
      .def_readonly("threshold", &LowerBoundReport::threshold)
      .def_readonly("pi_term", &LowerBoundReport::pi_term)
      .def_readonly("rho_tail_term", &LowerBoundReport::rho_tail_term)
      .def_readonly("integral_term", &LowerBoundReport::integral_term)
      .def_readonly("total", &LowerBoundReport::total)
      .def_readonly("total_se", &LowerBoundReport::total_se)
      .def_readonly("n", &LowerBoundReport::n);

  m.def("ou_lower_bound",
        [](const MultiModalData& spec, double mu, std::size_t k, double r_k, double T, std::size_t n,
           std::uint64_t seed) {
          const auto proj = SubspaceProjector::aligned_with(spec.designated_direction(), k);
          return tv_lower_bound(GaussianPi{mu}, spec, proj, RateFunction::linear(mu), r_k, T, n, seed);
        },
        "spec"_a, "mu"_a, "k"_a, "r_k"_a, "T"_a, "n"_a = 100000, "seed"_a = 0,
        "TV lower bound for the OU process started from the data law, projected on the "
        "k-frame aligned with the designated mode.");

  m.def("ou_tv_upper_bound", &ou_tv_upper_bound, "mu"_a, "spec"_a, "T"_a);
  m.def("kl_gaussians", &kl_gaussians, "m1"_a, "S1"_a, "m2"_a, "S2"_a);

  // --- statistics -----------------------------------------------------------

  m.def("chisq_cdf", &chisq_cdf, "k"_a, "x"_a);
  m.def("gaussian_pi_term", &gaussian_pi_term, "k"_a, "r"_a, "mu"_a);
  m.def("kolmogorov_survival", &kolmogorov_survival, "lam"_a);

  m.def("empirical_tv_1d",
        [](const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
           std::optional<std::size_t> bins, std::optional<Interval> range) {
          return as_dict(empirical_tv_1d(flat(a), flat(b), bins, range));
        },
        "a"_a, "b"_a, "bins"_a = py::none(), "range"_a = py::none());

  m.def("empirical_tv_vs_normal",
        [](const Eigen::Ref<const Eigen::VectorXd>& a, double mean, double sd,
           std::optional<std::size_t> bins, std::optional<Interval> range) {
          return as_dict(empirical_tv_1d(
              flat(a), [mean, sd](double x) { return normal_cdf(x, mean, sd); }, bins, range));
        },
        "a"_a, "mean"_a = 0.0, "sd"_a = 1.0, "bins"_a = py::none(), "range"_a = py::none());

  m.def("projected_tv_vs_gaussian",
        [](const RowPoints& samples, const Vector& direction, double mu, std::optional<std::size_t> bins) {
          return as_dict(projected_tv_vs_gaussian(cols(samples), direction, mu, bins));
        },
        "samples"_a, "direction"_a, "mu"_a, "bins"_a = py::none());

  m.def("ks_vs_normal",
        [](const Eigen::Ref<const Eigen::VectorXd>& samples, double mean, double sd) {
          const auto r = ks_statistic(flat(samples), [mean, sd](double x) { return normal_cdf(x, mean, sd); });
          return py::dict("statistic"_a = r.statistic, "p_value"_a = r.p_value, "n"_a = r.n);
        },
        "samples"_a, "mean"_a = 0.0, "sd"_a = 1.0);

}
