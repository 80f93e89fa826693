#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "swlab/augmentation.hpp"
#include "swlab/budget_game.hpp"
#include "swlab/count.hpp"
#include "swlab/experiment.hpp"
#include "swlab/greedy_routing.hpp"
#include "swlab/lattice.hpp"
#include "swlab/reduction.hpp"

namespace py = pybind11;
using namespace swlab;

namespace {

py::object py_int(const std::string& digits) {
  return py::reinterpret_steal<py::object>(PyLong_FromString(digits.c_str(), nullptr, 10));
}

py::object py_count(Count c) { return py_int(to_string(c)); }

py::object py_fraction(const Rational& q) {
  static py::object fraction = py::module_::import("fractions").attr("Fraction");
  return fraction(py_int(boost::multiprecision::numerator(q).str()),
                  py_int(boost::multiprecision::denominator(q).str()));
}

LatticePoint to_point(const std::vector<Coord>& coords) { return LatticePoint(coords); }

py::tuple to_tuple(const LatticePoint& p) {
  py::tuple t(static_cast<std::size_t>(p.dim()));
  for (int i = 0; i < p.dim(); ++i) t[static_cast<std::size_t>(i)] = p[i];
  return t;
}

py::list fractions(const std::vector<Rational>& v) {
  py::list out;
  for (const auto& q : v) out.append(py_fraction(q));
  return out;
}

py::dict bet_dict(const InducedBet& bet) {
  py::dict out;
  out["d"] = bet.d;
  out["mode"] = to_string(bet.mode);
  out["mass"] = bet.mass;
  if (!bet.exact.empty()) out["exact"] = fractions(bet.exact);
  if (bet.mode == BetMode::kMonteCarlo) {
    out["trials"] = bet.trials;
    out["tv_bound"] = bet.tv_bound;
  }
  return out;
}

GStrategy strategy_by_name(const std::string& name, int dim) {
  if (name == "axis") return GStrategy::axis(dim);
  if (name == "diagonal") return GStrategy::diagonal(dim);
  throw std::invalid_argument("strategy must be 'axis' or 'diagonal'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Lattice counting, greedy routing and budget game core";
  m.attr("__version__") = SWLAB_VERSION;

  py::register_exception<OverflowError>(m, "CountOverflowError", PyExc_OverflowError);
  py::register_exception<InvalidBetError>(m, "InvalidBetError", PyExc_ValueError);
  py::register_exception<StrategyGapError>(m, "StrategyGapError", PyExc_IndexError);

  // Lattice
  m.def("sphere_size", [](int dim, Coord r) { return py_count(sphere_size(dim, r)); },
        py::arg("dim"), py::arg("r"));
  m.def("count_sphere_ball",
        [](const std::vector<Coord>& u, Coord r, Coord j) { return py_count(count_sphere_ball(to_point(u), r, j)); },
        py::arg("u"), py::arg("r"), py::arg("j"));
  m.def("count_sphere_sphere",
        [](const std::vector<Coord>& u, Coord r, Coord j) { return py_count(count_sphere_sphere(to_point(u), r, j)); },
        py::arg("u"), py::arg("r"), py::arg("m"));
  m.def("sample_sphere_uniform",
        [](const std::vector<Coord>& u, Coord r, std::uint64_t seed) {
          Rng rng(seed);
          return to_tuple(sample_sphere_uniform(to_point(u), r, rng));
        },
        py::arg("u"), py::arg("r"), py::arg("seed"));
  m.def("canonical_points",
        [](int dim, Coord d) {
          py::list out;
          for (const auto& p : canonical_points(dim, d)) out.append(to_tuple(p));
          return out;
        },
        py::arg("dim"), py::arg("d"));

  py::class_<MetricSpace>(m, "MetricSpace")
      .def_static("infinite_grid", &MetricSpace::infinite_grid, py::arg("dim"))
      .def_static("finite_grid", &MetricSpace::finite_grid, py::arg("dim"), py::arg("n"))
      .def_static("torus", &MetricSpace::torus, py::arg("dim"), py::arg("n"))
      .def_property_readonly("dim", &MetricSpace::dim)
      .def_property_readonly("side", &MetricSpace::side)
      .def("distance",
           [](const MetricSpace& ms, const std::vector<Coord>& p, const std::vector<Coord>& q) {
             return distance(to_point(p), to_point(q), ms);
           },
           py::arg("p"), py::arg("q"))
      .def("__repr__", &MetricSpace::describe);

  // Augmentation
  py::class_<LrcDistribution>(m, "LrcDistribution")
      .def_static("from_table",
                  [](const std::vector<std::pair<Coord, double>>& pairs) { return lrc_from_table(pairs); },
                  py::arg("pairs"))
      .def_static("node_power", &lrc_node_power, py::arg("dim"), py::arg("alpha"), py::arg("r_max"))
      .def_static("point_mass", &LrcDistribution::point_mass, py::arg("r"))
      .def_static("load", &load_lrc_table, py::arg("path"))
      .def_property_readonly("support", &LrcDistribution::support)
      .def_property_readonly("masses", &LrcDistribution::masses)
      .def_property_readonly("exact_masses", [](const LrcDistribution& l) { return fractions(l.exact_masses()); })
      .def_property_readonly("descriptor", &LrcDistribution::descriptor)
      .def("__repr__", &LrcDistribution::descriptor);

  // Routing
  m.def("greedy_route",
        [](const std::vector<Coord>& s, const std::vector<Coord>& t, const LrcDistribution& lambda,
           const MetricSpace& ms, std::uint64_t seed, bool record_path) {
          const RouteResult res = greedy_route_keyed(to_point(s), to_point(t), lambda, ms, seed, record_path);
          py::dict out;
          out["hops"] = res.hops;
          out["lrc_uses"] = res.lrc_uses;
          if (res.path) {
            py::list path;
            for (const auto& p : *res.path) path.append(to_tuple(p));
            out["path"] = path;
          }
          return out;
        },
        py::arg("s"), py::arg("t"), py::arg("lam"), py::arg("metric"), py::arg("seed"),
        py::arg("record_path") = false);
  m.def("estimate_routing_time",
        [](const std::vector<Coord>& s, const std::vector<Coord>& t, const LrcDistribution& lambda,
           const MetricSpace& ms, std::int64_t trials, std::uint64_t seed, int jobs) {
          RoutingEstimate est;
          {
            py::gil_scoped_release release;
            est = estimate_routing_time(to_point(s), to_point(t), lambda, ms, trials, seed, jobs);
          }
          py::dict out;
          out["trials"] = est.trials;
          out["mean"] = est.mean;
          out["stderr"] = est.stderr_of_mean;
          out["mean_lrc_uses"] = est.mean_lrc_uses;
          out["max_hops"] = est.max_hops;
          out["initial_distance"] = est.initial_distance;
          out["hops"] = est.hops;
          return out;
        },
        py::arg("s"), py::arg("t"), py::arg("lam"), py::arg("metric"), py::arg("trials"),
        py::arg("seed"), py::arg("jobs") = 1);

  // Budget game
  m.def("validate_bet",
        [](std::int64_t d, const std::vector<std::pair<std::int64_t, double>>& entries, double budget) {
          const BetValidation v = validate_bet(Bet(d, entries), GameState{d, budget});
          py::list out;
          for (const auto& x : v.violations) {
            out.append(py::make_tuple(x.kind == BetViolation::Kind::kBudget ? "budget" : "tail", x.j, x.lhs, x.rhs));
          }
          return out;
        },
        py::arg("d"), py::arg("entries"), py::arg("budget"));
  m.def("estimate_game_rounds",
        [](std::int64_t d0, double b0, const std::string& strategy, std::int64_t trials,
           std::uint64_t seed, int jobs) {
          Strategy s;
          if (strategy == "halving") s = halving_strategy(d0);
          else if (strategy == "unit") s = unit_step_strategy();
          else throw std::invalid_argument("strategy must be 'halving' or 'unit'");
          GameEstimate est;
          {
            py::gil_scoped_release release;
            est = estimate_game_rounds(d0, b0, s, trials, seed, jobs);
          }
          py::dict out;
          out["trials"] = est.trials;
          out["mean"] = est.mean;
          out["stderr"] = est.stderr_of_mean;
          out["min_budget"] = est.min_budget;
          out["max_rounds"] = est.max_rounds;
          return out;
        },
        py::arg("d0"), py::arg("b0"), py::arg("strategy") = "halving", py::arg("trials") = 1000,
        py::arg("seed") = 1, py::arg("jobs") = 1);
  m.def("lower_bound_reference", &lower_bound_reference, py::arg("d0"), py::arg("b0"), py::arg("alpha"));
  m.def("log_square_shrink_gap", &log_square_shrink_gap, py::arg("z"), py::arg("x"));

  // Reduction
  m.def("induced_bet",
        [](std::int64_t d, const std::vector<Coord>& u, const LrcDistribution& lambda, bool exact) {
          return bet_dict(exact ? induced_bet(d, to_point(u), lambda) : induced_bet_float(d, to_point(u), lambda));
        },
        py::arg("d"), py::arg("u"), py::arg("lam"), py::arg("exact") = true);
  m.def("induced_bet_mc",
        [](std::int64_t d, const std::vector<Coord>& u, const LrcDistribution& lambda, std::int64_t trials,
           std::uint64_t seed) {
          Rng rng(seed);
          return bet_dict(induced_bet_mc(d, to_point(u), lambda, trials, rng));
        },
        py::arg("d"), py::arg("u"), py::arg("lam"), py::arg("trials"), py::arg("seed"));
  m.def("expected_rounds_exact",
        [](std::int64_t d0, const std::string& strategy, const LrcDistribution& lambda, int dim) {
          return fractions(expected_rounds_exact(d0, strategy_by_name(strategy, dim), lambda));
        },
        py::arg("d0"), py::arg("strategy"), py::arg("lam"), py::arg("dim") = 2);
  m.def("optimal_g_strategy",
        [](const LrcDistribution& lambda, std::int64_t d_max, int dim, bool exact) {
          const OptimalGResult res = optimal_g_strategy(lambda, d_max, dim, exact);
          py::list holders;
          for (std::int64_t d = 1; d <= d_max; ++d) holders.append(to_tuple(res.strategy.at(d)));
          py::dict out;
          out["holders"] = holders;
          out["expected"] = res.expected;
          if (exact) out["expected_exact"] = fractions(res.expected_exact);
          return out;
        },
        py::arg("lam"), py::arg("d_max"), py::arg("dim") = 2, py::arg("exact") = false);
  m.def("audit_b2",
        [](std::int64_t d, const std::vector<Coord>& u, const LrcDistribution& lambda) {
          const B2Report rep = audit_b2(d, to_point(u), lambda);
          py::dict out;
          out["ok"] = rep.ok;
          out["violations"] = rep.violations;
          out["min_slack"] = py_fraction(rep.min_slack);
          out["max_slack"] = py_fraction(rep.max_slack);
          return out;
        },
        py::arg("d"), py::arg("u"), py::arg("lam"));

  // Experiments
  m.def("run_experiment",
        [](const std::string& config_json) {
          const ExperimentConfig config = parse_config(config_json);
          std::ostringstream csv, summary;
          int code;
          {
            py::gil_scoped_release release;
            code = run_experiment(config, csv, summary);
          }
          return py::make_tuple(code, csv.str(), summary.str());
        },
        py::arg("config_json"));
}
