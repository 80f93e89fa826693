#include "swlab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "parallel.hpp"
#include "swlab/budget_game.hpp"
#include "swlab/format.hpp"
#include "swlab/greedy_routing.hpp"
#include "swlab/reduction.hpp"
#include "swlab/stats.hpp"

namespace swlab {

using nlohmann::json;

namespace {

struct KindName {
  ExperimentKind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {ExperimentKind::kRoute, "route"},
    {ExperimentKind::kBudgetGame, "budget-game"},
    {ExperimentKind::kGameG, "game-g"},
    {ExperimentKind::kInduceBets, "induce-bets"},
    {ExperimentKind::kAuditB2, "audit-b2"},
    {ExperimentKind::kAuditBudget, "audit-budget"},
    {ExperimentKind::kOptimalG, "optimal-g"},
    {ExperimentKind::kGeometryCheck, "geometry-check"},
};

// Keys that only choose where or how fast output is produced.
const std::set<std::string> kOutputKeys = {"out", "jobs", "trajectory_out"};

const std::set<std::string> kKnownKeys = {
    "experiment", "D", "metric", "n", "lambda", "sweep_n", "source", "target", "d0", "B0",
    "strategy", "strategies", "d_min", "d_max", "trials", "seed", "exact", "all_rows", "jobs",
    "out", "trajectory_out"};

template <class T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

std::int64_t get_int(const json& j, const std::string& key) {
  if (!j.is_number_integer()) throw ConfigError("config key '" + key + "' must be an integer");
  return j.get<std::int64_t>();
}

LatticePoint get_point(const json& j, const std::string& key) {
  if (!j.is_array() || j.empty()) throw ConfigError("config key '" + key + "' must be a coordinate array");
  std::vector<Coord> c;
  for (const auto& x : j) c.push_back(get_int(x, key));
  return LatticePoint(std::move(c));
}

LambdaSpec parse_lambda(const json& j, const std::string& base_dir) {
  LambdaSpec spec;
  if (j.is_string()) {
    if (j.get<std::string>() != "point-masses") {
      throw ConfigError("lambda string must be \"point-masses\"");
    }
    spec.kind = LambdaSpec::Kind::kPointMasses;
    return spec;
  }
  if (!j.is_object() || j.size() != 1) throw ConfigError("lambda must be an object with one key");
  const auto& [key, value] = *j.items().begin();
  if (key == "power") {
    spec.kind = LambdaSpec::Kind::kPower;
    for (const auto& [k, v] : value.items()) {
      if (k == "alpha") {
        if (!v.is_number()) throw ConfigError("lambda.power.alpha must be a number");
        spec.alpha = v.get<double>();
      } else if (k == "r_max") {
        if (v.is_string() && v.get<std::string>() == "auto") {
          spec.r_max.reset();
        } else {
          spec.r_max = get_int(v, "lambda.power.r_max");
        }
      } else {
        throw ConfigError("unknown key lambda.power." + k);
      }
    }
  } else if (key == "table") {
    spec.kind = LambdaSpec::Kind::kTable;
    std::filesystem::path p = get_as<std::string>(value, "lambda.table");
    if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
    if (!std::filesystem::exists(p)) throw ConfigError("lambda table " + p.string() + " does not exist");
    spec.path = p.string();
  } else if (key == "pairs") {
    spec.kind = LambdaSpec::Kind::kPairs;
    if (!value.is_array()) throw ConfigError("lambda.pairs must be an array");
    for (const auto& pr : value) {
      if (!pr.is_array() || pr.size() != 2 || !pr[1].is_number()) {
        throw ConfigError("lambda.pairs entries must be [radius, weight]");
      }
      spec.pairs.emplace_back(get_int(pr[0], "lambda.pairs"), pr[1].get<double>());
    }
  } else if (key == "point_mass") {
    spec.kind = LambdaSpec::Kind::kPointMass;
    spec.radius = get_int(value, "lambda.point_mass");
  } else if (key == "random") {
    spec.kind = LambdaSpec::Kind::kRandom;
    for (const auto& [k, v] : value.items()) {
      if (k == "count") {
        spec.random_count = static_cast<int>(get_int(v, "lambda.random.count"));
      } else if (k == "support") {
        spec.random_support = static_cast<int>(get_int(v, "lambda.random.support"));
      } else if (k == "r_max") {
        spec.random_r_max = get_int(v, "lambda.random.r_max");
      } else {
        throw ConfigError("unknown key lambda.random." + k);
      }
    }
    if (spec.random_count < 1 || spec.random_support < 1 || spec.random_r_max < 1) {
      throw ConfigError("lambda.random fields must be >= 1");
    }
  } else {
    throw ConfigError("unknown lambda kind '" + key + "'");
  }
  return spec;
}

MetricSpace make_metric(MetricKind kind, int dim, Coord n) {
  switch (kind) {
    case MetricKind::kInfiniteGrid: return MetricSpace::infinite_grid(dim);
    case MetricKind::kFiniteGrid: return MetricSpace::finite_grid(dim, n);
    case MetricKind::kTorus: return MetricSpace::torus(dim, n);
  }
  throw ConfigError("unknown metric");
}

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string str(double x) { return format_real(x); }

class Csv {
 public:
  explicit Csv(std::ostream& out) : out_(out) {}

  template <class... Fields>
  void row(const Fields&... fields) {
    bool first = true;
    ((out_ << (first ? "" : ",") << quote(to_field(fields)), first = false), ...);
    out_ << '\n';
  }

 private:
  static std::string to_field(const std::string& s) { return s; }
  static std::string to_field(const char* s) { return s; }
  static std::string to_field(double x) { return str(x); }
  static std::string to_field(std::int64_t x) { return std::to_string(x); }
  static std::string to_field(int x) { return std::to_string(x); }
  static std::string to_field(const LatticePoint& p) { return to_string(p); }
  static std::string to_field(const Rational& q) { return swlab::to_string(q); }

  std::ostream& out_;
};

void write_provenance(std::ostream& out, const ExperimentConfig& config) {
  out << "# swlab " << SWLAB_VERSION << " experiment=" << to_string(config.kind)
      << " config=" << config_hash(config) << '\n';
}

double ln2(double x) {
  const double l = std::log(x);
  return l * l;
}

void write_fit(std::ostream& summary, const std::vector<double>& x, const std::vector<double>& y,
               const std::string& label) {
  if (x.size() < 2) return;
  const LinearFit fit = fit_least_squares(x, y);
  summary << "fit " << label << ": slope=" << str(fit.slope) << " intercept=" << str(fit.intercept)
          << " r2=" << str(fit.r_squared) << '\n';
  double lo = 0, hi = 0;
  bool any = false;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k] <= 0) continue;
    const double ratio = y[k] / x[k];
    lo = any ? std::min(lo, ratio) : ratio;
    hi = any ? std::max(hi, ratio) : ratio;
    any = true;
  }
  if (any) summary << "band " << label << ": min=" << str(lo) << " max=" << str(hi) << '\n';
}

std::vector<std::string> strategies_or(const ExperimentConfig& c, std::vector<std::string> fallback) {
  return c.strategies.empty() ? fallback : c.strategies;
}

struct NamedLambda {
  std::string id;
  LrcDistribution lambda;
};

std::vector<NamedLambda> random_lambdas(const LambdaSpec& spec, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x6c616d626461ULL));
  std::vector<NamedLambda> out;
  const int support = static_cast<int>(std::min<Coord>(spec.random_support, spec.random_r_max));
  for (int c = 0; c < spec.random_count; ++c) {
    std::set<Coord> radii;
    while (static_cast<int>(radii.size()) < support) {
      radii.insert(static_cast<Coord>(uniform_below(rng, static_cast<std::uint64_t>(spec.random_r_max))) + 1);
    }
    std::vector<std::pair<Coord, Rational>> weights;
    for (Coord r : radii) weights.emplace_back(r, Rational(1 + static_cast<long long>(uniform_below(rng, 1000))));
    out.push_back({"random-" + std::to_string(c), LrcDistribution::from_exact(weights)});
  }
  return out;
}

/// Laws used by the game-level experiments; several only for random specs.
std::vector<NamedLambda> lambdas_for(const ExperimentConfig& c, const MetricSpace& m) {
  if (c.lambda.kind == LambdaSpec::Kind::kRandom) return random_lambdas(c.lambda, c.seed);
  if (c.lambda.kind == LambdaSpec::Kind::kPointMasses) {
    throw ConfigError("point-masses lambda is only valid for audit-b2");
  }
  LrcDistribution l = make_lambda(c.lambda, c.dim, m);
  std::string id = l.descriptor();
  return {{std::move(id), std::move(l)}};
}

GStrategy make_gstrategy(const std::string& name, int dim, const LrcDistribution& lambda,
                         std::int64_t d_max) {
  if (name == "axis") return GStrategy::axis(dim);
  if (name == "diagonal") return GStrategy::diagonal(dim);
  if (name == "dp-optimal") return optimal_g_strategy(lambda, d_max, dim, false).strategy;
  throw ConfigError("unknown game G strategy '" + name + "' (axis, diagonal, dp-optimal)");
}

std::int64_t max_d0(const ExperimentConfig& c) {
  return *std::max_element(c.d0.begin(), c.d0.end());
}

// ---------------------------------------------------------------------------

int run_route(const ExperimentConfig& c, std::ostream& out, std::ostream& summary) {
  struct Instance {
    Coord n;
    LatticePoint s, t;
  };
  auto default_source = [&](Coord n) { return LatticePoint(std::vector<Coord>(static_cast<std::size_t>(c.dim), n / 4)); };
  std::vector<Instance> instances;
  if (!c.sweep_n.empty()) {
    for (Coord n : c.sweep_n) instances.push_back({n, default_source(n), LatticePoint::origin(c.dim)});
  } else {
    instances.push_back({c.n, c.source.value_or(default_source(c.n)), c.target.value_or(LatticePoint::origin(c.dim))});
  }
  Csv csv(out);
  csv.row("n", "source", "target", "distance", "trials", "mean_hops", "stderr", "mean_lrc_uses",
          "max_hops", "ln2_distance", "hops_per_ln2");
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < instances.size(); ++k) {
    const Instance& in = instances[k];
    const MetricSpace m = make_metric(c.metric, c.dim, in.n);
    const LrcDistribution lambda = make_lambda(c.lambda, c.dim, m);
    const RoutingEstimate est = estimate_routing_time(in.s, in.t, lambda, m, c.trials,
                                                      derive_seed(c.seed, k), c.jobs);
    const double l2 = ln2(static_cast<double>(std::max<std::int64_t>(est.initial_distance, 1)));
    csv.row(static_cast<std::int64_t>(in.n), in.s, in.t, est.initial_distance, est.trials, est.mean,
            est.stderr_of_mean, est.mean_lrc_uses, est.max_hops, l2, l2 > 0 ? est.mean / l2 : 0.0);
    summary << "route " << m.describe() << " lambda=" << lambda.descriptor() << " s=" << in.s
            << " t=" << in.t << " distance=" << est.initial_distance << " mean_hops=" << str(est.mean)
            << " stderr=" << str(est.stderr_of_mean) << '\n';
    if (est.initial_distance > 1) {
      xs.push_back(l2);
      ys.push_back(est.mean);
    }
  }
  write_fit(summary, xs, ys, "mean_hops~ln2(distance)");
  return kExitOk;
}

int run_budget_game(const ExperimentConfig& c, std::ostream& out, std::ostream& summary) {
  const double b0 = c.b0.value_or(1.0);
  Csv csv(out);
  csv.row("strategy", "d0", "B0", "trials", "mean_rounds", "stderr", "max_rounds", "min_budget",
          "halving_bound", "ln2_d0");
  bool violated = false;
  std::size_t index = 0;
  for (const std::string& name : strategies_or(c, {"halving"})) {
    std::vector<double> xs, ys;
    for (std::int64_t d0 : c.d0) {
      Strategy strategy;
      if (name == "halving") {
        strategy = halving_strategy(d0);
      } else if (name == "unit") {
        strategy = unit_step_strategy();
      } else {
        throw ConfigError("unknown budget-game strategy '" + name + "' (halving, unit)");
      }
      const std::uint64_t seed = derive_seed(c.seed, index++);
      const GameEstimate est = estimate_game_rounds(d0, b0, strategy, c.trials, seed, c.jobs);
      const double log2d = std::log2(static_cast<double>(d0));
      const double bound = log2d * log2d + 2.0;
      const double l2 = ln2(static_cast<double>(d0));
      csv.row(name, d0, b0, est.trials, est.mean, est.stderr_of_mean, est.max_rounds, est.min_budget,
              bound, l2);
      const bool bad = est.min_budget < -1e-9 || est.max_rounds > d0;
      violated = violated || bad;
      summary << "budget-game strategy=" << name << " d0=" << d0 << " B0=" << str(b0)
              << " mean_rounds=" << str(est.mean) << " stderr=" << str(est.stderr_of_mean)
              << " bound(log2^2(d0)+2)=" << str(bound)
              << " within_3se=" << (est.mean <= bound + 3 * est.stderr_of_mean ? "yes" : "no")
              << " min_budget=" << str(est.min_budget) << (bad ? " VIOLATION" : "") << '\n';
      if (d0 > 1) {
        xs.push_back(l2);
        ys.push_back(est.mean);
      }
      if (!c.trajectory_out.empty() && index == 1) {
        Rng rng(derive_seed(seed, 0));
        const GameRun run = run_game(d0, b0, strategy, rng, true);
        std::ofstream traj(c.trajectory_out, std::ios::binary);
        if (!traj) throw ConfigError("cannot write " + c.trajectory_out);
        write_provenance(traj, c);
        write_trajectory_csv(traj, run.trajectory);
      }
    }
    write_fit(summary, xs, ys, name + " mean_rounds~ln2(d0)");
  }
  return violated ? kExitAuditViolation : kExitOk;
}

int run_game_g_experiment(const ExperimentConfig& c, std::ostream& out, std::ostream& summary) {
  const MetricSpace grid = MetricSpace::infinite_grid(c.dim);
  const auto lambdas = lambdas_for(c, grid);
  Csv csv(out);
  csv.row("strategy", "lambda", "d0", "trials", "mean_rounds", "stderr", "max_rounds", "expected_dp",
          "ln2_d0");
  bool violated = false;
  std::size_t index = 0;
  for (const auto& [id, lambda] : lambdas) {
    for (const std::string& name : strategies_or(c, {"axis"})) {
      const GStrategy strategy = make_gstrategy(name, c.dim, lambda, max_d0(c));
      const std::vector<double> expected = expected_rounds_dp(max_d0(c), strategy, lambda);
      std::vector<double> xs, ys;
      for (std::int64_t d0 : c.d0) {
        const std::uint64_t seed = derive_seed(c.seed, index++);
        std::vector<std::int64_t> rounds(static_cast<std::size_t>(c.trials));
        detail::parallel_for(c.trials, c.jobs, [&](std::int64_t k) {
          Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
          rounds[static_cast<std::size_t>(k)] = run_game_g(d0, strategy, lambda, rng, false).rounds;
        });
        RunningStats stats;
        std::int64_t max_rounds = 0;
        for (auto r : rounds) {
          stats.add(static_cast<double>(r));
          max_rounds = std::max(max_rounds, r);
        }
        const bool bad = max_rounds > d0;
        violated = violated || bad;
        const double l2 = ln2(static_cast<double>(d0));
        csv.row(name, id, d0, c.trials, stats.mean(), stats.stderr_of_mean(), max_rounds,
                expected[static_cast<std::size_t>(d0)], l2);
        summary << "game-g strategy=" << name << " lambda=" << id << " d0=" << d0
                << " mean_rounds=" << str(stats.mean()) << " stderr=" << str(stats.stderr_of_mean())
                << " expected_dp=" << str(expected[static_cast<std::size_t>(d0)])
                << (bad ? " VIOLATION" : "") << '\n';
        if (d0 > 1) {
          xs.push_back(l2);
          ys.push_back(stats.mean());
        }
      }
      write_fit(summary, xs, ys, name + " " + id + " mean_rounds~ln2(d0)");
    }
  }
  return violated ? kExitAuditViolation : kExitOk;
}

int run_induce_bets(const ExperimentConfig& c, std::ostream& out, std::ostream& summary) {
  const MetricSpace grid = MetricSpace::infinite_grid(c.dim);
  const auto lambdas = lambdas_for(c, grid);
  Csv csv(out);
  csv.row("D", "d", "u", "strategy", "lambda", "mode", "i", "mass", "exact");
  bool violated = false;
  std::int64_t bets = 0;
  for (const auto& [id, lambda] : lambdas) {
    for (const std::string& name : strategies_or(c, {"axis"})) {
      const GStrategy strategy = make_gstrategy(name, c.dim, lambda, c.d_max);
      for (std::int64_t d = std::max<std::int64_t>(1, c.d_min); d <= c.d_max; ++d) {
        const LatticePoint u = strategy.at(d);
        const InducedBet bet = c.exact ? induced_bet(d, u, lambda) : induced_bet_float(d, u, lambda);
        ++bets;
        if (c.exact && bet.exact_closed(1, d) != 1) violated = true;
        for (std::int64_t i = 1; i <= d; ++i) {
          const double m = bet.mass[static_cast<std::size_t>(i)];
          if (m == 0) continue;
          csv.row(c.dim, d, u, name, id, to_string(bet.mode), i, m,
                  c.exact ? swlab::to_string(bet.exact[static_cast<std::size_t>(i)]) : std::string());
        }
      }
    }
  }
  summary << "induce-bets D=" << c.dim << " bets=" << bets << " mode=" << (c.exact ? "exact" : "float")
          << (violated ? " VIOLATION: masses do not sum to 1" : "") << '\n';
  return violated ? kExitAuditViolation : kExitOk;
}

int run_audit_b2(const ExperimentConfig& c, std::ostream& out, std::ostream& summary) {
  if (c.dim < 1) throw ConfigError("D must be >= 1");
  const std::int64_t d_lo = std::max<std::int64_t>(1, c.d_min);
  const std::int64_t span = std::max<std::int64_t>(0, c.d_max - d_lo + 1);
  const bool point_masses = c.lambda.kind == LambdaSpec::Kind::kPointMasses;
  std::vector<NamedLambda> fixed;
  if (!point_masses) fixed = lambdas_for(c, MetricSpace::infinite_grid(c.dim));

  struct Chunk {
    std::ostringstream rows;
    std::int64_t configs = 0, checks = 0, violations = 0;
    std::optional<Rational> min_slack;
  };
  std::vector<Chunk> chunks(static_cast<std::size_t>(span));
  detail::parallel_for(span, c.jobs, [&](std::int64_t k) {
    const std::int64_t d = d_lo + k;
    Chunk& ch = chunks[static_cast<std::size_t>(k)];
    Csv csv(ch.rows);
    auto audit_one = [&](const LatticePoint& u, const std::string& id, const LrcDistribution& lambda) {
      const B2Report rep = audit_b2(d, u, lambda);
      ++ch.configs;
      ch.checks += static_cast<std::int64_t>(rep.rows.size());
      ch.violations += static_cast<std::int64_t>(rep.violations.size());
      if (!ch.min_slack || rep.min_slack < *ch.min_slack) ch.min_slack = rep.min_slack;
      const B2Row* worst = nullptr;
      for (const B2Row& row : rep.rows) {
        const Rational slack = row.rhs - row.lhs;
        if (c.all_rows || slack < 0) {
          csv.row(c.dim, d, u, id, row.j, row.lhs, row.rhs, slack);
        } else if (!worst || slack < worst->rhs - worst->lhs) {
          worst = &row;
        }
      }
      if (!c.all_rows && rep.ok && worst) {
        csv.row(c.dim, d, u, id, worst->j, worst->lhs, worst->rhs, worst->rhs - worst->lhs);
      }
    };
    for (const LatticePoint& u : canonical_points(c.dim, d)) {
      if (point_masses) {
        for (Coord r = 1; r < 2 * d; ++r) {
          audit_one(u, "point-mass(r=" + std::to_string(r) + ")", LrcDistribution::point_mass(r));
        }
      } else {
        for (const auto& [id, lambda] : fixed) audit_one(u, id, lambda);
      }
    }
  });
  out << "D,d,u,lambda,j,lhs,rhs,slack\n";
  std::int64_t configs = 0, checks = 0, violations = 0;
  std::optional<Rational> min_slack;
  for (Chunk& ch : chunks) {
    out << ch.rows.str();
    configs += ch.configs;
    checks += ch.checks;
    violations += ch.violations;
    if (ch.min_slack && (!min_slack || *ch.min_slack < *min_slack)) min_slack = ch.min_slack;
  }
  summary << "audit-b2 D=" << c.dim << " d=" << d_lo << ".." << c.d_max << " configurations=" << configs
          << " checks=" << checks << " violations=" << violations
          << " min_slack=" << (min_slack ? swlab::to_string(*min_slack) : "n/a") << '\n';
  return violations > 0 ? kExitAuditViolation : kExitOk;
}

int run_audit_budget(const ExperimentConfig& c, std::ostream& out, std::ostream& summary) {
  const double b0 = c.b0.value_or(21.0);
  const auto lambdas = lambdas_for(c, MetricSpace::infinite_grid(c.dim));
  Csv csv(out);
  csv.row("D", "d0", "strategy", "lambda", "B0", "trials", "min_residual", "worst_trial",
          "argmin_round", "mean_final_residual", "flagged", "invalid_bets");
  bool violated = false;
  std::size_t index = 0;
  for (const auto& [id, lambda] : lambdas) {
    for (const std::string& name : strategies_or(c, {"axis", "diagonal"})) {
      const GStrategy strategy = make_gstrategy(name, c.dim, lambda, max_d0(c));
      InducedBetTable table(strategy, lambda, BetMode::kFloat);
      table.prepare(max_d0(c));
      std::vector<Bet> bets;
      bets.reserve(static_cast<std::size_t>(max_d0(c)));
      for (std::int64_t d = 1; d <= max_d0(c); ++d) bets.push_back(table.computed(d).to_bet());
      for (std::int64_t d0 : c.d0) {
        const std::uint64_t seed = derive_seed(c.seed, index++);
        struct TrialResult {
          BudgetAuditReport report;
          std::int64_t invalid = 0;
        };
        std::vector<TrialResult> results(static_cast<std::size_t>(c.trials));
        detail::parallel_for(c.trials, c.jobs, [&](std::int64_t k) {
          Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
          const GRun run = run_game_g(d0, strategy, lambda, rng, true);
          TrialResult& res = results[static_cast<std::size_t>(k)];
          res.report = audit_budget_sufficiency(run, b0, table);
          double budget = b0;
          for (std::size_t s = 0; s < run.trajectory.size(); ++s) {
            const GRound& g = run.trajectory[s];
            if (!validate_bet(bets[static_cast<std::size_t>(g.d - 1)], GameState{g.d, budget}).ok()) {
              ++res.invalid;
            }
            budget = res.report.residuals[s];
          }
        });
        double min_residual = b0, final_sum = 0;
        std::int64_t worst = 0, argmin = 0, flagged = 0, invalid = 0;
        for (std::int64_t k = 0; k < c.trials; ++k) {
          const TrialResult& res = results[static_cast<std::size_t>(k)];
          if (res.report.min_residual < min_residual) {
            min_residual = res.report.min_residual;
            worst = k;
            argmin = res.report.argmin_round;
          }
          final_sum += res.report.final_residual;
          flagged += res.report.flagged ? 1 : 0;
          invalid += res.invalid;
        }
        const bool bad = flagged > 0 || invalid > 0;
        violated = violated || bad;
        csv.row(c.dim, d0, name, id, b0, c.trials, min_residual, worst, argmin,
                final_sum / static_cast<double>(c.trials), flagged, invalid);
        summary << "audit-budget strategy=" << name << " lambda=" << id << " d0=" << d0
                << " B0=" << str(b0) << " min_residual=" << str(min_residual) << " flagged=" << flagged
                << " invalid_bets=" << invalid << (bad ? " VIOLATION" : "") << '\n';
      }
    }
  }
  return violated ? kExitAuditViolation : kExitOk;
}

int run_optimal_g(const ExperimentConfig& c, std::ostream& out, std::ostream& summary) {
  const auto lambdas = lambdas_for(c, MetricSpace::infinite_grid(c.dim));
  Csv csv(out);
  csv.row("D", "lambda", "d", "u_opt", "T_opt", "T_axis", "T_diagonal", "holder_is_axis", "T_opt_exact");
  for (const auto& [id, lambda] : lambdas) {
    const OptimalGResult opt = optimal_g_strategy(lambda, c.d_max, c.dim, c.exact);
    const auto axis = expected_rounds_dp(c.d_max, GStrategy::axis(c.dim), lambda);
    const auto diag = expected_rounds_dp(c.d_max, GStrategy::diagonal(c.dim), lambda);
    std::int64_t axis_holder = 0;
    double max_gap = 0;
    std::int64_t first_other = 0;
    for (std::int64_t d = 1; d <= c.d_max; ++d) {
      const auto k = static_cast<std::size_t>(d);
      const LatticePoint u = opt.strategy.at(d);
      const bool is_axis = canonical_form(u) == canonical_form(GStrategy::axis(c.dim).at(d));
      axis_holder += is_axis ? 1 : 0;
      if (!is_axis && first_other == 0) first_other = d;
      max_gap = std::max(max_gap, axis[k] - opt.expected[k]);
      csv.row(c.dim, id, d, u, opt.expected[k], axis[k], diag[k], is_axis ? 1 : 0,
              c.exact ? swlab::to_string(opt.expected_exact[k]) : std::string());
    }
    summary << "optimal-g D=" << c.dim << " lambda=" << id << " d_max=" << c.d_max
            << " axis_optimal_at=" << axis_holder << "/" << c.d_max
            << " first_non_axis_d=" << (first_other ? std::to_string(first_other) : "none")
            << " max(T_axis-T_opt)=" << str(max_gap) << '\n';
  }
  return kExitOk;
}

int run_geometry_check(const ExperimentConfig& c, std::ostream& out, std::ostream& summary) {
  Csv csv(out);
  csv.row("D", "d", "u", "r", "j", "lhs", "rhs", "slack");
  std::map<Coord, GeometryRow> worst;
  auto slack_of = [](const GeometryRow& row) { return to_bigint(row.rhs) - to_bigint(row.lhs); };
  auto emit = [&](const GeometryRow& row) {
    const BigInt s = slack_of(row);
    csv.row(row.dim, row.d, row.u, row.r, row.j, to_string(row.lhs), to_string(row.rhs), s.str());
  };
  const GeometryAudit audit = audit_geometry(c.dim, c.d_min, c.d_max, [&](const GeometryRow& row) {
    if (c.all_rows || row.violated()) {
      emit(row);
      return;
    }
    auto it = worst.find(row.d);
    if (it == worst.end() || slack_of(row) < slack_of(it->second)) worst.insert_or_assign(row.d, row);
  });
  if (!c.all_rows) {
    for (const auto& [d, row] : worst) emit(row);
  }
  summary << "geometry-check D=" << c.dim << " d=" << c.d_min << ".." << c.d_max
          << " centres=" << audit.centres << " configurations=" << audit.configurations
          << " checks=" << audit.checks << " equalities=" << audit.equalities
          << " violations=" << audit.violations << '\n';
  return audit.violations > 0 ? kExitAuditViolation : kExitOk;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& kn : kKindNames) {
    if (kn.kind == kind) return kn.name;
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  for (const auto& kn : kKindNames) {
    if (name == kn.name) return kn.kind;
  }
  throw ConfigError("unknown experiment kind '" + name + "'");
}

const std::vector<std::string>& experiment_kind_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& kn : kKindNames) v.emplace_back(kn.name);
    return v;
  }();
  return names;
}

ExperimentConfig parse_config(const std::string& json_text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!kKnownKeys.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }

  ExperimentConfig c;
  if (!j.contains("experiment")) throw ConfigError("config needs an 'experiment' key");
  c.kind = parse_experiment_kind(get_as<std::string>(j["experiment"], "experiment"));
  if (c.kind == ExperimentKind::kAuditB2) c.lambda.kind = LambdaSpec::Kind::kPointMasses;
  if (c.kind == ExperimentKind::kAuditBudget) c.lambda.kind = LambdaSpec::Kind::kRandom;

  if (j.contains("D")) c.dim = static_cast<int>(get_int(j["D"], "D"));
  if (c.dim < 1) throw ConfigError("D must be >= 1");
  if (j.contains("metric")) {
    const std::string m = get_as<std::string>(j["metric"], "metric");
    if (m == "infinite-grid") c.metric = MetricKind::kInfiniteGrid;
    else if (m == "finite-grid") c.metric = MetricKind::kFiniteGrid;
    else if (m == "torus") c.metric = MetricKind::kTorus;
    else throw ConfigError("metric must be infinite-grid, finite-grid or torus");
  }
  if (j.contains("n")) c.n = get_int(j["n"], "n");
  if (j.contains("lambda")) c.lambda = parse_lambda(j["lambda"], base_dir);
  if (j.contains("sweep_n")) {
    if (!j["sweep_n"].is_array()) throw ConfigError("sweep_n must be an array");
    for (const auto& x : j["sweep_n"]) c.sweep_n.push_back(get_int(x, "sweep_n"));
  }
  if (j.contains("source")) c.source = get_point(j["source"], "source");
  if (j.contains("target")) c.target = get_point(j["target"], "target");
  if (j.contains("d0")) {
    c.d0.clear();
    if (j["d0"].is_array()) {
      for (const auto& x : j["d0"]) c.d0.push_back(get_int(x, "d0"));
    } else {
      c.d0.push_back(get_int(j["d0"], "d0"));
    }
    if (c.d0.empty()) throw ConfigError("d0 must not be empty");
  }
  for (auto d0 : c.d0) {
    if (d0 < 1) throw ConfigError("d0 must be >= 1");
  }
  if (j.contains("B0")) {
    if (!j["B0"].is_number()) throw ConfigError("B0 must be a number");
    c.b0 = j["B0"].get<double>();
    if (!(*c.b0 >= 0)) throw ConfigError("B0 must be >= 0");
  }
  if (j.contains("strategy")) c.strategies = {get_as<std::string>(j["strategy"], "strategy")};
  if (j.contains("strategies")) c.strategies = get_as<std::vector<std::string>>(j["strategies"], "strategies");
  if (j.contains("d_min")) c.d_min = get_int(j["d_min"], "d_min");
  if (j.contains("d_max")) c.d_max = get_int(j["d_max"], "d_max");
  if (j.contains("trials")) c.trials = get_int(j["trials"], "trials");
  if (c.trials < 1) throw ConfigError("trials must be >= 1");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer()) throw ConfigError("seed must be an integer");
    c.seed = j["seed"].is_number_unsigned() ? j["seed"].get<std::uint64_t>()
                                            : static_cast<std::uint64_t>(j["seed"].get<std::int64_t>());
  }
  if (j.contains("exact")) c.exact = get_as<bool>(j["exact"], "exact");
  if (j.contains("all_rows")) c.all_rows = get_as<bool>(j["all_rows"], "all_rows");
  if (j.contains("jobs")) c.jobs = static_cast<int>(get_int(j["jobs"], "jobs"));
  if (c.jobs < 1) throw ConfigError("jobs must be >= 1");
  if (j.contains("out")) c.out = get_as<std::string>(j["out"], "out");
  if (j.contains("trajectory_out")) c.trajectory_out = get_as<std::string>(j["trajectory_out"], "trajectory_out");

  for (const auto& key : kOutputKeys) j.erase(key);
  c.canonical = j.dump();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::filesystem::path(path).parent_path().string());
}

std::string apply_overrides(const std::string& json_text, const std::vector<std::string>& assignments) {
  json j;
  try {
    j = json_text.empty() ? json::object() : json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const std::string& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + a + "' is not key=value");
    const std::string key = a.substr(0, eq);
    const std::string value = a.substr(eq + 1);
    json parsed = json::parse(value, nullptr, false);
    j[key] = parsed.is_discarded() ? json(value) : parsed;
  }
  return j.dump();
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : config.canonical) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

LrcDistribution make_lambda(const LambdaSpec& spec, int dim, const MetricSpace& metric) {
  switch (spec.kind) {
    case LambdaSpec::Kind::kPower: {
      Coord r_max = 0;
      if (spec.r_max) {
        r_max = *spec.r_max;
      } else if (metric.kind() == MetricKind::kTorus) {
        r_max = metric.max_torus_radius();
      } else if (metric.kind() == MetricKind::kFiniteGrid) {
        r_max = static_cast<Coord>(dim) * (metric.side() - 1);
      } else {
        throw ConfigError("lambda.power.r_max must be given on the infinite grid");
      }
      return lrc_node_power(dim, spec.alpha, r_max);
    }
    case LambdaSpec::Kind::kTable:
      return load_lrc_table(spec.path);
    case LambdaSpec::Kind::kPairs:
      return lrc_from_table(spec.pairs);
    case LambdaSpec::Kind::kPointMass:
      return LrcDistribution::point_mass(spec.radius);
    case LambdaSpec::Kind::kPointMasses:
    case LambdaSpec::Kind::kRandom:
      break;
  }
  throw ConfigError("this lambda kind describes several laws and cannot be used here");
}

int run_experiment(const ExperimentConfig& config, std::ostream& csv, std::ostream& summary) {
  std::ostringstream body;
  int code = kExitOk;
  switch (config.kind) {
    case ExperimentKind::kRoute: code = run_route(config, body, summary); break;
    case ExperimentKind::kBudgetGame: code = run_budget_game(config, body, summary); break;
    case ExperimentKind::kGameG: code = run_game_g_experiment(config, body, summary); break;
    case ExperimentKind::kInduceBets: code = run_induce_bets(config, body, summary); break;
    case ExperimentKind::kAuditB2: code = run_audit_b2(config, body, summary); break;
    case ExperimentKind::kAuditBudget: code = run_audit_budget(config, body, summary); break;
    case ExperimentKind::kOptimalG: code = run_optimal_g(config, body, summary); break;
    case ExperimentKind::kGeometryCheck: code = run_geometry_check(config, body, summary); break;
  }
  write_provenance(csv, config);
  csv << body.str();
  return code;
}

}  // namespace swlab
