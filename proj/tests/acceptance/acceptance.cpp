// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "../unit/oracles.hpp"
#include "swlab/augmentation.hpp"
#include "swlab/budget_game.hpp"
#include "swlab/greedy_routing.hpp"
#include "swlab/lattice.hpp"
#include "swlab/reduction.hpp"
#include "swlab/stats.hpp"

using namespace swlab;

namespace {

int failures = 0;

// Shared by every Monte Carlo suite for criterion 5.
struct MonteCarloLedger {
  double min_budget = 1e300;
  std::int64_t runs = 0;
  std::int64_t termination_violations = 0;
  std::int64_t budget_violations = 0;

  void game(std::int64_t d0, const GameEstimate& e) {
    runs += e.trials;
    min_budget = std::min(min_budget, e.min_budget);
    if (e.min_budget < -1e-9) ++budget_violations;
    for (std::int64_t r : e.rounds) termination_violations += r > d0;
  }
  void g_run(std::int64_t d0, std::int64_t rounds) {
    ++runs;
    termination_violations += rounds > d0;
  }
} mc;

void report(int id, const std::string& name, bool pass, const std::string& detail, double seconds) {
  if (!pass) ++failures;
  std::printf("%s %2d %-28s %s (%.1fs)\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
}

template <class Fn>
void criterion(int id, const std::string& name, Fn fn) {
  const auto start = std::chrono::steady_clock::now();
  std::string detail;
  bool pass = false;
  try {
    pass = fn(detail);
  } catch (const std::exception& e) {
    detail += std::string(" exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report(id, name, pass, detail, secs);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

oracle::Point op(const LatticePoint& p) { return oracle::Point(p.coords().begin(), p.coords().end()); }

std::vector<std::pair<long long, oracle::Q>> as_oracle(const LrcDistribution& l) {
  std::vector<std::pair<long long, oracle::Q>> out;
  for (std::size_t k = 0; k < l.support().size(); ++k) out.emplace_back(l.support()[k], l.exact_masses()[k]);
  return out;
}

// Random finite-support law with radii in [1, r_max] and integer weights.
LrcDistribution random_law(Rng& rng, int support, Coord r_max) {
  std::vector<std::pair<Coord, Rational>> w;
  for (int k = 0; k < support; ++k) {
    const Coord r = 1 + static_cast<Coord>(uniform_below(rng, static_cast<std::uint64_t>(r_max)));
    w.emplace_back(r, Rational(1 + static_cast<long long>(uniform_below(rng, 1000))));
  }
  return LrcDistribution::from_exact(w);
}

std::vector<oracle::Point> points_with_norm_at_most(int dim, long long d) {
  std::vector<oracle::Point> out;
  oracle::Point x(static_cast<std::size_t>(dim), -d);
  while (true) {
    if (oracle::norm(x) <= d) out.push_back(x);
    std::size_t k = 0;
    while (k < x.size() && x[k] == d) x[k++] = -d;
    if (k == x.size()) break;
    ++x[k];
  }
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool c1(std::string& detail) {
  std::int64_t checks = 0, violations = 0, configs = 0;
  for (int dim : {2, 3}) {
    const GeometryAudit a = audit_geometry(dim, 3, 40);
    checks += a.checks;
    violations += a.violations;
    configs += a.configurations;
  }
  detail = fmt("D in {2,3}, d=3..40: %lld configurations, %lld checks, %lld violations", (long long)configs,
               (long long)checks, (long long)violations);
  return violations == 0 && checks > 0;
}

bool c2(std::string& detail) {
  const Count a = count_sphere_ball({9, 0}, 10, 4);
  const Count b = count_sphere_ball({9, 0}, 10, 8);
  // Independent count by enumeration.
  const long long ea = oracle::sphere_ball({9, 0}, 10, 4);
  const long long eb = oracle::sphere_ball({9, 0}, 10, 8);
  detail = fmt("j=4 -> %llu, j=8 -> %llu (enumeration %lld, %lld)", (unsigned long long)a, (unsigned long long)b, ea, eb);
  return a == 5 && b == 9 && ea == 5 && eb == 9;
}

bool c3(std::string& detail) {
  std::int64_t compared = 0, mismatches = 0;
  for (int dim = 1; dim <= 3; ++dim) {
    for (long long r = 0; r <= 24; ++r) {
      ++compared;
      mismatches += static_cast<long long>(sphere_size(dim, r)) != oracle::sphere_size_by_box(dim, r);
    }
    for (const auto& u : points_with_norm_at_most(dim, 12)) {
      const LatticePoint lu(std::vector<Coord>(u.begin(), u.end()));
      for (long long r = 0; r <= 24; ++r) {
        const auto hist = oracle::norm_histogram(u, r);
        const long long top = oracle::norm(u) + r;
        long long running = 0;
        for (long long m = 0; m <= top + 1; ++m) {
          const long long expect = hist.count(m) ? hist.at(m) : 0;
          mismatches += static_cast<long long>(count_sphere_sphere(lu, r, m)) != expect;
          running += expect;
          mismatches += static_cast<long long>(count_sphere_ball(lu, r, m + 1)) != running;
          compared += 2;
        }
      }
    }
  }
  detail = fmt("D<=3, |u|<=12, r<=24: %lld comparisons, %lld mismatches", (long long)compared, (long long)mismatches);
  return mismatches == 0;
}

bool c4(std::string& detail) {
  bool ok = true;
  std::vector<double> ratio;
  for (int e : {8, 12, 16}) {
    const std::int64_t d0 = std::int64_t{1} << e;
    const GameEstimate est = estimate_game_rounds(d0, 1.0, halving_strategy(d0), 100000, 0xC4 + e);
    mc.game(d0, est);
    const double bound = static_cast<double>(e) * e + 2;
    const bool pass = est.mean <= bound + 3 * est.stderr_of_mean;
    ok = ok && pass;
    const double ln = std::log(static_cast<double>(d0));
    ratio.push_back(est.mean / (ln * ln));
    detail += fmt("d0=2^%d mean=%.3f se=%.3f bound=%.0f; ", e, est.mean, est.stderr_of_mean, bound);
  }
  detail += fmt("mean/ln^2 in [%.3f, %.3f]", *std::min_element(ratio.begin(), ratio.end()),
                *std::max_element(ratio.begin(), ratio.end()));
  return ok;
}

bool c6(std::string& detail) {
  Rng rng(0xC6);
  std::int64_t trajectories = 0, flagged = 0;
  double worst = 1e300;
  const double b0 = 21;
  for (int law_id = 0; law_id < 8; ++law_id) {
    const int support = 1 + static_cast<int>(uniform_below(rng, 6));
    const Coord r_max = law_id % 2 == 0 ? 2000 : 64;
    const LrcDistribution law = random_law(rng, support, r_max);

    struct Plan {
      GStrategy strategy;
      std::int64_t d0;
      std::int64_t trials;
    };
    std::vector<Plan> plans{{GStrategy::axis(2), 1000, 6000}, {GStrategy::diagonal(2), 1000, 6000}};
    const std::int64_t dp_d0 = 200;
    plans.push_back({optimal_g_strategy(law, dp_d0, 2).strategy, dp_d0, 2000});

    for (const Plan& p : plans) {
      InducedBetTable table(p.strategy, law, BetMode::kFloat);
      table.prepare(p.d0);
      for (std::int64_t k = 0; k < p.trials; ++k) {
        Rng trial(derive_seed(0xC6 + static_cast<std::uint64_t>(law_id), static_cast<std::uint64_t>(trajectories)));
        const GRun run = run_game_g(p.d0, p.strategy, law, trial);
        mc.g_run(p.d0, run.rounds);
        const BudgetAuditReport rep = audit_budget_sufficiency(run, b0, table);
        worst = std::min(worst, rep.min_residual);
        flagged += rep.min_residual < 1;
        ++trajectories;
      }
    }
  }
  detail = fmt("%lld trajectories over 8 laws x {axis, diagonal, dp-optimal}, B0=21: min prefix residual %.4f, %lld below 1",
               (long long)trajectories, worst, (long long)flagged);
  return trajectories >= 100000 && flagged == 0;
}

bool c7(std::string& detail) {
  std::int64_t audits = 0, violations = 0;
  for (int dim : {2, 3}) {
    for (Coord d = 3; d <= 40; ++d) {
      for (const auto& u : canonical_points(dim, d)) {
        for (Coord r = 1; r < 2 * d; ++r) {
          const B2Report rep = audit_b2(d, u, LrcDistribution::point_mass(r));
          ++audits;
          violations += static_cast<std::int64_t>(rep.violations.size());
        }
      }
    }
  }
  detail = fmt("D in {2,3}, d=3..40, r in [1,2d): %lld exact audits, %lld violated j", (long long)audits,
               (long long)violations);
  return violations == 0;
}

bool c8(std::string& detail) {
  // Exact: budget game driven by the induced bets against game G by enumeration.
  std::int64_t compared = 0, mismatches = 0;
  Rng rng(0xC8);
  const std::vector<LrcDistribution> laws{lrc_node_power(2, 2, 60), random_law(rng, 3, 40), random_law(rng, 5, 20)};
  for (std::size_t li = 0; li < laws.size(); ++li) {
    for (int dim : {2, 3}) {
      if (dim == 3 && li == 0) continue;
      for (const auto& strat : {GStrategy::axis(dim), GStrategy::diagonal(dim)}) {
        InducedBetTable table(strat, laws[li], BetMode::kExact);
        const auto holder = [&](long long d) { return op(strat.at(d)); };
        const auto rows = oracle::game_rounds_distributions(30, holder, as_oracle(laws[li]));
        for (std::int64_t d0 = 1; d0 <= 30; ++d0) {
          ++compared;
          mismatches += round_count_distribution(d0, table) != rows[static_cast<std::size_t>(d0)];
        }
      }
    }
  }

  // Monte Carlo at d0 = 1000.
  const std::int64_t d0 = 1000;
  const LrcDistribution law = lrc_node_power(2, 2, 2000);
  const GStrategy strat = GStrategy::axis(2);
  InducedBetTable table(strat, law, BetMode::kFloat);
  table.prepare(d0);
  const Strategy induced = [&table](const GameState& s) { return table.computed(s.d).to_bet(); };
  const int n = 4000;
  std::vector<double> g, budget;
  for (int k = 0; k < n; ++k) {
    Rng r1(derive_seed(0xC8A, static_cast<std::uint64_t>(k)));
    const GRun run = run_game_g(d0, strat, law, r1, false);
    mc.g_run(d0, run.rounds);
    g.push_back(static_cast<double>(run.rounds));
  }
  const GameEstimate est = estimate_game_rounds(d0, 1e6, induced, n, 0xC8B);
  mc.game(d0, est);
  for (std::int64_t r : est.rounds) budget.push_back(static_cast<double>(r));
  const KsResult ks = ks_two_sample(g, budget);
  detail = fmt("exact: %lld distributions, %lld mismatches; game G vs induced budget game at d0=1000: KS D=%.4f p=%.3f", (long long)compared,
               (long long)mismatches, ks.statistic, ks.p_value);
  return mismatches == 0 && ks.p_value >= 0.01;
}

bool c9(std::string& detail) {
  double worst = 0;
  std::int64_t bets = 0;
  Rng rng(0xC9);
  const std::vector<LrcDistribution> laws{lrc_node_power(2, 2, 100), random_law(rng, 4, 100)};
  for (const auto& law : laws) {
    for (std::int64_t d = 1; d <= 50; ++d) {
      for (const auto& strat : {GStrategy::axis(2), GStrategy::diagonal(2)}) {
        const LatticePoint u = strat.at(d);
        const InducedBet mc_bet = induced_bet_mc(d, u, law, 1000000, rng);
        worst = std::max(worst, total_variation(mc_bet, induced_bet(d, u, law)));
        ++bets;
      }
    }
  }
  const bool tv_ok = worst <= 0.01;
  detail = fmt("%lld bets, max TV %.5f", (long long)bets, worst);

  bool route_ok = true;
  const std::vector<std::pair<std::int64_t, LrcDistribution>> cases{
      {8, LrcDistribution::point_mass(4)}, {60, lrc_node_power(1, 1, 120)}, {200, lrc_node_power(1, 1, 400)},
      {100, random_law(rng, 3, 150)}};
  for (const auto& [s, law] : cases) {
    const RoutingEstimate est =
        estimate_routing_time({s}, {0}, law, MetricSpace::infinite_grid(1), 100000, 0xC9 + static_cast<std::uint64_t>(s));
    const double dp = expected_rounds_dp(s, GStrategy::axis(1), law)[static_cast<std::size_t>(s)];
    const double z = std::abs(est.mean - dp) / est.stderr_of_mean;
    route_ok = route_ok && z <= 3;
    detail += fmt("; D=1 s=%lld mean=%.3f dp=%.3f z=%.2f", (long long)s, est.mean, dp, z);
  }
  return tv_ok && route_ok;
}

bool c10(std::string& detail) {
  // Band pinned before running.
  constexpr double kBandLow = 1.0, kBandHigh = 2.0;
  std::vector<double> x, y, ratio;
  for (int e = 6; e <= 10; ++e) {
    const Coord n = Coord{1} << e;
    const MetricSpace torus = MetricSpace::torus(2, n);
    const auto law = lrc_node_power(2, 2, torus.max_torus_radius());
    const RoutingEstimate est = estimate_routing_time({n / 4, n / 4}, {0, 0}, law, torus, 10000, 0x10A + e);
    const double ln = std::log(static_cast<double>(est.initial_distance));
    x.push_back(ln * ln);
    y.push_back(est.mean);
    ratio.push_back(est.mean / (ln * ln));
    detail += fmt("n=%lld hops=%.2f; ", (long long)n, est.mean);
  }
  const LinearFit fit = fit_least_squares(x, y);
  const double lo = *std::min_element(ratio.begin(), ratio.end());
  const double hi = *std::max_element(ratio.begin(), ratio.end());
  detail += fmt("slope=%.4f R2=%.4f hops/ln^2 in [%.3f, %.3f] (band [%.1f, %.1f])", fit.slope, fit.r_squared, lo, hi,
                kBandLow, kBandHigh);
  return fit.r_squared >= 0.98 && fit.slope > 0 && lo >= kBandLow && hi <= kBandHigh;
}

bool c11(std::string& detail) {
  std::vector<double> zs{1.5, 2.0};
  for (int k = 0; k < 200; ++k) zs.push_back(std::pow(10.0, 6.0 * k / 199.0));
  std::int64_t points = 0, violations = 0;
  double worst = 1e300;
  for (double z : zs) {
    const double lz = std::log(z);
    for (int k = 0; k <= 100; ++k) {
      const double x = 0.005 * k;
      const double lhs = std::log(z) + std::log1p(-x);
      const double direct = lhs * lhs - lz * lz + 3 * x * lz;
      const double lib = log_square_shrink_gap(z, x);
      const double tol = 1e-12 * (1 + lz * lz);
      violations += direct < -tol || lib < -tol;
      worst = std::min({worst, direct, lib});
      ++points;
    }
  }
  detail = fmt("%lld grid points, min gap %.3e, %lld violations", (long long)points, worst, (long long)violations);
  return violations == 0;
}

bool c5(std::string& detail) {
  // An extra suite over budgets and strategies on top of the runs above.
  for (double b0 : {0.0, 0.25, 1.0, 4.0}) {
    for (std::int64_t d0 : {2, 3, 17, 1000, 1 << 14}) {
      mc.game(d0, estimate_game_rounds(d0, b0, halving_strategy(d0), 2000, 0xC5 + static_cast<std::uint64_t>(d0)));
    }
  }
  mc.game(500, estimate_game_rounds(500, 1.0, unit_step_strategy(), 200, 0xC5));
  detail = fmt("%lld runs, min budget %.3e, %lld budget violations, %lld runs over d0", (long long)mc.runs,
               mc.min_budget, (long long)mc.budget_violations, (long long)mc.termination_violations);
  return mc.budget_violations == 0 && mc.termination_violations == 0;
}

bool c12(std::string& detail) {
#ifdef SWLAB_CLI_PATH
  const auto dir = std::filesystem::temp_directory_path() / "swlab_acceptance";
  std::filesystem::create_directories(dir);
  const std::vector<std::string> suites{
      "route --seed 3 --trials 300 --set n=128 --set 'source=[32,32]'",
      "route --seed 3 --trials 100 --set 'sweep_n=[64,128]' --jobs 2",
      "budget-game --seed 4 --trials 500 --set 'd0=[256,4096]'",
      "game-g --seed 5 --trials 200 --set d0=300 --set 'lambda={\"power\":{\"r_max\":600}}'",
      "induce-bets --seed 6 --trials 20000 --set d_max=12 --set 'lambda={\"power\":{\"r_max\":30}}'",
      "audit-b2 --set d_max=10",
      "audit-budget --seed 7 --trials 200 --set d0=100",
      "optimal-g --set d_max=40 --set 'lambda={\"power\":{\"r_max\":80}}'",
      "geometry-check --set d_max=12",
  };
  std::int64_t differing = 0, failed = 0;
  for (std::size_t k = 0; k < suites.size(); ++k) {
    std::string out[2];
    for (int rep = 0; rep < 2; ++rep) {
      const auto path = dir / ("suite" + std::to_string(k) + "_" + std::to_string(rep) + ".csv");
      std::filesystem::remove(path);
      const std::string cmd =
          std::string(SWLAB_CLI_PATH) + " " + suites[k] + " --out " + path.string() + " >/dev/null 2>&1";
      const int status = std::system(cmd.c_str());
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) ++failed;
      out[rep] = slurp(path);
    }
    if (out[0].empty() || out[0] != out[1]) ++differing;
  }
  detail = fmt("%zu CLI suites run twice: %lld differ, %lld nonzero exits", suites.size(), (long long)differing,
               (long long)failed);
  return differing == 0 && failed == 0;
#else
  detail = "CLI not built";
  return false;
#endif
}

}  // namespace

int main(int argc, char** argv) {
  // Optional filter: list of criterion numbers to run.
  std::vector<int> only;
  for (int k = 1; k < argc; ++k) only.push_back(std::atoi(argv[k]));
  const auto want = [&](int id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };

  if (want(1)) criterion(1, "geometry audit", c1);
  if (want(2)) criterion(2, "figure counts", c2);
  if (want(3)) criterion(3, "counting oracles", c3);
  if (want(4)) criterion(4, "halving bound", c4);
  if (want(6)) criterion(6, "budget sufficiency audit", c6);
  if (want(7)) criterion(7, "induced-bet validity", c7);
  if (want(8)) criterion(8, "simulation fidelity", c8);
  if (want(9)) criterion(9, "Monte Carlo vs exact", c9);
  if (want(10)) criterion(10, "routing growth", c10);
  if (want(11)) criterion(11, "log-square inequality", c11);
  // Runs last: it collects every Monte Carlo suite above.
  if (want(5)) criterion(5, "budget and termination", c5);
  if (want(12)) criterion(12, "determinism", c12);

  std::printf("%s\n", failures == 0 ? "ALL PASS" : "SOME CRITERIA FAILED");
  return failures == 0 ? 0 : 1;
}
