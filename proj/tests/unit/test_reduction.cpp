#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "swlab/reduction.hpp"

using namespace swlab;

namespace {

oracle::Point op(const LatticePoint& p) { return oracle::Point(p.coords().begin(), p.coords().end()); }

std::vector<std::pair<long long, oracle::Q>> as_oracle(const LrcDistribution& l) {
  std::vector<std::pair<long long, oracle::Q>> out;
  for (std::size_t k = 0; k < l.support().size(); ++k) out.emplace_back(l.support()[k], l.exact_masses()[k]);
  return out;
}

LrcDistribution mixed_law() {
  const std::vector<std::pair<Coord, Rational>> w{{1, Rational(1)}, {2, Rational(3)}, {5, Rational(2)}, {9, Rational(1)}};
  return LrcDistribution::from_exact(w);
}

}  // namespace

TEST_SUITE("reduction") {

TEST_CASE("strategies") {
  const auto axis = GStrategy::axis(3);
  CHECK(axis.at(5) == LatticePoint{5, 0, 0});
  const auto diag = GStrategy::diagonal(3);
  CHECK(diag.at(7) == LatticePoint{3, 2, 2});
  CHECK(diag.at(1) == LatticePoint{1, 0, 0});
  for (std::int64_t d = 1; d <= 50; ++d) CHECK(manhattan_norm(diag.at(d)) == d);

  const auto table = GStrategy::table({{1, 0}, {1, 1}, {0, -3}});
  CHECK(table.at(3) == LatticePoint{0, -3});
  CHECK_THROWS_AS(table.at(4), StrategyGapError);
  CHECK_THROWS_AS(GStrategy::table({{1, 0}, {1, 0}}), std::invalid_argument);
  CHECK(axis.name() == "axis");
}

TEST_CASE("induced bet examples") {
  const auto b11 = induced_bet(2, {1, 1}, LrcDistribution::point_mass(1));
  CHECK(b11.exact[1] == 1);
  CHECK(b11.exact[2] == 0);

  const auto b20 = induced_bet(2, {2, 0}, LrcDistribution::point_mass(2));
  CHECK(b20.exact[2] == Rational(1, 8));
  CHECK(b20.exact[1] == Rational(7, 8));

  for (Coord d = 1; d <= 8; ++d) {
    for (Coord r = 2 * d; r <= 2 * d + 3; ++r) {
      const auto b = induced_bet(d, GStrategy::diagonal(2).at(d), LrcDistribution::point_mass(r));
      CHECK(b.exact[1] == 1);
    }
  }
  CHECK_THROWS_AS(induced_bet(3, {1, 1}, LrcDistribution::point_mass(1)), std::invalid_argument);
  CHECK_THROWS_AS(induced_bet(0, {0, 0}, LrcDistribution::point_mass(1)), std::invalid_argument);
}

TEST_CASE("induced bets match sphere enumeration") {
  const auto law = mixed_law();
  for (int dim = 1; dim <= 3; ++dim) {
    for (Coord d = 1; d <= 9; ++d) {
      for (const auto& u : canonical_points(dim, d)) {
        const auto bet = induced_bet(d, u, law);
        const auto ref = oracle::progress_law(op(u), as_oracle(law));
        for (Coord i = 1; i <= d; ++i) CHECK(bet.exact[static_cast<std::size_t>(i)] == ref[static_cast<std::size_t>(i)]);
        Rational total = 0;
        for (const auto& m : bet.exact) total += m;
        CHECK(total == 1);
        const auto fl = induced_bet_float(d, u, law);
        for (Coord i = 1; i <= d; ++i) {
          CHECK(fl.mass[static_cast<std::size_t>(i)] ==
                doctest::Approx(static_cast<double>(ref[static_cast<std::size_t>(i)])).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("big steps need a radius in [2, 2d)") {
  for (Coord d = 2; d <= 12; ++d) {
    for (Coord r = 1; r <= 2 * d + 2; ++r) {
      const auto b = induced_bet(d, {d - d / 3, d / 3}, LrcDistribution::point_mass(r));
      const bool can = r >= 2 && r < 2 * d;
      if (!can) CHECK(b.exact_closed(2, d) == 0);
    }
  }
}

TEST_CASE("top masses are dominated by the law on large radii") {
  const auto law = mixed_law();
  for (int dim = 2; dim <= 3; ++dim) {
    for (Coord d = 3; d <= 12; ++d) {
      for (const auto& u : canonical_points(dim, d)) {
        const auto bet = induced_bet(d, u, law);
        for (Coord dp = 1; dp <= d - 2; ++dp) {
          Rational tail = 0;
          for (std::size_t k = 0; k < law.support().size(); ++k) {
            const Coord r = law.support()[k];
            if (r >= d - dp && r < 2 * d) tail += law.exact_masses()[k];
          }
          CHECK(bet.exact_closed(d - dp, d) <= tail);
        }
      }
    }
  }
}

TEST_CASE("Monte Carlo bets") {
  Rng rng(4);
  const auto far = induced_bet_mc(5, {5, 0}, LrcDistribution::point_mass(10), 2000, rng);
  CHECK(far.mass[1] == 1.0);
  const auto one = induced_bet_mc(5, {3, 2}, mixed_law(), 1, rng);
  int nonzero = 0;
  for (double m : one.mass) nonzero += m > 0;
  CHECK(nonzero == 1);
  const auto many = induced_bet_mc(12, {6, 6}, mixed_law(), 200000, rng);
  const auto exact = induced_bet(12, {6, 6}, mixed_law());
  CHECK(total_variation(many, exact) <= 0.01);
  CHECK(many.tv_bound > 0);
  CHECK_THROWS_AS(induced_bet_mc(5, {5, 0}, mixed_law(), 0, rng), std::invalid_argument);
}

TEST_CASE("expected rounds") {
  const auto far = expected_rounds_exact(10, GStrategy::axis(2), LrcDistribution::point_mass(20));
  for (std::int64_t d = 0; d <= 10; ++d) CHECK(far[static_cast<std::size_t>(d)] == d);

  const auto t = expected_rounds_exact(2, GStrategy::axis(2), LrcDistribution::point_mass(2));
  CHECK(t[1] == 1);
  CHECK(t[2] == Rational(15, 8));

  const auto law = mixed_law();
  for (int dim = 1; dim <= 3; ++dim) {
    const auto strat = GStrategy::diagonal(dim);
    const auto ex = expected_rounds_exact(12, strat, law);
    const auto ref = oracle::game_expected_rounds(12, [&](long long d) { return op(strat.at(d)); }, as_oracle(law));
    const auto fl = expected_rounds_dp(12, strat, law);
    for (std::size_t d = 0; d <= 12; ++d) {
      CHECK(ex[d] == ref[d]);
      CHECK(fl[d] == doctest::Approx(static_cast<double>(ex[d])).epsilon(1e-12));
    }
  }
}

TEST_CASE("game G simulation") {
  Rng rng(6);
  const auto law = mixed_law();
  CHECK(run_game_g(1, GStrategy::axis(2), law, rng).rounds == 1);
  CHECK(run_game_g(9, GStrategy::axis(2), LrcDistribution::point_mass(18), rng).rounds == 9);

  const GRun run = run_game_g(40, GStrategy::diagonal(2), law, rng);
  std::int64_t d = 40;
  for (const GRound& g : run.trajectory) {
    CHECK(g.d == d);
    CHECK(manhattan_norm(g.u) == d);
    CHECK(g.i >= 1);
    CHECK(g.i == d - std::min<std::int64_t>(manhattan_norm(g.v), d - 1));
    d -= g.i;
  }
  CHECK(d == 0);
  CHECK_THROWS_AS(run_game_g(4, GStrategy::table({{1, 0}, {2, 0}}), law, rng), StrategyGapError);

  // Mean rounds against the exact value.
  const auto exact = expected_rounds_exact(15, GStrategy::axis(2), law);
  double sum = 0, sq = 0;
  const int n = 20000;
  for (int k = 0; k < n; ++k) {
    const double r = static_cast<double>(run_game_g(15, GStrategy::axis(2), law, rng, false).rounds);
    sum += r;
    sq += r * r;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / (n - 1));
  CHECK(std::abs(mean - static_cast<double>(exact[15])) <= 3 * se);
}

TEST_CASE("round count distribution equals game G") {
  const auto law = mixed_law();
  for (const auto& strat : {GStrategy::axis(2), GStrategy::diagonal(2), GStrategy::diagonal(3)}) {
    InducedBetTable table(strat, law, BetMode::kExact);
    const auto dist = round_count_distribution(14, table);
    const auto ref = oracle::game_rounds_distribution(14, [&](long long d) { return op(strat.at(d)); }, as_oracle(law));
    REQUIRE(dist.size() == ref.size());
    for (std::size_t k = 0; k < dist.size(); ++k) CHECK(dist[k] == ref[k]);
  }
  InducedBetTable floaty(GStrategy::axis(2), law, BetMode::kFloat);
  CHECK_THROWS_AS(round_count_distribution(5, floaty), std::invalid_argument);
}

TEST_CASE("bet tables") {
  InducedBetTable table(GStrategy::axis(2), mixed_law(), BetMode::kExact);
  CHECK_THROWS_AS(table.computed(3), std::out_of_range);
  table.prepare(6);
  CHECK(table.computed(6).d == 6);
  CHECK(table.at(6).exact == induced_bet(6, {6, 0}, mixed_law()).exact);
  CHECK_THROWS_AS(InducedBetTable(GStrategy::axis(2), mixed_law(), BetMode::kMonteCarlo), std::invalid_argument);
}

TEST_CASE("optimal strategy") {
  const auto one = optimal_g_strategy(mixed_law(), 12, 1, true);
  const auto dp = expected_rounds_exact(12, GStrategy::axis(1), mixed_law());
  for (std::size_t d = 0; d <= 12; ++d) CHECK(one.expected_exact[d] == dp[d]);

  const auto two = optimal_g_strategy(LrcDistribution::point_mass(2), 2, 2, true);
  CHECK(two.strategy.at(2) == LatticePoint{0, 2});
  CHECK(two.expected_exact[2] == Rational(15, 8));

  const auto law = lrc_node_power(2, 2, 30);
  const auto opt = optimal_g_strategy(law, 20, 2, false);
  const auto axis = expected_rounds_dp(20, GStrategy::axis(2), law);
  const auto diag = expected_rounds_dp(20, GStrategy::diagonal(2), law);
  for (std::size_t d = 1; d <= 20; ++d) {
    CHECK(opt.expected[d] <= axis[d] + 1e-12);
    CHECK(opt.expected[d] <= diag[d] + 1e-12);
  }
  // The returned table reproduces its own value.
  const auto again = expected_rounds_dp(20, opt.strategy, law);
  for (std::size_t d = 1; d <= 20; ++d) CHECK(again[d] == doctest::Approx(opt.expected[d]).epsilon(1e-12));

  // Exact and float searches agree.
  const auto exact = optimal_g_strategy(law, 16, 2, true);
  for (std::int64_t d = 1; d <= 16; ++d) {
    CHECK(static_cast<double>(exact.expected_exact[static_cast<std::size_t>(d)]) ==
          doctest::Approx(opt.expected[static_cast<std::size_t>(d)]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(optimal_g_strategy(law, kExactOptimalLimit + 1, 2, true), std::invalid_argument);
  CHECK_THROWS_AS(optimal_g_strategy(law, 5, 4, false), std::invalid_argument);
}

TEST_CASE("budget audit") {
  GRun ones;
  for (std::int64_t d = 5; d >= 1; --d) {
    ones.rounds++;
    ones.trajectory.push_back({d, {d, 0}, {d + 20, 0}, 1});
  }
  InducedBetTable table(GStrategy::axis(2), mixed_law(), BetMode::kFloat);
  const auto rep = audit_budget_sufficiency(ones, 21, table);
  CHECK(rep.min_residual == 21);
  CHECK(rep.final_residual == 21);
  CHECK_FALSE(rep.flagged);

  GRun jump;
  jump.rounds = 1;
  jump.trajectory.push_back({6, {6, 0}, {0, 0}, 6});
  const auto rj = audit_budget_sufficiency(jump, 21, table);
  const double top = table.at(6).mass_closed(4, 6);
  CHECK(rj.final_residual == doctest::Approx(21 - top));
  CHECK(rj.final_residual >= 20);
  CHECK(rj.argmin_round == 1);
}

TEST_CASE("tail constraint audit") {
  const auto trivial = audit_b2(2, {2, 0}, LrcDistribution::point_mass(2));
  CHECK(trivial.ok);
  CHECK(trivial.rows.size() == 1);

  for (int dim = 2; dim <= 3; ++dim) {
    for (Coord d = 3; d <= 12; ++d) {
      for (const auto& u : canonical_points(dim, d)) {
        for (Coord r = 1; r < 2 * d; ++r) {
          const auto rep = audit_b2(d, u, LrcDistribution::point_mass(r));
          CHECK(rep.ok);
          // Same check from the enumerated law.
          const auto ref = oracle::progress_law(op(u), {{r, oracle::Q(1)}});
          const Coord ds = d - d / 2;
          oracle::Q top = 0;
          for (Coord i = d - ds + 1; i <= d; ++i) top += ref[static_cast<std::size_t>(i)];
          oracle::Q lhs = 0;
          for (Coord j = 1; j <= ds; ++j) {
            lhs += ref[static_cast<std::size_t>(d - j + 1)];
            CHECK(lhs * ds <= 2 * j * top);
            CHECK(rep.rows[static_cast<std::size_t>(j - 1)].lhs == lhs);
          }
        }
        CHECK(audit_b2(d, u, mixed_law()).ok);
      }
    }
  }
}

}  // TEST_SUITE
