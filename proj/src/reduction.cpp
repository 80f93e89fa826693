#include "swlab/reduction.hpp"

#include <algorithm>
#include <cmath>

namespace swlab {

// ---------------------------------------------------------------------------
// Strategies

GStrategy GStrategy::axis(int dim) {
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  return GStrategy(GStrategyKind::kAxis, dim);
}

GStrategy GStrategy::diagonal(int dim) {
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  return GStrategy(GStrategyKind::kDiagonal, dim);
}

GStrategy GStrategy::table(std::vector<LatticePoint> points, GStrategyKind kind) {
  if (points.empty()) throw std::invalid_argument("strategy table is empty");
  GStrategy s(kind, points.front().dim());
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (points[k].dim() != s.dim_) throw std::invalid_argument("strategy table mixes dimensions");
    if (manhattan_norm(points[k]) != static_cast<Coord>(k + 1)) {
      throw std::invalid_argument("strategy table entry for d=" + std::to_string(k + 1) +
                                  " has norm " + std::to_string(manhattan_norm(points[k])));
    }
  }
  s.table_ = std::move(points);
  return s;
}

bool GStrategy::defined_at(std::int64_t d) const {
  if (d < 1) return false;
  if (kind_ == GStrategyKind::kAxis || kind_ == GStrategyKind::kDiagonal) return true;
  return d <= static_cast<std::int64_t>(table_.size());
}

LatticePoint GStrategy::at(std::int64_t d) const {
  if (!defined_at(d)) {
    throw StrategyGapError(name() + " strategy is not defined at d=" + std::to_string(d));
  }
  std::vector<Coord> c(static_cast<std::size_t>(dim_), 0);
  switch (kind_) {
    case GStrategyKind::kAxis:
      c[0] = d;
      return LatticePoint(std::move(c));
    case GStrategyKind::kDiagonal:
      for (int k = 0; k < dim_; ++k) c[static_cast<std::size_t>(k)] = d / dim_ + (k < d % dim_ ? 1 : 0);
      return LatticePoint(std::move(c));
    default:
      return table_[static_cast<std::size_t>(d - 1)];
  }
}

std::string GStrategy::name() const {
  switch (kind_) {
    case GStrategyKind::kAxis: return "axis";
    case GStrategyKind::kDiagonal: return "diagonal";
    case GStrategyKind::kTable: return "table";
    case GStrategyKind::kDpOptimal: return "dp-optimal";
  }
  return "unknown";
}

std::string to_string(BetMode mode) {
  switch (mode) {
    case BetMode::kExact: return "exact";
    case BetMode::kFloat: return "float";
    case BetMode::kMonteCarlo: return "monte-carlo";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Induced bets

Bet InducedBet::to_bet() const {
  std::vector<std::pair<std::int64_t, double>> entries;
  for (std::int64_t i = 1; i <= d; ++i) {
    const double m = mass[static_cast<std::size_t>(i)];
    if (m > 0) entries.emplace_back(i, m);
  }
  return Bet(d, std::move(entries));
}

Rational InducedBet::exact_closed(std::int64_t a, std::int64_t b) const {
  if (exact.empty()) throw std::logic_error("induced bet has no exact masses");
  Rational s = 0;
  for (std::int64_t i = std::max<std::int64_t>(a, 1); i <= std::min(b, d); ++i) {
    s += exact[static_cast<std::size_t>(i)];
  }
  return s;
}

double InducedBet::mass_closed(std::int64_t a, std::int64_t b) const {
  double s = 0;
  for (std::int64_t i = std::max<std::int64_t>(a, 1); i <= std::min(b, d); ++i) {
    s += mass[static_cast<std::size_t>(i)];
  }
  return s;
}

namespace {

void require_holder(std::int64_t d, const LatticePoint& u) {
  if (d < 1) throw std::invalid_argument("induced bet needs d >= 1");
  if (manhattan_norm(u) != d) {
    throw std::invalid_argument("holder " + to_string(u) + " does not have norm " + std::to_string(d));
  }
}

// Radii that can reach norm <= d-2: |d - r| <= d - 2, i.e. 2 <= r <= 2d - 2.
bool useful_radius(Coord r, std::int64_t d) { return r >= 2 && r <= 2 * d - 2; }

}  // namespace

InducedBet induced_bet(std::int64_t d, const LatticePoint& u, const LrcDistribution& lambda) {
  require_holder(d, u);
  InducedBet bet;
  bet.d = d;
  bet.mode = BetMode::kExact;
  bet.exact.assign(static_cast<std::size_t>(d) + 1, Rational(0));
  if (d >= 2) {
    SphereNormProfile profile(u, d - 2);
    const auto& support = lambda.support();
    for (std::size_t k = 0; k < support.size(); ++k) {
      const Coord r = support[k];
      if (!useful_radius(r, d)) continue;
      const auto& counts = profile.counts(r);
      const Rational weight = lambda.exact_masses()[k] / to_rational(sphere_size(u.dim(), r));
      for (Coord m = 0; m <= d - 2; ++m) {
        const Count c = counts[static_cast<std::size_t>(m)];
        if (c != 0) bet.exact[static_cast<std::size_t>(d - m)] += weight * to_rational(c);
      }
    }
  }
  Rational big = 0;
  for (std::int64_t i = 2; i <= d; ++i) big += bet.exact[static_cast<std::size_t>(i)];
  bet.exact[1] = 1 - big;
  bet.mass.resize(bet.exact.size());
  for (std::size_t i = 0; i < bet.exact.size(); ++i) bet.mass[i] = static_cast<double>(bet.exact[i]);
  return bet;
}

InducedBet induced_bet_float(std::int64_t d, const LatticePoint& u, const LrcDistribution& lambda) {
  require_holder(d, u);
  InducedBet bet;
  bet.d = d;
  bet.mode = BetMode::kFloat;
  bet.mass.assign(static_cast<std::size_t>(d) + 1, 0.0);
  if (d >= 2) {
    SphereNormProfile profile(u, d - 2);
    const auto& support = lambda.support();
    for (std::size_t k = 0; k < support.size(); ++k) {
      const Coord r = support[k];
      if (!useful_radius(r, d)) continue;
      const auto& counts = profile.counts(r);
      const double weight = lambda.masses()[k] / to_double(sphere_size(u.dim(), r));
      for (Coord m = 0; m <= d - 2; ++m) {
        const Count c = counts[static_cast<std::size_t>(m)];
        if (c != 0) bet.mass[static_cast<std::size_t>(d - m)] += weight * to_double(c);
      }
    }
  }
  double big = 0;
  for (std::int64_t i = 2; i <= d; ++i) big += bet.mass[static_cast<std::size_t>(i)];
  bet.mass[1] = 1.0 - big;
  return bet;
}

InducedBet induced_bet_mc(std::int64_t d, const LatticePoint& u, const LrcDistribution& lambda,
                          std::int64_t trials, Rng& rng) {
  require_holder(d, u);
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const MetricSpace grid = MetricSpace::infinite_grid(u.dim());
  std::vector<std::int64_t> hits(static_cast<std::size_t>(d) + 1, 0);
  for (std::int64_t t = 0; t < trials; ++t) {
    const LatticePoint v = *sample_contact(u, lambda, grid, rng);
    const std::int64_t next = std::min<std::int64_t>(manhattan_norm(v), d - 1);
    ++hits[static_cast<std::size_t>(d - next)];
  }
  InducedBet bet;
  bet.d = d;
  bet.mode = BetMode::kMonteCarlo;
  bet.trials = trials;
  bet.mass.assign(hits.size(), 0.0);
  const double n = static_cast<double>(trials);
  double tv = 0;
  for (std::size_t i = 1; i < hits.size(); ++i) {
    const double p = static_cast<double>(hits[i]) / n;
    bet.mass[i] = p;
    tv += std::sqrt(p * (1 - p) / n);
  }
  bet.tv_bound = 0.5 * tv;
  return bet;
}

double total_variation(const InducedBet& a, const InducedBet& b) {
  if (a.d != b.d) throw std::invalid_argument("total variation of bets with different d");
  double s = 0;
  for (std::size_t i = 1; i < a.mass.size(); ++i) s += std::abs(a.mass[i] - b.mass[i]);
  return 0.5 * s;
}

InducedBetTable::InducedBetTable(GStrategy strategy, LrcDistribution lambda, BetMode mode)
    : strategy_(std::move(strategy)), lambda_(std::move(lambda)), mode_(mode) {
  if (mode == BetMode::kMonteCarlo) throw std::invalid_argument("bet table needs exact or float mode");
}

const InducedBet& InducedBetTable::at(std::int64_t d) {
  if (d < 1) throw std::invalid_argument("bet table lookup needs d >= 1");
  if (static_cast<std::int64_t>(bets_.size()) <= d) bets_.resize(static_cast<std::size_t>(d) + 1);
  auto& slot = bets_[static_cast<std::size_t>(d)];
  if (!slot) {
    const LatticePoint u = strategy_.at(d);
    slot = mode_ == BetMode::kExact ? induced_bet(d, u, lambda_) : induced_bet_float(d, u, lambda_);
  }
  return *slot;
}

const InducedBet& InducedBetTable::computed(std::int64_t d) const {
  if (d < 1 || d >= static_cast<std::int64_t>(bets_.size()) || !bets_[static_cast<std::size_t>(d)]) {
    throw std::out_of_range("bet for d=" + std::to_string(d) + " not prepared");
  }
  return *bets_[static_cast<std::size_t>(d)];
}

void InducedBetTable::prepare(std::int64_t d_max) {
  for (std::int64_t d = 1; d <= d_max; ++d) at(d);
}

// ---------------------------------------------------------------------------
// Game G

GRun run_game_g(std::int64_t d0, const GStrategy& strategy, const LrcDistribution& lambda,
                Rng& rng, bool record_trajectory) {
  if (d0 < 1) throw std::invalid_argument("game G needs d0 >= 1");
  const MetricSpace grid = MetricSpace::infinite_grid(strategy.dim());
  GRun run;
  std::int64_t d = d0;
  while (d > 0) {
    LatticePoint u = strategy.at(d);
    LatticePoint v = *sample_contact(u, lambda, grid, rng);
    const std::int64_t next = std::min<std::int64_t>(manhattan_norm(v), d - 1);
    ++run.rounds;
    if (record_trajectory) run.trajectory.push_back(GRound{d, std::move(u), std::move(v), d - next});
    d = next;
  }
  return run;
}

std::vector<Rational> expected_rounds_exact(std::int64_t d0, const GStrategy& strategy,
                                            const LrcDistribution& lambda) {
  if (d0 < 0) throw std::invalid_argument("d0 must be >= 0");
  InducedBetTable table(strategy, lambda, BetMode::kExact);
  std::vector<Rational> t(static_cast<std::size_t>(d0) + 1, Rational(0));
  for (std::int64_t d = 1; d <= d0; ++d) {
    const InducedBet& bet = table.at(d);
    Rational value = 1;
    for (std::int64_t i = 1; i <= d; ++i) {
      const Rational& p = bet.exact[static_cast<std::size_t>(i)];
      if (p != 0) value += p * t[static_cast<std::size_t>(d - i)];
    }
    t[static_cast<std::size_t>(d)] = value;
  }
  return t;
}

std::vector<double> expected_rounds_dp(std::int64_t d0, const GStrategy& strategy,
                                       const LrcDistribution& lambda) {
  if (d0 < 0) throw std::invalid_argument("d0 must be >= 0");
  InducedBetTable table(strategy, lambda, BetMode::kFloat);
  std::vector<double> t(static_cast<std::size_t>(d0) + 1, 0.0);
  for (std::int64_t d = 1; d <= d0; ++d) {
    const InducedBet& bet = table.at(d);
    double value = 1;
    for (std::int64_t i = 1; i <= d; ++i) value += bet.mass[static_cast<std::size_t>(i)] * t[static_cast<std::size_t>(d - i)];
    t[static_cast<std::size_t>(d)] = value;
  }
  return t;
}

std::vector<Rational> round_count_distribution(std::int64_t d0, InducedBetTable& table) {
  if (table.mode() != BetMode::kExact) throw std::invalid_argument("round distribution needs exact bets");
  if (d0 < 0) throw std::invalid_argument("d0 must be >= 0");
  // dist[d][k] = P(rounds = k | start at d).
  std::vector<std::vector<Rational>> dist(static_cast<std::size_t>(d0) + 1);
  dist[0] = {Rational(1)};
  for (std::int64_t d = 1; d <= d0; ++d) {
    const InducedBet& bet = table.at(d);
    std::vector<Rational> row(static_cast<std::size_t>(d) + 1, Rational(0));
    for (std::int64_t i = 1; i <= d; ++i) {
      const Rational& p = bet.exact[static_cast<std::size_t>(i)];
      if (p == 0) continue;
      const auto& sub = dist[static_cast<std::size_t>(d - i)];
      for (std::size_t k = 0; k < sub.size(); ++k) {
        if (sub[k] != 0) row[k + 1] += p * sub[k];
      }
    }
    dist[static_cast<std::size_t>(d)] = std::move(row);
  }
  return dist[static_cast<std::size_t>(d0)];
}

OptimalGResult optimal_g_strategy(const LrcDistribution& lambda, std::int64_t d_max, int dim,
                                  bool exact) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("optimal strategy search supports D in {1,2,3}");
  if (d_max < 1) throw std::invalid_argument("d_max must be >= 1");
  if (exact && d_max > kExactOptimalLimit) {
    throw std::invalid_argument("exact optimisation is limited to d_max <= " +
                                std::to_string(kExactOptimalLimit));
  }
  std::vector<double> t(static_cast<std::size_t>(d_max) + 1, 0.0);
  std::vector<Rational> tx;
  if (exact) tx.assign(static_cast<std::size_t>(d_max) + 1, Rational(0));
  std::vector<LatticePoint> choice;
  choice.reserve(static_cast<std::size_t>(d_max));
  for (std::int64_t d = 1; d <= d_max; ++d) {
    std::optional<LatticePoint> best_u;
    double best = 0;
    Rational best_x;
    for (const LatticePoint& u : canonical_points(dim, d)) {
      if (exact) {
        const InducedBet bet = induced_bet(d, u, lambda);
        Rational cost = 1;
        for (std::int64_t i = 1; i <= d; ++i) cost += bet.exact[static_cast<std::size_t>(i)] * tx[static_cast<std::size_t>(d - i)];
        if (!best_u || cost < best_x) {
          best_u = u;
          best_x = cost;
          best = static_cast<double>(cost);
        }
      } else {
        const InducedBet bet = induced_bet_float(d, u, lambda);
        double cost = 1;
        for (std::int64_t i = 1; i <= d; ++i) cost += bet.mass[static_cast<std::size_t>(i)] * t[static_cast<std::size_t>(d - i)];
        // Near-ties keep the earlier (lexicographically smaller) candidate.
        if (!best_u || cost < best - 1e-12 * std::max(1.0, best)) {
          best_u = u;
          best = cost;
        }
      }
    }
    t[static_cast<std::size_t>(d)] = best;
    if (exact) tx[static_cast<std::size_t>(d)] = best_x;
    choice.push_back(*best_u);
  }
  return OptimalGResult{GStrategy::table(std::move(choice), GStrategyKind::kDpOptimal), std::move(t),
                        std::move(tx)};
}

// ---------------------------------------------------------------------------
// Audits

BudgetAuditReport audit_budget_sufficiency(const GRun& run, double b0, InducedBetTable& bets) {
  if (run.rounds > 0 && run.trajectory.empty()) {
    throw std::invalid_argument("budget audit needs a recorded trajectory");
  }
  BudgetAuditReport report;
  report.b0 = b0;
  double residual = b0;
  report.min_residual = b0;
  std::int64_t round = 0;
  for (const GRound& g : run.trajectory) {
    ++round;
    if (g.i > 1) {
      const InducedBet& bet = bets.at(g.d);
      const double ratio = static_cast<double>(g.i) / static_cast<double>(g.d);
      const auto first = static_cast<std::int64_t>(std::floor(static_cast<double>(g.i) / 2.0)) + 1;
      residual -= std::pow(ratio, 1.5) * bet.mass_closed(first, g.d);
    }
    report.residuals.push_back(residual);
    if (residual < report.min_residual) {
      report.min_residual = residual;
      report.argmin_round = round;
    }
  }
  report.final_residual = residual;
  report.flagged = report.min_residual < 1.0;
  return report;
}

B2Report audit_b2(std::int64_t d, const LatticePoint& u, const LrcDistribution& lambda) {
  const InducedBet bet = induced_bet(d, u, lambda);
  B2Report report;
  report.d = d;
  report.u = u;
  const std::int64_t d_star = d - d / 2;
  const Rational top = bet.exact_closed(d - d_star + 1, d);
  Rational lhs = 0;
  for (std::int64_t j = 1; j <= d_star; ++j) {
    lhs += bet.exact[static_cast<std::size_t>(d - j + 1)];
    B2Row row{j, lhs, Rational(2 * j, d_star) * top};
    const Rational slack = row.rhs - row.lhs;
    if (j == 1 || slack < report.min_slack) report.min_slack = slack;
    if (j == 1 || slack > report.max_slack) report.max_slack = slack;
    if (slack < 0) {
      report.ok = false;
      report.violations.push_back(j);
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace swlab
