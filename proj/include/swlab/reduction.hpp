#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "swlab/augmentation.hpp"
#include "swlab/budget_game.hpp"
#include "swlab/count.hpp"
#include "swlab/lattice.hpp"
#include "swlab/random.hpp"

namespace swlab {

class StrategyGapError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

enum class GStrategyKind { kAxis, kDiagonal, kTable, kDpOptimal };

/// Choice of message holder u(d) with |u(d)|_1 = d in the distance-only game.
class GStrategy {
 public:
  /// u(d) = (d, 0, ..., 0).
  static GStrategy axis(int dim);
  /// u(d) = balanced composition of d, larger parts first.
  static GStrategy diagonal(int dim);
  /// points[k] is u(k + 1). Throws std::invalid_argument if some norm is wrong.
  static GStrategy table(std::vector<LatticePoint> points,
                         GStrategyKind kind = GStrategyKind::kTable);

  /// Throws StrategyGapError beyond a table's range.
  LatticePoint at(std::int64_t d) const;
  bool defined_at(std::int64_t d) const;

  int dim() const { return dim_; }
  GStrategyKind kind() const { return kind_; }
  std::string name() const;

 private:
  GStrategy(GStrategyKind kind, int dim) : kind_(kind), dim_(dim) {}

  GStrategyKind kind_;
  int dim_;
  std::vector<LatticePoint> table_;
};

enum class BetMode { kExact, kFloat, kMonteCarlo };

std::string to_string(BetMode mode);

/// Progress law of one round of the distance-only game at distance d.
/// mass[i] for i in 0..d (mass[0] is 0); exact holds the same values as
/// rationals in exact mode.
struct InducedBet {
  std::int64_t d = 0;
  BetMode mode = BetMode::kFloat;
  std::vector<double> mass;
  std::vector<Rational> exact;
  std::int64_t trials = 0;
  double tv_bound = 0.0;  // Monte Carlo only: estimated expected TV error

  Bet to_bet() const;
  Rational exact_closed(std::int64_t a, std::int64_t b) const;
  double mass_closed(std::int64_t a, std::int64_t b) const;
};

/// Exact induced bet: for 2 <= i <= d,
/// beta_d(i) = sum_r lambda(r) * |S_{u,r} ∩ {|x| = d-i}| / |S_{0,r}|,
/// and beta_d(1) takes the remaining mass. Throws std::invalid_argument
/// unless |u|_1 = d >= 1.
InducedBet induced_bet(std::int64_t d, const LatticePoint& u, const LrcDistribution& lambda);

/// Same law in double precision.
InducedBet induced_bet_float(std::int64_t d, const LatticePoint& u, const LrcDistribution& lambda);

/// Empirical progress law from `trials` contact draws around u.
InducedBet induced_bet_mc(std::int64_t d, const LatticePoint& u, const LrcDistribution& lambda,
                          std::int64_t trials, Rng& rng);

double total_variation(const InducedBet& a, const InducedBet& b);

/// Lazily computed bets beta_d of one (strategy, lambda) pair. Not thread-safe;
/// call prepare() before sharing read-only.
class InducedBetTable {
 public:
  InducedBetTable(GStrategy strategy, LrcDistribution lambda, BetMode mode = BetMode::kFloat);

  const InducedBet& at(std::int64_t d);
  /// Read-only lookup; throws std::out_of_range if d was not computed.
  const InducedBet& computed(std::int64_t d) const;
  void prepare(std::int64_t d_max);

  const GStrategy& strategy() const { return strategy_; }
  const LrcDistribution& lambda() const { return lambda_; }
  BetMode mode() const { return mode_; }

 private:
  GStrategy strategy_;
  LrcDistribution lambda_;
  BetMode mode_;
  std::vector<std::optional<InducedBet>> bets_;  // index d
};

struct GRound {
  std::int64_t d = 0;
  LatticePoint u{0};
  LatticePoint v{0};
  std::int64_t i = 0;
};

struct GRun {
  std::int64_t rounds = 0;
  std::vector<GRound> trajectory;  // empty unless recorded
};

/// Plays the distance-only game from d0: at d the holder is u(d), its contact
/// v is drawn on the infinite grid and the next state is min(|v|, d-1).
GRun run_game_g(std::int64_t d0, const GStrategy& strategy, const LrcDistribution& lambda,
                Rng& rng, bool record_trajectory = true);

/// T[d] = expected rounds from d, T[0] = 0, T[d] = 1 + sum_i beta_d(i) T[d-i].
std::vector<Rational> expected_rounds_exact(std::int64_t d0, const GStrategy& strategy,
                                            const LrcDistribution& lambda);
std::vector<double> expected_rounds_dp(std::int64_t d0, const GStrategy& strategy,
                                       const LrcDistribution& lambda);

/// P(rounds = k) for k = 0..d0 when the budget game is driven by the exact
/// bets of table (exact mode required).
std::vector<Rational> round_count_distribution(std::int64_t d0, InducedBetTable& table);

/// Cap on d_max for exact-mode optimisation.
inline constexpr std::int64_t kExactOptimalLimit = 64;

struct OptimalGResult {
  GStrategy strategy;
  std::vector<double> expected;          // index d, 0..d_max
  std::vector<Rational> expected_exact;  // filled in exact mode
};

/// Picks, for d = 1..d_max, the canonical holder minimising
/// 1 + sum_i beta_d(i) T[d-i]; ties go to the lexicographically smallest
/// canonical point. dim must be 1, 2 or 3. Exact mode throws
/// std::invalid_argument beyond kExactOptimalLimit.
OptimalGResult optimal_g_strategy(const LrcDistribution& lambda, std::int64_t d_max, int dim,
                                  bool exact = false);

struct BudgetAuditReport {
  double b0 = 0.0;
  double min_residual = 0.0;   // over all prefixes, including the empty one
  double final_residual = 0.0;
  std::int64_t argmin_round = 0;  // rounds applied at the minimum
  bool flagged = false;           // min_residual < 1
  std::vector<double> residuals;  // after each round
};

/// B0 - sum over rounds with i_s > 1 of (i_s/d_s)^{3/2} beta_{d_s}((i_s/2, d_s]).
BudgetAuditReport audit_budget_sufficiency(const GRun& run, double b0, InducedBetTable& bets);

struct B2Row {
  std::int64_t j = 0;
  Rational lhs;  // beta_d([d-j+1, d])
  Rational rhs;  // (2j/d*) beta_d([d-d*+1, d])
};

struct B2Report {
  std::int64_t d = 0;
  LatticePoint u{0};
  bool ok = true;
  std::vector<std::int64_t> violations;
  Rational min_slack;  // min_j (rhs - lhs)
  Rational max_slack;
  std::vector<B2Row> rows;
};

/// Exact tail-constraint check of the induced bet at (d, u).
B2Report audit_b2(std::int64_t d, const LatticePoint& u, const LrcDistribution& lambda);

}  // namespace swlab
