#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "swlab/random.hpp"

namespace swlab {

inline constexpr double kBetTolerance = 1e-12;

/// Distribution over step sizes 1..d, stored sparsely with prefix sums.
class Bet {
 public:
  /// Entries may repeat a step (masses are merged) and may carry zero mass.
  /// Throws std::invalid_argument for steps outside [1, d], negative masses,
  /// or a total differing from 1 by more than kBetTolerance.
  Bet(std::int64_t d, std::vector<std::pair<std::int64_t, double>> entries);

  static Bet point(std::int64_t d, std::int64_t step);

  std::int64_t d() const { return d_; }
  double mass(std::int64_t step) const;
  /// beta([a, b]) over integer steps.
  double mass_closed(std::int64_t a, std::int64_t b) const;
  /// beta((x, b]) = sum over integers i with x < i <= b.
  double mass_half_open(double x, std::int64_t b) const;
  /// Steps carrying mass, ascending, with their masses.
  const std::vector<std::int64_t>& steps() const { return steps_; }
  const std::vector<double>& masses() const { return masses_; }

  std::int64_t sample(Rng& rng) const;

 private:
  double prefix_through(std::int64_t b) const;  // beta([1, b])

  std::int64_t d_;
  std::vector<std::int64_t> steps_;
  std::vector<double> masses_;
  std::vector<double> prefix_;
};

struct GameState {
  std::int64_t d = 0;
  double budget = 0.0;
};

struct BetViolation {
  enum class Kind { kBudget, kTail };
  Kind kind;
  std::int64_t j = 0;  // tail constraint index; 0 for the budget constraint
  double lhs = 0.0;
  double rhs = 0.0;
};

struct BetValidation {
  std::vector<BetViolation> violations;
  bool ok() const { return violations.empty(); }
  std::string describe() const;
};

/// Checks beta([2,d]) <= B and, for 1 <= j <= d* = d - floor(d/2),
/// beta([d-j+1, d]) <= (2j/d*) * beta([d-d*+1, d]), both up to kBetTolerance.
/// Every violated j is reported. Throws std::invalid_argument when
/// bet.d() != state.d or state.d < 1.
BetValidation validate_bet(const Bet& bet, const GameState& state);

class InvalidBetError : public std::runtime_error {
 public:
  explicit InvalidBetError(const std::string& what) : std::runtime_error(what) {}
};

struct StepOutcome {
  std::int64_t i = 0;
  double loss = 0.0;
  std::int64_t d_before = 0;
  std::int64_t d_after = 0;
  double budget_before = 0.0;
  double budget_after = 0.0;
};

/// (i/d)^{3/2} * beta((i/2, d]) with d the distance before the step; 0 for i = 1.
double budget_loss(const Bet& bet, std::int64_t i);

/// Draws i ~ bet and applies progress and budget loss. Throws
/// InvalidBetError (and changes nothing) when the bet is not valid.
std::pair<GameState, StepOutcome> play_round(const GameState& state, const Bet& bet, Rng& rng);

/// Deterministic function of the state. Must be safe to call concurrently.
using Strategy = std::function<Bet(const GameState&)>;

/// Bets 1/log2(d0) on floor(d/2) and the rest on 1 while the budget covers it.
Strategy halving_strategy(std::int64_t d0);

/// Always steps by 1.
Strategy unit_step_strategy();

struct Trajectory {
  std::vector<StepOutcome> steps;
};

struct GameRun {
  std::int64_t rounds = 0;
  double final_budget = 0.0;
  double min_budget = 0.0;
  Trajectory trajectory;  // empty unless recorded
};

/// Plays from (d0, B0) until d = 0. Throws InvalidBetError naming the state
/// when the strategy produces an invalid bet.
GameRun run_game(std::int64_t d0, double b0, const Strategy& strategy, Rng& rng,
                 bool record_trajectory = true);

struct GameEstimate {
  std::int64_t trials = 0;
  double mean = 0.0;
  double stderr_of_mean = 0.0;
  double min_budget = 0.0;        // over every state of every run
  std::int64_t max_rounds = 0;
  std::vector<std::int64_t> rounds;  // per trial, by index
};

/// Independent runs; run k uses derive_seed(seed, k).
GameEstimate estimate_game_rounds(std::int64_t d0, double b0, const Strategy& strategy,
                                  std::int64_t trials, std::uint64_t seed, int jobs = 1);

/// alpha * ln^2(d0) / (1 + B0), the shape of the lower bound on expected rounds.
double lower_bound_reference(double d0, double b0, double alpha);

/// ln^2(z(1-x)) - (ln^2 z - 3x ln z); nonnegative for z >= 1, x in [0, 1/2].
double log_square_shrink_gap(double z, double x);

/// CSV with header round,d_before,i,loss,B_after.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace swlab
