#include "swlab/budget_game.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

#include "parallel.hpp"
#include "swlab/format.hpp"
#include "swlab/stats.hpp"

namespace swlab {

Bet::Bet(std::int64_t d, std::vector<std::pair<std::int64_t, double>> entries) : d_(d) {
  if (d < 1) throw std::invalid_argument("bet needs d >= 1");
  std::map<std::int64_t, double> merged;
  for (const auto& [step, m] : entries) {
    if (step < 1 || step > d) {
      throw std::invalid_argument("bet step " + std::to_string(step) + " outside [1, " +
                                  std::to_string(d) + "]");
    }
    if (!(m >= 0)) throw std::invalid_argument("bet mass must be nonnegative");
    merged[step] += m;
  }
  double total = 0;
  for (const auto& [step, m] : merged) {
    if (m == 0) continue;
    steps_.push_back(step);
    masses_.push_back(m);
    total += m;
    prefix_.push_back(total);
  }
  if (std::abs(total - 1.0) > kBetTolerance) {
    throw std::invalid_argument("bet masses sum to " + format_real(total) + ", not 1");
  }
}

Bet Bet::point(std::int64_t d, std::int64_t step) { return Bet(d, {{step, 1.0}}); }

double Bet::mass(std::int64_t step) const {
  auto it = std::lower_bound(steps_.begin(), steps_.end(), step);
  if (it == steps_.end() || *it != step) return 0.0;
  return masses_[static_cast<std::size_t>(it - steps_.begin())];
}

double Bet::prefix_through(std::int64_t b) const {
  auto it = std::upper_bound(steps_.begin(), steps_.end(), b);
  if (it == steps_.begin()) return 0.0;
  return prefix_[static_cast<std::size_t>(it - steps_.begin()) - 1];
}

double Bet::mass_closed(std::int64_t a, std::int64_t b) const {
  a = std::max<std::int64_t>(a, 1);
  b = std::min(b, d_);
  if (a > b) return 0.0;
  // Sum directly over the few stored steps in range; avoids prefix cancellation.
  auto lo = std::lower_bound(steps_.begin(), steps_.end(), a);
  auto hi = std::upper_bound(steps_.begin(), steps_.end(), b);
  const auto n = hi - lo;
  if (n <= 64) {
    double s = 0;
    for (auto it = lo; it != hi; ++it) s += masses_[static_cast<std::size_t>(it - steps_.begin())];
    return s;
  }
  return prefix_through(b) - prefix_through(a - 1);
}

double Bet::mass_half_open(double x, std::int64_t b) const {
  return mass_closed(static_cast<std::int64_t>(std::floor(x)) + 1, b);
}

std::int64_t Bet::sample(Rng& rng) const {
  const double x = uniform01(rng) * prefix_.back();
  auto it = std::upper_bound(prefix_.begin(), prefix_.end(), x);
  if (it == prefix_.end()) --it;
  return steps_[static_cast<std::size_t>(it - prefix_.begin())];
}

std::string BetValidation::describe() const {
  if (ok()) return "valid";
  std::ostringstream os;
  bool first = true;
  for (const auto& v : violations) {
    if (!first) os << "; ";
    first = false;
    if (v.kind == BetViolation::Kind::kBudget) {
      os << "budget: beta([2,d])=" << format_real(v.lhs) << " > B=" << format_real(v.rhs);
    } else {
      os << "tail j=" << v.j << ": " << format_real(v.lhs) << " > " << format_real(v.rhs);
    }
  }
  return os.str();
}

BetValidation validate_bet(const Bet& bet, const GameState& state) {
  if (state.d < 1) throw std::invalid_argument("bet validation needs d >= 1");
  if (bet.d() != state.d) {
    throw std::invalid_argument("bet domain d=" + std::to_string(bet.d()) +
                                " does not match state d=" + std::to_string(state.d));
  }
  BetValidation out;
  const std::int64_t d = state.d;
  const double big = bet.mass_closed(2, d);
  if (big > state.budget + kBetTolerance) {
    out.violations.push_back({BetViolation::Kind::kBudget, 0, big, state.budget});
  }

  const std::int64_t d_star = d - d / 2;
  const std::int64_t lowest = d - d_star + 1;
  const double top = bet.mass_closed(lowest, d);
  if (top == 0) return out;  // cross-multiplied form: every numerator is 0 too

  // beta([d-j+1, d]) is constant between consecutive support points, while
  // the bound grows with j; within a piece the violated j form a prefix.
  const auto& steps = bet.steps();
  std::vector<std::int64_t> tail_steps;
  for (auto it = steps.rbegin(); it != steps.rend() && *it >= lowest; ++it) tail_steps.push_back(*it);
  for (std::size_t k = 0; k < tail_steps.size(); ++k) {
    const std::int64_t s = tail_steps[k];
    const double lhs = bet.mass_closed(s, d);
    const std::int64_t j_begin = d - s + 1;
    const std::int64_t j_end = k + 1 < tail_steps.size() ? d - tail_steps[k + 1] : d_star;
    for (std::int64_t j = j_begin; j <= j_end; ++j) {
      const double rhs = 2.0 * static_cast<double>(j) / static_cast<double>(d_star) * top;
      if (lhs <= rhs + kBetTolerance) break;
      out.violations.push_back({BetViolation::Kind::kTail, j, lhs, rhs});
    }
  }
  return out;
}

double budget_loss(const Bet& bet, std::int64_t i) {
  if (i <= 1) return 0.0;
  const double ratio = static_cast<double>(i) / static_cast<double>(bet.d());
  return std::pow(ratio, 1.5) * bet.mass_half_open(static_cast<double>(i) / 2.0, bet.d());
}

std::pair<GameState, StepOutcome> play_round(const GameState& state, const Bet& bet, Rng& rng) {
  const BetValidation check = validate_bet(bet, state);
  if (!check.ok()) {
    throw InvalidBetError("invalid bet at (d=" + std::to_string(state.d) +
                          ", B=" + format_real(state.budget) + "): " + check.describe());
  }
  StepOutcome step;
  step.i = bet.sample(rng);
  step.loss = budget_loss(bet, step.i);
  step.d_before = state.d;
  step.d_after = state.d - step.i;
  step.budget_before = state.budget;
  step.budget_after = state.budget - step.loss;
  return {GameState{step.d_after, step.budget_after}, step};
}

Strategy halving_strategy(std::int64_t d0) {
  if (d0 < 2) throw std::invalid_argument("halving strategy needs d0 >= 2");
  const double stake = 1.0 / std::log2(static_cast<double>(d0));
  return [stake](const GameState& s) {
    if (s.d >= 2 && s.budget >= stake) {
      return Bet(s.d, {{s.d / 2, stake}, {1, 1.0 - stake}});
    }
    return Bet::point(s.d, 1);
  };
}

Strategy unit_step_strategy() {
  return [](const GameState& s) { return Bet::point(s.d, 1); };
}

GameRun run_game(std::int64_t d0, double b0, const Strategy& strategy, Rng& rng,
                 bool record_trajectory) {
  if (d0 < 1) throw std::invalid_argument("run_game needs d0 >= 1");
  if (!(b0 >= 0)) throw std::invalid_argument("run_game needs B0 >= 0");
  GameRun run;
  GameState state{d0, b0};
  run.min_budget = b0;
  while (state.d > 0) {
    const Bet bet = strategy(state);
    if (bet.d() != state.d) {
      throw InvalidBetError("strategy returned a bet for d=" + std::to_string(bet.d()) +
                            " at d=" + std::to_string(state.d));
    }
    auto [next, step] = play_round(state, bet, rng);
    state = next;
    ++run.rounds;
    run.min_budget = std::min(run.min_budget, state.budget);
    if (record_trajectory) run.trajectory.steps.push_back(step);
  }
  run.final_budget = state.budget;
  return run;
}

GameEstimate estimate_game_rounds(std::int64_t d0, double b0, const Strategy& strategy,
                                  std::int64_t trials, std::uint64_t seed, int jobs) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  GameEstimate est;
  est.trials = trials;
  est.rounds.assign(static_cast<std::size_t>(trials), 0);
  std::vector<double> min_budget(static_cast<std::size_t>(trials), 0.0);
  detail::parallel_for(trials, jobs, [&](std::int64_t k) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
    const GameRun run = run_game(d0, b0, strategy, rng, false);
    est.rounds[static_cast<std::size_t>(k)] = run.rounds;
    min_budget[static_cast<std::size_t>(k)] = run.min_budget;
  });
  RunningStats stats;
  est.min_budget = b0;
  for (std::int64_t k = 0; k < trials; ++k) {
    const auto r = est.rounds[static_cast<std::size_t>(k)];
    stats.add(static_cast<double>(r));
    est.max_rounds = std::max(est.max_rounds, r);
    est.min_budget = std::min(est.min_budget, min_budget[static_cast<std::size_t>(k)]);
  }
  est.mean = stats.mean();
  est.stderr_of_mean = stats.stderr_of_mean();
  return est;
}

double lower_bound_reference(double d0, double b0, double alpha) {
  if (!(alpha > 0)) throw std::invalid_argument("alpha must be positive");
  if (!(d0 >= 1)) throw std::invalid_argument("d0 must be >= 1");
  const double l = std::log(d0);
  return alpha * l * l / (1.0 + b0);
}

double log_square_shrink_gap(double z, double x) {
  const double lz = std::log(z);
  const double l = std::log(z * (1.0 - x));
  return l * l - (lz * lz - 3.0 * x * lz);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  out << "round,d_before,i,loss,B_after\n";
  std::int64_t round = 0;
  for (const auto& s : trajectory.steps) {
    out << ++round << ',' << s.d_before << ',' << s.i << ',' << format_real(s.loss) << ','
        << format_real(s.budget_after) << '\n';
  }
}

}  // namespace swlab
