#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "swlab/augmentation.hpp"
#include "swlab/lattice.hpp"

namespace swlab {

enum class ExperimentKind {
  kRoute,
  kBudgetGame,
  kGameG,
  kInduceBets,
  kAuditB2,
  kAuditBudget,
  kOptimalG,
  kGeometryCheck,
};

std::string to_string(ExperimentKind kind);
/// Throws ConfigError for an unknown name.
ExperimentKind parse_experiment_kind(const std::string& name);
const std::vector<std::string>& experiment_kind_names();

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct LambdaSpec {
  enum class Kind { kPower, kTable, kPairs, kPointMass, kPointMasses, kRandom };
  Kind kind = Kind::kPower;
  double alpha = 2.0;
  std::optional<Coord> r_max;             // power: nullopt means derive from the metric
  std::string path;                       // table
  std::vector<std::pair<Coord, double>> pairs;
  Coord radius = 1;                       // point mass
  int random_count = 8;                   // random: number of distinct laws
  int random_support = 4;                 // random: support size of each law
  Coord random_r_max = 64;
};

/// Parsed experiment description. Every field has a default so a config
/// only names what it changes.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kRoute;
  int dim = 2;
  MetricKind metric = MetricKind::kTorus;
  Coord n = 64;
  LambdaSpec lambda;
  std::vector<Coord> sweep_n;              // route: one instance per side length
  std::optional<LatticePoint> source;
  std::optional<LatticePoint> target;
  std::vector<std::int64_t> d0{1024};
  std::optional<double> b0;                // default 1, or 21 for audit-budget
  std::vector<std::string> strategies;     // empty: per-kind default
  std::int64_t d_min = 3;
  std::int64_t d_max = 12;
  std::int64_t trials = 1000;
  std::uint64_t seed = 1;
  bool exact = false;
  bool all_rows = false;
  int jobs = 1;
  std::string out = "-";                   // "-" is stdout
  std::string trajectory_out;              // budget-game: first run's trajectory
  std::string canonical;                   // normalized JSON of the fields above
};

/// Parses a JSON object. Unknown keys and wrong types raise ConfigError.
/// Relative table paths resolve against base_dir.
ExperimentConfig parse_config(const std::string& json_text, const std::string& base_dir = "");
ExperimentConfig load_config(const std::string& path);

/// Applies "key=value" overrides; the value is read as JSON, falling back to
/// a plain string.
std::string apply_overrides(const std::string& json_text,
                            const std::vector<std::string>& assignments);

/// FNV-1a of the canonical config with output-only keys removed.
std::string config_hash(const ExperimentConfig& config);

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitAuditViolation = 2,
  kExitOverflow = 3,
};

/// Runs the experiment, writing CSV to `csv` and a human-readable summary to
/// `summary`. Returns kExitOk or kExitAuditViolation; configuration problems
/// throw ConfigError and overflow throws OverflowError.
int run_experiment(const ExperimentConfig& config, std::ostream& csv, std::ostream& summary);

LrcDistribution make_lambda(const LambdaSpec& spec, int dim, const MetricSpace& metric);

}  // namespace swlab
