#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "swlab/count.hpp"
#include "swlab/experiment.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> trials;
  std::optional<int> jobs;
  std::string out;
  bool exact = false;
  std::vector<std::string> sets;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw swlab::ConfigError("cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run(const std::string& kind, const Flags& flags) {
  std::string text = flags.config.empty() ? std::string("{}") : read_file(flags.config);
  std::vector<std::string> assignments = {"experiment=\"" + kind + "\""};
  if (flags.seed) assignments.push_back("seed=" + std::to_string(*flags.seed));
  if (flags.trials) assignments.push_back("trials=" + std::to_string(*flags.trials));
  if (flags.jobs) assignments.push_back("jobs=" + std::to_string(*flags.jobs));
  if (flags.exact) assignments.push_back("exact=true");
  assignments.insert(assignments.end(), flags.sets.begin(), flags.sets.end());
  // Explicit overrides win over the subcommand name, so check it afterwards.
  text = swlab::apply_overrides(text, assignments);
  const std::string base_dir =
      flags.config.empty() ? std::string() : std::filesystem::path(flags.config).parent_path().string();
  swlab::ExperimentConfig config = swlab::parse_config(text, base_dir);
  if (swlab::to_string(config.kind) != kind) {
    throw swlab::ConfigError("config experiment does not match subcommand " + kind);
  }
  if (!flags.out.empty()) config.out = flags.out;

  if (config.out == "-") return swlab::run_experiment(config, std::cout, std::cerr);
  std::ostringstream csv;
  const int code = swlab::run_experiment(config, csv, std::cout);
  std::ofstream file(config.out, std::ios::binary);
  if (!file) throw swlab::ConfigError("cannot write " + config.out);
  file << csv.str();
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Greedy routing and budget game experiments"};
  app.set_version_flag("--version", std::string("swlab ") + SWLAB_VERSION);
  app.require_subcommand(1);

  Flags flags;
  std::string chosen;
  for (const std::string& kind : swlab::experiment_kind_names()) {
    CLI::App* sub = app.add_subcommand(kind, "Run the " + kind + " experiment");
    sub->add_option("--config", flags.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", flags.seed, "Master seed");
    sub->add_option("--trials", flags.trials, "Trials per instance")->check(CLI::PositiveNumber);
    sub->add_option("--out", flags.out, "CSV output path, '-' for stdout");
    sub->add_flag("--exact", flags.exact, "Use exact rational arithmetic where available");
    sub->add_option("--jobs", flags.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--set", flags.sets, "Config override key=value (value parsed as JSON)");
    sub->callback([&chosen, kind] { chosen = kind; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? swlab::kExitOk : swlab::kExitUsage;
  }

  try {
    return run(chosen, flags);
  } catch (const swlab::OverflowError& e) {
    std::cerr << "swlab: numeric overflow: " << e.what() << '\n';
    return swlab::kExitOverflow;
  } catch (const std::invalid_argument& e) {
    std::cerr << "swlab: " << e.what() << '\n';
    return swlab::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "swlab: " << e.what() << '\n';
    return swlab::kExitUsage;
  }
}
