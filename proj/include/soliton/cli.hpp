#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "soliton/errors.hpp"

namespace soliton::cli {

/// Bad command line or configuration (exit status 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// One command with its parameters, as read from flags and/or a JSON file.
struct RunConfig {
  std::string command;
  nlohmann::json params = nlohmann::json::object();
  std::string out = ".";
  std::uint64_t seed = 42;
};

struct CheckResult {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct Summary {
  std::string command;
  nlohmann::json params = nlohmann::json::object();
  nlohmann::json metrics = nlohmann::json::object();
  std::vector<CheckResult> checks;
  std::uint64_t seed = 42;
  nlohmann::json error;  // null unless a module raised

  bool ok() const;
  nlohmann::json to_json() const;
};

inline const std::vector<std::string> kCommands{"radial", "dirichlet", "construct", "blowdown", "verify", "flow"};

/// Runs one command, writes its CSV/JSON outputs and summary.json into
/// `config.out`. Module errors are recorded in the summary; configuration
/// problems throw ConfigError.
Summary run(const RunConfig& config);

/// Exit status for a finished run: 0 when every check passes, 1 otherwise.
int exit_status(const Summary& summary);

/// Parses argv (subcommand, flags, optional --config file; flags win over
/// the file), runs, prints a short report and returns the exit status.
int main(int argc, char** argv);

}  // namespace soliton::cli
