#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"
#include "mixlab/report.hpp"
#include "output.hpp"

namespace mixlab::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitCheckFailed = 3,
  kExitDivergence = 4,
};

struct RunContext {
  std::uint64_t seed = 0;
  bool svg = false;
};

struct CommandResult {
  std::vector<std::pair<std::string, CsvTable>> tables;
  std::vector<std::pair<std::string, std::string>> charts;
  /// Checks whose failure turns into exit status 3.
  Report checks;
  /// Human-readable summary for stdout.
  std::vector<std::string> lines;
};

struct Command {
  std::string name;
  std::string summary;
  Schema (*schema)();
  CommandResult (*run)(const Config&, const RunContext&);
};

const std::vector<Command>& commands();
/// nullptr when unknown.
const Command* find_command(const std::string& name);

Schema cutoff_schema();
Schema lowerbound_schema();
Schema quantile_table_schema();
Schema ks_sweep_schema();
Schema classify_schema();
Schema validate_schema();

CommandResult run_cutoff(const Config& cfg, const RunContext& ctx);
CommandResult run_lowerbound(const Config& cfg, const RunContext& ctx);
CommandResult run_quantile_table(const Config& cfg, const RunContext& ctx);
CommandResult run_ks_sweep(const Config& cfg, const RunContext& ctx);
CommandResult run_classify(const Config& cfg, const RunContext& ctx);
CommandResult run_validate(const Config& cfg, const RunContext& ctx);

struct Invocation {
  std::string command;
  std::string config_text;
  RunContext ctx;
  std::filesystem::path out_dir = ".";
  unsigned threads = 1;
};

/// Parses the configuration, runs the command, writes every CSV (with its
/// manifest preamble), optional SVGs and a manifest JSON into `out_dir`, and
/// maps failures onto exit codes.
int execute(const Invocation& inv, std::ostream& out, std::ostream& err);

}  // namespace mixlab::cli
