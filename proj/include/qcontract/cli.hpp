#pragma once

// Experiment front door shared by the command-line tool and the Python module.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace qcontract::cli {

inline constexpr int kSchemaVersion = 1;

enum ExitCode { kOk = 0, kConfigError = 1, kOutOfRegime = 2 };

/// Malformed or incomplete configuration; the message names the field.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Format { Csv, Json };
Format format_from_string(const std::string& s);

struct CommandResult {
  int exit_code = kOk;
  std::string output;
  std::string message;  // diagnostics for stderr
};

nlohmann::json load_config(const std::string& path);
std::vector<std::uint64_t> parse_seed_list(const std::string& s);

/// Baseline: floor(L/n) bits everywhere, remainder to the lowest indices.
std::vector<int> uniform_equal_bits(std::size_t n, int L);

CommandResult cmd_design(const nlohmann::json& cfg, Format fmt = Format::Json);
CommandResult cmd_simulate(const nlohmann::json& cfg, const std::optional<std::vector<std::uint64_t>>& seeds = {},
                           Format fmt = Format::Csv);
CommandResult cmd_tradeoff(const nlohmann::json& cfg, const std::optional<std::vector<std::uint64_t>>& seeds = {},
                           Format fmt = Format::Csv);

}  // namespace qcontract::cli
