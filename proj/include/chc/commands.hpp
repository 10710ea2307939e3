#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace chc {

enum ExitCode : int {
  kExitOk = 0,
  kExitNumerical = 1,
  kExitConfig = 2,
};

struct CommandOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;  // overrides run.output_dir
  std::optional<std::uint64_t> seed;         // overrides run.seed
  bool quiet = false;
};

// Subcommands: forward, optimize, gradcheck, taylor, verify. Writes artifacts
// plus manifest.json and config.ini into the output directory. Never throws;
// errors are reported on `err` and mapped to exit codes.
int run_command(const std::string& name, const CommandOptions& opt, std::ostream& out, std::ostream& err);

// Hex SHA-256 of a string.
std::string sha256_hex(const std::string& data);

}  // namespace chc
