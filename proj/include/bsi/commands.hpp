#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "bsi/config.hpp"

namespace bsi {

/// Command-line level options layered over the config file.
struct CliOptions {
  std::optional<std::uint64_t> seed;  // overrides every seed in the config
  int workers = 1;
  std::optional<std::string> out_dir;
};

/// Each command validates its config section, computes, and writes its
/// outputs atomically under the output directory. Errors propagate as
/// exceptions; the CLI maps them to a nonzero exit.
void cmd_loglik_bench(const RunConfig& config, const CliOptions& opts);
void cmd_study(const RunConfig& config, const CliOptions& opts);
void cmd_infer(const RunConfig& config, const CliOptions& opts);
void cmd_select(const RunConfig& config, const CliOptions& opts);
void cmd_predict(const RunConfig& config, const CliOptions& opts);
void cmd_sweep(const RunConfig& config, const CliOptions& opts);

}  // namespace bsi
