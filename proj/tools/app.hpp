#pragma once

// Command implementations behind the nlsv executable. Each command takes a
// fully resolved configuration and writes its artifacts plus a manifest into
// a run directory; the manifest is itself a config that replays the run.

#include "nlsv/data_io.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace nlsv::app {

inline constexpr const char* kManifestName = "manifest.txt";
inline constexpr const char* kSeedEnv = "NLSV_SEED";

/// Fills in defaults for `command`, checks key names and values, and
/// applies the seed override (flag first, then the environment).
Config resolve(const std::string& command, const Config& config,
               std::optional<std::uint64_t> seed_flag = std::nullopt, bool use_env = true);

/// Runs a resolved command. Throws on any failure.
void run(const std::string& command, const Config& resolved,
         const std::filesystem::path& out_dir, std::ostream& log);

/// Re-runs the command recorded in a manifest, without consulting the
/// environment.
void replay(const std::filesystem::path& manifest, const std::filesystem::path& out_dir,
            std::ostream& log);

/// Parameter table with standard errors in parentheses under each estimate.
std::string parameter_table(const std::vector<FitResult>& fits);

/// Metric blocks per target: rows MSE/MAE/NMSE/DIR per model and CW
/// p-values, one column per horizon.
std::string metric_table(const ForecastReport& report);

}  // namespace nlsv::app
