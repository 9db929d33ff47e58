#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cmt {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

// Command-line overrides applied on top of the config file.
struct CommandOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

// 64-bit FNV-1a, printed as 16 lowercase hex digits in manifests.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::string hex64(std::uint64_t x);

// Runs every probe of a JSON experiment config for each replicate and writes
// `<probe>.csv`, `<probe>.json` (suffixed `-r<k>` when there are several
// replicates) and `manifest.txt` into the output directory.
// Returns kExitOk, kExitRuntime (probe failure, probe named in `log`) or
// kExitConfig (schema violation, field and line named in `log`).
int run_command(const std::string& config_path, const CommandOptions& options, std::ostream& log);

// Samples the configured model once and writes `levels.csv` plus the manifest.
// `max_levels` in the config (default 0 = all) limits the export.
int export_levels_command(const std::string& config_path, const CommandOptions& options, std::ostream& log);

// Atoms as "a,b;c,d" (or a JSON array of arrays), weights as "w1,w2" (empty
// means uniform), lattice as "integer", "even" or basis columns "a,b;c,d".
int check_kernel_command(const std::string& support, const std::string& weights, const std::string& lattice,
                         std::ostream& out, std::ostream& log);

}  // namespace cmt
