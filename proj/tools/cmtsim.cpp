#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cmt/experiment.hpp"
#include "cmt/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Coalescing Markov trajectory simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::size_t threads = 1;
  app.add_option("--seed", seed, "Master seed (overrides the config)");
  app.add_option("--out-dir", out_dir, "Output directory (overrides the config)");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  std::string config;
  auto* run = app.add_subcommand("run", "Run the probes of an experiment config");
  run->add_option("config", config, "JSON experiment config")->required();

  auto* levels = app.add_subcommand("export-levels", "Export level indices of one sample as CSV");
  levels->add_option("config", config, "JSON model config")->required();

  std::string support, weights, lattice = "integer";
  auto* kernel = app.add_subcommand("check-kernel", "Decide cycle-freeness, irreducibility and aperiodicity");
  kernel->add_option("--support", support, "Atoms, e.g. \"1,-1;-1,-1\"")->required();
  kernel->add_option("--weights", weights, "Weights, e.g. \"0.5,0.5\" (default uniform)");
  kernel->add_option("--lattice", lattice, "integer, even, or basis columns \"a,b;c,d\"");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cmt::kExitConfig;
  }

  cmt::set_thread_count(threads);
  const cmt::CommandOptions options{seed, out_dir};
  if (*run) return cmt::run_command(config, options, std::cerr);
  if (*levels) return cmt::export_levels_command(config, options, std::cerr);
  return cmt::check_kernel_command(support, weights, lattice, std::cout, std::cerr);
}
