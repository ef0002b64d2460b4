// jdsn: batch front-end for simulation, estimation, information and
// Monte Carlo studies of small-noise jump diffusions.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "jdsn/cli/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Small-noise jump-diffusion estimation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", jdsn::cli::kVersion);

  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int workers = 0;
  bool verbose = false;

  const char* names[][2] = {
      {"simulate", "Simulate observation paths"},
      {"estimate", "Estimate theta from a simulated or supplied path"},
      {"fisher", "Asymptotic information matrix by quadrature"},
      {"mc", "Replication study (single regime or ladder)"},
      {"check-rho", "Check rho (and a ladder) for admissibility"},
  };
  std::vector<CLI::App*> subs;
  std::vector<CLI::Option*> seed_opts;
  for (auto& nm : names) {
    auto* sub = app.add_subcommand(nm[0], nm[1]);
    sub->add_option("--config", config, "Study config or manifest (JSON)")->required();
    sub->add_option("--out", out, "Output directory (overrides the config)");
    seed_opts.push_back(sub->add_option("--seed", seed, "Master seed (overrides the config)"));
    sub->add_option("--workers", workers, "Worker threads (default: $JDSN_WORKERS or 1)")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--verbose", verbose, "Progress on stderr");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << jdsn::cli::error_json("configuration", e.what(), jdsn::cli::kExitConfig).dump()
              << '\n';
    return jdsn::cli::kExitConfig;
  }

  jdsn::cli::RunOptions opts;
  opts.out_dir = out;
  opts.verbose = verbose;
  opts.workers = workers;
  if (opts.workers < 1) {
    const char* env = std::getenv("JDSN_WORKERS");
    opts.workers = 1;
    if (env && *env) {
      try {
        opts.workers = std::max(1, std::stoi(env));
      } catch (const std::exception&) {
        std::cerr << jdsn::cli::error_json("configuration", "JDSN_WORKERS is not an integer",
                                           jdsn::cli::kExitConfig)
                         .dump()
                  << '\n';
        return jdsn::cli::kExitConfig;
      }
    }
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (subs[i]->parsed()) {
      std::optional<std::uint64_t> seed_override;
      if (seed_opts[i]->count() > 0) seed_override = seed;
      return jdsn::cli::run_command(subs[i]->get_name(), config, seed_override, opts);
    }
  }
  return jdsn::cli::kExitConfig;
}
