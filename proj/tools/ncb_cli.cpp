#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "ncb/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Noncommutative Choquet boundary computations for operator systems in M_l"};
  app.require_subcommand(1);
  app.fallthrough();

  ncb::cli::RunConfig config;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "run seed (falls back to NCB_SEED, then 1)");
  app.add_option("--tol-eq", config.tol.eq, "equality tolerance")->check(CLI::PositiveNumber);
  app.add_option("--tol-psd", config.tol.psd, "PSD slack tolerance")->check(CLI::PositiveNumber);
  app.add_option("--tol-rank", config.tol.rank, "rank cutoff")->check(CLI::PositiveNumber);
  app.add_option("--max-dilation", config.max_dilation, "dilation size cap (default n + l^2)");
  app.add_option("--workers", config.workers, "parallel workers for independent certificates")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", config.out, "JSON certificate path; the summary goes next to it as .txt");

  const char* help[] = {
      "<system.json>: boundary representations with UEP certificates",
      "<system.json> <element.json>: norm attained at a boundary representation",
      "<system.json> <map.json>: purity of a ucp map",
      "<query.json>: matricial range membership (\"a\") and support (\"theta\")",
      "<query.json>: C*-convex decomposition of \"a\" in the range of \"x\"",
      "<system.json> <element.json>: peaking irreps of an element of M_n(S)",
      "<system.json>: boundary classes of M_n(S) versus amplifications",
      "<query.json>: boundary points of the range of \"x\" as compressions of \"gamma\"",
  };
  for (std::size_t i = 0; i < ncb::cli::kCommands.size(); ++i) {
    const std::string& name = ncb::cli::kCommands[i];
    auto* sub = app.add_subcommand(name, help[i]);
    sub->add_option("inputs", config.inputs, "input JSON files")->required();
    if (name == "amplify-check") sub->add_option("--level", config.level, "amplification level n");
    sub->callback([&config, name] { config.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    config.seed = ncb::cli::resolve_seed(
        seed_opt->count() > 0 ? std::optional<std::uint64_t>(seed) : std::nullopt, std::getenv("NCB_SEED"));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return ncb::cli::execute(config, std::cout, std::cerr);
}
