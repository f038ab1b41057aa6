// kahler_lens: analyze immersions, verify identities, browse the catalog.

#include <iostream>

#include "CLI11.hpp"
#include "kahler_lens/catalog.hpp"
#include "kahler_lens/cli.hpp"

namespace {

struct Flags {
  std::string config, immersion, grid, identities, out;
  double tol_alg = 0, tol_fd = 0, fd_step = 0;
  int fd_order = 0;
  bool richardson = false;
  std::uint64_t seed = 0;
};

void add_run_flags(CLI::App* cmd, Flags& f, bool with_identities) {
  cmd->add_option("--config", f.config, "JSON run configuration; flags override it");
  cmd->add_option("--immersion", f.immersion, "catalog id, JSON descriptor, or path to one");
  cmd->add_option("--grid", f.grid, "N, N1xN2..., grid JSON, or path to one");
  if (with_identities) cmd->add_option("--identities", f.identities, "'all' or a comma-separated list");
  cmd->add_option("--tol-alg", f.tol_alg, "tolerance for algebraic identities");
  cmd->add_option("--tol-fd", f.tol_fd, "tolerance for finite-difference identities");
  cmd->add_option("--fd-step", f.fd_step, "finite-difference step");
  cmd->add_option("--fd-order", f.fd_order, "finite-difference order (2 or 4)");
  cmd->add_flag("--richardson", f.richardson, "Richardson-extrapolate the Laplacian");
  cmd->add_option("--seed", f.seed, "seed for random J' samples and frame rotations");
  cmd->add_option("--out", f.out, "output directory");
}

kahler::RunConfig make_config(CLI::App* cmd, const Flags& f) {
  kahler::RunConfig c = f.config.empty() ? kahler::RunConfig{} : kahler::RunConfig::from_file(f.config);
  auto given = [&](const char* name) { return cmd->get_option(name)->count() > 0; };
  if (given("--immersion")) c.immersion = f.immersion;
  if (given("--grid")) c.grid = f.grid;
  if (cmd->get_option_no_throw("--identities") && given("--identities")) c.identities = f.identities;
  if (given("--tol-alg")) c.options.tol_alg = f.tol_alg;
  if (given("--tol-fd")) c.set_tol_fd(f.tol_fd);
  if (given("--fd-step")) c.set_fd_step(f.fd_step);
  if (given("--fd-order")) c.set_fd_order(f.fd_order);
  if (f.richardson) c.set_richardson(true);
  if (given("--seed")) c.options.seed = f.seed;
  if (given("--out")) c.out = f.out;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kahler angles of immersed submanifolds: analysis and identity checks"};
  app.require_subcommand(1);

  Flags analyze_flags, verify_flags;
  auto* analyze = app.add_subcommand("analyze", "per-point angles, kappa, residuals and flags");
  add_run_flags(analyze, analyze_flags, false);
  auto* verify = app.add_subcommand("verify", "run identity checks; exit 1 if any check fails");
  add_run_flags(verify, verify_flags, true);

  auto* catalog = app.add_subcommand("catalog", "built-in immersions");
  catalog->require_subcommand(1);
  catalog->add_subcommand("list", "list catalog ids");
  std::string describe_id;
  auto* describe = catalog->add_subcommand("describe", "parameters, declared properties and certification");
  describe->add_option("id", describe_id, "catalog id")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (analyze->parsed()) return kahler::run_analyze(make_config(analyze, analyze_flags), std::cout, std::cerr);
    if (verify->parsed()) return kahler::run_verify(make_config(verify, verify_flags), std::cout, std::cerr);
    if (describe->parsed()) return kahler::run_catalog_describe(describe_id, std::cout, std::cerr);
    return kahler::run_catalog_list(std::cout);
  } catch (const kahler::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
