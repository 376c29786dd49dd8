#include "cylreg/config.hpp"
#include "cylreg/regularize.hpp"
#include "cylreg/runner.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> replicas;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "path to the run config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", args.seed, "override the seed");
  cmd->add_option("--out", args.out_dir, "override the output directory");
  cmd->add_option("--replicas", args.replicas, "override the replica count");
}

cylreg::RunConfig load(const CommonArgs& args) {
  cylreg::RunConfig cfg = cylreg::RunConfig::from_file(args.config_path);
  if (const char* env = std::getenv("CYLREG_SEED")) {
    cfg.set_seed(std::strtoull(env, nullptr, 10));
  }
  if (args.seed) cfg.set_seed(*args.seed);
  if (args.replicas) cfg.set_replicas(*args.replicas);
  return cfg;
}

std::string out_dir(const CommonArgs& args, const cylreg::RunConfig& cfg) {
  return args.out_dir.value_or(cfg.output_dir());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cylindrical Levy process simulation, radonification and verification"};
  app.require_subcommand(1);

  CommonArgs sim_args, rad_args, ver_args, cert_args;
  std::vector<std::string> checks;
  std::optional<double> epsilon;

  CLI::App* sim = app.add_subcommand("simulate", "sample driver paths and export CSV");
  add_common(sim, sim_args);
  CLI::App* rad = app.add_subcommand("radonify", "build regularized dual-valued paths");
  add_common(rad, rad_args);
  CLI::App* ver = app.add_subcommand("verify", "run statistical checks and emit a report");
  add_common(ver, ver_args);
  ver->add_option("--checks", checks, "subset of checks to run (default: all applicable)")
      ->delimiter(',');
  CLI::App* cert = app.add_subcommand("certificate", "search for a Sazonov continuity scale");
  add_common(cert, cert_args);
  cert->add_option("--epsilon", epsilon, "override the certificate epsilon");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    cylreg::RunOutcome outcome;
    if (sim->parsed()) {
      const auto cfg = load(sim_args);
      outcome = cylreg::run_simulate(cfg, out_dir(sim_args, cfg));
    } else if (rad->parsed()) {
      const auto cfg = load(rad_args);
      outcome = cylreg::run_radonify(cfg, out_dir(rad_args, cfg));
    } else if (ver->parsed()) {
      const auto cfg = load(ver_args);
      outcome = cylreg::run_verify(cfg, out_dir(ver_args, cfg), checks);
    } else if (cert->parsed()) {
      const auto cfg = load(cert_args);
      outcome = cylreg::run_certificate(cfg, out_dir(cert_args, cfg), epsilon);
    }
    for (const auto& f : outcome.files) std::cout << f << '\n';
    return outcome.exit_code;
  } catch (const cylreg::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const cylreg::DominationError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
