// elliptop command-line front end. Exit codes: 0 all checks pass, 1 numerical failure,
// 2 usage or validation error.

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>

#include <elliptop/cli.hpp>

namespace {

using elliptop::cli::RunConfig;

void add_common(CLI::App* sub, RunConfig& c) {
  sub->add_option("--N", c.N, "first lattice size");
  sub->add_option("--M", c.M, "second lattice size (coprime to N)");
  sub->add_option("--tau", c.tau, "modulus as a+bi, Im > 0");
  sub->add_option("--seed", c.seed, "random seed");
  sub->add_option("--samples", c.samples, "number of random samples");
  sub->add_option("--tol", c.tol, "override the pass tolerance");
  sub->add_option("--output", c.output, "write the JSON report here instead of stdout");
  sub->add_option("--config", c.config, "key=value file mirroring the flags; command-line flags win");
}

void add_model(CLI::App* sub, RunConfig& c) {
  sub->add_option("--model", c.model, "nonrel-top | rel-top | matrix-top | gaudin-lattice | coupled");
  sub->add_option("--K", c.K, "matrix block size for gaudin-lattice and coupled");
  sub->add_option("--reduction", c.reduction, "constraint set; defaults to the model's own");
  sub->add_option("--eta", c.eta, "coupling (relativistic parameter) as a+bi");
  sub->add_option("--role", c.role, "spectral variable: z or eta");
}

int emit(const elliptop::cli::Report& r, const RunConfig& c) {
  if (c.output.empty()) {
    std::cout << r.to_json().dump(2) << "\n";
  } else {
    elliptop::cli::write_report(r, c.output);
    for (const auto& e : r.results)
      std::cout << (e.pass ? "PASS " : "FAIL ") << e.check << " rel=" << e.max_rel_residual << " tol=" << e.tol
                << (e.expected_fail ? " (expected to fail)" : "") << "\n";
  }
  return elliptop::cli::exit_code(r);
}

// Splices the entries of a --config file in front of the subcommand's flags. The file is
// read with CLI11's TOML/INI reader; each key becomes --key=value.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  std::size_t at = args.size();
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      at = i;
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      at = i;
    }
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw CLI::FileError::Missing(path);
  std::vector<std::string> injected;
  for (const auto& item : CLI::ConfigTOML().from_config(in)) {
    std::string value;
    for (const auto& v : item.inputs) value += (value.empty() ? "" : ",") + v;
    injected.push_back("--" + item.name + "=" + value);
  }
  // right after the subcommand name, so every explicit flag overrides the file
  if (!args.empty() && args[0].rfind("-", 0) != 0) at = 1;
  args.insert(args.begin() + std::ptrdiff_t(at), injected.begin(), injected.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Elliptic tops: identity suites, Lax checks, R-matrix checks and integration"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  RunConfig c;

  auto* ids = app.add_subcommand("identities", "verify the function identity registry");
  add_common(ids, c);
  ids->add_option("--ids", c.ids, "comma-separated identity ids or 'all'");

  auto* lax = app.add_subcommand("lax-check", "Lax equation residuals");
  add_common(lax, c);
  add_model(lax, c);
  lax->add_flag("--no-constraints", c.no_constraints, "skip the constraint projection (negative control)");

  auto* evo = app.add_subcommand("evolve", "RK4 integration with conservation monitors");
  add_common(evo, c);
  add_model(evo, c);
  evo->add_option("--dt", c.dt, "time step");
  evo->add_option("--t-end", c.t_end, "final time");
  evo->add_option("--record-every", c.record_every, "snapshot stride");
  evo->add_option("--probes", c.probes, "comma-separated spectral probes a+bi");
  evo->add_option("--initial", c.initial, "random | zero");
  evo->add_option("--csv", c.csv, "prefix for trajectory and monitor CSV files");

  auto* rm = app.add_subcommand("rmatrix", "R-matrix identities");
  add_common(rm, c);
  rm->add_option("--checks", c.checks, "comma-separated checks or 'all'");

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());  // CLI11 consumes the vector from the back
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (ids->parsed()) return emit(elliptop::cli::run_identities(c), c);
    if (lax->parsed()) return emit(elliptop::cli::run_lax_check(c), c);
    if (rm->parsed()) return emit(elliptop::cli::run_rmatrix(c), c);
    if (evo->parsed()) {
      auto out = elliptop::cli::run_evolve(c);
      if (!c.csv.empty()) {
        elliptop::write_trajectory_csv(out.trajectory, c.csv + "_trajectory.csv");
        for (std::size_t p = 0; p < out.trajectory.monitors.front().probes.size(); ++p)
          elliptop::write_monitor_csv(out.trajectory, p, c.csv + "_probe" + std::to_string(p) + ".csv");
      }
      return emit(out.report, c);
    }
  } catch (const elliptop::integration_error& e) {
    std::cerr << "error: " << e.what() << " (last good time " << e.last_good_time << ")\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
