// Command-line front end: seeded runs, sweeps, analytic overlays, annealing
// and the preset table. Exit codes: 0 ok, 2 config error, 3 breakdown,
// 4 numerical failure.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "smtj/errors.hpp"
#include "smtj/experiment.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  int workers = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_workers) {
  cmd->add_option("--config", args.config_path, "experiment config (JSON)")
      ->required();
  cmd->add_option("--out", args.out_dir, "output directory")
      ->capture_default_str();
  cmd->add_option("--seed", args.seed, "override the config's master seed");
  if (with_workers)
    cmd->add_option("--workers", args.workers,
                    "worker threads for independent runs (0 = all cores)")
        ->capture_default_str();
}

smtj::run::RunOptions to_options(const CommonArgs& args) {
  smtj::run::RunOptions opts;
  opts.out_dir = args.out_dir;
  opts.seed_override = args.seed;
  opts.workers = args.workers;
  return opts;
}

smtj::cfg::ExperimentSpec load_as(const CommonArgs& args,
                                  smtj::cfg::Mode mode) {
  auto spec = smtj::cfg::load_experiment(args.config_path);
  spec.mode = mode;  // the subcommand decides the mode
  spec.validate();
  return spec;
}

void print_files(const smtj::run::RunArtifacts& artifacts) {
  for (const auto& f : artifacts.files) std::cout << f << "\n";
}

int run_presets(const std::string& format) {
  const auto& presets = smtj::device_presets();
  if (format == "json") {
    std::cout << "[\n";
    for (std::size_t i = 0; i < presets.size(); ++i) {
      const auto& p = presets[i];
      std::cout << "  {\"name\": \"" << p.name << "\""
                << ", \"tau_balance_s\": " << p.tau_balance_s
                << ", \"slope_b_per_a\": " << p.slope_b_per_a
                << ", \"i_balance_a\": " << p.params.i_balance_a
                << ", \"r_p_ohm\": " << p.params.r_p_ohm
                << ", \"r_ap_ohm\": " << p.params.r_ap_ohm
                << ", \"i_breakdown_a\": " << p.params.i_breakdown_a << "}"
                << (i + 1 < presets.size() ? "," : "") << "\n";
    }
    std::cout << "]\n";
  } else {
    std::cout << "name,tau_balance_s,slope_b_per_a,i_balance_a,r_p_ohm,"
                 "r_ap_ohm,i_breakdown_a\n";
    for (const auto& p : presets)
      std::cout << p.name << ',' << p.tau_balance_s << ',' << p.slope_b_per_a
                << ',' << p.params.i_balance_a << ',' << p.params.r_p_ohm
                << ',' << p.params.r_ap_ohm << ','
                << p.params.i_breakdown_a << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Simulator and analysis toolkit for coupled superparamagnetic tunnel "
      "junctions"};
  app.require_subcommand(1);

  CommonArgs sim_args, sweep_args, analyze_args, anneal_args;
  std::string presets_format = "csv";

  auto* sim_cmd = app.add_subcommand(
      "simulate", "run one seeded network simulation and summarize it");
  add_common(sim_cmd, sim_args, false);

  auto* sweep_cmd = app.add_subcommand(
      "sweep", "simulate each gain in sweep_gains with derived seeds");
  add_common(sweep_cmd, sweep_args, true);

  auto* analyze_cmd = app.add_subcommand(
      "analyze", "emit the pair-model predictions for each sweep gain");
  add_common(analyze_cmd, analyze_args, false);

  auto* anneal_cmd = app.add_subcommand(
      "anneal", "run a gain-ramp annealing schedule over the network");
  add_common(anneal_cmd, anneal_args, false);

  auto* presets_cmd =
      app.add_subcommand("presets", "list the built-in device presets");
  presets_cmd
      ->add_option("--format", presets_format, "output format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad usage is a config error
  }

  try {
    using smtj::cfg::Mode;
    if (sim_cmd->parsed()) {
      print_files(smtj::run::run_simulate(load_as(sim_args, Mode::Simulate),
                                          to_options(sim_args)));
    } else if (sweep_cmd->parsed()) {
      print_files(smtj::run::run_sweep(load_as(sweep_args, Mode::Sweep),
                                       to_options(sweep_args)));
    } else if (analyze_cmd->parsed()) {
      print_files(smtj::run::run_analyze(load_as(analyze_args, Mode::Analyze),
                                         to_options(analyze_args)));
    } else if (anneal_cmd->parsed()) {
      print_files(smtj::run::run_anneal(load_as(anneal_args, Mode::Anneal),
                                        to_options(anneal_args)));
    } else if (presets_cmd->parsed()) {
      return run_presets(presets_format);
    }
    return 0;
  } catch (const smtj::BreakdownError& e) {
    std::cerr << "breakdown: " << e.what() << "\n";
    return 3;
  } catch (const smtj::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const smtj::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
