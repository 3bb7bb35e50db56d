#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "cdda/experiment.hpp"

namespace cdda::experiment {

namespace {

// Flag name -> config key for the per-run overrides shared by `run` and `sweep`.
const std::vector<std::pair<std::string, std::string>> kOverrideFlags = {
    {"--alpha", "alpha"},
    {"--k", "k"},
    {"--lambda", "lambda"},
    {"--iterations", "iterations"},
    {"--variant", "variant"},
    {"--repulsive-weight", "repulsive_weight"},
    {"--bandwidth", "bandwidth"},
    {"--normalize", "normalize"},
    {"--methods", "methods"},
    {"--seeds", "seeds"},
    {"--output", "output"},
};

struct CommonArgs {
  std::string config_path;
  std::map<std::string, std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("config", args.config_path, "Experiment config file")->required();
  for (const auto& [flag, key] : kOverrideFlags) {
    cmd->add_option_function<std::string>(
        flag, [&args, key = key](const std::string& v) { args.overrides[key] = v; },
        "Override " + key);
  }
}

ExperimentConfig resolve_config(const CommonArgs& args) {
  ExperimentConfig cfg = load_config(args.config_path);
  for (const auto& [k, v] : args.overrides) apply_override(cfg, k, v);
  cfg.validate();
  return cfg;
}

void report_failures(const std::vector<std::string>& failures) {
  for (const auto& f : failures) std::cerr << "error: " << f << "\n";
}

int do_run(const CommonArgs& args) {
  const ExperimentConfig cfg = resolve_config(args);
  const RunOutcome out = run_experiment(cfg);
  write_results(cfg.output_dir, out.records, "run");
  std::cout << format_table(out.records);
  std::cout << "wrote " << (std::filesystem::path(cfg.output_dir) / "results.jsonl").string() << "\n";
  if (!out.failures.empty()) {
    report_failures(out.failures);
    return kExitNumerical;
  }
  return kExitOk;
}

int do_sweep(const CommonArgs& args, const std::string& param_name, const std::string& grid_text,
             const std::string& method) {
  const ExperimentConfig cfg = resolve_config(args);
  const SweepParam param = parse_sweep_param(param_name);
  const std::vector<double> grid = parse_grid(param, grid_text);
  const SweepOutcome out = run_sweep(cfg, param, grid, method);
  write_results(cfg.output_dir, out.records, "sweep");
  const auto csv_path = std::filesystem::path(cfg.output_dir) / ("sweep_" + param_name + ".csv");
  {
    std::ofstream csv(csv_path, std::ios::binary);
    csv << sweep_csv(out.rows);
  }
  std::cout << sweep_csv(out.rows);
  std::cout << "wrote " << csv_path.string() << "\n";
  if (!out.failures.empty()) {
    report_failures(out.failures);
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Close-yet-discriminative domain adaptation experiments"};
  app.require_subcommand(1);

  CommonArgs run_args;
  CLI::App* run_cmd = app.add_subcommand("run", "Run every method x task x seed cell of a config");
  add_common(run_cmd, run_args);

  CommonArgs sweep_args;
  std::string param;
  std::string grid;
  std::string sweep_method = "cdda_b";
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Sweep one parameter over a grid");
  add_common(sweep_cmd, sweep_args);
  sweep_cmd->add_option("--param", param, "alpha, k, lambda or iterations")->required();
  sweep_cmd->add_option("--grid", grid, "Comma-separated values; a..b for integer ranges")->required();
  sweep_cmd->add_option("--method", sweep_method, "Method to sweep");

  std::string spec_path;
  std::string out_dir = "synth";
  std::string format = "csv";
  std::map<std::string, std::string> synth_flags;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Write a synthetic source/target/truth task");
  synth_cmd->add_option("--spec", spec_path, "File with a [synth] section");
  synth_cmd->add_option("--out", out_dir, "Output directory");
  synth_cmd->add_option("--format", format, "csv or cdda")->check(CLI::IsMember({"csv", "cdda"}));
  for (const std::string key : {"classes", "dim", "per_class", "source_per_class", "target_per_class",
                                "separation", "noise", "shift", "rotation", "translation", "seed",
                                "covariance", "means"}) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    synth_cmd->add_option_function<std::string>(
        flag, [&synth_flags, key](const std::string& v) { synth_flags[key] = v; }, "Synthetic " + key);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run_cmd) return do_run(run_args);
    if (*sweep_cmd) return do_sweep(sweep_args, param, grid, sweep_method);
    if (*synth_cmd) {
      SynthTaskSpec spec;
      if (!spec_path.empty()) {
        std::ifstream in(spec_path);
        if (!in) throw Error(ErrorKind::Config, "cannot open spec '" + spec_path + "'");
        std::ostringstream body;
        body << in.rdbuf();
        for (const auto& sec : parse_ini(body.str(), spec_path)) {
          if (sec.kind != "synth" && !(sec.kind.empty() && sec.values.empty())) {
            throw Error(ErrorKind::Config, spec_path + ": expected a [synth] section");
          }
          for (const auto& [k, v] : sec.values) apply_synth_key(spec, k, v);
        }
      }
      for (const auto& [k, v] : synth_flags) apply_synth_key(spec, k, v);
      try {
        spec.validate();
      } catch (const Error& e) {
        throw Error(ErrorKind::Config, e.what());
      }
      const auto paths = write_synth_files(
          spec, out_dir, format == "csv" ? DatasetFormat::Csv : DatasetFormat::Binary);
      for (const auto& p : paths) std::cout << p << "\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_numerical(e.kind()) ? kExitNumerical : kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}

}  // namespace cdda::experiment
