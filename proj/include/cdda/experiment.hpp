#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cdda/cdda.hpp"
#include "cdda/dataio.hpp"

namespace cdda::experiment {

inline constexpr int kSchemaVersion = 1;

/// Flat "key = value" text with "[section]" or "[section name]" headers.
/// '#' and ';' start comments. Keys before any header belong to section "".
struct IniSection {
  std::string kind;  // first word of the header
  std::string name;  // rest of the header, may be empty
  std::map<std::string, std::string> values;
  std::map<std::string, int> lines;  // key -> line number, for diagnostics
  int header_line = 0;
};

std::vector<IniSection> parse_ini(const std::string& text, const std::string& source_name);

struct TaskSpec {
  std::string name;
  bool synthetic = false;
  SynthTaskSpec synth;
  std::string source_path;
  std::string target_path;
  std::string truth_path;  // optional; falls back to labels in the target file
};

inline const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> methods = {"nn", "pca_nn", "jda_equivalent", "cdda_a",
                                                    "cdda_b"};
  return methods;
}

struct ExperimentConfig {
  std::vector<TaskSpec> tasks;
  CddaConfig cdda;
  NormalizePolicy normalize = NormalizePolicy::UnitLengthColumns;
  std::vector<std::string> methods = {"cdda_b"};
  std::vector<std::uint64_t> seeds = {1};
  std::string output_dir = "results";

  void validate() const;
};

/// Parses a config file body; every error is ErrorKind::Config naming the field.
ExperimentConfig parse_config(const std::string& text, const std::string& source_name = "<config>");
ExperimentConfig load_config(const std::string& path);

/// Applies one "--key value" style override (key without dashes).
void apply_override(ExperimentConfig& config, const std::string& key, const std::string& value);

/// The CddaConfig a method runs with. jda_equivalent is the base config with
/// repulsive_weight 0 and variant A. nullopt for nn and pca_nn.
std::optional<CddaConfig> method_config(const CddaConfig& base, const std::string& method);

/// Hex digest identifying a method's effective configuration.
std::string method_config_hash(const CddaConfig& base, const std::string& method);

struct ResultRecord {
  std::string method;
  std::string task;
  std::vector<std::uint64_t> seeds;
  std::vector<double> accuracies;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  std::vector<double> trace;                     // mean per-iteration accuracy
  std::vector<std::vector<double>> seed_traces;  // per seed
  std::string config_hash;
  double wall_time_s = 0.0;
};

/// One (method, task, seed) evaluation.
struct CellResult {
  double accuracy = 0.0;
  std::vector<double> trace;
};

/// Loads or generates a task for one seed. Synthetic tasks use the seed as
/// the generator seed; file tasks ignore it.
struct LoadedTask {
  FeatureMatrix x;
  Labels source_labels;
  Labels truth;
  int class_count;
};
LoadedTask load_task(const TaskSpec& task, std::uint64_t seed, NormalizePolicy policy);

CellResult run_cell(const LoadedTask& task, const CddaConfig& base, const std::string& method);

struct RunOutcome {
  std::vector<ResultRecord> records;  // sorted by (task, method)
  std::vector<std::string> failures;  // one line per failed cell
};

/// Executes every (method x task x seed) cell on a worker pool capped by
/// CDDA_THREADS. Output order does not depend on scheduling.
RunOutcome run_experiment(const ExperimentConfig& config);

/// Single-line JSON for one record (schema_version included).
std::string record_to_json(const ResultRecord& record);
/// Parses and validates one record line; throws Parse on schema violations.
ResultRecord record_from_json(const std::string& line);

std::string header_json(const std::string& timestamp, const std::string& command);

/// Writes <dir>/results.jsonl (header line + one record per line) and the
/// aligned table <dir>/results.txt.
void write_results(const std::string& dir, const std::vector<ResultRecord>& records,
                   const std::string& command);
/// Reads a results.jsonl file, validating the header and every record.
std::vector<ResultRecord> read_results(const std::string& path);

std::string format_table(const std::vector<ResultRecord>& records);

/// Drops the fields that legitimately differ between identical runs
/// ("timestamp", "wall_time_s") from every JSON line.
std::string strip_volatile(const std::string& jsonl);

enum class SweepParam { Alpha, K, Lambda, Iterations };
SweepParam parse_sweep_param(const std::string& name);
std::string to_string(SweepParam p);

struct SweepRow {
  double value = 0.0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
};

struct SweepOutcome {
  std::vector<SweepRow> rows;
  std::vector<ResultRecord> records;
  std::vector<std::string> failures;
};

/// Parses and range-checks grid values for the parameter; throws Config.
std::vector<double> parse_grid(SweepParam param, const std::string& grid);

/// One run of `method` per grid value, pooled over every task and seed.
SweepOutcome run_sweep(const ExperimentConfig& base, SweepParam param,
                       const std::vector<double>& grid, const std::string& method);

/// CSV "param_value,mean_accuracy,std".
std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Writes source, target (unlabelled) and truth (labels only) files for one
/// generated task; returns their paths.
std::vector<std::string> write_synth_files(const SynthTaskSpec& spec, const std::string& dir,
                                           DatasetFormat format);

/// Reads synthetic-task keys (classes, dim, shift, ...) from a section.
void apply_synth_key(SynthTaskSpec& spec, const std::string& key, const std::string& value);

/// Entry point for the `cdda` executable. Exit codes: 0 ok, 2 config error,
/// 3 numerical failure.
int cli_main(int argc, const char* const* argv);

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

}  // namespace cdda::experiment
