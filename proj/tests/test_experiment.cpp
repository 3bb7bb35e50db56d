#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cdda/experiment.hpp"

using namespace cdda;
using namespace cdda::experiment;
namespace fs = std::filesystem;

namespace {

const char* kSmallConfig = R"([cdda]
k = 2
lambda = 0.1
alpha = 0.99
iterations = 3
knn = 5
normalize = none

[experiment]
methods = nn, jda_equivalent, cdda_a, cdda_b
seeds = 1, 2
output = out

[task easy]
type = synth
classes = 2
dim = 4
per_class = 12
separation = 3
)";

ErrorKind kind_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected a config error");
  return ErrorKind::InvalidState;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("cdda_test_experiment_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cdda");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

ResultRecord sample_record() {
  ResultRecord r;
  r.method = "cdda_b";
  r.task = "t";
  r.seeds = {1, 2};
  r.accuracies = {0.5, 0.75};
  r.mean_accuracy = 0.625;
  r.std_accuracy = 0.125;
  r.trace = {0.5, 0.625};
  r.seed_traces = {{0.5, 0.5}, {0.5, 0.75}};
  r.config_hash = "00ff";
  r.wall_time_s = 0.25;
  return r;
}

}  // namespace

TEST_CASE("ini parsing") {
  const auto secs = parse_ini("; comment\n[task a b]\nx = 1 # trailing\n\n[cdda]\nk=3\n", "f.ini");
  REQUIRE(secs.size() >= 2);
  const auto& task = secs[secs.size() - 2];
  CHECK(task.kind == "task");
  CHECK(task.name == "a b");
  CHECK(task.values.at("x") == "1");
  CHECK(task.lines.at("x") == 3);
  CHECK(secs.back().values.at("k") == "3");
  CHECK_THROWS_AS(parse_ini("[cdda\n", "f.ini"), Error);
  CHECK_THROWS_AS(parse_ini("[cdda]\nnovalue\n", "f.ini"), Error);
}

TEST_CASE("config parsing") {
  const ExperimentConfig cfg = parse_config(kSmallConfig);
  CHECK(cfg.cdda.k == 2);
  CHECK(cfg.cdda.knn == 5);
  CHECK(cfg.normalize == NormalizePolicy::None);
  CHECK(cfg.methods.size() == 4);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{1, 2});
  REQUIRE(cfg.tasks.size() == 1);
  CHECK(cfg.tasks[0].synthetic);
  CHECK(cfg.tasks[0].synth.source_per_class == 12);
  CHECK(cfg.tasks[0].synth.separation == 3.0);

  const std::string base = kSmallConfig;
  CHECK(kind_of(base + "[bogus]\n") == ErrorKind::Config);
  CHECK(kind_of("[cdda]\nalpha = 1.5\n[task t]\ntype = synth\n") == ErrorKind::Config);
  CHECK(kind_of("[cdda]\nk = two\n[task t]\ntype = synth\n") == ErrorKind::Config);
  CHECK(kind_of("[experiment]\nmethods = nn, tca\n[task t]\ntype = synth\n") == ErrorKind::Config);
  CHECK(kind_of("[experiment]\nmethods = nn\n") == ErrorKind::Config);
  CHECK(kind_of("[task t]\ntype = files\nsource = a.csv\n") == ErrorKind::Config);
  CHECK(kind_of("[task t]\ntype = synth\ncovariance = -1\n") == ErrorKind::Config);

  try {
    parse_config("[experiment]\nmethods = nn, tca\n[task t]\ntype = synth\n");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("tca") != std::string::npos);
  }
}

TEST_CASE("file task paths resolve next to the config") {
  const auto cfg = parse_config("[task f]\ntype = files\nsource = s.csv\ntarget = /abs/t.csv\n",
                                "dir/sub/exp.ini");
  CHECK(fs::path(cfg.tasks[0].source_path) == fs::path("dir/sub/s.csv"));
  CHECK(cfg.tasks[0].target_path == "/abs/t.csv");
}

TEST_CASE("overrides") {
  ExperimentConfig cfg = parse_config(kSmallConfig);
  apply_override(cfg, "alpha", "0.5");
  apply_override(cfg, "k", "3");
  apply_override(cfg, "variant", "a");
  apply_override(cfg, "seeds", "4,5,6");
  CHECK(cfg.cdda.alpha == 0.5);
  CHECK(cfg.cdda.k == 3);
  CHECK(cfg.cdda.variant == Variant::A);
  CHECK(cfg.seeds.size() == 3);
  CHECK_THROWS_AS(apply_override(cfg, "nonsense", "1"), Error);
}

TEST_CASE("method configs and hashes") {
  const CddaConfig base;
  const auto jda = method_config(base, "jda_equivalent");
  REQUIRE(jda);
  CHECK(jda->repulsive_weight == 0.0);
  CHECK(jda->variant == Variant::A);
  CHECK_FALSE(method_config(base, "nn"));

  CddaConfig explicit_jda = base;
  explicit_jda.repulsive_weight = 0.0;
  explicit_jda.variant = Variant::A;
  CHECK(method_config_hash(base, "jda_equivalent") == method_config_hash(explicit_jda, "cdda_a"));
  CHECK(method_config_hash(base, "cdda_a") != method_config_hash(base, "cdda_b"));
  CHECK(method_config_hash(base, "nn").size() == 16);
  CHECK_THROWS_AS(method_config(base, "tca"), Error);
}

TEST_CASE("result records round trip and validate") {
  const ResultRecord r = sample_record();
  const std::string line = record_to_json(r);
  const ResultRecord back = record_from_json(line);
  CHECK(back.method == r.method);
  CHECK(back.seeds == r.seeds);
  CHECK(back.accuracies == r.accuracies);
  CHECK(back.seed_traces == r.seed_traces);
  CHECK(back.mean_accuracy == r.mean_accuracy);
  CHECK(record_to_json(back) == line);

  auto broken = [&](const std::string& from, const std::string& to) {
    std::string s = line;
    s.replace(s.find(from), from.size(), to);
    return s;
  };
  CHECK_THROWS_AS(record_from_json(broken("\"schema_version\":1", "\"schema_version\":2")), Error);
  CHECK_THROWS_AS(record_from_json(broken("\"mean_accuracy\":0.625", "\"mean_accuracy\":1.5")), Error);
  CHECK_THROWS_AS(record_from_json(broken("\"seeds\":[1,2]", "\"seeds\":[1]")), Error);
  CHECK_THROWS_AS(record_from_json(broken("\"method\"", "\"methodx\"")), Error);
  CHECK_THROWS_AS(record_from_json("not json"), Error);
}

TEST_CASE("strip_volatile drops only timestamps and timings") {
  ResultRecord a = sample_record();
  ResultRecord b = a;
  b.wall_time_s = 9.0;
  const std::string ja = header_json("2020-01-01T00:00:00Z", "run") + "\n" + record_to_json(a) + "\n";
  const std::string jb = header_json("2021-01-01T00:00:00Z", "run") + "\n" + record_to_json(b) + "\n";
  CHECK(ja != jb);
  CHECK(strip_volatile(ja) == strip_volatile(jb));
  b.accuracies[0] = 0.25;
  const std::string jc = header_json("x", "run") + "\n" + record_to_json(b) + "\n";
  CHECK(strip_volatile(ja) != strip_volatile(jc));
}

TEST_CASE("write and read results") {
  const fs::path dir = scratch("results");
  write_results(dir.string(), {sample_record()}, "run");
  const auto back = read_results((dir / "results.jsonl").string());
  REQUIRE(back.size() == 1);
  CHECK(back[0].task == "t");
  const std::string table = slurp(dir / "results.txt");
  CHECK(table.find("62.50") != std::string::npos);

  std::ofstream(dir / "bad.jsonl") << record_to_json(sample_record()) << "\n";
  CHECK_THROWS_AS(read_results((dir / "bad.jsonl").string()), Error);
}

TEST_CASE("sweep grids") {
  CHECK(parse_grid(SweepParam::Alpha, "0.2, 0.5,0.99") == std::vector<double>{0.2, 0.5, 0.99});
  CHECK(parse_grid(SweepParam::K, "2..4") == std::vector<double>{2, 3, 4});
  CHECK_THROWS_AS(parse_grid(SweepParam::Alpha, "0.5,1.0"), Error);
  CHECK_THROWS_AS(parse_grid(SweepParam::K, "0"), Error);
  CHECK_THROWS_AS(parse_grid(SweepParam::K, "2.5"), Error);
  CHECK_THROWS_AS(parse_grid(SweepParam::Lambda, "-1"), Error);
  CHECK_THROWS_AS(parse_grid(SweepParam::Iterations, ""), Error);
  CHECK_THROWS_AS(parse_sweep_param("beta"), Error);
  CHECK(to_string(parse_sweep_param("lambda")) == "lambda");
}

TEST_CASE("single-point sweep gives one row") {
  const ExperimentConfig cfg = parse_config(kSmallConfig);
  const SweepOutcome out = run_sweep(cfg, SweepParam::Alpha, {0.5}, "cdda_b");
  CHECK(out.failures.empty());
  REQUIRE(out.rows.size() == 1);
  CHECK(out.rows[0].value == 0.5);
  const std::string csv = sweep_csv(out.rows);
  CHECK(csv.rfind("param_value,mean_accuracy,std\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}

TEST_CASE("run_experiment is ordered and repeatable") {
  const ExperimentConfig cfg = parse_config(kSmallConfig);
  const RunOutcome a = run_experiment(cfg);
  const RunOutcome b = run_experiment(cfg);
  CHECK(a.failures.empty());
  REQUIRE(a.records.size() == 4);
  for (std::size_t i = 1; i < a.records.size(); ++i) CHECK(a.records[i - 1].method < a.records[i].method);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    ResultRecord ra = a.records[i], rb = b.records[i];
    ra.wall_time_s = rb.wall_time_s = 0.0;
    CHECK(record_to_json(ra) == record_to_json(rb));
    CHECK(ra.accuracies.size() == 2);
  }
  CHECK(a.records[0].method == "cdda_a");
  CHECK(a.records[0].trace.size() == 3);
  CHECK(a.records.back().trace.empty());  // nn
}

TEST_CASE("synthetic files load as a file task") {
  const fs::path dir = scratch("synth");
  SynthTaskSpec spec;
  spec.dim = 3;
  spec.source_per_class = 5;
  spec.target_per_class = 4;
  const auto paths = write_synth_files(spec, dir.string(), DatasetFormat::Csv);
  REQUIRE(paths.size() == 3);
  const Dataset target = load_dataset(paths[1]);
  CHECK_FALSE(target.labels);
  const Dataset truth = load_dataset(paths[2]);
  CHECK(truth.dim() == 0);

  TaskSpec task;
  task.name = "files";
  task.source_path = paths[0];
  task.target_path = paths[1];
  task.truth_path = paths[2];
  const LoadedTask loaded = load_task(task, 99, NormalizePolicy::None);
  const SynthTask direct = generate_synth(spec);
  CHECK(loaded.x.data() == direct.x.data());
  CHECK(loaded.truth == direct.target_truth);
  CHECK(loaded.class_count == 2);
}

TEST_CASE("cli exit codes") {
  const fs::path dir = scratch("cli");
  const std::string cfg_path = (dir / "exp.ini").string();
  std::ofstream(cfg_path) << kSmallConfig;

  CHECK(cli({"synth", "--out", (dir / "s").string(), "--dim", "3", "--per-class", "5"}) == kExitOk);
  CHECK(fs::exists(dir / "s"));
  CHECK(cli({"synth", "--out", (dir / "bad").string(), "--dim", "2", "--covariance", "1,0,0,-1"}) ==
        kExitConfig);
  CHECK(cli({"run", cfg_path, "--output", (dir / "out").string()}) == kExitOk);
  CHECK(fs::exists(dir / "out" / "results.jsonl"));
  CHECK(cli({"run", cfg_path, "--methods", "nn,tca"}) == kExitConfig);
  CHECK(cli({"run", (dir / "missing.ini").string()}) == kExitConfig);
  CHECK(cli({"sweep", cfg_path, "--param", "alpha", "--grid", "0.5", "--output",
             (dir / "sw").string()}) == kExitOk);
  CHECK(fs::exists(dir / "sw" / "sweep_alpha.csv"));
  CHECK(cli({"sweep", cfg_path, "--param", "alpha", "--grid", "2"}) == kExitConfig);
  CHECK(cli({"frobnicate"}) == kExitConfig);
}

TEST_CASE("numerical failures exit with 3") {
  const fs::path dir = scratch("numeric");
  // Every sample identical: the centered scatter is singular.
  Dataset src{Matrix::Ones(2, 4), std::vector<int>{1, 2, 1, 2}};
  Dataset tgt{Matrix::Ones(2, 4), std::vector<int>{1, 2, 1, 2}};
  save_dataset((dir / "s.csv").string(), src);
  save_dataset((dir / "t.csv").string(), tgt);
  const std::string cfg = "[cdda]\nk = 1\nnormalize = none\n[experiment]\nmethods = cdda_a\noutput = " +
                          (dir / "out").string() + "\n[task f]\ntype = files\nsource = s.csv\ntarget = t.csv\n";
  std::ofstream(dir / "exp.ini") << cfg;
  CHECK(cli({"run", (dir / "exp.ini").string()}) == kExitNumerical);
  CHECK(fs::exists(dir / "out" / "results.jsonl"));
}
