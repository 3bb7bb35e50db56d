#include "cdda/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <memory>
#include <sstream>
#include <tuple>

#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cdda::experiment {

using nlohmann::json;

namespace {

[[noreturn]] void config_fail(const std::string& field, const std::string& msg) {
  throw Error(ErrorKind::Config, field + ": " + msg);
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& field, const std::string& value) {
  double v = 0.0;
  std::string_view s = value;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) {
    config_fail(field, "expected a number, got '" + value + "'");
  }
  return v;
}

long long parse_int(const std::string& field, const std::string& value) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) {
    config_fail(field, "expected an integer, got '" + value + "'");
  }
  return v;
}

bool parse_bool(const std::string& field, const std::string& value) {
  if (value == "true" || value == "yes" || value == "1" || value == "on") return true;
  if (value == "false" || value == "no" || value == "0" || value == "off") return false;
  config_fail(field, "expected true or false, got '" + value + "'");
}

std::vector<double> parse_doubles(const std::string& field, const std::string& value) {
  std::vector<double> out;
  for (const auto& item : split(value, ',')) out.push_back(parse_double(field, item));
  return out;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string format_number(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

void apply_cdda_key(ExperimentConfig& cfg, const std::string& key, const std::string& value,
                    const std::string& field) {
  CddaConfig& c = cfg.cdda;
  if (key == "k") {
    c.k = parse_int(field, value);
  } else if (key == "lambda") {
    c.lambda = parse_double(field, value);
  } else if (key == "alpha") {
    c.alpha = parse_double(field, value);
  } else if (key == "iterations") {
    c.iterations = static_cast<int>(parse_int(field, value));
  } else if (key == "variant") {
    if (value == "a" || value == "A") {
      c.variant = Variant::A;
    } else if (value == "b" || value == "B") {
      c.variant = Variant::B;
    } else {
      config_fail(field, "expected a or b, got '" + value + "'");
    }
  } else if (key == "repulsive_weight" || key == "repulsive-weight") {
    c.repulsive_weight = parse_double(field, value);
  } else if (key == "bandwidth") {
    c.bandwidth = value == "median" ? BandwidthPolicy::median()
                                    : BandwidthPolicy::fixed(parse_double(field, value));
  } else if (key == "normalize") {
    try {
      cfg.normalize = parse_normalize_policy(value);
    } catch (const Error&) {
      config_fail(field, "expected unit_length_columns, zscore_rows or none, got '" + value + "'");
    }
  } else if (key == "complement") {
    if (value == "pooled") {
      c.mmd.complement = ComplementNorm::Pooled;
    } else if (value == "per_class") {
      c.mmd.complement = ComplementNorm::PerClass;
    } else {
      config_fail(field, "expected pooled or per_class, got '" + value + "'");
    }
  } else if (key == "frobenius") {
    c.mmd.frobenius_normalize = parse_bool(field, value);
  } else if (key == "knn") {
    c.knn = static_cast<int>(parse_int(field, value));
  } else if (key == "propagation") {
    if (value == "unnormalized") {
      c.propagation = PropagationOperator::Unnormalized;
    } else if (value == "normalized") {
      c.propagation = PropagationOperator::Normalized;
    } else {
      config_fail(field, "expected unnormalized or normalized, got '" + value + "'");
    }
  } else if (key == "initial_space" || key == "initial-space") {
    if (value == "original") {
      c.initial_space = InitialSpace::Original;
    } else if (value == "pca") {
      c.initial_space = InitialSpace::Pca;
    } else {
      config_fail(field, "expected original or pca, got '" + value + "'");
    }
  } else if (key == "early_stop" || key == "early-stop") {
    c.early_stop = parse_bool(field, value);
  } else if (key == "rhs_ridge" || key == "rhs-ridge") {
    if (value == "auto") {
      c.rhs_ridge.reset();
    } else {
      c.rhs_ridge = parse_double(field, value);
    }
  } else {
    config_fail(field, "unknown key");
  }
}

void apply_experiment_key(ExperimentConfig& cfg, const std::string& key, const std::string& value,
                          const std::string& field) {
  if (key == "methods") {
    cfg.methods = split(value, ',');
    for (const auto& m : cfg.methods) {
      if (std::find(known_methods().begin(), known_methods().end(), m) == known_methods().end()) {
        config_fail(field, "unknown method '" + m + "'");
      }
    }
  } else if (key == "seeds") {
    cfg.seeds.clear();
    for (const auto& s : split(value, ',')) {
      const long long v = parse_int(field, s);
      if (v < 0) config_fail(field, "seeds must be non-negative");
      cfg.seeds.push_back(static_cast<std::uint64_t>(v));
    }
  } else if (key == "output" || key == "output_dir") {
    cfg.output_dir = value;
  } else {
    config_fail(field, "unknown key");
  }
}

}  // namespace

std::vector<IniSection> parse_ini(const std::string& text, const std::string& source_name) {
  std::vector<IniSection> sections(1);
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find_first_of("#;");
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const std::string where = source_name + ":" + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorKind::Config, where + ": unterminated section header");
      const std::string header = trim(line.substr(1, line.size() - 2));
      IniSection sec;
      const auto space = header.find_first_of(" \t");
      sec.kind = header.substr(0, space);
      sec.name = space == std::string::npos ? "" : trim(header.substr(space));
      sec.header_line = line_no;
      if (sec.kind.empty()) throw Error(ErrorKind::Config, where + ": empty section header");
      sections.push_back(std::move(sec));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::Config, where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw Error(ErrorKind::Config, where + ": empty key");
    IniSection& sec = sections.back();
    if (sec.values.count(key)) throw Error(ErrorKind::Config, where + ": duplicate key '" + key + "'");
    sec.values[key] = trim(line.substr(eq + 1));
    sec.lines[key] = line_no;
  }
  return sections;
}

void apply_synth_key(SynthTaskSpec& spec, const std::string& key, const std::string& value) {
  const std::string field = "synth." + key;
  auto positive_int = [&](const std::string& v) {
    const long long n = parse_int(field, v);
    if (n < 1 || n > 1000000) config_fail(field, "must be a positive integer");
    return static_cast<int>(n);
  };
  if (key == "classes") {
    spec.classes = positive_int(value);
  } else if (key == "dim") {
    spec.dim = positive_int(value);
  } else if (key == "separation") {
    spec.separation = parse_double(field, value);
  } else if (key == "noise") {
    spec.noise = parse_double(field, value);
  } else if (key == "shift") {
    spec.shift = parse_double(field, value);
  } else if (key == "rotation") {
    spec.rotation = parse_double(field, value);
  } else if (key == "translation") {
    spec.translation = to_vector(parse_doubles(field, value));
  } else if (key == "per_class") {
    spec.source_per_class = spec.target_per_class = positive_int(value);
  } else if (key == "source_per_class") {
    spec.source_per_class = positive_int(value);
  } else if (key == "target_per_class") {
    spec.target_per_class = positive_int(value);
  } else if (key == "seed") {
    const long long s = parse_int(field, value);
    if (s < 0) config_fail(field, "must be non-negative");
    spec.seed = static_cast<std::uint64_t>(s);
  } else if (key == "means") {
    spec.means.clear();
    for (const auto& mu : split(value, ';')) spec.means.push_back(to_vector(parse_doubles(field, mu)));
  } else if (key == "covariance") {
    // Shared covariance, row-major; ';' separates per-class matrices.
    spec.covariances.clear();
    for (const auto& block : split(value, ';')) {
      const auto flat = parse_doubles(field, block);
      const auto order = static_cast<Eigen::Index>(std::llround(std::sqrt(flat.size())));
      if (order * order != static_cast<Eigen::Index>(flat.size())) {
        config_fail(field, "covariance needs dim*dim values");
      }
      Matrix cov(order, order);
      for (Eigen::Index i = 0; i < order; ++i) {
        for (Eigen::Index j = 0; j < order; ++j) cov(i, j) = flat[static_cast<std::size_t>(i * order + j)];
      }
      spec.covariances.push_back(std::move(cov));
    }
  } else {
    config_fail(field, "unknown key");
  }
}

void ExperimentConfig::validate() const {
  if (tasks.empty()) config_fail("task", "at least one [task NAME] section is required");
  if (methods.empty()) config_fail("experiment.methods", "at least one method is required");
  if (seeds.empty()) config_fail("experiment.seeds", "at least one seed is required");
  for (const auto& m : methods) {
    if (std::find(known_methods().begin(), known_methods().end(), m) == known_methods().end()) {
      config_fail("experiment.methods", "unknown method '" + m + "'");
    }
  }
  std::vector<std::string> names;
  for (const auto& t : tasks) {
    if (t.name.empty()) config_fail("task", "task sections need a name");
    if (std::find(names.begin(), names.end(), t.name) != names.end()) {
      config_fail("task " + t.name, "duplicate task name");
    }
    names.push_back(t.name);
    if (t.synthetic) {
      try {
        t.synth.validate();
      } catch (const Error& e) {
        config_fail("task " + t.name, e.what());
      }
    } else if (t.source_path.empty() || t.target_path.empty()) {
      config_fail("task " + t.name, "file tasks need 'source' and 'target'");
    }
  }
  try {
    cdda.validate();
  } catch (const Error& e) {
    config_fail("cdda", e.what());
  }
}

ExperimentConfig parse_config(const std::string& text, const std::string& source_name) {
  ExperimentConfig cfg;
  const auto sections = parse_ini(text, source_name);
  const std::filesystem::path base = std::filesystem::path(source_name).parent_path();
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return (path.is_absolute() || base.empty() ? path : base / path).string();
  };
  for (const auto& sec : sections) {
    if (sec.kind.empty()) {
      if (!sec.values.empty()) {
        config_fail(source_name + ":" + std::to_string(sec.lines.begin()->second),
                    "key outside any section");
      }
      continue;
    }
    if (sec.kind == "cdda") {
      for (const auto& [k, v] : sec.values) apply_cdda_key(cfg, k, v, "cdda." + k);
    } else if (sec.kind == "experiment") {
      for (const auto& [k, v] : sec.values) apply_experiment_key(cfg, k, v, "experiment." + k);
    } else if (sec.kind == "task") {
      TaskSpec task;
      task.name = sec.name;
      if (task.name.empty()) {
        config_fail(source_name + ":" + std::to_string(sec.header_line), "task section needs a name");
      }
      auto type = sec.values.find("type");
      task.synthetic = type != sec.values.end() && type->second == "synth";
      if (type != sec.values.end() && type->second != "synth" && type->second != "files") {
        config_fail("task " + task.name + ".type", "expected synth or files");
      }
      for (const auto& [k, v] : sec.values) {
        if (k == "type") continue;
        if (task.synthetic) {
          apply_synth_key(task.synth, k, v);
        } else if (k == "source") {
          task.source_path = resolve(v);
        } else if (k == "target") {
          task.target_path = resolve(v);
        } else if (k == "truth") {
          task.truth_path = resolve(v);
        } else {
          config_fail("task " + task.name + "." + k, "unknown key");
        }
      }
      cfg.tasks.push_back(std::move(task));
    } else {
      config_fail(source_name + ":" + std::to_string(sec.header_line),
                  "unknown section '" + sec.kind + "'");
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open config '" + path + "'");
  std::ostringstream body;
  body << in.rdbuf();
  return parse_config(body.str(), path);
}

void apply_override(ExperimentConfig& config, const std::string& key, const std::string& value) {
  if (key == "methods" || key == "seeds" || key == "output") {
    apply_experiment_key(config, key, value, "--" + key);
  } else {
    apply_cdda_key(config, key, value, "--" + key);
  }
}

std::optional<CddaConfig> method_config(const CddaConfig& base, const std::string& method) {
  if (method == "nn" || method == "pca_nn") return std::nullopt;
  CddaConfig c = base;
  if (method == "jda_equivalent") {
    c.repulsive_weight = 0.0;
    c.variant = Variant::A;
  } else if (method == "cdda_a") {
    c.variant = Variant::A;
  } else if (method == "cdda_b") {
    c.variant = Variant::B;
  } else {
    throw Error(ErrorKind::Config, "unknown method '" + method + "'");
  }
  return c;
}

std::string method_config_hash(const CddaConfig& base, const std::string& method) {
  std::string canonical;
  if (auto c = method_config(base, method)) {
    canonical = c->canonical();
  } else {
    canonical = method == "nn" ? "nn" : "pca_nn;k=" + std::to_string(base.k);
  }
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

LoadedTask load_task(const TaskSpec& task, std::uint64_t seed, NormalizePolicy policy) {
  if (task.synthetic) {
    SynthTaskSpec spec = task.synth;
    spec.seed = seed;
    SynthTask s = generate_synth(spec);
    return LoadedTask{normalize(s.x, policy), std::move(s.source_labels), std::move(s.target_truth),
                      spec.classes};
  }
  const Dataset source = load_dataset(task.source_path);
  const Dataset target = load_dataset(task.target_path);
  if (!source.labels) {
    throw Error(ErrorKind::Config, "task " + task.name + ": source file has no labels");
  }
  std::vector<int> truth;
  if (!task.truth_path.empty()) {
    const Dataset t = load_dataset(task.truth_path);
    if (!t.labels) throw Error(ErrorKind::Config, "task " + task.name + ": truth file has no labels");
    truth = *t.labels;
  } else if (target.labels) {
    truth = *target.labels;
  } else {
    throw Error(ErrorKind::Config, "task " + task.name + ": no target truth labels to score against");
  }
  if (static_cast<Eigen::Index>(truth.size()) != target.size()) {
    throw Error(ErrorKind::Config, "task " + task.name + ": truth count differs from target count");
  }
  if (source.dim() != target.dim()) {
    throw Error(ErrorKind::Config, "task " + task.name + ": source and target feature dimensions differ");
  }
  int classes = 2;
  for (int l : *source.labels) classes = std::max(classes, l);
  for (int l : truth) classes = std::max(classes, l);
  FeatureMatrix x = FeatureMatrix::stack(source.features, target.features);
  return LoadedTask{normalize(x, policy), to_zero_based(*source.labels, classes),
                    to_zero_based(truth, classes), classes};
}

CellResult run_cell(const LoadedTask& task, const CddaConfig& base, const std::string& method) {
  CellResult cell;
  if (method == "nn") {
    cell.accuracy = accuracy(nn_classify(task.x.data(), task.source_labels), task.truth);
  } else if (method == "pca_nn") {
    const Projection pca = fit_pca(task.x, base.k);
    cell.accuracy = accuracy(nn_classify(embed(task.x, pca), task.source_labels), task.truth);
  } else {
    const CddaConfig cfg = *method_config(base, method);
    const CddaResult r = run(task.x, task.source_labels, cfg, task.truth, task.class_count);
    cell.accuracy = accuracy(r.final_target_labels, task.truth);
    for (const auto& it : r.per_iteration) cell.trace.push_back(*it.accuracy);
  }
  return cell;
}

namespace {

int worker_cap() {
  int cap = 1;
#ifdef _OPENMP
  cap = omp_get_max_threads();
#endif
  if (const char* env = std::getenv("CDDA_THREADS")) {
    int v = 0;
    const std::string_view s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && ptr == s.data() + s.size() && v >= 1) cap = std::min(cap, v);
  }
  return std::max(cap, 1);
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / n)};
}

// Early-stopped runs sit at a fixpoint, so repeating the last value is exact.
std::vector<double> mean_trace(const std::vector<std::vector<double>>& traces) {
  std::size_t len = 0;
  for (const auto& t : traces) len = std::max(len, t.size());
  std::vector<double> out(len, 0.0);
  if (len == 0) return out;
  for (const auto& t : traces) {
    for (std::size_t i = 0; i < len; ++i) out[i] += t.empty() ? 0.0 : t[std::min(i, t.size() - 1)];
  }
  for (double& v : out) v /= static_cast<double>(traces.size());
  return out;
}

struct Cell {
  std::size_t task;
  std::size_t method;
  std::size_t seed;
};

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& config) {
  config.validate();
  const std::size_t n_tasks = config.tasks.size();
  const std::size_t n_methods = config.methods.size();
  const std::size_t n_seeds = config.seeds.size();

  // File tasks do not depend on the seed; load them once.
  std::vector<std::vector<std::shared_ptr<const LoadedTask>>> loaded(n_tasks);
  for (std::size_t t = 0; t < n_tasks; ++t) {
    const TaskSpec& task = config.tasks[t];
    for (std::size_t s = 0; s < n_seeds; ++s) {
      if (!task.synthetic && s > 0) {
        loaded[t].push_back(loaded[t][0]);
        continue;
      }
      loaded[t].push_back(std::make_shared<const LoadedTask>(
          load_task(task, config.seeds[s], config.normalize)));
    }
  }

  std::vector<Cell> cells;
  for (std::size_t t = 0; t < n_tasks; ++t) {
    for (std::size_t m = 0; m < n_methods; ++m) {
      const std::size_t seeds_for_task = config.tasks[t].synthetic ? n_seeds : 1;
      for (std::size_t s = 0; s < seeds_for_task; ++s) cells.push_back({t, m, s});
    }
  }

  std::vector<CellResult> results(cells.size());
  std::vector<double> times(cells.size(), 0.0);
  std::vector<std::string> errors(cells.size());
  const auto n_cells = static_cast<std::ptrdiff_t>(cells.size());
#pragma omp parallel for schedule(dynamic) num_threads(worker_cap())
  for (std::ptrdiff_t i = 0; i < n_cells; ++i) {
    const Cell& c = cells[static_cast<std::size_t>(i)];
    const auto start = std::chrono::steady_clock::now();
    try {
      results[static_cast<std::size_t>(i)] =
          run_cell(*loaded[c.task][c.seed], config.cdda, config.methods[c.method]);
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "task " << config.tasks[c.task].name << ", method " << config.methods[c.method]
         << ", seed " << config.seeds[c.seed] << ": " << e.what();
      errors[static_cast<std::size_t>(i)] = os.str();
    }
    times[static_cast<std::size_t>(i)] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }

  RunOutcome out;
  std::size_t i = 0;
  for (std::size_t t = 0; t < n_tasks; ++t) {
    for (std::size_t m = 0; m < n_methods; ++m) {
      ResultRecord rec;
      rec.method = config.methods[m];
      rec.task = config.tasks[t].name;
      rec.config_hash = method_config_hash(config.cdda, rec.method);
      bool ok = true;
      const std::size_t seeds_for_task = config.tasks[t].synthetic ? n_seeds : 1;
      for (std::size_t s = 0; s < seeds_for_task; ++s, ++i) {
        if (!errors[i].empty()) {
          out.failures.push_back(errors[i]);
          ok = false;
          continue;
        }
        rec.seeds.push_back(config.seeds[s]);
        rec.accuracies.push_back(results[i].accuracy);
        rec.seed_traces.push_back(results[i].trace);
        rec.wall_time_s += times[i];
      }
      if (!ok) continue;
      std::tie(rec.mean_accuracy, rec.std_accuracy) = mean_std(rec.accuracies);
      rec.trace = mean_trace(rec.seed_traces);
      out.records.push_back(std::move(rec));
    }
  }
  std::sort(out.records.begin(), out.records.end(), [](const auto& a, const auto& b) {
    return std::tie(a.task, a.method) < std::tie(b.task, b.method);
  });
  return out;
}

std::string record_to_json(const ResultRecord& r) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["record"] = "result";
  j["method"] = r.method;
  j["task"] = r.task;
  j["seeds"] = r.seeds;
  j["accuracy"] = r.accuracies;
  j["mean_accuracy"] = r.mean_accuracy;
  j["std_accuracy"] = r.std_accuracy;
  j["trace"] = r.trace;
  j["seed_traces"] = r.seed_traces;
  j["config_hash"] = r.config_hash;
  j["wall_time_s"] = r.wall_time_s;
  return j.dump();
}

namespace {

[[noreturn]] void schema_fail(const std::string& msg) {
  throw Error(ErrorKind::Parse, "results schema: " + msg);
}

void check_accuracy(double a) {
  if (!(a >= 0.0 && a <= 1.0)) schema_fail("accuracy outside [0, 1]");
}

}  // namespace

ResultRecord record_from_json(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    schema_fail(e.what());
  }
  if (!j.is_object()) schema_fail("record is not an object");
  if (!j.contains("schema_version") || j["schema_version"] != kSchemaVersion) {
    schema_fail("unsupported or missing schema_version");
  }
  if (j.value("record", "") != "result") schema_fail("not a result record");
  ResultRecord r;
  try {
    r.method = j.at("method").get<std::string>();
    r.task = j.at("task").get<std::string>();
    r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    r.accuracies = j.at("accuracy").get<std::vector<double>>();
    r.mean_accuracy = j.at("mean_accuracy").get<double>();
    r.std_accuracy = j.at("std_accuracy").get<double>();
    r.trace = j.at("trace").get<std::vector<double>>();
    r.seed_traces = j.at("seed_traces").get<std::vector<std::vector<double>>>();
    r.config_hash = j.at("config_hash").get<std::string>();
    r.wall_time_s = j.at("wall_time_s").get<double>();
  } catch (const json::exception& e) {
    schema_fail(e.what());
  }
  if (r.accuracies.size() != r.seeds.size() || r.seed_traces.size() != r.seeds.size()) {
    schema_fail("per-seed arrays differ in length");
  }
  for (double a : r.accuracies) check_accuracy(a);
  for (double a : r.trace) check_accuracy(a);
  check_accuracy(r.mean_accuracy);
  return r;
}

std::string header_json(const std::string& timestamp, const std::string& command) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["record"] = "header";
  j["command"] = command;
  j["timestamp"] = timestamp;
  return j.dump();
}

namespace {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorKind::Config, "cannot write '" + path.string() + "'");
}

}  // namespace

void write_results(const std::string& dir, const std::vector<ResultRecord>& records,
                   const std::string& command) {
  std::filesystem::create_directories(dir);
  std::string jsonl = header_json(utc_timestamp(), command) + "\n";
  for (const auto& r : records) jsonl += record_to_json(r) + "\n";
  write_text(std::filesystem::path(dir) / "results.jsonl", jsonl);
  write_text(std::filesystem::path(dir) / "results.txt", format_table(records));
}

std::vector<ResultRecord> read_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open results '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) schema_fail("empty results file");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::parse_error& e) {
    schema_fail(e.what());
  }
  if (!header.is_object() || header.value("record", "") != "header" ||
      !header.contains("schema_version") || header["schema_version"] != kSchemaVersion) {
    schema_fail("missing or unsupported header line");
  }
  std::vector<ResultRecord> out;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(record_from_json(line));
  }
  return out;
}

std::string format_table(const std::vector<ResultRecord>& records) {
  std::size_t task_w = 4;
  std::size_t method_w = 6;
  for (const auto& r : records) {
    task_w = std::max(task_w, r.task.size());
    method_w = std::max(method_w, r.method.size());
  }
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(task_w) + 2) << "task"
     << std::setw(static_cast<int>(method_w) + 2) << "method" << std::right << std::setw(10)
     << "acc(%)" << std::setw(9) << "std(%)" << std::setw(7) << "seeds" << "  per-seed(%)\n";
  os << std::fixed << std::setprecision(2);
  for (const auto& r : records) {
    os << std::left << std::setw(static_cast<int>(task_w) + 2) << r.task
       << std::setw(static_cast<int>(method_w) + 2) << r.method << std::right << std::setw(10)
       << 100.0 * r.mean_accuracy << std::setw(9) << 100.0 * r.std_accuracy << std::setw(7)
       << r.seeds.size() << " ";
    for (double a : r.accuracies) os << ' ' << 100.0 * a;
    os << '\n';
  }
  return os.str();
}

std::string strip_volatile(const std::string& jsonl) {
  std::istringstream in(jsonl);
  std::string line;
  std::string out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    j.erase("timestamp");
    j.erase("wall_time_s");
    out += j.dump() + "\n";
  }
  return out;
}

SweepParam parse_sweep_param(const std::string& name) {
  if (name == "alpha") return SweepParam::Alpha;
  if (name == "k") return SweepParam::K;
  if (name == "lambda") return SweepParam::Lambda;
  if (name == "iterations") return SweepParam::Iterations;
  config_fail("--param", "expected alpha, k, lambda or iterations, got '" + name + "'");
}

std::string to_string(SweepParam p) {
  switch (p) {
    case SweepParam::Alpha: return "alpha";
    case SweepParam::K: return "k";
    case SweepParam::Lambda: return "lambda";
    case SweepParam::Iterations: return "iterations";
  }
  return "alpha";
}

std::vector<double> parse_grid(SweepParam param, const std::string& grid) {
  std::vector<double> out;
  for (const auto& item : split(grid, ',')) {
    // "a..b" expands an integer range.
    const auto dots = item.find("..");
    if (dots != std::string::npos && (param == SweepParam::K || param == SweepParam::Iterations)) {
      const long long lo = parse_int("--grid", trim(item.substr(0, dots)));
      const long long hi = parse_int("--grid", trim(item.substr(dots + 2)));
      if (hi < lo) config_fail("--grid", "empty range '" + item + "'");
      for (long long v = lo; v <= hi; ++v) out.push_back(static_cast<double>(v));
      continue;
    }
    out.push_back(parse_double("--grid", item));
  }
  if (out.empty()) config_fail("--grid", "grid is empty");
  for (double v : out) {
    const std::string bad = "invalid " + to_string(param) + " value " + format_number(v);
    switch (param) {
      case SweepParam::Alpha:
        if (!(v > 0.0 && v < 1.0)) config_fail("--grid", bad + " (need 0 < alpha < 1)");
        break;
      case SweepParam::Lambda:
        if (!(v >= 0.0)) config_fail("--grid", bad + " (need lambda >= 0)");
        break;
      case SweepParam::K:
      case SweepParam::Iterations:
        if (v < 1.0 || v != std::floor(v)) config_fail("--grid", bad + " (need an integer >= 1)");
        break;
    }
  }
  return out;
}

SweepOutcome run_sweep(const ExperimentConfig& base, SweepParam param,
                       const std::vector<double>& grid, const std::string& method) {
  if (std::find(known_methods().begin(), known_methods().end(), method) == known_methods().end()) {
    config_fail("--method", "unknown method '" + method + "'");
  }
  SweepOutcome out;
  for (double v : grid) {
    ExperimentConfig cfg = base;
    cfg.methods = {method};
    switch (param) {
      case SweepParam::Alpha: cfg.cdda.alpha = v; break;
      case SweepParam::K: cfg.cdda.k = static_cast<Eigen::Index>(v); break;
      case SweepParam::Lambda: cfg.cdda.lambda = v; break;
      case SweepParam::Iterations: cfg.cdda.iterations = static_cast<int>(v); break;
    }
    RunOutcome run = run_experiment(cfg);
    std::vector<double> pooled;
    for (auto& r : run.records) {
      pooled.insert(pooled.end(), r.accuracies.begin(), r.accuracies.end());
      r.method += "[" + to_string(param) + "=" + format_number(v) + "]";
      out.records.push_back(std::move(r));
    }
    out.failures.insert(out.failures.end(), run.failures.begin(), run.failures.end());
    if (!run.failures.empty()) break;
    const auto [mean, sd] = mean_std(pooled);
    out.rows.push_back({v, mean, sd});
  }
  return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "param_value,mean_accuracy,std\n";
  for (const auto& r : rows) {
    out += format_number(r.value) + "," + format_number(r.mean_accuracy) + "," +
           format_number(r.std_accuracy) + "\n";
  }
  return out;
}

std::vector<std::string> write_synth_files(const SynthTaskSpec& spec, const std::string& dir,
                                           DatasetFormat format) {
  const SynthTask task = generate_synth(spec);
  std::filesystem::create_directories(dir);
  const std::string ext = format == DatasetFormat::Csv ? ".csv" : ".cdda";
  const std::filesystem::path base(dir);
  const std::string source_path = (base / ("source" + ext)).string();
  const std::string target_path = (base / ("target" + ext)).string();
  const std::string truth_path = (base / ("truth" + ext)).string();

  save_dataset(source_path, Dataset{Matrix(task.x.source()), to_one_based(task.source_labels)});
  save_dataset(target_path, Dataset{Matrix(task.x.target()), std::nullopt});
  save_dataset(truth_path, Dataset{Matrix(0, task.x.n_target()), to_one_based(task.target_truth)});
  return {source_path, target_path, truth_path};
}

}  // namespace cdda::experiment
