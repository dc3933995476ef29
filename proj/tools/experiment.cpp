#include "experiment.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <map>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <thread>

#include "memlab/adapter.hpp"

namespace memlab::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class YamlReader {
 public:
  explicit YamlReader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& what) const {
    const auto mark = node.Mark();
    if (mark.line >= 0) {
      throw ConfigError(source_ + ":" + std::to_string(mark.line + 1) + ": " + what);
    }
    throw ConfigError(source_ + ": " + what);
  }

  void expect_map(const YAML::Node& node, const std::string& what) const {
    if (!node.IsMap()) fail(node, what + " must be a mapping");
  }

  void allow_keys(const YAML::Node& node, std::initializer_list<const char*> keys,
                  const std::string& where) const {
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
        fail(kv.first, "unknown key '" + key + "' in " + where);
      }
    }
  }

  template <typename T>
  T scalar(const YAML::Node& node, const std::string& key) const {
    if (!node.IsScalar()) fail(node, "'" + key + "' must be a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, "'" + key + "' has an invalid value '" + node.Scalar() + "'");
    }
  }

  std::size_t positive(const YAML::Node& node, const std::string& key) const {
    const auto v = scalar<long long>(node, key);
    if (v < 1) fail(node, "'" + key + "' must be a positive integer");
    return static_cast<std::size_t>(v);
  }

  std::vector<double> reals(const YAML::Node& node, const std::string& key) const {
    if (!node.IsSequence()) fail(node, "'" + key + "' must be a list");
    std::vector<double> out;
    for (const auto& item : node) out.push_back(scalar<double>(item, key));
    return out;
  }

  void apply_addition(const YAML::Node& node, EvaluatorSpec& spec) const {
    if (node.IsScalar()) {
      const auto preset = node.Scalar();
      if (preset == "fixed") spec = EvaluatorSpec::fixed();
      else if (preset == "add_all") spec = EvaluatorSpec::add_all();
      else if (preset == "C1") spec = EvaluatorSpec::coarse(kCoarse1Threshold);
      else if (preset == "C2") spec = EvaluatorSpec::coarse(kCoarse2Threshold);
      else if (preset == "C3") spec = EvaluatorSpec::coarse(kCoarse3Threshold);
      else if (preset == "strict") spec = EvaluatorSpec::strict();
      else fail(node, "unknown addition preset '" + preset + "'");
      return;
    }
    expect_map(node, "addition");
    allow_keys(node, {"kind", "threshold"}, "addition");
    if (!node["kind"]) fail(node, "addition needs a 'kind'");
    try {
      spec.kind = evaluator_kind_from_string(scalar<std::string>(node["kind"], "kind"));
    } catch (const std::invalid_argument& e) {
      fail(node["kind"], e.what());
    }
    spec.threshold.reset();
    if (node["threshold"]) spec.threshold = scalar<double>(node["threshold"], "threshold");
    else if (spec.kind == EvaluatorKind::strict) spec.threshold = kStrictThreshold;
  }

  void apply_deletion(const YAML::Node& node, DeletionConfig& del) const {
    expect_map(node, "deletion");
    allow_keys(node, {"mode", "period", "alpha", "n", "beta", "capacity"}, "deletion");
    if (node["mode"]) {
      try {
        del.mode = deletion_mode_from_string(scalar<std::string>(node["mode"], "mode"));
      } catch (const std::invalid_argument& e) {
        fail(node["mode"], e.what());
      }
    }
    if (node["period"]) del.period = static_cast<std::int64_t>(positive(node["period"], "period"));
    if (node["alpha"]) del.alpha = scalar<std::int64_t>(node["alpha"], "alpha");
    if (node["n"]) del.min_retrievals_n = positive(node["n"], "n");
    if (node["beta"]) del.beta = scalar<double>(node["beta"], "beta");
    if (node["capacity"]) del.capacity = positive(node["capacity"], "capacity");
  }

  void apply_surrogate(const YAML::Node& node, SurrogateParams& sp) const {
    expect_map(node, "surrogate");
    allow_keys(node,
               {"lambda_low_sim", "sim_lo", "sim_hi", "softmax_temperature", "ridge", "fixed_lambda"},
               "surrogate");
    if (node["lambda_low_sim"]) sp.lambda_low_sim = scalar<double>(node["lambda_low_sim"], "lambda_low_sim");
    if (node["sim_lo"]) sp.sim_lo = scalar<double>(node["sim_lo"], "sim_lo");
    if (node["sim_hi"]) sp.sim_hi = scalar<double>(node["sim_hi"], "sim_hi");
    if (node["softmax_temperature"]) {
      sp.softmax_temperature = scalar<double>(node["softmax_temperature"], "softmax_temperature");
    }
    if (node["ridge"]) sp.ridge = scalar<double>(node["ridge"], "ridge");
    if (node["fixed_lambda"]) sp.fixed_lambda = scalar<double>(node["fixed_lambda"], "fixed_lambda");
  }

  void apply_config(const YAML::Node& node, SimulationConfig& c, bool allow_name) const {
    static const std::initializer_list<const char*> kConfigKeys = {
        "name",         "stream_length", "k_retrieve", "initial_memory", "dimension",
        "means",        "noise_bound",   "addition",   "utility_threshold", "deletion",
        "surrogate",    "error_free",    "gamma_output", "agent"};
    expect_map(node, allow_name ? "variant" : "defaults");
    allow_keys(node, kConfigKeys, allow_name ? "variant" : "defaults");
    if (!allow_name && node["name"]) fail(node["name"], "'name' is not allowed in defaults");
    if (node["stream_length"]) c.stream_length = positive(node["stream_length"], "stream_length");
    if (node["k_retrieve"]) c.k_retrieve = positive(node["k_retrieve"], "k_retrieve");
    if (node["initial_memory"]) c.initial_memory = positive(node["initial_memory"], "initial_memory");
    if (node["dimension"]) c.dimension = positive(node["dimension"], "dimension");
    if (node["means"]) c.means = reals(node["means"], "means");
    if (node["noise_bound"]) c.noise_bound = scalar<double>(node["noise_bound"], "noise_bound");
    if (node["addition"]) apply_addition(node["addition"], c.addition);
    if (node["utility_threshold"]) {
      c.utility_threshold = scalar<double>(node["utility_threshold"], "utility_threshold");
    }
    if (node["deletion"]) apply_deletion(node["deletion"], c.deletion);
    if (node["surrogate"]) apply_surrogate(node["surrogate"], c.surrogate);
    if (node["error_free"]) c.error_free = scalar<bool>(node["error_free"], "error_free");
    if (node["gamma_output"]) c.gamma_output = scalar<double>(node["gamma_output"], "gamma_output");
    if (const auto agent = node["agent"]) {
      expect_map(agent, "agent");
      allow_keys(agent, {"command", "timeout_ms"}, "agent");
      if (!agent["command"]) fail(agent, "agent needs a 'command'");
      c.agent_command = scalar<std::string>(agent["command"], "command");
      if (agent["timeout_ms"]) {
        c.agent_timeout = std::chrono::milliseconds(positive(agent["timeout_ms"], "timeout_ms"));
      }
    }
  }

 private:
  std::string source_;
};

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json real_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json config_to_json(const SimulationConfig& c) {
  json addition{{"kind", to_string(c.addition.kind)}};
  if (c.addition.threshold) addition["threshold"] = *c.addition.threshold;
  json deletion{{"mode", to_string(c.deletion.mode)},
                {"period", c.deletion.period},
                {"alpha", c.deletion.alpha},
                {"n", c.deletion.min_retrievals_n},
                {"beta", c.deletion.beta}};
  if (c.deletion.capacity) deletion["capacity"] = *c.deletion.capacity;
  json surrogate{{"lambda_low_sim", c.surrogate.lambda_low_sim},
                 {"sim_lo", c.surrogate.sim_lo},
                 {"sim_hi", c.surrogate.sim_hi},
                 {"softmax_temperature", c.surrogate.softmax_temperature},
                 {"ridge", c.surrogate.ridge}};
  if (c.surrogate.fixed_lambda) surrogate["fixed_lambda"] = *c.surrogate.fixed_lambda;
  json out{{"seed", c.seed},
           {"stream_length", c.stream_length},
           {"k_retrieve", c.k_retrieve},
           {"initial_memory", c.initial_memory},
           {"dimension", c.dimension},
           {"means", c.means},
           {"noise_bound", c.noise_bound},
           {"addition", addition},
           {"utility_threshold", c.utility_threshold},
           {"deletion", deletion},
           {"surrogate", surrogate},
           {"error_free", c.error_free},
           {"gamma_output", c.gamma_output}};
  if (c.agent_command) out["agent"] = {{"command", *c.agent_command}, {"timeout_ms", c.agent_timeout.count()}};
  return out;
}

std::vector<double> real_list(const json& j) {
  std::vector<double> out;
  if (!j.is_array()) return out;
  for (const auto& v : j) out.push_back(v.is_null() ? std::nan("") : v.get<double>());
  return out;
}

// Runs `job(i)` for i in [0, count) on up to `workers` threads and rethrows
// the first failure after all threads join.
template <typename Job>
void parallel_for(std::size_t count, unsigned workers, Job job) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      {
        std::lock_guard lock(failure_mutex);
        if (failure) return;
      }
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);
}

class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    {
      std::lock_guard lock(mutex_);
      files_.push_back(path);
    }
    std::ofstream out(path, std::ios::binary);
    out << content;
    out.close();
    if (!out) throw std::runtime_error("failed to write " + path.string());
  }

  void discard() noexcept {
    std::error_code ec;
    for (const auto& f : files_) fs::remove(f, ec);
    if (created_dir_) fs::remove(dir_, ec);  // only if still empty
  }

  void prepare() {
    if (!fs::exists(dir_)) {
      fs::create_directories(dir_);
      created_dir_ = true;
    }
  }

  std::vector<fs::path> files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<fs::path> files_;
  std::mutex mutex_;
  bool created_dir_ = false;
};

std::string run_stem(const std::string& variant, std::uint64_t seed) {
  return variant + "__seed" + std::to_string(seed);
}

RunReport run_grid(const ExperimentFile& experiment, unsigned workers, bool shifted) {
  const auto dir = resolve_output_dir(experiment);
  OutputSet outputs(dir);
  const std::size_t per_variant = experiment.seeds.size();
  const std::size_t total = experiment.variants.size() * per_variant;
  std::vector<SummaryRecord> records(total);
  try {
    outputs.prepare();
    parallel_for(total, workers, [&](std::size_t i) {
      const auto& variant = experiment.variants[i / per_variant];
      SimulationConfig config = variant.config;
      config.seed = experiment.seeds[i % per_variant];

      SimulationResult result = [&] {
        if (!shifted) return run_simulation(config);
        auto run = run_shifted(config, experiment.shift_clusters);
        records[i].blocks = block_success_rates(run.result.traces, run.labels);
        return std::move(run.result);
      }();

      auto& rec = records[i];
      rec.experiment = experiment.name;
      rec.variant = variant.name;
      rec.seed = config.seed;
      rec.summary = summarize(result, experiment.min_retrievals);

      const auto stem = run_stem(variant.name, config.seed);
      std::ostringstream trace, events;
      write_trace_csv(trace, result.traces);
      write_events_csv(events, result.traces);
      outputs.write(stem + ".csv", trace.str());
      outputs.write(stem + ".events.csv", events.str());
      outputs.write(stem + ".json", summary_to_json(rec, config));
    });

    RunReport report;
    report.rows = compare_summaries(records);
    outputs.write("comparison.txt", render_comparison(report.rows));
    if (shifted) {
      std::ostringstream blocks;
      blocks << "variant,seed,block,label,begin,steps,success_rate\n";
      for (const auto& rec : records) {
        for (std::size_t b = 0; b < rec.blocks.size(); ++b) {
          const auto& blk = rec.blocks[b];
          blocks << rec.variant << ',' << rec.seed << ',' << b << ',' << blk.label << ',' << blk.begin
                 << ',' << blk.steps << ',' << format_real(blk.success_rate) << '\n';
        }
      }
      outputs.write("blocks.csv", blocks.str());
    }
    report.files = outputs.files();
    return report;
  } catch (...) {
    outputs.discard();
    throw;
  }
}

}  // namespace

ExperimentFile parse_experiment(const std::string& text, const std::string& source_name) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source_name + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  YamlReader reader(source_name);
  if (!root.IsMap()) throw ConfigError(source_name + ": top level must be a mapping");
  reader.allow_keys(root,
                    {"schema_version", "name", "seeds", "output_dir", "defaults", "variants", "shift",
                     "analysis"},
                    "experiment");

  if (!root["schema_version"]) reader.fail(root, "missing 'schema_version'");
  const auto version = reader.scalar<int>(root["schema_version"], "schema_version");
  if (version != kExperimentSchemaVersion) {
    reader.fail(root["schema_version"], "unsupported schema_version " + std::to_string(version) +
                                            " (expected " + std::to_string(kExperimentSchemaVersion) + ")");
  }

  ExperimentFile exp;
  if (!root["name"]) reader.fail(root, "missing 'name'");
  exp.name = reader.scalar<std::string>(root["name"], "name");
  if (exp.name.empty() || exp.name.find('/') != std::string::npos) {
    reader.fail(root["name"], "experiment name must be non-empty and contain no '/'");
  }

  if (!root["seeds"]) reader.fail(root, "missing 'seeds'");
  const auto seeds = root["seeds"];
  if (!seeds.IsSequence() || seeds.size() == 0) reader.fail(seeds, "'seeds' must be a non-empty list");
  for (const auto& s : seeds) {
    const auto v = reader.scalar<long long>(s, "seeds");
    if (v < 0) reader.fail(s, "seeds must be non-negative");
    exp.seeds.push_back(static_cast<std::uint64_t>(v));
  }

  exp.output_dir = root["output_dir"] ? fs::path(reader.scalar<std::string>(root["output_dir"], "output_dir"))
                                      : fs::path("results") / exp.name;

  if (const auto shift = root["shift"]) {
    reader.expect_map(shift, "shift");
    reader.allow_keys(shift, {"clusters"}, "shift");
    if (shift["clusters"]) {
      exp.shift_clusters = reader.positive(shift["clusters"], "clusters");
      if (exp.shift_clusters < 2) reader.fail(shift["clusters"], "'clusters' must be at least 2");
    }
  }
  if (const auto analysis = root["analysis"]) {
    reader.expect_map(analysis, "analysis");
    reader.allow_keys(analysis, {"min_retrievals"}, "analysis");
    if (analysis["min_retrievals"]) {
      exp.min_retrievals = reader.positive(analysis["min_retrievals"], "min_retrievals");
    }
  }

  SimulationConfig defaults;
  if (root["defaults"]) reader.apply_config(root["defaults"], defaults, false);

  if (!root["variants"]) reader.fail(root, "missing 'variants'");
  const auto variants = root["variants"];
  if (!variants.IsSequence() || variants.size() == 0) {
    reader.fail(variants, "'variants' must be a non-empty list");
  }
  std::set<std::string> names;
  for (const auto& node : variants) {
    Variant v;
    v.config = defaults;
    reader.apply_config(node, v.config, true);
    if (!node["name"]) reader.fail(node, "variant needs a 'name'");
    v.name = reader.scalar<std::string>(node["name"], "name");
    if (v.name.empty() || v.name.find_first_of("/ ") != std::string::npos) {
      reader.fail(node["name"], "variant name must be non-empty without '/' or spaces");
    }
    if (!names.insert(v.name).second) reader.fail(node["name"], "duplicate variant name '" + v.name + "'");
    try {
      v.config.validate();
    } catch (const std::invalid_argument& e) {
      reader.fail(node, "variant '" + v.name + "': " + e.what());
    }
    exp.variants.push_back(std::move(v));
  }
  return exp;
}

ExperimentFile load_experiment(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment(buf.str(), path.string());
}

fs::path resolve_output_dir(const ExperimentFile& experiment) {
  if (const char* root = std::getenv(kOutputRootEnv); root && *root) {
    return fs::path(root) / experiment.name;
  }
  return experiment.output_dir;
}

void write_trace_csv(std::ostream& out, const std::vector<StepTrace>& traces) {
  out << kTraceCsvHeader << '\n';
  for (const auto& t : traces) {
    out << t.step << ',' << format_real(t.input_similarity) << ',' << format_real(t.output_similarity)
        << ',' << format_real(t.prediction) << ',' << format_real(t.truth) << ','
        << format_real(t.abs_error) << ',' << (t.success ? 1 : 0) << ',' << (t.added ? 1 : 0) << ','
        << t.deleted_ids.size() << ',' << t.mem_size_after << '\n';
  }
}

void write_events_csv(std::ostream& out, const std::vector<StepTrace>& traces) {
  out << "step,event,record_id\n";
  for (const auto& t : traces) {
    if (t.added_id) out << t.step << ",added," << to_underlying(*t.added_id) << '\n';
    for (auto id : t.deleted_ids) out << t.step << ",deleted," << to_underlying(id) << '\n';
  }
}

std::string summary_to_json(const SummaryRecord& record, const SimulationConfig& config) {
  const auto& s = record.summary;
  json j{{"schema", "memlab-summary"},
         {"schema_version", record.schema_version},
         {"experiment", record.experiment},
         {"variant", record.variant},
         {"seed", record.seed},
         {"config", config_to_json(config)},
         {"success_rate", s.success_rate},
         {"final_mem_size", s.final_mem_size},
         {"pearson_input_output", real_or_null(s.pearson_input_output)},
         {"cumulative_input_sim", s.cumulative_input_sim},
         {"cumulative_output_sim", s.cumulative_output_sim},
         {"deleted_errors", s.deleted_errors},
         {"retained_errors", s.retained_errors}};
  if (!record.blocks.empty()) {
    json blocks = json::array();
    for (const auto& b : record.blocks) {
      blocks.push_back({{"label", b.label}, {"begin", b.begin}, {"steps", b.steps},
                        {"success_rate", b.success_rate}});
    }
    j["blocks"] = std::move(blocks);
  }
  return j.dump(2) + "\n";
}

SummaryRecord summary_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("not JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("schema", "") != "memlab-summary") {
    throw ConfigError("not a memlab summary");
  }
  try {
    SummaryRecord r;
    r.schema_version = j.at("schema_version").get<int>();
    r.experiment = j.value("experiment", "");
    r.variant = j.at("variant").get<std::string>();
    r.seed = j.value("seed", std::uint64_t{0});
    auto& s = r.summary;
    s.success_rate = j.at("success_rate").get<double>();
    s.final_mem_size = j.at("final_mem_size").get<std::size_t>();
    const auto& p = j.at("pearson_input_output");
    s.pearson_input_output = p.is_null() ? std::nan("") : p.get<double>();
    s.cumulative_input_sim = real_list(j.value("cumulative_input_sim", json::array()));
    s.cumulative_output_sim = real_list(j.value("cumulative_output_sim", json::array()));
    s.deleted_errors = real_list(j.value("deleted_errors", json::array()));
    s.retained_errors = real_list(j.value("retained_errors", json::array()));
    if (j.contains("blocks")) {
      for (const auto& b : j["blocks"]) {
        r.blocks.push_back({b.at("label").get<std::size_t>(), b.at("begin").get<std::size_t>(),
                            b.at("steps").get<std::size_t>(), b.at("success_rate").get<double>()});
      }
    }
    return r;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed summary: ") + e.what());
  }
}

std::vector<ComparisonRow> compare_summaries(const std::vector<SummaryRecord>& records) {
  if (records.empty()) throw ConfigError("no summaries to compare");
  const int version = records.front().schema_version;
  for (const auto& r : records) {
    if (r.schema_version != version) {
      throw ConfigError("mixed summary schema versions (" + std::to_string(version) + " and " +
                        std::to_string(r.schema_version) + ")");
    }
  }
  if (version != kSummarySchemaVersion) {
    throw ConfigError("unsupported summary schema version " + std::to_string(version));
  }
  std::vector<std::string> order;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (const auto& r : records) {
    if (!groups.contains(r.variant)) order.push_back(r.variant);
    auto& [sr, mem] = groups[r.variant];
    sr.push_back(r.summary.success_rate);
    mem.push_back(static_cast<double>(r.summary.final_mem_size));
  }
  std::vector<ComparisonRow> rows;
  for (const auto& name : order) {
    const auto& [sr, mem] = groups[name];
    rows.push_back({name, sr.size(), mean(sr), stddev(sr), mean(mem), stddev(mem)});
  }
  return rows;
}

std::string render_comparison(const std::vector<ComparisonRow>& rows) {
  std::size_t width = std::string("variant").size();
  for (const auto& r : rows) width = std::max(width, r.variant.size());
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-*s  %4s  %8s  %8s  %10s  %9s\n", static_cast<int>(width), "variant",
                "runs", "mean_sr", "sd_sr", "mean_mem", "sd_mem");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-*s  %4zu  %8.4f  %8.4f  %10.1f  %9.1f\n", static_cast<int>(width),
                  r.variant.c_str(), r.runs, r.mean_success, r.stddev_success, r.mean_mem_size,
                  r.stddev_mem_size);
    out << line;
  }
  return out.str();
}

RunReport run_experiment(const ExperimentFile& experiment, unsigned workers) {
  return run_grid(experiment, workers, false);
}

RunReport run_shift_experiment(const ExperimentFile& experiment, unsigned workers) {
  return run_grid(experiment, workers, true);
}

AdapterCheck check_adapter(const std::string& command, std::chrono::milliseconds timeout) {
  AdapterCheck check;
  const std::vector<double> query{1.0, 0.5, -0.5, 0.0, 0.25, -1.0};
  const std::vector<double> a{1.0, 0.4, -0.6, 0.1, 0.2, -0.9};
  const std::vector<double> b{0.9, 0.5, -0.4, 0.0, 0.3, -1.1};
  const std::vector<Demonstration> demos{{a, 0.75}, {b, 0.5}};
  check.request = encode_request(query, demos);
  try {
    SubprocessAgent agent(command, timeout);
    check.response = agent.round_trip(check.request);
    check.guess = decode_response(check.response);
    check.ok = true;
  } catch (const std::exception& e) {
    check.error = e.what();
  }
  return check;
}

}  // namespace memlab::cli
