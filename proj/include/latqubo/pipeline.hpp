#pragma once

// End-to-end experiment driver: ingest -> split -> binarize -> fit surrogate
// -> multi-seed optimization -> retrieval decoding -> oracle scoring ->
// reports, all from one JSON configuration.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "latqubo/codes.hpp"
#include "latqubo/dataset.hpp"
#include "latqubo/diagnostics.hpp"
#include "latqubo/errors.hpp"
#include "latqubo/npy.hpp"
#include "latqubo/optimizers.hpp"
#include "latqubo/oracle.hpp"
#include "latqubo/projection.hpp"
#include "latqubo/qubo.hpp"
#include "latqubo/retrieval.hpp"
#include "latqubo/rng.hpp"

namespace latqubo {

namespace fs = std::filesystem;

inline constexpr const char* kArtifactVersion = "0.1.0";
inline constexpr const char* kWorkersEnv = "LATQUBO_WORKERS";

struct ExperimentConfig {
  struct Paths {
    fs::path embeddings;
    fs::path fitness;
    std::string fitness_column = "fitness";
    std::optional<fs::path> sequences;  // CSV
    std::string sequence_column = "sequence";
  } paths;
  struct Split {
    SplitMode mode = SplitMode::stratified_quantile;
    SplitRatios ratios;
    std::uint64_t seed = 0;
    std::size_t n_bins = 10;
  } split;
  struct Latent {
    ProjectionKind kind = ProjectionKind::pca;
    std::size_t m = 32;
    std::uint64_t seed = 0;
  } latent;
  double lambda = kDefaultSurrogateLambda;
  std::vector<OptimizerKind> methods{OptimizerKind::sa, OptimizerKind::ga, OptimizerKind::rs, OptimizerKind::ghc,
                                     OptimizerKind::lbo};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::map<std::string, double> overrides;  // dotted optimizer keys, e.g. "sa.steps"
  std::size_t top_k = kDefaultTopK;
  OracleSettings oracle;
  bool oracle_auto = false;  // pick ridge or GP by validation Spearman
  fs::path output_directory = "runs";
  std::size_t workers = 1;

  OptimizerParams optimizer_params() const {
    OptimizerParams p;
    for (const auto& [k, v] : overrides) p.set(k, v);
    return p;
  }
};

// ---------------------------------------------------------------------------
// Config JSON
// ---------------------------------------------------------------------------

namespace config_detail {

inline void flatten(const nlohmann::json& j, const std::string& prefix, std::map<std::string, double>& out) {
  for (const auto& [k, v] : j.items()) {
    const std::string key = prefix.empty() ? k : prefix + "." + k;
    if (v.is_object()) flatten(v, key, out);
    else if (v.is_number()) out[key] = v.get<double>();
    else throw ValidationError("optimizer override '" + key + "' must be a number");
  }
}

inline nlohmann::json section(const nlohmann::json& j, const char* name) {
  if (!j.contains(name) || j[name].is_null()) return nlohmann::json::object();
  if (!j[name].is_object()) throw ValidationError(std::string("config section '") + name + "' must be an object");
  return j[name];
}

inline Vector grid_or(const nlohmann::json& g, const char* key, Vector fallback) {
  return g.contains(key) ? g[key].get<Vector>() : std::move(fallback);
}

}  // namespace config_detail

/// Parses a config document. Relative paths are resolved against `base`.
inline ExperimentConfig parse_config(const nlohmann::json& j, const fs::path& base = {}) {
  using config_detail::section;
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  ExperimentConfig c;
  try {
    auto resolve = [&](const std::string& p) {
      fs::path path(p);
      return path.is_relative() && !base.empty() ? base / path : path;
    };
    const auto paths = section(j, "paths");
    if (!paths.contains("embeddings") || !paths.contains("fitness")) {
      throw ValidationError("config paths.embeddings and paths.fitness are required");
    }
    c.paths.embeddings = resolve(paths["embeddings"].get<std::string>());
    c.paths.fitness = resolve(paths["fitness"].get<std::string>());
    c.paths.fitness_column = paths.value("fitness_column", c.paths.fitness_column);
    if (paths.contains("sequences") && !paths["sequences"].is_null()) {
      c.paths.sequences = resolve(paths["sequences"].get<std::string>());
    }
    c.paths.sequence_column = paths.value("sequence_column", c.paths.sequence_column);

    const auto split = section(j, "split");
    if (split.contains("mode")) c.split.mode = parse_split_mode(split["mode"].get<std::string>());
    if (split.contains("ratios")) {
      const auto r = split["ratios"].get<std::vector<double>>();
      if (r.size() != 3) throw ValidationError("split.ratios needs three values (train, val, test)");
      c.split.ratios = {r[0], r[1], r[2]};
    }
    c.split.seed = split.value("seed", c.split.seed);
    c.split.n_bins = split.value("n_bins", c.split.n_bins);

    const auto latent = section(j, "latent");
    if (latent.contains("kind")) c.latent.kind = parse_projection_kind(latent["kind"].get<std::string>());
    c.latent.m = latent.value("m", c.latent.m);
    c.latent.seed = latent.value("seed", c.latent.seed);

    c.lambda = section(j, "surrogate").value("lambda", c.lambda);

    const auto opt = section(j, "optimizers");
    if (opt.contains("methods")) {
      c.methods.clear();
      for (const auto& m : opt["methods"]) c.methods.push_back(parse_optimizer(m.get<std::string>()));
    }
    if (opt.contains("seeds")) c.seeds = opt["seeds"].get<std::vector<std::uint64_t>>();
    if (opt.contains("overrides")) config_detail::flatten(opt["overrides"], "", c.overrides);

    c.top_k = section(j, "decode").value("K", c.top_k);

    const auto oracle = section(j, "oracle");
    if (oracle.contains("kind")) {
      const auto kind = oracle["kind"].get<std::string>();
      c.oracle_auto = kind == "auto";
      if (!c.oracle_auto) c.oracle.kind = parse_oracle_kind(kind);
    }
    const auto params = oracle.contains("params") ? oracle["params"] : nlohmann::json::object();
    c.oracle.alpha = params.value("alpha", c.oracle.alpha);
    c.oracle.capacity = params.value("capacity", c.oracle.capacity);
    if (params.contains("grid")) {
      const auto& g = params["grid"];
      c.oracle.grid.signal_variance = config_detail::grid_or(g, "signal_variance", c.oracle.grid.signal_variance);
      c.oracle.grid.length_scale = config_detail::grid_or(g, "length_scale", c.oracle.grid.length_scale);
      c.oracle.grid.noise_variance = config_detail::grid_or(g, "noise_variance", c.oracle.grid.noise_variance);
    }

    const auto output = section(j, "output");
    if (output.contains("directory")) c.output_directory = resolve(output["directory"].get<std::string>());
    c.workers = j.value("workers", c.workers);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed config: ") + e.what());
  }
  return c;
}

inline ExperimentConfig load_config(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file_bytes(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j, path.parent_path());
}

/// Sets `dotted` (e.g. "latent.m") in a config document. The value is taken
/// as JSON when it parses, otherwise as a string.
inline void apply_override(nlohmann::json& config, const std::string& dotted, const std::string& raw) {
  nlohmann::json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ValidationError("bad override key '" + dotted + "'");
    if (!node->is_object()) *node = nlohmann::json::object();
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  auto value = nlohmann::json::parse(raw, nullptr, false);
  *node = value.is_discarded() ? nlohmann::json(raw) : value;
}

/// Canonical form of every setting that affects numeric outputs.
inline nlohmann::json canonical_config(const ExperimentConfig& c) {
  nlohmann::json methods = nlohmann::json::array();
  for (auto m : c.methods) methods.push_back(to_string(m));
  nlohmann::json j{
      {"paths",
       {{"embeddings", c.paths.embeddings.string()},
        {"fitness", c.paths.fitness.string()},
        {"fitness_column", c.paths.fitness_column},
        {"sequences", c.paths.sequences ? nlohmann::json(c.paths.sequences->string()) : nlohmann::json()},
        {"sequence_column", c.paths.sequence_column}}},
      {"split",
       {{"mode", to_string(c.split.mode)},
        {"ratios", {c.split.ratios.train, c.split.ratios.val, c.split.ratios.test}},
        {"seed", c.split.seed},
        {"n_bins", c.split.n_bins}}},
      {"latent", {{"kind", to_string(c.latent.kind)}, {"m", c.latent.m}, {"seed", c.latent.seed}}},
      {"surrogate", {{"lambda", c.lambda}}},
      {"optimizers", {{"methods", methods}, {"seeds", c.seeds}, {"params", c.optimizer_params()}}},
      {"decode", {{"K", c.top_k}}},
      {"oracle",
       {{"kind", c.oracle_auto ? std::string("auto") : to_string(c.oracle.kind)},
        {"params",
         {{"alpha", c.oracle.alpha},
          {"capacity", c.oracle.capacity},
          {"grid",
           {{"signal_variance", c.oracle.grid.signal_variance},
            {"length_scale", c.oracle.grid.length_scale},
            {"noise_variance", c.oracle.grid.noise_variance}}}}}}}};
  return j;
}

inline std::string config_hash(const ExperimentConfig& c) {
  const auto text = canonical_config(c).dump();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(text)));
  return buf;
}

inline const std::vector<std::size_t>& paper_latent_grid() {
  static const std::vector<std::size_t> grid{8, 16, 32, 64};
  return grid;
}

/// Checks everything that can be checked before any compute. Returns
/// warnings; throws on errors.
inline std::vector<std::string> validate_config(const ExperimentConfig& c) {
  std::vector<std::string> warnings;
  auto must_exist = [](const fs::path& p, const char* what) {
    if (!fs::exists(p)) throw IoError(std::string(what) + " file does not exist: " + p.string());
  };
  must_exist(c.paths.embeddings, "embeddings");
  must_exist(c.paths.fitness, "fitness");
  if (c.paths.sequences) must_exist(*c.paths.sequences, "sequences");
  if (c.seeds.empty()) throw ValidationError("optimizers.seeds must not be empty");
  if (c.methods.empty()) throw ValidationError("optimizers.methods must not be empty");
  if (c.latent.m < 1) throw ValidationError("latent.m must be positive");
  const auto& grid = paper_latent_grid();
  if (std::find(grid.begin(), grid.end(), c.latent.m) == grid.end()) {
    warnings.push_back("latent.m = " + std::to_string(c.latent.m) + " is outside the usual grid {8, 16, 32, 64}");
  }
  if (!(c.lambda > 0.0)) throw ValidationError("surrogate.lambda must be positive");
  if (c.top_k < 1) throw ValidationError("decode.K must be positive");
  if (c.split.n_bins < 1) throw ValidationError("split.n_bins must be positive");
  if (c.split.ratios.train <= 0.0) throw ValidationError("split.ratios train fraction must be positive");
  if (!(c.oracle.alpha > 0.0)) throw ValidationError("oracle alpha must be positive");
  (void)c.optimizer_params();  // rejects unknown override keys
  return warnings;
}

/// Config value, overridden by the environment variable when set.
inline std::size_t resolve_workers(std::size_t configured) {
  if (const char* env = std::getenv(kWorkersEnv)) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(configured, 1);
}

// ---------------------------------------------------------------------------
// Run outputs
// ---------------------------------------------------------------------------

inline nlohmann::json assumption_flags() {
  return {{"improvement", "surrogate value of the optimized code minus the best surrogate value over training codes"},
          {"lbo_uncertainty", "one minus the largest RBF-Hamming kernel weight between the candidate and any seed code"},
          {"surrogate_intercept", "unregularized; features and targets centered before the ridge solve"},
          {"percentile", "mid-rank: strictly-below count plus half the tied count, over training fitness"},
          {"candidates", "each run returns its K highest-valued distinct codes among all codes it evaluated (lbo: by acquisition)"},
          {"top_k_dedup", "candidates collapsed by sequence, or by decoded training row when no sequences are given"},
          {"nn_index", "row of the nearest training neighbour in the input dataset"}};
}

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct RunManifest {
  std::string config_hash;
  std::string artifact_version = kArtifactVersion;
  fs::path run_directory;
  std::map<std::string, std::string> files;  // stage -> file name within run_directory
  std::vector<StageTiming> timings;
  std::vector<std::string> warnings;
  std::size_t workers = 1;
};

struct OptimizerSummary {
  DesignAggregate design;     // pooled over every seed's candidates
  MeanStd run_best_score;     // per-run best oracle score across seeds
  MeanStd run_top_k_mean;     // per-run top-K mean across seeds
  MeanStd improvement;
  MeanStd nn_fitness;
  MeanStd percentile;
  MeanStd oracle_score;
  MeanStd surrogate_value;
  std::uint64_t evaluations = 0;
};

struct PipelineResult {
  RunManifest manifest;
  nlohmann::json report;
  std::vector<RunRecord> records;  // ordered by (optimizer tag, seed)
  std::vector<OptimizationResult> results;
  std::map<std::string, OptimizerSummary> summaries;
  QuboModel surrogate;
};

inline void to_json(nlohmann::json& j, const OptimizerSummary& s) {
  j = nlohmann::json{{"design", s.design},
                     {"run_best_score", s.run_best_score},
                     {"run_top_k_mean", s.run_top_k_mean},
                     {"improvement", s.improvement},
                     {"nn_fitness", s.nn_fitness},
                     {"percentile", s.percentile},
                     {"oracle_score", s.oracle_score},
                     {"surrogate_value", s.surrogate_value},
                     {"evaluations", s.evaluations}};
}

inline void to_json(nlohmann::json& j, const RunManifest& m) {
  nlohmann::json timings = nlohmann::json::array();
  for (const auto& t : m.timings) timings.push_back({{"stage", t.stage}, {"seconds", t.seconds}});
  j = nlohmann::json{{"config_hash", m.config_hash},
                     {"artifact_version", m.artifact_version},
                     {"run_directory", m.run_directory.string()},
                     {"files", m.files},
                     {"wall_clock", timings},
                     {"warnings", m.warnings},
                     {"workers", m.workers},
                     {"assumptions", assumption_flags()}};
}

inline void write_json(const fs::path& path, const nlohmann::json& j) { write_file_bytes(path, j.dump(2) + "\n"); }

/// Loads embeddings, fitness and optional sequences named by the config.
inline Dataset load_dataset(const ExperimentConfig::Paths& paths) {
  Matrix x = read_npy(paths.embeddings).as_matrix();
  Vector y = load_fitness(paths.fitness, paths.fitness_column);
  std::optional<std::vector<std::string>> seqs;
  if (paths.sequences) seqs = read_csv_column(*paths.sequences, paths.sequence_column);
  if (y.size() != x.rows()) {
    throw LengthMismatchError("embeddings have " + std::to_string(x.rows()) + " rows but fitness has " +
                              std::to_string(y.size()) + " values");
  }
  if (seqs && seqs->size() != x.rows()) throw LengthMismatchError("sequence count does not match embedding rows");
  return Dataset(std::move(x), std::move(y), std::move(seqs));
}

namespace pipeline_detail {

inline nlohmann::json metrics_on(const Vector& pred, const Vector& target) {
  if (target.size() < 2) return nullptr;
  return regression_metrics(pred, target);
}

template <typename T>
std::vector<T> pick(const std::vector<T>& v, std::span<const std::size_t> rows) {
  std::vector<T> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(v[r]);
  return out;
}

/// Runs jobs [0, n) on up to `workers` threads; job i writes only slot i.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace pipeline_detail

/// Runs every stage in order inside `<output>/run-<hash prefix>/`. A failing
/// stage leaves earlier outputs in place, writes FAILED and throws StageError.
inline PipelineResult run_pipeline(const ExperimentConfig& config, std::ostream* log = nullptr) {
  using clock = std::chrono::steady_clock;
  PipelineResult out;
  auto& manifest = out.manifest;
  manifest.warnings = validate_config(config);
  manifest.config_hash = config_hash(config);
  manifest.workers = resolve_workers(config.workers);
  manifest.run_directory = config.output_directory / ("run-" + manifest.config_hash.substr(0, 12));
  const fs::path dir = manifest.run_directory;
  std::error_code ec;
  fs::create_directories(dir / "results", ec);
  if (ec) throw IoError("cannot create run directory " + dir.string() + ": " + ec.message());
  fs::remove(dir / "FAILED", ec);
  for (const auto& w : manifest.warnings)
    if (log) *log << "warning: " << w << "\n";

  auto stage = [&](const std::string& name, auto&& fn) {
    if (log) *log << "[" << name << "]\n";
    const auto t0 = clock::now();
    try {
      fn();
    } catch (const Error& e) {
      write_file_bytes(dir / "FAILED", name + ": " + e.what() + "\n");
      throw StageError(name, e.what(), e.exit_code());
    } catch (const std::exception& e) {
      write_file_bytes(dir / "FAILED", name + ": " + e.what() + "\n");
      throw StageError(name, e.what(), 1);
    }
    manifest.timings.push_back({name, std::chrono::duration<double>(clock::now() - t0).count()});
  };

  nlohmann::json report{{"artifact_version", kArtifactVersion},
                        {"config_hash", manifest.config_hash},
                        {"config", canonical_config(config)},
                        {"assumptions", assumption_flags()}};
  write_json(dir / "config.json", canonical_config(config));
  manifest.files["config"] = "config.json";

  std::optional<Dataset> data;
  stage("ingest", [&] {
    data.emplace(load_dataset(config.paths));
    report["dataset"] = {{"N", data->size()}, {"d", data->dim()}, {"has_sequences", data->sequences().has_value()}};
  });

  SplitAssignment split;
  stage("split", [&] {
    split = make_split(data->fitness(), config.split.mode, config.split.ratios, config.split.seed,
                       config.split.n_bins);
    if (split.train.size() < 2) throw ValidationError("split leaves fewer than 2 training rows");
    write_json(dir / "split.json", split);
    manifest.files["split"] = "split.json";
    report["split"] = {{"mode", to_string(split.mode)},
                       {"seed", split.seed},
                       {"train", split.train.size()},
                       {"val", split.val.size()},
                       {"test", split.test.size()}};
  });

  const Matrix train_x = take_rows(data->embeddings(), split.train);
  const Vector train_y = pipeline_detail::pick(data->fitness(), split.train);
  const Vector val_y = pipeline_detail::pick(data->fitness(), split.val);
  const Vector test_y = pipeline_detail::pick(data->fitness(), split.test);

  ProjectionModel projection;
  BinaryCodeSet codes(0, config.latent.m);
  stage("binarize", [&] {
    projection = config.latent.kind == ProjectionKind::pca
                     ? fit_pca(train_x, config.latent.m)
                     : fit_random_projection(data->dim(), config.latent.m, config.latent.seed);
    projection = fit_thresholds(std::move(projection), train_x);
    codes = binarize(projection, data->embeddings());
    write_json(dir / "projection.json", projection);
    write_codes(dir / "codes.txt", codes);
    manifest.files["projection"] = "projection.json";
    manifest.files["codes"] = "codes.txt";
    report["latent"] = {{"kind", to_string(projection.kind)},
                        {"m", projection.latent_dim()},
                        {"diagnostics", latent_diagnostics(codes.subset(split.train), projection, train_x)}};
  });

  const BinaryCodeSet train_codes = codes.subset(split.train);
  stage("fit-qubo", [&] {
    out.surrogate = fit_ridge(train_codes, train_y, config.lambda);
    auto pred = [&](const std::vector<std::size_t>& rows) {
      Vector p;
      for (auto r : rows) p.push_back(predict(out.surrogate, codes.row(r)));
      return p;
    };
    write_json(dir / "qubo.json", out.surrogate);
    manifest.files["fit-qubo"] = "qubo.json";
    report["surrogate"] = {{"lambda", config.lambda},
                           {"metrics",
                            {{"train", pipeline_detail::metrics_on(pred(split.train), train_y)},
                             {"val", pipeline_detail::metrics_on(pred(split.val), val_y)},
                             {"test", pipeline_detail::metrics_on(pred(split.test), test_y)}}}};
  });

  stage("diagnose", [&] {
    const auto diag = diagnose(out.surrogate);
    write_json(dir / "diagnostics.json", diag);
    manifest.files["diagnose"] = "diagnostics.json";
    report["landscape"] = diag;
  });

  const OptimizerParams params = config.optimizer_params();
  struct Job {
    OptimizerKind kind;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (auto k : config.methods)
    for (auto s : config.seeds) jobs.push_back({k, s});
  // Report order: optimizer tag, then seed.
  std::stable_sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) {
    const auto ta = to_string(a.kind), tb = to_string(b.kind);
    return ta != tb ? ta < tb : a.seed < b.seed;
  });
  jobs.erase(std::unique(jobs.begin(), jobs.end(),
                         [](const Job& a, const Job& b) { return a.kind == b.kind && a.seed == b.seed; }),
             jobs.end());

  out.results.resize(jobs.size());
  stage("optimize", [&] {
    pipeline_detail::parallel_for(jobs.size(), manifest.workers, [&](std::size_t i) {
      out.results[i] = run_optimizer(jobs[i].kind, out.surrogate, jobs[i].seed, params, &train_codes, config.top_k);
    });
    for (const auto& r : out.results) {
      const auto name = to_string(r.optimizer) + "-seed" + std::to_string(r.seed) + ".json";
      write_json(dir / "results" / name, r);
    }
    manifest.files["optimize"] = "results/";
  });

  std::optional<Oracle> oracle;
  stage("oracle", [&] {
    auto on = [&](const Oracle& o, const std::vector<std::size_t>& rows, const Vector& y) {
      if (rows.size() < 2) return nlohmann::json();
      return pipeline_detail::metrics_on(predict_oracle(o, take_rows(data->embeddings(), rows)), y);
    };
    nlohmann::json selection;
    if (config.oracle_auto) {
      // Ridge unless the GP fits and has strictly higher validation Spearman.
      if (split.val.size() < 2) throw ValidationError("oracle kind 'auto' needs at least 2 validation rows");
      Oracle ridge = fit_ridge_oracle(train_x, train_y, config.oracle.alpha, log ? log : &std::cerr);
      const double ridge_rho = on(ridge, split.val, val_y)["spearman"].get<double>();
      selection = {{"criterion", "validation spearman"}, {"ridge", ridge_rho}, {"gp", nullptr}};
      oracle = std::move(ridge);
      if (train_x.rows() <= config.oracle.capacity) {
        try {
          Oracle gp = fit_gp_oracle(train_x, train_y, config.oracle.grid, config.oracle.capacity);
          const double gp_rho = on(gp, split.val, val_y)["spearman"].get<double>();
          selection["gp"] = gp_rho;
          if (gp_rho > ridge_rho) oracle = std::move(gp);
        } catch (const NumericError& e) {
          selection["gp_error"] = e.what();
        }
      }
    } else {
      oracle = fit_oracle(train_x, train_y, config.oracle, log ? log : &std::cerr);
    }
    save_oracle(dir / "oracle.json", *oracle);
    manifest.files["oracle"] = "oracle.json";
    report["oracle"] = {{"kind", to_string(kind_of(*oracle))},
                        {"selection", selection},
                        {"metrics", {{"val", on(*oracle, split.val, val_y)}, {"test", on(*oracle, split.test, test_y)}}}};
  });

  stage("decode", [&] {
    std::optional<std::vector<std::string>> train_seqs;
    if (data->sequences()) train_seqs = pipeline_detail::pick(*data->sequences(), split.train);
    const RetrievalIndex index(train_codes, train_y, train_seqs);
    const double training_best = best_training_surrogate(index, out.surrogate);
    std::vector<std::size_t> nn_rows;
    for (const auto& r : out.results) {
      auto rec = retrieval_metrics(index, out.surrogate, r, training_best);
      rec.nn_index = split.train[rec.nn_index];
      nn_rows.push_back(rec.nn_index);
      for (auto& c : rec.candidates) {
        c.nn_index = split.train[c.nn_index];
        nn_rows.push_back(c.nn_index);
      }
      out.records.push_back(std::move(rec));
    }
    // One batched oracle call; scores come back in the order rows were pushed.
    const Vector scores = predict_oracle(*oracle, take_rows(data->embeddings(), nn_rows));
    std::size_t next = 0;
    for (auto& rec : out.records) {
      rec.oracle_score = scores[next++];
      for (auto& c : rec.candidates) c.oracle_score = scores[next++];
    }
  });

  stage("report", [&] {
    nlohmann::json runs = nlohmann::json::array();
    for (std::size_t i = 0; i < out.records.size(); ++i) {
      nlohmann::json r = out.records[i];
      r["evaluations"] = out.results[i].evaluations;
      r["design"] = aggregate_design(std::span<const RunRecord>(&out.records[i], 1), config.top_k);
      runs.push_back(std::move(r));
    }
    std::map<std::string, std::vector<std::size_t>> by_opt;
    for (std::size_t i = 0; i < out.records.size(); ++i) by_opt[out.records[i].optimizer].push_back(i);
    nlohmann::json aggregates = nlohmann::json::object();
    std::uint64_t total = 0;
    for (const auto& [name, idx] : by_opt) {
      std::vector<RunRecord> recs;
      Vector imp, nnf, pct, score, sv, run_best, run_mean;
      OptimizerSummary s;
      for (auto i : idx) {
        const auto& r = out.records[i];
        recs.push_back(r);
        imp.push_back(r.improvement);
        nnf.push_back(r.nn_fitness);
        pct.push_back(r.percentile);
        score.push_back(*r.oracle_score);
        sv.push_back(r.surrogate_value);
        const auto d = aggregate_design(std::span<const RunRecord>(&r, 1), config.top_k);
        run_best.push_back(d.best_score);
        run_mean.push_back(d.top_k_mean);
        s.evaluations += out.results[i].evaluations;
      }
      s.design = aggregate_design(recs, config.top_k);
      s.run_best_score = mean_std(run_best);
      s.run_top_k_mean = mean_std(run_mean);
      s.improvement = mean_std(imp);
      s.nn_fitness = mean_std(nnf);
      s.percentile = mean_std(pct);
      s.oracle_score = mean_std(score);
      s.surrogate_value = mean_std(sv);
      total += s.evaluations;
      aggregates[name] = s;
      out.summaries[name] = s;
    }
    report["runs"] = runs;
    report["aggregates"] = aggregates;
    report["total_evaluations"] = total;
    write_json(dir / "report.json", report);
    manifest.files["report"] = "report.json";
  });

  out.report = std::move(report);
  write_json(dir / "manifest.json", manifest);
  return out;
}

}  // namespace latqubo
