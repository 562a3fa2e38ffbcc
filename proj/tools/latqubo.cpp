// Command-line front end: one subcommand per pipeline stage plus `run`.
// Exit codes: 0 success, 2 validation, 3 numeric, 4 input/output.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "latqubo/diagnostics.hpp"
#include "latqubo/pipeline.hpp"
#include "latqubo/synthetic.hpp"

using namespace latqubo;
namespace fs = std::filesystem;

namespace {

nlohmann::json read_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_file_bytes(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + " is not valid JSON: " + e.what());
  }
}

/// Writes to `path`, or to stdout when `path` is empty or "-".
void emit(const std::string& path, const nlohmann::json& j) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << "\n";
  } else {
    write_json(path, j);
  }
}

SplitAssignment read_split(const fs::path& path) { return read_json(path).get<SplitAssignment>(); }

const std::vector<std::size_t>& split_part(const SplitAssignment& s, const std::string& part) {
  if (part == "train") return s.train;
  if (part == "val") return s.val;
  if (part == "test") return s.test;
  throw ValidationError("unknown split part '" + part + "' (expected train, val or test)");
}

Vector pick(const Vector& v, std::span<const std::size_t> rows) {
  Vector out;
  out.reserve(rows.size());
  for (auto r : rows) {
    if (r >= v.size()) throw DimensionError("split row " + std::to_string(r) + " is out of range");
    out.push_back(v[r]);
  }
  return out;
}

OptimizerParams parse_params(const std::vector<std::string>& assignments) {
  OptimizerParams p;
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) throw ValidationError("--param expects key=value, got '" + a + "'");
    char* end = nullptr;
    const std::string value = a.substr(eq + 1);
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0') throw ValidationError("--param value is not a number: '" + a + "'");
    p.set(a.substr(0, eq), v);
  }
  return p;
}

/// `--a.b value` and `--a.b=value` pairs left over after CLI11 parsing.
void apply_cli_overrides(nlohmann::json& config, const std::vector<std::string>& extras) {
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const auto& arg = extras[i];
    if (arg.rfind("--", 0) != 0 || arg.size() < 3) throw ValidationError("unexpected argument '" + arg + "'");
    std::string key = arg.substr(2), value;
    if (const auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key.resize(eq);
    } else {
      if (i + 1 >= extras.size()) throw ValidationError("override --" + key + " needs a value");
      value = extras[++i];
    }
    // Paths given on the command line are relative to the working directory.
    if (key.rfind("paths.", 0) == 0 || key == "output.directory") {
      if (key != "paths.fitness_column" && key != "paths.sequence_column") value = fs::absolute(value).string();
    }
    apply_override(config, key, value);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent-space QUBO surrogate pipeline"};
  app.require_subcommand(1);

  // ---- synth ----------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "Write a synthetic embedding dataset with a planted linear fitness");
  SyntheticSpec sspec;
  std::string synth_out;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--n", sspec.n, "Rows")->capture_default_str();
  synth->add_option("--d", sspec.d, "Embedding dimension")->capture_default_str();
  synth->add_option("--seed", sspec.seed, "Seed")->capture_default_str();

  // ---- ingest ---------------------------------------------------------------
  auto* ingest = app.add_subcommand("ingest", "Load embeddings and fitness, write the train/val/test split");
  std::string in_emb, in_fit, in_col = "fitness", in_seq, in_seq_col = "sequence", in_mode = "stratified_quantile",
                              in_out = "split.json";
  std::vector<double> in_ratios{0.7, 0.1, 0.2};
  std::uint64_t in_seed = 0;
  std::size_t in_bins = 10;
  ingest->add_option("--embeddings", in_emb, "Embeddings (.npy, N x d)")->required();
  ingest->add_option("--fitness", in_fit, "Fitness (.npy or .csv)")->required();
  ingest->add_option("--fitness-column", in_col)->capture_default_str();
  ingest->add_option("--sequences", in_seq, "Sequences CSV");
  ingest->add_option("--sequence-column", in_seq_col)->capture_default_str();
  ingest->add_option("--mode", in_mode, "stratified_quantile or two_stage_random")->capture_default_str();
  ingest->add_option("--ratios", in_ratios, "train val test")->expected(3)->capture_default_str();
  ingest->add_option("--seed", in_seed)->capture_default_str();
  ingest->add_option("--bins", in_bins)->capture_default_str();
  ingest->add_option("--out", in_out)->capture_default_str();

  // ---- binarize -------------------------------------------------------------
  auto* bin = app.add_subcommand("binarize", "Fit the projection on training rows and binarize every row");
  std::string bin_emb, bin_split, bin_kind = "pca", bin_codes = "codes.txt", bin_model = "projection.json";
  std::size_t bin_m = 32;
  std::uint64_t bin_seed = 0;
  bin->add_option("--embeddings", bin_emb)->required();
  bin->add_option("--split", bin_split, "Split JSON; projection is fit on its train rows (all rows if absent)");
  bin->add_option("--kind", bin_kind, "pca or random_gaussian")->capture_default_str();
  bin->add_option("--m", bin_m, "Latent bits")->capture_default_str();
  bin->add_option("--seed", bin_seed, "Seed for random_gaussian")->capture_default_str();
  bin->add_option("--out-codes", bin_codes)->capture_default_str();
  bin->add_option("--out-model", bin_model)->capture_default_str();

  // ---- fit-qubo -------------------------------------------------------------
  auto* fq = app.add_subcommand("fit-qubo", "Ridge-fit the QUBO surrogate on binary codes");
  std::string fq_codes, fq_fit, fq_col = "fitness", fq_split, fq_out = "qubo.json", fq_export;
  double fq_lambda = kDefaultSurrogateLambda;
  fq->add_option("--codes", fq_codes)->required();
  fq->add_option("--fitness", fq_fit)->required();
  fq->add_option("--fitness-column", fq_col)->capture_default_str();
  fq->add_option("--split", fq_split, "Fit on the train rows of this split");
  fq->add_option("--lambda", fq_lambda)->capture_default_str();
  fq->add_option("--out", fq_out)->capture_default_str();
  fq->add_option("--export-text", fq_export, "Also write the minimization-form coefficient list");

  // ---- optimize -------------------------------------------------------------
  auto* opt = app.add_subcommand("optimize", "Maximize a QUBO surrogate with one optimizer and seed");
  std::string opt_model, opt_kind, opt_seed_codes, opt_split, opt_out;
  std::uint64_t opt_seed = 0;
  std::size_t opt_keep = kDefaultCandidates;
  std::vector<std::string> opt_params;
  opt->add_option("--model", opt_model)->required();
  opt->add_option("--optimizer", opt_kind, "sa, ga, rs, ghc or lbo")->required();
  opt->add_option("--seed", opt_seed)->capture_default_str();
  opt->add_option("--seed-codes", opt_seed_codes, "Observed codes (required for lbo)");
  opt->add_option("--split", opt_split, "Restrict --seed-codes to the train rows of this split");
  opt->add_option("--param", opt_params, "Override such as sa.steps=5000 (repeatable)");
  opt->add_option("--keep", opt_keep, "Distinct candidate codes kept per run")->capture_default_str();
  opt->add_option("--out", opt_out, "Output file (stdout if absent)");

  // ---- decode ---------------------------------------------------------------
  auto* dec = app.add_subcommand("decode", "Map optimized codes to their Hamming-nearest training rows");
  std::string dec_model, dec_codes, dec_fit, dec_col = "fitness", dec_split, dec_seq, dec_seq_col = "sequence",
                                                dec_out;
  std::vector<std::string> dec_results;
  dec->add_option("--model", dec_model)->required();
  dec->add_option("--codes", dec_codes, "Codes for every dataset row")->required();
  dec->add_option("--fitness", dec_fit)->required();
  dec->add_option("--fitness-column", dec_col)->capture_default_str();
  dec->add_option("--split", dec_split, "Index only the train rows of this split");
  dec->add_option("--sequences", dec_seq, "Sequences CSV");
  dec->add_option("--sequence-column", dec_seq_col)->capture_default_str();
  dec->add_option("--results", dec_results, "OptimizationResult JSON files")->required();
  dec->add_option("--out", dec_out, "Output file (stdout if absent)");

  // ---- evaluate -------------------------------------------------------------
  auto* ev = app.add_subcommand("evaluate", "Score decoded candidates with an oracle and aggregate top-K");
  std::string ev_records, ev_oracle, ev_emb, ev_out;
  std::size_t ev_k = kDefaultTopK;
  ev->add_option("--records", ev_records, "Output of decode")->required();
  ev->add_option("--oracle", ev_oracle)->required();
  ev->add_option("--embeddings", ev_emb)->required();
  ev->add_option("--k", ev_k)->capture_default_str();
  ev->add_option("--out", ev_out, "Output file (stdout if absent)");

  // ---- report ---------------------------------------------------------------
  auto* rep = app.add_subcommand("report", "Per-optimizer mean and std of scored run records");
  std::string rep_records, rep_out;
  std::size_t rep_k = kDefaultTopK;
  rep->add_option("--records", rep_records, "Output of evaluate")->required();
  rep->add_option("--k", rep_k)->capture_default_str();
  rep->add_option("--out", rep_out, "Output file (stdout if absent)");

  // ---- diagnose -------------------------------------------------------------
  auto* dia = app.add_subcommand("diagnose", "Landscape diagnostics of a QUBO surrogate");
  std::string dia_model, dia_codes, dia_out;
  bool dia_verify = false;
  VerificationLimits limits;
  dia->add_option("--model", dia_model)->required();
  dia->add_flag("--verify-exhaustive", dia_verify, "Check every bound by enumeration (small m only)");
  dia->add_option("--pairwise-max-bits", limits.pairwise_max_bits)->capture_default_str();
  dia->add_option("--per-code-max-bits", limits.per_code_max_bits)->capture_default_str();
  dia->add_option("--codes", dia_codes, "Training codes for an identifiability check");
  dia->add_option("--out", dia_out, "Output file (stdout if absent)");

  // ---- oracle ---------------------------------------------------------------
  auto* ora = app.add_subcommand("oracle", "Sequence-level fitness oracle");
  ora->require_subcommand(1);
  auto* ora_fit = ora->add_subcommand("fit", "Fit a ridge or GP oracle");
  std::string of_emb, of_fit, of_col = "fitness", of_split, of_kind = "ridge", of_out = "oracle.json";
  OracleSettings of_settings;
  ora_fit->add_option("--embeddings", of_emb)->required();
  ora_fit->add_option("--fitness", of_fit)->required();
  ora_fit->add_option("--fitness-column", of_col)->capture_default_str();
  ora_fit->add_option("--split", of_split, "Fit on the train rows of this split");
  ora_fit->add_option("--kind", of_kind, "ridge or gp")->capture_default_str();
  ora_fit->add_option("--alpha", of_settings.alpha)->capture_default_str();
  ora_fit->add_option("--capacity", of_settings.capacity, "GP row cap")->capture_default_str();
  ora_fit->add_option("--out", of_out)->capture_default_str();
  auto* ora_eval = ora->add_subcommand("eval", "Regression metrics of an oracle");
  std::string oe_oracle, oe_emb, oe_fit, oe_col = "fitness", oe_split, oe_part = "test", oe_out;
  ora_eval->add_option("--oracle", oe_oracle)->required();
  ora_eval->add_option("--embeddings", oe_emb)->required();
  ora_eval->add_option("--fitness", oe_fit)->required();
  ora_eval->add_option("--fitness-column", oe_col)->capture_default_str();
  ora_eval->add_option("--split", oe_split);
  ora_eval->add_option("--part", oe_part, "train, val or test")->capture_default_str();
  ora_eval->add_option("--out", oe_out, "Output file (stdout if absent)");

  // ---- run ------------------------------------------------------------------
  auto* run = app.add_subcommand("run", "Full pipeline from a JSON config; --key.subkey value overrides settings");
  std::string run_config;
  run->add_option("--config", run_config)->required();
  run->allow_extras();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*synth) {
      save_synthetic(synth_out, make_synthetic(sspec));
      std::cout << "wrote " << (fs::path(synth_out) / "embeddings.npy").string() << " and fitness.npy\n";
    } else if (*ingest) {
      ExperimentConfig::Paths paths;
      paths.embeddings = in_emb;
      paths.fitness = in_fit;
      paths.fitness_column = in_col;
      if (!in_seq.empty()) paths.sequences = in_seq;
      paths.sequence_column = in_seq_col;
      const auto data = load_dataset(paths);
      const auto split = make_split(data.fitness(), parse_split_mode(in_mode),
                                    {in_ratios[0], in_ratios[1], in_ratios[2]}, in_seed, in_bins);
      write_json(in_out, split);
      std::cout << "N=" << data.size() << " d=" << data.dim() << " train=" << split.train.size()
                << " val=" << split.val.size() << " test=" << split.test.size() << "\n";
    } else if (*bin) {
      const Matrix x = read_npy(bin_emb).as_matrix();
      const Matrix train = bin_split.empty() ? x : take_rows(x, read_split(bin_split).train);
      auto model = parse_projection_kind(bin_kind) == ProjectionKind::pca ? fit_pca(train, bin_m)
                                                                          : fit_random_projection(x.cols(), bin_m, bin_seed);
      model = fit_thresholds(std::move(model), train);
      const auto codes = binarize(model, x);
      write_json(bin_model, model);
      write_codes(bin_codes, codes);
      const nlohmann::json diag = latent_diagnostics(
          bin_split.empty() ? codes : codes.subset(read_split(bin_split).train), model, train);
      std::cout << diag.dump(2) << "\n";
    } else if (*fq) {
      auto codes = read_codes(fq_codes);
      Vector y = load_fitness(fq_fit, fq_col);
      if (y.size() != codes.size()) throw LengthMismatchError("codes and fitness differ in length");
      if (!fq_split.empty()) {
        const auto train = read_split(fq_split).train;
        codes = codes.subset(train);
        y = pick(y, train);
      }
      const auto model = fit_ridge(codes, y, fq_lambda);
      write_json(fq_out, model);
      if (!fq_export.empty()) write_file_bytes(fq_export, export_qubo_text(model));
      Vector fitted;
      for (std::size_t i = 0; i < codes.size(); ++i) fitted.push_back(predict(model, codes.row(i)));
      const nlohmann::json m = regression_metrics(fitted, y);
      std::cout << nlohmann::json{{"m", model.dim()}, {"lambda", fq_lambda}, {"train_metrics", m}}.dump(2) << "\n";
    } else if (*opt) {
      const auto model = read_json(opt_model).get<QuboModel>();
      std::optional<BinaryCodeSet> seeds;
      if (!opt_seed_codes.empty()) {
        seeds = read_codes(opt_seed_codes);
        if (!opt_split.empty()) seeds = seeds->subset(read_split(opt_split).train);
      }
      const auto result = run_optimizer(parse_optimizer(opt_kind), model, opt_seed, parse_params(opt_params),
                                        seeds ? &*seeds : nullptr, opt_keep);
      emit(opt_out, result);
    } else if (*dec) {
      const auto model = read_json(dec_model).get<QuboModel>();
      const auto codes = read_codes(dec_codes);
      const Vector y = load_fitness(dec_fit, dec_col);
      if (y.size() != codes.size()) throw LengthMismatchError("codes and fitness differ in length");
      std::optional<std::vector<std::string>> seqs;
      if (!dec_seq.empty()) seqs = read_csv_column(dec_seq, dec_seq_col);
      std::vector<std::size_t> rows(codes.size());
      std::iota(rows.begin(), rows.end(), std::size_t{0});
      if (!dec_split.empty()) rows = read_split(dec_split).train;
      std::optional<std::vector<std::string>> train_seqs;
      if (seqs) {
        if (seqs->size() != codes.size()) throw LengthMismatchError("sequence count does not match code count");
        train_seqs.emplace();
        for (auto r : rows) train_seqs->push_back((*seqs)[r]);
      }
      const RetrievalIndex index(codes.subset(rows), pick(y, rows), train_seqs);
      const double best = best_training_surrogate(index, model);
      nlohmann::json out = nlohmann::json::array();
      for (const auto& path : dec_results) {
        auto rec = retrieval_metrics(index, model, read_json(path).get<OptimizationResult>(), best);
        rec.nn_index = rows[rec.nn_index];
        for (auto& c : rec.candidates) c.nn_index = rows[c.nn_index];
        out.push_back(rec);
      }
      emit(dec_out, out);
    } else if (*ev) {
      auto records = read_json(ev_records).get<std::vector<RunRecord>>();
      if (records.empty()) throw ValidationError("no records to evaluate");
      const auto oracle = load_oracle(ev_oracle);
      const Matrix x = read_npy(ev_emb).as_matrix();
      std::vector<std::size_t> rows;
      auto add_row = [&](std::size_t r) {
        if (r >= x.rows()) throw DimensionError("record nn_index is outside the embeddings");
        rows.push_back(r);
      };
      for (const auto& r : records) {
        add_row(r.nn_index);
        for (const auto& c : r.candidates) add_row(c.nn_index);
      }
      const Vector scores = predict_oracle(oracle, take_rows(x, rows));
      std::size_t next = 0;
      nlohmann::json per_run = nlohmann::json::array();
      for (auto& r : records) {
        r.oracle_score = scores[next++];
        for (auto& c : r.candidates) c.oracle_score = scores[next++];
        per_run.push_back(aggregate_design(std::span<const RunRecord>(&r, 1), ev_k));
      }
      emit(ev_out, {{"oracle", to_string(kind_of(oracle))},
                    {"records", records},
                    {"run_aggregates", per_run},
                    {"aggregate", aggregate_design(records, ev_k)}});
    } else if (*rep) {
      const auto doc = read_json(rep_records);
      const auto records = (doc.is_object() ? doc.at("records") : doc).get<std::vector<RunRecord>>();
      std::map<std::string, std::vector<RunRecord>> by_opt;
      for (const auto& r : records) by_opt[r.optimizer].push_back(r);
      nlohmann::json out = nlohmann::json::object();
      for (const auto& [name, recs] : by_opt) {
        Vector imp, nnf, pct, score, run_best, run_mean;
        bool scored = true;
        for (const auto& r : recs) {
          imp.push_back(r.improvement);
          nnf.push_back(r.nn_fitness);
          pct.push_back(r.percentile);
          if (r.oracle_score) score.push_back(*r.oracle_score);
          scored = scored && r.oracle_score &&
                   std::all_of(r.candidates.begin(), r.candidates.end(), [](const auto& c) { return c.oracle_score; });
          if (scored) {
            const auto d = aggregate_design(std::span<const RunRecord>(&r, 1), rep_k);
            run_best.push_back(d.best_score);
            run_mean.push_back(d.top_k_mean);
          }
        }
        out[name] = {{"runs", recs.size()},
                     {"improvement", mean_std(imp)},
                     {"nn_fitness", mean_std(nnf)},
                     {"percentile", mean_std(pct)}};
        if (scored) {
          out[name]["oracle_score"] = mean_std(score);
          out[name]["design"] = aggregate_design(recs, rep_k);
          out[name]["run_best_score"] = mean_std(run_best);
          out[name]["run_top_k_mean"] = mean_std(run_mean);
        }
      }
      emit(rep_out, {{"aggregates", out}, {"assumptions", assumption_flags()}});
    } else if (*dia) {
      const auto model = read_json(dia_model).get<QuboModel>();
      nlohmann::json out{{"report", diagnose(model)}};
      bool failed = false;
      if (dia_verify) {
        nlohmann::json checks = nlohmann::json::array();
        for (const auto& c : verify_propositions(model, limits)) {
          checks.push_back(c);
          failed = failed || (!c.skipped && !c.passed());
        }
        out["checks"] = checks;
        if (model.dim() <= kBruteForceMaxBits) {
          const auto b = brute_force_optimum(model);
          out["global_optimum"] = {{"code", code_to_string(b.code)}, {"value", b.value}};
        }
        out["all_passed"] = !failed;
      }
      if (!dia_codes.empty()) out["identifiability"] = check_identifiability(read_codes(dia_codes));
      emit(dia_out, out);
      if (failed) return 3;
    } else if (*ora_fit) {
      const Matrix x = read_npy(of_emb).as_matrix();
      const Vector y = load_fitness(of_fit, of_col);
      if (y.size() != x.rows()) throw LengthMismatchError("embeddings and fitness differ in length");
      of_settings.kind = parse_oracle_kind(of_kind);
      const auto rows = of_split.empty() ? std::vector<std::size_t>() : read_split(of_split).train;
      const auto oracle = of_split.empty() ? fit_oracle(x, y, of_settings)
                                           : fit_oracle(take_rows(x, rows), pick(y, rows), of_settings);
      save_oracle(of_out, oracle);
      std::cout << "wrote " << of_out << " (" << to_string(kind_of(oracle)) << ")\n";
    } else if (*ora_eval) {
      const auto oracle = load_oracle(oe_oracle);
      Matrix x = read_npy(oe_emb).as_matrix();
      Vector y = load_fitness(oe_fit, oe_col);
      if (y.size() != x.rows()) throw LengthMismatchError("embeddings and fitness differ in length");
      if (!oe_split.empty()) {
        const auto split = read_split(oe_split);
        const auto& rows = split_part(split, oe_part);
        x = take_rows(x, rows);
        y = pick(y, rows);
      }
      if (y.size() < 2) throw ValidationError("oracle eval needs at least 2 rows");
      emit(oe_out, {{"oracle", to_string(kind_of(oracle))},
                    {"rows", y.size()},
                    {"metrics", regression_metrics(predict_oracle(oracle, x), y)}});
    } else if (*run) {
      auto j = read_json(run_config);
      apply_cli_overrides(j, run->remaining());
      const auto config = parse_config(j, fs::path(run_config).parent_path());
      const auto result = run_pipeline(config, &std::cerr);
      std::cout << "run directory: " << result.manifest.run_directory.string() << "\n";
      for (const auto& [name, s] : result.summaries) {
        std::printf("%-4s best %.6g  top-%zu mean per run %.6g +- %.4g  improvement %.4g +- %.4g  percentile %.2f\n",
                    name.c_str(), s.design.best_score, s.design.k, s.run_top_k_mean.mean, s.run_top_k_mean.std,
                    s.improvement.mean, s.improvement.std, s.percentile.mean);
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed JSON input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
