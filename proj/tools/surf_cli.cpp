/*
 * Copyright 2026 The SURF Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// surf: train, predict, audit and ablate from the command line.
//
// Every command is a function of its input bytes, flags and seed. Wall-clock
// fields are the only exception and --omit-timing drops them. Failures print
// one JSON line on stderr, {"error": kind, "exit_code": n, "message": ...},
// and exit with 2 (usage/config), 3 (data/parse) or 4 (numerical).

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "surf/surf.hpp"

namespace {

using surf::ErrorKind;
using surf::Json;

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    surf::fail(ErrorKind::kIo, "SHA-256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::string digest_file(const std::string& path) { return sha256_hex(surf::detail::read_file(path)); }

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
  } else {
    surf::detail::write_file(out_path, text);
  }
}

std::size_t resolve_workers(std::size_t threads) {
  if (threads > 0) return threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

struct Clock {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

// Forest flags shared by train and ablate.
struct ForestFlags {
  std::size_t trees = 100;
  std::size_t d0 = 3;
  std::optional<std::size_t> mtry;
  bool no_fairness = false;
  std::size_t max_thresholds = 32;
  std::uint64_t seed = 0;

  // Ablate runs both arms, so it omits --no-fairness.
  void attach(CLI::App* app, bool fairness_flag = true) {
    app->add_option("--trees", trees, "Number of trees B")->capture_default_str();
    app->add_option("--d0", d0, "Split while a node has more than d0 distinct event times")
        ->capture_default_str();
    app->add_option("--mtry", mtry, "Features drawn per node (default ceil(sqrt(p)))");
    if (fairness_flag) app->add_flag("--no-fairness", no_fairness, "Plain log-rank splitting (SURF-)");
    app->add_option("--max-thresholds", max_thresholds, "Candidate thresholds per continuous feature")
        ->capture_default_str();
    app->add_option("--seed", seed, "Random seed")->capture_default_str();
  }

  surf::SurfConfig config() const {
    surf::SurfConfig c;
    c.n_trees = trees;
    c.min_unique_events = d0;
    c.mtry = mtry;
    c.fairness_enabled = !no_fairness;
    c.max_thresholds_per_feature = max_thresholds;
    c.seed = seed;
    return c;
  }
};

Json config_json(const surf::SurfConfig& c, std::size_t n_features) {
  return {{"trees", c.n_trees},
          {"d0", c.min_unique_events},
          {"mtry", c.resolved_mtry(n_features)},
          {"fairness_enabled", c.fairness_enabled},
          {"max_thresholds", c.max_thresholds_per_feature},
          {"seed", c.seed}};
}

std::vector<std::string> labels_of(const surf::Dataset& data) { return data.groups().labels; }

// ---------------------------------------------------------------------------

struct TrainCmd {
  std::string data, schema, out;
  ForestFlags forest;
  std::size_t threads = 0;
  bool omit_timing = false;
};

int run_train(const TrainCmd& cmd) {
  const Clock clock;
  const surf::Dataset data = surf::load_csv(cmd.data, surf::load_schema_config(cmd.schema));
  const surf::SurfConfig config = cmd.forest.config();
  const surf::SurfForest forest = surf::train(data, config, resolve_workers(cmd.threads));
  surf::save_forest(forest, cmd.out);

  surf::RunManifest m;
  m.command = "train";
  m.parameters = config_json(config, data.feature_count());
  m.parameters["data"] = cmd.data;
  m.parameters["schema"] = cmd.schema;
  m.parameters["out"] = cmd.out;
  m.seed = config.seed;
  m.input_digests = {{cmd.data, digest_file(cmd.data)}, {cmd.schema, digest_file(cmd.schema)}};
  if (!cmd.omit_timing) m.duration_seconds = clock.seconds();
  Json doc;
  doc["manifest"] = surf::to_json(m);
  doc["model_sha256"] = digest_file(cmd.out);
  surf::detail::write_file(cmd.out + ".manifest.json", doc.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------

struct PredictCmd {
  std::string model, data, schema, out;
  std::optional<double> horizon;
  std::string id_col;
};

// Raw column values for joining by id.
std::vector<std::string> id_column(const std::string& path, const std::string& col) {
  const surf::CsvTable table = surf::parse_csv_table(surf::detail::read_file(path));
  const std::size_t c = table.require_column(col);
  std::vector<std::string> ids;
  for (const auto& row : table.rows) ids.push_back(row[c]);
  return ids;
}

int run_predict(const PredictCmd& cmd) {
  const surf::SurfForest forest = surf::load_forest(cmd.model);
  const surf::Dataset data = surf::load_csv(cmd.data, surf::load_schema_config(cmd.schema));
  if (data.schema().size() != forest.schema.size()) {
    surf::fail(ErrorKind::kSchema, "data has " + std::to_string(data.schema().size()) +
                                       " features, model expects " + std::to_string(forest.schema.size()));
  }
  std::vector<std::string> ids;
  if (!cmd.id_col.empty()) ids = id_column(cmd.data, cmd.id_col);
  std::string csv = cmd.horizon ? "id,risk,surv_prob\n" : "id,risk\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& x = data[i].features;
    csv += ids.empty() ? std::to_string(i) : surf::detail::csv_quote(ids[i]);
    csv += "," + surf::detail::format_double(surf::predict_risk(forest, x));
    if (cmd.horizon) csv += "," + surf::detail::format_double(surf::predict_survival_at(forest, x, *cmd.horizon));
    csv += "\n";
  }
  emit(csv, cmd.out);
  return 0;
}

// ---------------------------------------------------------------------------

struct AuditCmd {
  std::string data, schema, model, predictions, out;
  std::optional<double> horizon;
  std::size_t bins = 10;
  std::string risk_col = "risk";
  std::string id_col;
  bool omit_timing = false;
};

// Reads external predictions and lines them up with the data rows, by id
// column when given, otherwise by row order.
surf::ScoredCohort cohort_from_predictions(const AuditCmd& cmd, const surf::Dataset& data,
                                           std::optional<double> horizon) {
  const surf::CsvTable table = surf::parse_csv_table(surf::detail::read_file(cmd.predictions));
  const std::size_t risk_c = table.require_column(cmd.risk_col);
  const std::optional<std::size_t> prob_c = table.column("surv_prob");
  if (prob_c && !horizon) {
    surf::fail(ErrorKind::kConfig, "predictions carry surv_prob; pass --horizon it was computed at");
  }
  if (table.rows.size() != data.size()) {
    surf::fail(ErrorKind::kSize, "predictions have " + std::to_string(table.rows.size()) + " rows, data has " +
                                     std::to_string(data.size()));
  }
  std::vector<std::size_t> order(data.size());
  if (cmd.id_col.empty()) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  } else {
    const std::vector<std::string> data_ids = id_column(cmd.data, cmd.id_col);
    std::map<std::string, std::size_t> pred_row;
    const std::size_t id_c = table.require_column(cmd.id_col);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      if (!pred_row.emplace(table.rows[r][id_c], r).second) {
        surf::fail(ErrorKind::kSize, "duplicate id '" + table.rows[r][id_c] + "' in predictions");
      }
    }
    for (std::size_t i = 0; i < data_ids.size(); ++i) {
      const auto it = pred_row.find(data_ids[i]);
      if (it == pred_row.end()) surf::fail(ErrorKind::kSize, "no prediction for id '" + data_ids[i] + "'");
      order[i] = it->second;
    }
  }
  auto number = [&](std::size_t row, std::size_t col) {
    const auto v = surf::detail::parse_double(table.rows[row][col]);
    if (!v || !std::isfinite(*v)) {
      surf::fail(ErrorKind::kParse, "predictions row " + std::to_string(row + 1) + ": '" + table.header[col] +
                                        "' is not a finite number");
    }
    return *v;
  };
  std::vector<double> risks(data.size());
  std::optional<std::vector<double>> probs;
  if (prob_c) probs.emplace(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    risks[i] = number(order[i], risk_c);
    if (prob_c) (*probs)[i] = number(order[i], *prob_c);
  }
  return surf::make_cohort(data, std::move(risks), std::move(probs), horizon);
}

int run_audit(const AuditCmd& cmd) {
  const Clock clock;
  if (cmd.model.empty() == cmd.predictions.empty()) {
    surf::fail(ErrorKind::kArgument, "audit needs exactly one of --model or --predictions");
  }
  const surf::Dataset data = surf::load_csv(cmd.data, surf::load_schema_config(cmd.schema));
  std::vector<double> times;
  std::vector<bool> events;
  for (const auto& x : data.individuals()) {
    times.push_back(x.time);
    events.push_back(x.event);
  }
  surf::ScoredCohort cohort;
  std::optional<double> horizon = cmd.horizon;
  if (!cmd.model.empty()) {
    const surf::SurfForest forest = surf::load_forest(cmd.model);
    if (!horizon) horizon = surf::median_event_time(times, events);
    cohort = surf::score_dataset(forest, data, *horizon);
  } else {
    cohort = cohort_from_predictions(cmd, data, horizon);
  }
  const surf::AuditReport report = surf::audit(cohort, labels_of(data), horizon, cmd.bins);

  surf::RunManifest m;
  m.command = "audit";
  m.parameters = {{"data", cmd.data}, {"schema", cmd.schema}, {"bins", cmd.bins}, {"horizon", report.horizon}};
  m.input_digests = {{cmd.data, digest_file(cmd.data)}, {cmd.schema, digest_file(cmd.schema)}};
  if (!cmd.model.empty()) {
    m.parameters["model"] = cmd.model;
    m.input_digests.emplace_back(cmd.model, digest_file(cmd.model));
  } else {
    m.parameters["predictions"] = cmd.predictions;
    m.parameters["risk_col"] = cmd.risk_col;
    if (!cmd.id_col.empty()) m.parameters["id_col"] = cmd.id_col;
    m.input_digests.emplace_back(cmd.predictions, digest_file(cmd.predictions));
  }
  if (!cmd.omit_timing) m.duration_seconds = clock.seconds();
  Json doc;
  doc["manifest"] = surf::to_json(m);
  const Json body = surf::to_json(report);
  for (const auto& [key, value] : body.items()) doc[key] = value;
  emit(doc.dump(2) + "\n", cmd.out);
  return 0;
}

// ---------------------------------------------------------------------------

struct AblateCmd {
  std::string data, schema, out;
  ForestFlags forest;
  std::size_t folds = 5;
  std::size_t seeds = 10;
  std::optional<double> horizon;
  std::size_t threads = 0;
  bool omit_timing = false;
};

int run_ablate(const AblateCmd& cmd) {
  const Clock clock;
  const surf::Dataset data = surf::load_csv(cmd.data, surf::load_schema_config(cmd.schema));
  surf::AblationConfig config;
  config.forest = cmd.forest.config();
  config.folds = cmd.folds;
  config.seeds = cmd.seeds;
  config.horizon = cmd.horizon;
  config.workers = resolve_workers(cmd.threads);
  const surf::AblationResult result = surf::run_ablation(data, config);

  surf::RunManifest m;
  m.command = "ablate";
  m.parameters = config_json(config.forest, data.feature_count());
  m.parameters.erase("fairness_enabled");
  m.parameters["folds"] = cmd.folds;
  m.parameters["seeds"] = cmd.seeds;
  m.parameters["horizon"] = cmd.horizon ? Json(*cmd.horizon) : Json("median event time per test fold");
  m.parameters["data"] = cmd.data;
  m.parameters["schema"] = cmd.schema;
  m.seed = config.forest.seed;
  m.input_digests = {{cmd.data, digest_file(cmd.data)}, {cmd.schema, digest_file(cmd.schema)}};
  if (!cmd.omit_timing) m.duration_seconds = clock.seconds();
  Json doc;
  doc["manifest"] = surf::to_json(m);
  doc["ablation"] = surf::to_json(result, labels_of(data), !cmd.omit_timing);
  emit(doc.dump(2) + "\n", cmd.out);
  return 0;
}

// ---------------------------------------------------------------------------

struct SynthCmd {
  surf::SynthConfig config;
  std::string out, schema_out;
};

int run_synth(const SynthCmd& cmd) {
  const surf::Dataset data = surf::generate_synthetic(cmd.config);
  surf::write_csv(data, cmd.out);
  surf::detail::write_file(cmd.schema_out, surf::format_schema_config(surf::schema_config_for(data)));
  return 0;
}

int report_error(std::string_view kind, int code, const std::string& message) {
  Json line = {{"error", kind}, {"exit_code", code}, {"message", message}};
  std::cerr << line.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fairness-aware survival forests: training, auditing and ablation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(surf::kToolVersion));

  TrainCmd train;
  auto* train_app = app.add_subcommand("train", "Train a forest and write a model file");
  train_app->add_option("--data", train.data, "Training CSV")->required();
  train_app->add_option("--schema", train.schema, "Schema config")->required();
  train_app->add_option("--out", train.out, "Model file; the manifest goes to <out>.manifest.json")->required();
  train.forest.attach(train_app);
  train_app->add_option("--threads", train.threads, "Worker threads (0 = all cores)");
  train_app->add_flag("--omit-timing", train.omit_timing, "Leave wall-clock duration out of the manifest");

  PredictCmd predict;
  auto* predict_app = app.add_subcommand("predict", "Write risk scores (and survival at --horizon) as CSV");
  predict_app->add_option("--model", predict.model, "Model file")->required();
  predict_app->add_option("--data", predict.data, "CSV to score")->required();
  predict_app->add_option("--schema", predict.schema, "Schema config")->required();
  predict_app->add_option("--out", predict.out, "Output CSV (default stdout)");
  predict_app->add_option("--horizon", predict.horizon, "Also emit survival probability at this time");
  predict_app->add_option("--id-col", predict.id_col, "Data column copied to the id field (default row index)");

  AuditCmd audit;
  auto* audit_app = app.add_subcommand("audit", "Fairness, uncertainty bounds and evaluation report");
  audit_app->add_option("--data", audit.data, "Labelled CSV")->required();
  audit_app->add_option("--schema", audit.schema, "Schema config")->required();
  audit_app->add_option("--model", audit.model, "Model file to score the data with");
  audit_app->add_option("--predictions", audit.predictions, "External predictions CSV (id, risk, surv_prob)");
  audit_app->add_option("--risk-col", audit.risk_col, "Risk column in the predictions")->capture_default_str();
  audit_app->add_option("--id-col", audit.id_col, "Join predictions to data on this column");
  audit_app->add_option("--horizon", audit.horizon, "Evaluation time (default median event time)");
  audit_app->add_option("--bins", audit.bins, "Calibration bins per group")->capture_default_str();
  audit_app->add_option("--out", audit.out, "Report file (default stdout)");
  audit_app->add_flag("--omit-timing", audit.omit_timing, "Leave wall-clock duration out of the report");

  AblateCmd ablate;
  auto* ablate_app = app.add_subcommand("ablate", "Cross-validated comparison with and without the fairness term");
  ablate_app->add_option("--data", ablate.data, "Labelled CSV")->required();
  ablate_app->add_option("--schema", ablate.schema, "Schema config")->required();
  ablate.forest.attach(ablate_app, false);
  ablate_app->add_option("--folds", ablate.folds, "k for k-fold cross-validation")->capture_default_str();
  ablate_app->add_option("--seeds", ablate.seeds, "Repetitions; run r uses seed + r")->capture_default_str();
  ablate_app->add_option("--horizon", ablate.horizon, "Evaluation time (default median event time per fold)");
  ablate_app->add_option("--threads", ablate.threads, "Worker threads (0 = all cores)");
  ablate_app->add_option("--out", ablate.out, "Report file (default stdout)");
  ablate_app->add_flag("--omit-timing", ablate.omit_timing, "Leave runtimes out of the report");

  SynthCmd synth;
  auto* synth_app = app.add_subcommand("synth", "Generate a synthetic biased, censored dataset");
  synth_app->add_option("--n", synth.config.n, "Rows")->capture_default_str();
  synth_app->add_option("--features", synth.config.n_features, "Feature count")->capture_default_str();
  synth_app->add_option("--deprived-fraction", synth.config.group_fraction_deprived)->capture_default_str();
  synth_app->add_option("--hazard-ratio", synth.config.hazard_ratio_deprived)->capture_default_str();
  synth_app->add_option("--censor-rate", synth.config.censor_rate_target)->capture_default_str();
  synth_app->add_option("--seed", synth.config.seed)->capture_default_str();
  synth_app->add_option("--out", synth.out, "Output CSV")->required();
  synth_app->add_option("--schema-out", synth.schema_out, "Output schema config")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", 2, e.what());
  }

  try {
    if (*train_app) return run_train(train);
    if (*predict_app) return run_predict(predict);
    if (*audit_app) return run_audit(audit);
    if (*ablate_app) return run_ablate(ablate);
    if (*synth_app) return run_synth(synth);
  } catch (const surf::Error& e) {
    return report_error(surf::to_string(e.kind()), surf::exit_code(e.kind()), e.what());
  } catch (const std::exception& e) {
    return report_error("internal", 1, e.what());
  }
  return 0;
}
