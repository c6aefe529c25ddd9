// Copyright 2026 The devenc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: synth, ingest, pretrain, finetune, eval and the
// analysis commands. Every command writes its outputs atomically and a
// <output>.manifest.json next to the primary output.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "devenc/baselines.hpp"
#include "devenc/classifier.hpp"
#include "devenc/error.hpp"
#include "devenc/eval.hpp"
#include "devenc/hpo.hpp"
#include "devenc/ingest.hpp"
#include "devenc/serialize.hpp"
#include "devenc/splits.hpp"
#include "devenc/synth.hpp"
#include "devenc/tmae.hpp"
#include "run_manifest.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace devenc;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

struct Common {
  int jobs = 1;
  std::uint64_t seed = 42;
  std::string config;
  std::string out;
};

void add_common(CLI::App* sub, Common& c, bool out_required = true) {
  sub->add_option("--jobs", c.jobs, "Worker threads for independent folds, resamples and trials")
      ->check(CLI::PositiveNumber);
  sub->add_option("--seed", c.seed, "Master seed");
  sub->add_option("--config", c.config, "JSON config whose keys name options; flags override it");
  auto* out = sub->add_option("--out", c.out, "Primary output path");
  if (out_required) out->required();
}

// Relative inputs missing from the working directory are looked up under
// $DEVENC_DATA_DIR.
fs::path resolve_input(const std::string& p) {
  fs::path path(p);
  if (path.is_relative() && !fs::exists(path)) {
    if (const char* dir = std::getenv("DEVENC_DATA_DIR")) {
      const fs::path alt = fs::path(dir) / path;
      if (fs::exists(alt)) return alt;
    }
  }
  if (!fs::exists(path)) throw DataError("input not found: " + p);
  return path;
}

json effective_config(const CLI::App* sub) {
  json cfg = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string name = opt->get_lnames().front();
    if (name == "help" || name == "config") continue;
    if (opt->count() > 0) {
      const auto& results = opt->results();
      cfg[name] = results.size() == 1 ? json(results.front()) : json(results);
    } else if (!opt->get_default_str().empty()) {
      cfg[name] = opt->get_default_str();
    }
  }
  return cfg;
}

Dataset restrict(const Dataset& data, const std::vector<std::string>& countries) {
  if (countries.empty()) return data;
  for (const auto& c : countries) {
    if (data.rows_of_country(c).empty()) throw DataError("country " + c + " has no rows in the dataset");
  }
  return data.subset(data.rows_of_countries(countries));
}

void write_output(const fs::path& path, const std::string& text, cli::RunManifest& manifest) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  io::write_file_atomic(path, text);
  manifest.add_output(path);
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
  fs::path p(path);
  p.replace_extension(suffix);
  return p.string();
}

// ---- model files ----

struct LoadedModel {
  std::string kind;
  std::vector<std::string> feature_names;
  eval::Predictor predict;
};

LoadedModel load_model(const fs::path& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw SchemaError("model file is not valid JSON: " + std::string(e.what()));
  }
  const std::string format = j.value("format", std::string{});
  if (format == classifier::kModelFormat) {
    auto m = classifier::model_from_json(j);
    return {"classifier", m.feature_names, eval::predictor_of(m)};
  }
  if (format == classifier::kEnsembleFormat) {
    auto e = classifier::ensemble_from_json(j);
    return {"ensemble", e.members.front().feature_names, eval::predictor_of(e)};
  }
  if (format == baselines::kGbdtFormat) {
    auto g = baselines::gbdt_from_json(j);
    return {"gbdt", g.feature_names, eval::predictor_of(g)};
  }
  throw SchemaError("unrecognised model format '" + format + "'");
}

void check_schema(const LoadedModel& model, const Dataset& data) {
  if (model.feature_names != data.feature_names) throw SchemaError("dataset feature schema differs from the model's");
}

// ---- shared option groups ----

struct FinetuneOptions {
  classifier::FinetuneConfig cfg;
  void add(CLI::App* sub) {
    sub->add_option("--lr", cfg.learning_rate, "Fine-tuning learning rate")->capture_default_str();
    sub->add_option("--l2", cfg.l2, "Decoupled weight decay")->capture_default_str();
    sub->add_option("--dropout", cfg.dropout, "Dropout on hidden layers")->capture_default_str();
    sub->add_option("--patience", cfg.patience, "Early-stopping patience in epochs")->capture_default_str();
    sub->add_option("--max-epochs", cfg.max_epochs, "Epoch cap")->capture_default_str();
    sub->add_option("--batch-size", cfg.batch_size, "Mini-batch size")->capture_default_str();
    sub->add_option("--val-fraction", cfg.val_fraction, "Early-stopping holdout share")->capture_default_str();
    sub->add_flag("--freeze-encoder", cfg.freeze_encoder, "Train only the output unit");
  }
};

enum class Learner { kPretrained, kColdMlp, kGbdt, kLogreg };

const std::map<std::string, Learner> kLearners{{"pretrained", Learner::kPretrained},
                                               {"cold_mlp", Learner::kColdMlp},
                                               {"gbdt", Learner::kGbdt},
                                               {"logreg", Learner::kLogreg}};

eval::Trainer make_trainer(Learner learner, const tmae::EncoderCheckpoint* ckpt, classifier::FinetuneConfig ft,
                           std::size_t ensemble_size) {
  switch (learner) {
    case Learner::kPretrained:
      if (ckpt == nullptr) throw InvalidArgument("--checkpoint is required for the pretrained learner");
      return [ckpt, ft, ensemble_size](const Dataset& train, std::uint64_t seed) -> eval::Predictor {
        classifier::FinetuneConfig cfg = ft;
        cfg.seed = seed;
        if (ensemble_size <= 1) {
          return eval::predictor_of(classifier::finetune(classifier::init_from_encoder(*ckpt, cfg), train, cfg));
        }
        const Split split = outcome_stratified_holdout(train, cfg.val_fraction, derive_seed(seed, 14));
        const auto seeds = classifier::default_ensemble_seeds(seed, ensemble_size);
        return eval::predictor_of(
            classifier::train_ensemble(*ckpt, train.subset(split.train), train.subset(split.test), cfg, seeds));
      };
    case Learner::kColdMlp:
      return [ft](const Dataset& train, std::uint64_t seed) -> eval::Predictor {
        classifier::FinetuneConfig cfg = ft;
        cfg.seed = seed;
        return eval::predictor_of(baselines::train_cold_mlp(train, cfg));
      };
    case Learner::kGbdt:
      return [](const Dataset& train, std::uint64_t seed) -> eval::Predictor {
        baselines::GbdtConfig cfg;
        cfg.seed = seed;
        return eval::predictor_of(baselines::train_gbdt_with_holdout(train, cfg));
      };
    case Learner::kLogreg:
      return [](const Dataset& train, std::uint64_t) -> eval::Predictor {
        const auto clf = baselines::train_logreg(train, {});
        return [clf](const Matrix& rows) { return baselines::predict_proba(clf, rows); };
      };
  }
  throw InvalidArgument("unknown learner");
}

json per_country_auc(const eval::Predictor& predict, const Dataset& data) {
  json rows = json::array();
  for (const auto& c : data.countries()) {
    const Dataset part = data.subset(data.rows_of_country(c));
    json row = {{"country", c}, {"n", part.rows()}};
    if (part.has_both_classes()) {
      row["auc"] = eval::evaluate_auc(predict, part);
    } else {
      row["auc"] = nullptr;
      row["note"] = "AUC undefined: single-class country";
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// Injects "--key value" pairs from a JSON config right after the subcommand
// name, skipping keys already given on the command line so flags win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  if (args.empty()) return args;
  std::string config_path;
  std::set<std::string> given;
  for (std::size_t i = 1; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0) continue;
    const std::string key = a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2);
    given.insert(key);
    if (key == "config") {
      if (a.find('=') != std::string::npos) {
        config_path = a.substr(a.find('=') + 1);
      } else if (i + 1 < args.size()) {
        config_path = args[i + 1];
      }
    }
  }
  if (config_path.empty()) return args;
  json cfg;
  try {
    cfg = json::parse(io::read_file(resolve_input(config_path)));
  } catch (const json::parse_error& e) {
    throw SchemaError("config file is not valid JSON: " + std::string(e.what()));
  }
  if (!cfg.is_object()) throw SchemaError("config file must hold a JSON object");
  std::vector<std::string> injected;
  for (const auto& [raw_key, value] : cfg.items()) {
    std::string key = raw_key;
    std::replace(key.begin(), key.end(), '_', '-');
    if (given.contains(key)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) injected.push_back("--" + key);
      continue;
    }
    std::string text;
    if (value.is_array()) {
      for (const auto& v : value) {
        if (!text.empty()) text += ',';
        text += v.is_string() ? v.get<std::string>() : v.dump();
      }
    } else {
      text = value.is_string() ? value.get<std::string>() : value.dump();
    }
    injected.push_back("--" + key);
    injected.push_back(text);
  }
  args.insert(args.begin() + 1, injected.begin(), injected.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"devenc: pre-trained tabular encoders for cross-country child development prediction"};
  app.require_subcommand(1);
  app.set_version_flag("--version", DEVENC_VERSION);

  // ---- synth ----
  Common synth_c;
  SynthConfig synth_cfg;
  std::vector<double> quintile_noise;
  auto* synth = app.add_subcommand("synth", "Generate the synthetic multi-country dataset");
  add_common(synth, synth_c);
  synth->add_option("--countries", synth_cfg.n_countries, "Number of countries")->capture_default_str();
  synth->add_option("--rows", synth_cfg.rows_per_country, "Rows per country")->capture_default_str();
  synth->add_option("--shift", synth_cfg.country_shift_scale, "Country shift scale")->capture_default_str();
  synth->add_option("--intercept", synth_cfg.intercept, "Outcome intercept")->capture_default_str();
  synth->add_option("--label-noise", synth_cfg.label_noise, "Label flip rate")->capture_default_str();
  synth->add_option("--quintile-noise", quintile_noise, "Five flip rates for wealth quintiles Q1..Q5")
      ->delimiter(',')
      ->expected(5);
  synth->add_option("--regions", synth_cfg.regions, "Region of every country")->delimiter(',');

  // ---- ingest ----
  Common ingest_c;
  std::string ingest_input, imputation = "chained-blind", audit_out;
  int impute_iterations = 10;
  std::size_t min_rows = 100;
  auto* ingest = app.add_subcommand("ingest", "Harmonize, impute and audit a survey CSV");
  add_common(ingest, ingest_c);
  ingest->add_option("--input", ingest_input, "Raw survey CSV")->required();
  ingest->add_option("--imputation", imputation, "median | chained-blind | chained-congenial")
      ->check(CLI::IsMember({"median", "chained-blind", "chained-congenial"}))
      ->capture_default_str();
  ingest->add_option("--iterations", impute_iterations, "Chained-equation sweeps")->capture_default_str();
  ingest->add_option("--min-rows", min_rows, "Minimum rows per accepted country")->capture_default_str();
  ingest->add_option("--audit-out", audit_out, "Audit report path (default <out>.audit.json)");

  // ---- pretrain ----
  Common pre_c;
  std::string pre_data;
  std::vector<std::string> pre_countries;
  tmae::PretrainConfig pre_cfg;
  auto* pretrain = app.add_subcommand("pretrain", "Masked-autoencoder pre-training");
  add_common(pretrain, pre_c);
  pretrain->add_option("--data", pre_data, "Dataset CSV")->required();
  pretrain->add_option("--countries", pre_countries, "Countries to pre-train on (default all)")->delimiter(',');
  pretrain->add_option("--epochs", pre_cfg.epochs, "Epochs")->capture_default_str();
  pretrain->add_option("--batch-size", pre_cfg.batch_size, "Mini-batch size")->capture_default_str();
  pretrain->add_option("--lr", pre_cfg.learning_rate, "Adam learning rate")->capture_default_str();
  pretrain->add_option("--mask-ratio", pre_cfg.mask_ratio, "Share of features masked per row")->capture_default_str();
  pretrain->add_option("--hidden", pre_cfg.hidden_dims, "Encoder widths")->delimiter(',')->capture_default_str();

  // ---- finetune ----
  Common ft_c;
  std::string ft_ckpt, ft_data;
  std::vector<std::string> ft_countries, ft_val_countries;
  std::size_t ft_ensemble = 1;
  FinetuneOptions ft_opts;
  auto* finetune = app.add_subcommand("finetune", "Fine-tune a checkpoint into a classifier or ensemble");
  add_common(finetune, ft_c);
  finetune->add_option("--checkpoint", ft_ckpt, "Encoder checkpoint")->required();
  finetune->add_option("--data", ft_data, "Dataset CSV")->required();
  finetune->add_option("--countries", ft_countries, "Training countries (default all)")->delimiter(',');
  finetune->add_option("--val-countries", ft_val_countries, "Explicit early-stopping countries")->delimiter(',');
  finetune->add_option("--ensemble", ft_ensemble, "Members; >1 writes an ensemble")->capture_default_str();
  ft_opts.add(finetune);

  // ---- eval ----
  Common ev_c;
  std::string ev_protocol, ev_data, ev_model, ev_ckpt, ev_learner = "pretrained", ev_region, ev_tune_country, ev_csv;
  std::vector<std::string> ev_train_countries, ev_test_countries, ev_target_countries;
  std::vector<int> ev_sizes = eval::kFewShotSizes;
  int ev_resamples = 1000, ev_seeds = 10;
  std::size_t ev_ensemble = classifier::kDefaultEnsembleSize;
  std::size_t ev_learner_ensemble = 1;
  FinetuneOptions ev_opts;
  auto* evalc = app.add_subcommand("eval", "Evaluation protocols");
  add_common(evalc, ev_c);
  evalc->add_option("--protocol", ev_protocol, "holdout | bootstrap | loco | fewshot | zeroshot")
      ->check(CLI::IsMember({"holdout", "bootstrap", "loco", "fewshot", "zeroshot"}))
      ->required();
  evalc->add_option("--data", ev_data, "Dataset CSV")->required();
  evalc->add_option("--model", ev_model, "Trained model (holdout, zeroshot)");
  evalc->add_option("--checkpoint", ev_ckpt, "Encoder checkpoint (bootstrap, loco, fewshot)");
  evalc->add_option("--learner", ev_learner, "pretrained | cold_mlp | gbdt | logreg (bootstrap, loco)")
      ->check(CLI::IsMember({"pretrained", "cold_mlp", "gbdt", "logreg"}))
      ->capture_default_str();
  evalc->add_option("--learner-ensemble", ev_learner_ensemble, "Ensemble size of the pretrained learner")
      ->capture_default_str();
  evalc->add_option("--train-countries", ev_train_countries, "Bootstrap training countries")->delimiter(',');
  evalc->add_option("--test-countries", ev_test_countries, "Fixed test countries")->delimiter(',');
  evalc->add_option("--n-resamples", ev_resamples, "Bootstrap resamples")->capture_default_str();
  evalc->add_option("--region", ev_region, "Target region (fewshot)");
  evalc->add_option("--target-countries", ev_target_countries, "Target-region countries (fewshot)")->delimiter(',');
  evalc->add_option("--tune-country", ev_tune_country, "Country supplying fine-tuning samples (fewshot)");
  evalc->add_option("--sizes", ev_sizes, "Few-shot sample sizes")->delimiter(',')->capture_default_str();
  evalc->add_option("--seeds", ev_seeds, "Seeds per few-shot size")->capture_default_str();
  evalc->add_option("--ensemble", ev_ensemble, "Members of the pre-trained few-shot ensemble")->capture_default_str();
  evalc->add_option("--csv", ev_csv, "Few-shot curve CSV (default <out>.csv)");
  ev_opts.add(evalc);

  // ---- importance / calibration / equity ----
  Common imp_c, cal_c, eq_c;
  std::string imp_model, imp_data, cal_model, cal_data, eq_model, eq_data;
  std::vector<std::string> imp_countries, cal_countries, eq_countries;
  int imp_repeats = 100, cal_bins = 10;
  auto* importance = app.add_subcommand("importance", "Permutation importance with percentile CIs");
  add_common(importance, imp_c);
  importance->add_option("--model", imp_model, "Trained model")->required();
  importance->add_option("--data", imp_data, "Dataset CSV")->required();
  importance->add_option("--countries", imp_countries, "Restrict to countries")->delimiter(',');
  importance->add_option("--repeats", imp_repeats, "Shuffles per feature")->capture_default_str();
  auto* calibration = app.add_subcommand("calibration", "Brier score, ECE and reliability bins");
  add_common(calibration, cal_c);
  calibration->add_option("--model", cal_model, "Trained model")->required();
  calibration->add_option("--data", cal_data, "Dataset CSV")->required();
  calibration->add_option("--countries", cal_countries, "Restrict to countries")->delimiter(',');
  calibration->add_option("--bins", cal_bins, "Equal-width bins")->capture_default_str();
  auto* equity = app.add_subcommand("equity", "AUC by wealth quintile");
  add_common(equity, eq_c);
  equity->add_option("--model", eq_model, "Trained model")->required();
  equity->add_option("--data", eq_data, "Dataset CSV")->required();
  equity->add_option("--countries", eq_countries, "Restrict to countries")->delimiter(',');

  // ---- divergence ----
  Common dv_c;
  std::string dv_data;
  std::vector<std::string> dv_source, dv_target;
  auto* divergence = app.add_subcommand("divergence", "Proxy A-distance between country groups");
  add_common(divergence, dv_c);
  divergence->add_option("--data", dv_data, "Dataset CSV")->required();
  divergence->add_option("--source", dv_source, "Source countries")->delimiter(',')->required();
  divergence->add_option("--target", dv_target, "Target countries")->delimiter(',')->required();

  // ---- hpo ----
  Common hp_c;
  std::string hp_data, hp_space, hp_log;
  std::vector<std::string> hp_search, hp_validation;
  hpo::SearchConfig hp_cfg;
  auto* hpoc = app.add_subcommand("hpo", "Random search with the fairness objective");
  add_common(hpoc, hp_c);
  hpoc->add_option("--data", hp_data, "Dataset CSV")->required();
  hpoc->add_option("--search-countries", hp_search, "Countries used for training")->delimiter(',')->required();
  hpoc->add_option("--validation-countries", hp_validation, "Countries scored per trial")->delimiter(',')->required();
  hpoc->add_option("--trials", hp_cfg.trials, "Trials")->capture_default_str();
  hpoc->add_option("--pretrain-epochs", hp_cfg.pretrain_epochs, "Pre-training epochs per trial")->capture_default_str();
  hpoc->add_option("--max-epochs", hp_cfg.finetune_max_epochs, "Fine-tuning epoch cap")->capture_default_str();
  hpoc->add_option("--space", hp_space, "JSON search space overriding the default bounds");
  hpoc->add_option("--log", hp_log, "Trial log CSV (default <out>.csv)");

  // ---- theory-curve ----
  Common th_c;
  std::string th_ckpt, th_data;
  std::vector<std::string> th_countries;
  eval::ComplexityConfig th_cfg;
  FinetuneOptions th_opts;
  auto* theory = app.add_subcommand("theory-curve", "Head-only sample complexity on a frozen encoder");
  add_common(theory, th_c);
  theory->add_option("--checkpoint", th_ckpt, "Encoder checkpoint")->required();
  theory->add_option("--data", th_data, "Dataset CSV")->required();
  theory->add_option("--countries", th_countries, "Target countries (default all)")->delimiter(',');
  theory->add_option("--sizes", th_cfg.sizes, "Head training sizes")->delimiter(',')->capture_default_str();
  theory->add_option("--seeds", th_cfg.n_seeds, "Seeds per size")->capture_default_str();
  theory->add_option("--test-fraction", th_cfg.test_fraction, "Fixed test share")->capture_default_str();
  th_opts.add(theory);

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = expand_config(std::move(args));
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  std::vector<char*> cargs{argv[0]};
  for (auto& a : args) cargs.push_back(a.data());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  cli::RunManifest manifest(sub->get_name(), std::vector<std::string>(argv, argv + argc));
  manifest.set_effective_config(effective_config(sub));

  try {
    auto start_manifest = [&](const Common& c) {
      manifest.set_seed(c.seed);
      if (!c.config.empty()) manifest.set_config_file(resolve_input(c.config));
    };
    auto load_data = [&](const std::string& path) {
      const fs::path p = resolve_input(path);
      manifest.add_input(p);
      return load_dataset(p);
    };

    if (synth->parsed()) {
      start_manifest(synth_c);
      synth_cfg.seed = synth_c.seed;
      if (!quintile_noise.empty()) {
        std::array<double, 5> q{};
        std::copy(quintile_noise.begin(), quintile_noise.end(), q.begin());
        synth_cfg.quintile_label_noise = q;
      }
      const Dataset data = synth_generate(synth_cfg);
      write_output(synth_c.out, dataset_to_csv(data), manifest);
      std::cout << "wrote " << data.rows() << " rows, " << data.countries().size() << " countries to " << synth_c.out
                << "\n";
      manifest.write(synth_c.out);
    } else if (ingest->parsed()) {
      start_manifest(ingest_c);
      const fs::path input = resolve_input(ingest_input);
      manifest.add_input(input);
      const RawTable raw = harmonize(load_csv(input));
      const NumericTable numeric = to_numeric(raw);
      ImputeReport impute_report;
      Dataset data;
      if (imputation == "median") {
        data = impute_median(numeric);
      } else {
        data = impute_chained(numeric, impute_iterations,
                              imputation == "chained-congenial" ? ImputeProtocol::kCongenial : ImputeProtocol::kBlind,
                              &impute_report);
      }
      const AuditResult audit = audit_countries(data, min_rows);
      json countries = json::array();
      for (const auto& c : audit.countries) {
        countries.push_back({{"country", c.country},
                             {"rows", c.rows},
                             {"prevalence", c.prevalence},
                             {"accepted", c.accepted},
                             {"reason", c.reason}});
      }
      std::vector<std::string> warnings = raw.warnings;
      warnings.insert(warnings.end(), numeric.warnings.begin(), numeric.warnings.end());
      warnings.insert(warnings.end(), impute_report.warnings.begin(), impute_report.warnings.end());
      const json report = {{"imputation", imputation},
                           {"rows_read", raw.rows()},
                           {"rows_flagged", raw.flagged_rows.size()},
                           {"rows_kept", numeric.features.rows()},
                           {"rows_accepted", audit.accepted.rows()},
                           {"countries", std::move(countries)},
                           {"warnings", warnings}};
      write_output(ingest_c.out, dataset_to_csv(audit.accepted), manifest);
      write_output(audit_out.empty() ? ingest_c.out + ".audit.json" : audit_out, io::dump(report), manifest);
      std::cout << "accepted " << audit.accepted.rows() << " of " << raw.rows() << " rows\n";
      manifest.write(ingest_c.out);
    } else if (pretrain->parsed()) {
      start_manifest(pre_c);
      const Dataset data = restrict(load_data(pre_data), pre_countries);
      pre_cfg.seed = pre_c.seed;
      const auto ckpt = tmae::pretrain(data.features, data.feature_names, pre_cfg, [&](int epoch, double loss) {
        if (epoch % 10 == 0 || epoch == pre_cfg.epochs) std::cerr << "epoch " << epoch << " masked mse " << loss << "\n";
      });
      write_output(pre_c.out, tmae::checkpoint_to_json(ckpt), manifest);
      manifest.write(pre_c.out);
    } else if (finetune->parsed()) {
      start_manifest(ft_c);
      const fs::path ckpt_path = resolve_input(ft_ckpt);
      manifest.add_input(ckpt_path);
      const auto ckpt = tmae::load_checkpoint(ckpt_path);
      const Dataset all = load_data(ft_data);
      const Dataset train = restrict(all, ft_countries);
      classifier::FinetuneConfig cfg = ft_opts.cfg;
      cfg.seed = ft_c.seed;
      if (ft_ensemble < 1) throw InvalidArgument("--ensemble must be >= 1");
      Dataset tr = train, val;
      if (!ft_val_countries.empty()) {
        val = restrict(all, ft_val_countries);
        for (const auto& c : ft_val_countries) {
          if (std::find(ft_countries.begin(), ft_countries.end(), c) != ft_countries.end()) {
            throw InvalidArgument("country " + c + " is in both --countries and --val-countries");
          }
        }
        if (ft_countries.empty()) {
          std::vector<std::string> rest;
          for (const auto& c : all.countries()) {
            if (std::find(ft_val_countries.begin(), ft_val_countries.end(), c) == ft_val_countries.end()) {
              rest.push_back(c);
            }
          }
          tr = restrict(all, rest);
        }
      } else {
        const Split split = outcome_stratified_holdout(train, cfg.val_fraction, derive_seed(cfg.seed, 14));
        tr = train.subset(split.train);
        val = train.subset(split.test);
      }
      std::string text;
      if (ft_ensemble == 1) {
        const auto model = classifier::finetune(classifier::init_from_encoder(ckpt, cfg), tr, val, cfg);
        text = io::dump(classifier::model_to_json(model));
        std::cout << "best epoch " << model.best_epoch << ", val auc " << model.history[model.best_epoch - 1].val_auc
                  << "\n";
      } else {
        const auto seeds = classifier::default_ensemble_seeds(cfg.seed, ft_ensemble);
        const auto ensemble = classifier::train_ensemble(ckpt, tr, val, cfg, seeds, ft_c.jobs);
        text = io::dump(classifier::ensemble_to_json(ensemble));
      }
      write_output(ft_c.out, text, manifest);
      manifest.write(ft_c.out);
    } else if (evalc->parsed()) {
      start_manifest(ev_c);
      const Dataset data = load_data(ev_data);
      classifier::FinetuneConfig ft = ev_opts.cfg;
      ft.seed = ev_c.seed;
      std::optional<tmae::EncoderCheckpoint> ckpt;
      if (!ev_ckpt.empty()) {
        const fs::path p = resolve_input(ev_ckpt);
        manifest.add_input(p);
        ckpt = tmae::load_checkpoint(p);
      }
      auto need_model = [&]() {
        if (ev_model.empty()) throw InvalidArgument("--model is required for protocol " + ev_protocol);
        const fs::path p = resolve_input(ev_model);
        manifest.add_input(p);
        LoadedModel m = load_model(p);
        check_schema(m, data);
        return m;
      };
      json report;
      std::string text;
      if (ev_protocol == "holdout") {
        const LoadedModel model = need_model();
        const Dataset test = restrict(data, ev_test_countries);
        const auto cal = eval::calibration_report(model.predict, test);
        report = {{"protocol", "holdout"},
                  {"model", model.kind},
                  {"n", test.rows()},
                  {"auc", eval::evaluate_auc(model.predict, test)},
                  {"brier", cal.brier},
                  {"ece", cal.ece},
                  {"per_country", per_country_auc(model.predict, test)}};
        text = "auc " + format_double(report["auc"].get<double>()) + "\n";
      } else if (ev_protocol == "zeroshot") {
        const LoadedModel model = need_model();
        const Dataset test = restrict(data, ev_test_countries);
        eval::EvalReport r;
        r.metric = "auc";
        r.seed = ev_c.seed;
        std::vector<double> values;
        for (const auto& c : test.countries()) {
          const Dataset part = test.subset(test.rows_of_country(c));
          eval::GroupValue g;
          g.group = c;
          g.n = part.rows();
          if (part.has_both_classes()) {
            g.value = eval::evaluate_auc(model.predict, part);
            values.push_back(g.value);
          } else {
            g.defined = false;
            g.note = "AUC undefined: single-class country";
          }
          r.per_group.push_back(g);
        }
        if (!values.empty()) {
          r.point = metrics::mean(values);
          r.ci_low = *std::min_element(values.begin(), values.end());
          r.ci_high = *std::max_element(values.begin(), values.end());
        }
        r.config = {{"protocol", "zeroshot"}, {"interval", "min-max over countries"}};
        report = eval::to_json(r);
        text = eval::to_text(r);
      } else if (ev_protocol == "bootstrap") {
        if (ev_train_countries.empty() || ev_test_countries.empty()) {
          throw InvalidArgument("bootstrap needs --train-countries and --test-countries");
        }
        const Dataset train = restrict(data, ev_train_countries);
        const Dataset test = restrict(data, ev_test_countries);
        if (row_id_overlap(data, data.rows_of_countries(ev_train_countries), data.rows_of_countries(ev_test_countries))) {
          throw InvalidArgument("bootstrap train and test countries overlap");
        }
        const auto trainer =
            make_trainer(kLearners.at(ev_learner), ckpt ? &*ckpt : nullptr, ft, ev_learner_ensemble);
        eval::BootstrapConfig bc;
        bc.n_resamples = ev_resamples;
        bc.seed = ev_c.seed;
        bc.jobs = ev_c.jobs;
        const auto r = eval::bootstrap_ci(
            [&](const Dataset& tr, std::uint64_t seed) { return eval::evaluate_auc(trainer(tr, seed), test); }, train,
            bc);
        report = eval::to_json(r);
        report["learner"] = ev_learner;
        text = eval::to_text(r);
      } else if (ev_protocol == "loco") {
        const auto trainer =
            make_trainer(kLearners.at(ev_learner), ckpt ? &*ckpt : nullptr, ft, ev_learner_ensemble);
        const auto result = eval::loco_run(trainer, restrict(data, ev_test_countries), ev_c.seed, ev_c.jobs);
        json folds = json::array();
        for (const auto& f : result.folds) {
          folds.push_back({{"country", f.country},
                           {"n_train", f.n_train},
                           {"n_test", f.n_test},
                           {"row_id_overlap", f.overlap},
                           {"auc", f.defined ? json(f.auc) : json(nullptr)},
                           {"note", f.note}});
        }
        const auto r = result.report();
        report = eval::to_json(r);
        report["learner"] = ev_learner;
        report["folds"] = std::move(folds);
        text = eval::to_text(r);
      } else {  // fewshot
        if (!ckpt) throw InvalidArgument("fewshot needs --checkpoint");
        if (ev_tune_country.empty()) throw InvalidArgument("fewshot needs --tune-country");
        Dataset region;
        if (!ev_target_countries.empty()) {
          region = restrict(data, ev_target_countries);
        } else if (!ev_region.empty()) {
          std::vector<std::size_t> idx;
          for (std::size_t i = 0; i < data.rows(); ++i) {
            if (data.region[i] == ev_region) idx.push_back(i);
          }
          if (idx.empty()) throw DataError("region " + ev_region + " has no rows");
          region = data.subset(idx);
        } else {
          throw InvalidArgument("fewshot needs --region or --target-countries");
        }
        eval::FewShotConfig fc;
        fc.sizes = ev_sizes;
        fc.n_seeds = ev_seeds;
        fc.seed = ev_c.seed;
        fc.ensemble_size = ev_ensemble;
        fc.finetune = ft;
        fc.jobs = ev_c.jobs;
        const auto curve = eval::fewshot_curve(*ckpt, region, ev_tune_country, fc);
        for (const auto& w : curve.warnings) std::cerr << "warning: " << w << "\n";
        report = eval::to_json(curve);
        write_output(ev_csv.empty() ? with_suffix(ev_c.out, ".csv") : ev_csv, eval::curve_csv(curve), manifest);
        for (const auto& s : curve.summary) {
          text += s.model + " n=" + std::to_string(s.n) + " mean auc " + format_double(s.mean) + "\n";
        }
      }
      write_output(ev_c.out, io::dump(report), manifest);
      std::cout << text;
      manifest.write(ev_c.out);
    } else if (importance->parsed()) {
      start_manifest(imp_c);
      const Dataset data = restrict(load_data(imp_data), imp_countries);
      const fs::path mp = resolve_input(imp_model);
      manifest.add_input(mp);
      const LoadedModel model = load_model(mp);
      check_schema(model, data);
      const auto result = eval::permutation_importance(model.predict, data, imp_repeats, imp_c.seed, imp_c.jobs);
      write_output(imp_c.out, io::dump(eval::to_json(result)), manifest);
      std::cout << eval::to_text(result);
      manifest.write(imp_c.out);
    } else if (calibration->parsed()) {
      start_manifest(cal_c);
      const Dataset data = restrict(load_data(cal_data), cal_countries);
      const fs::path mp = resolve_input(cal_model);
      manifest.add_input(mp);
      const LoadedModel model = load_model(mp);
      check_schema(model, data);
      const auto result = eval::calibration_report(model.predict, data, cal_bins);
      write_output(cal_c.out, io::dump(eval::to_json(result)), manifest);
      std::cout << "brier " << format_double(result.brier) << "  ece " << format_double(result.ece) << "\n";
      manifest.write(cal_c.out);
    } else if (equity->parsed()) {
      start_manifest(eq_c);
      const Dataset data = restrict(load_data(eq_data), eq_countries);
      const fs::path mp = resolve_input(eq_model);
      manifest.add_input(mp);
      const LoadedModel model = load_model(mp);
      check_schema(model, data);
      const auto result = eval::equity_audit(model.predict, data);
      write_output(eq_c.out, io::dump(eval::to_json(result)), manifest);
      for (const auto& r : result.rows) {
        std::cout << "Q" << r.quintile << "  n " << r.n << "  auc " << (r.defined ? format_double(r.auc) : "undef")
                  << "\n";
      }
      manifest.write(eq_c.out);
    } else if (divergence->parsed()) {
      start_manifest(dv_c);
      const Dataset data = load_data(dv_data);
      const auto result =
          eval::proxy_divergence(restrict(data, dv_source).features, restrict(data, dv_target).features, dv_c.seed);
      json report = eval::to_json(result);
      report["source"] = dv_source;
      report["target"] = dv_target;
      write_output(dv_c.out, io::dump(report), manifest);
      std::cout << "d_hat " << format_double(result.d_hat) << "\n";
      manifest.write(dv_c.out);
    } else if (hpoc->parsed()) {
      start_manifest(hp_c);
      const Dataset data = load_data(hp_data);
      hpo::SearchSpace space;
      if (!hp_space.empty()) {
        const fs::path sp = resolve_input(hp_space);
        manifest.add_input(sp);
        space = hpo::search_space_from_json(json::parse(io::read_file(sp)));
      }
      hp_cfg.seed = hp_c.seed;
      hp_cfg.jobs = hp_c.jobs;
      const auto result = hpo::run_search(space, data, hp_search, hp_validation, hp_cfg);
      const json report = {{"best", hpo::to_json(result.best)},
                           {"space", hpo::to_json(space)},
                           {"trials", hp_cfg.trials},
                           {"seed", hp_cfg.seed}};
      write_output(hp_c.out, io::dump(report), manifest);
      write_output(hp_log.empty() ? with_suffix(hp_c.out, ".csv") : hp_log, hpo::log_csv(result), manifest);
      std::cout << "best trial " << result.best.index << " objective " << format_double(result.best.objective) << "\n";
      manifest.write(hp_c.out);
    } else if (theory->parsed()) {
      start_manifest(th_c);
      const fs::path cp = resolve_input(th_ckpt);
      manifest.add_input(cp);
      const auto ckpt = tmae::load_checkpoint(cp);
      const Dataset data = restrict(load_data(th_data), th_countries);
      th_cfg.seed = th_c.seed;
      th_cfg.jobs = th_c.jobs;
      th_cfg.finetune = th_opts.cfg;
      const auto result = eval::sample_complexity_curve(ckpt, data, th_cfg);
      write_output(th_c.out, io::dump(eval::to_json(result)), manifest);
      for (const auto& p : result.points) {
        std::cout << "n " << p.n << "  deficit " << format_double(p.deficit) << "\n";
      }
      std::cout << "c " << format_double(result.c) << "  correlation " << format_double(result.correlation) << "\n";
      manifest.write(th_c.out);
    }
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const json::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
