// Copyright 2026 The concept_tab Authors
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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "concept_tab/baselines.hpp"
#include "concept_tab/concept_metric.hpp"
#include "concept_tab/errors.hpp"
#include "concept_tab/explain_debug.hpp"
#include "concept_tab/feature_store.hpp"
#include "concept_tab/gbdt.hpp"
#include "concept_tab/parallel.hpp"
#include "concept_tab/pipeline.hpp"
#include "concept_tab/service.hpp"
#include "concept_tab/synthetic_world.hpp"

namespace fs = std::filesystem;
using namespace concept_tab;

namespace {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kConfig = 3,
  kIo = 4,
  kData = 5,
};

// Flag values; unset optionals leave the config file (or defaults) alone.
struct Flags {
  std::optional<std::string> config_file;
  std::optional<std::size_t> threads;
  std::optional<std::string> train;
  std::optional<std::string> test;
  std::optional<std::string> synthetic;
  std::optional<std::string> task;
  std::optional<std::string> classifier;
  std::optional<int> rounds;
  std::optional<int> depth;
  std::optional<double> learning_rate;
  std::optional<int> min_leaf;
  std::optional<double> l2;
  std::optional<std::size_t> m;
  std::optional<double> lambda;
  std::optional<std::vector<std::size_t>> mask;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<double> train_fraction;
  std::optional<int> repeats;

  std::optional<std::string> data;  // score: single file
  std::string format = "csv";       // synth
  std::optional<std::string> model;  // explain, debug: reuse a saved GBDT
  std::size_t sample = 0;           // explain: test row to edit
  std::string host = "127.0.0.1";   // serve
  int port = 8080;
  std::optional<std::string> session;
  std::optional<std::string> static_dir;
  std::string cors_origin = "*";
  std::vector<std::string> latent_sets;  // render: k=v
};

void add_data_options(CLI::App* cmd, Flags& f) {
  cmd->add_option("--train", f.train, "Training feature matrix (.csv or .bin)");
  cmd->add_option("--test", f.test, "Held-out feature matrix (.csv or .bin)");
  cmd->add_option("--synthetic", f.synthetic,
                  "Synthetic world: 'default', 'recovery' or a spec JSON file");
  cmd->add_option("--samples", f.samples, "Synthetic sample count (default 2000)");
  cmd->add_option("--train-fraction", f.train_fraction,
                  "Leading fraction of synthetic rows used for training (default 0.7)");
  cmd->add_option("--seed", f.seed, "Random seed (default 1)");
  cmd->add_option("--task", f.task, "Task name recorded in reports");
}

void add_gbdt_options(CLI::App* cmd, Flags& f) {
  cmd->add_option("--rounds", f.rounds, "Boosting rounds (default 200)");
  cmd->add_option("--depth", f.depth, "Maximum tree depth (default 4)");
  cmd->add_option("--lr", f.learning_rate, "Learning rate (default 0.1)");
  cmd->add_option("--min-leaf", f.min_leaf, "Minimum samples per leaf (default 5)");
  cmd->add_option("--l2", f.l2, "L2 leaf regularization (default 1.0)");
}

void add_out_option(CLI::App* cmd, Flags& f) {
  cmd->add_option("--out", f.out, "Output directory (default ./out)");
}

PipelineConfig build_config(const Flags& f) {
  PipelineConfig c;
  if (f.config_file) {
    std::ifstream in(*f.config_file);
    if (!in) throw IoError("cannot open config " + *f.config_file);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config " + *f.config_file + ": " + e.what());
    }
    c = config_from_json(j, c);
  }
  if (f.train) c.train_path = *f.train;
  if (f.test) c.test_path = *f.test;
  if (f.synthetic) c.synthetic = *f.synthetic;
  if (f.task) c.task = *f.task;
  if (f.classifier) c.classifier = classifier_from_string(*f.classifier);
  if (f.rounds) c.gbdt.num_rounds = *f.rounds;
  if (f.depth) c.gbdt.max_depth = *f.depth;
  if (f.learning_rate) c.gbdt.learning_rate = *f.learning_rate;
  if (f.min_leaf) c.gbdt.min_samples_leaf = *f.min_leaf;
  if (f.l2) c.gbdt.l2_leaf_reg = *f.l2;
  if (f.m) c.top_m = *f.m;
  if (f.lambda) c.lambda = *f.lambda;
  if (f.mask) c.mask = MaskSet(std::set<std::size_t>(f.mask->begin(), f.mask->end()));
  if (f.out) c.output_dir = *f.out;
  if (f.seed) c.seed = *f.seed;
  if (f.samples) c.samples = *f.samples;
  if (f.train_fraction) c.train_fraction = *f.train_fraction;
  if (f.repeats) c.permutation_repeats = *f.repeats;
  c.validate();
  return c;
}

void prepare_output(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("output directory " + dir.string() + " is not writable");
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
  std::cout << "wrote " << path.string() << '\n';
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

GbdtModel reference_model(const Flags& f, const PipelineConfig& c, const Dataset& data) {
  if (f.model) {
    GbdtModel model = load_model(*f.model);
    if (model.dims != data.train.dims()) {
      throw InvalidArgument("model expects " + std::to_string(model.dims) +
                            " features, data has " + std::to_string(data.train.dims()));
    }
    return model;
  }
  return train_gbdt(data.train, c.gbdt);
}

int cmd_synth(const Flags& f) {
  const PipelineConfig c = build_config(f);
  if (c.train_path) throw ConfigError("synth takes a synthetic spec, not data files");
  if (f.format != "csv" && f.format != "bin") throw ConfigError("--format must be csv or bin");
  const SyntheticSpec spec = resolve_synthetic_spec(c.synthetic.value_or("default"));
  const auto split = sample_split(spec, c.samples, c.train_fraction, c.seed);
  prepare_output(c.output_dir);
  const auto fmt = f.format == "csv" ? FileFormat::kCsv : FileFormat::kBinary;
  const std::string ext = f.format == "csv" ? ".csv" : ".bin";
  for (const auto& [name, m] : {std::pair{"train", &split.train}, std::pair{"test", &split.test}}) {
    const fs::path p = c.output_dir / (std::string(name) + ext);
    save_feature_matrix(*m, p, fmt);
    std::cout << "wrote " << p.string() << '\n';
  }
  write_json(c.output_dir / "spec.json", to_json(spec));
  return kOk;
}

int cmd_score(const Flags& f) {
  std::vector<ConceptScore> scores;
  PipelineConfig c;
  if (f.data) {
    if (f.train || f.test || f.synthetic) {
      throw ConfigError("--data cannot be combined with another data source");
    }
    Flags rest = f;
    rest.data.reset();
    rest.synthetic = "default";
    c = build_config(rest);
    const FeatureMatrix m = load_feature_matrix(*f.data, format_from_path(*f.data),
                                                LabelPolicy::kMulticlass);
    scores = score_matrix(standardize(m).matrix);
  } else {
    c = build_config(f);
    scores = score_matrix(load_dataset(c).train);
  }
  prepare_output(c.output_dir);
  std::ostringstream js;
  write_scores_json(js, scores);
  write_text(c.output_dir / "scores.json", js.str());
  std::ostringstream cs;
  write_scores_csv(cs, scores);
  write_text(c.output_dir / "scores.csv", cs.str());
  return kOk;
}

int cmd_train(const Flags& f) {
  const PipelineConfig c = build_config(f);
  const Dataset data = load_dataset(c);
  const TrainedClassifier model = train_classifier(data.train, c);
  const Predictor predict = model.predictor();
  prepare_output(c.output_dir);
  write_json(c.output_dir / "model.json", model.to_json());
  write_json(c.output_dir / "metrics.json",
             {{"classifier", to_string(c.classifier)},
              {"train_accuracy", accuracy(predict, data.train)},
              {"test_accuracy", accuracy(predict, data.test)},
              {"importance", importance_list_json(model.importance())}});
  return kOk;
}

int cmd_explain(const Flags& f) {
  const PipelineConfig c = build_config(f);
  const Dataset data = load_dataset(c);
  if (f.sample >= data.test_raw.count()) throw InvalidArgument("--sample is out of range");
  const GbdtModel model = reference_model(f, c, data);
  const auto scores = score_matrix(data.train);
  prepare_output(c.output_dir);
  ExplainOptions opts;
  opts.task = c.task;
  opts.stats = &data.stats;
  SyntheticSpec spec;
  if (data.spec) {
    spec = *data.spec;
    opts.artifact_dir = c.output_dir;
  } else {
    spec.dims = data.train.dims();
  }
  const ExplanationReport report = build_explanation(model, scores, spec,
                                                     data.test_raw.row(f.sample), c.top_m,
                                                     c.lambda, opts);
  for (const auto& concept_entry : report.concepts) {
    for (const auto& img : concept_entry.images) {
      std::cout << "wrote " << (c.output_dir / img).string() << '\n';
    }
  }
  write_json(c.output_dir / "explanation.json", to_json(report));
  return kOk;
}

int cmd_debug(const Flags& f) {
  const PipelineConfig c = build_config(f);
  const Dataset data = load_dataset(c);
  if (c.mask.empty()) throw ConfigError("debug needs a non-empty --mask");
  c.mask.validate(data.train.dims());
  const GbdtModel reference = reference_model(f, c, data);
  GbdtModel debugged;
  const DebugReport report =
      debug_mask_retrain(reference, data.train, data.test, c.mask, c.gbdt, &debugged);
  prepare_output(c.output_dir);
  write_json(c.output_dir / "debug.json", to_json(report));
  write_json(c.output_dir / "debugged_model.json", to_json(debugged));
  return kOk;
}

int cmd_compare(const Flags& f) {
  PipelineConfig c = build_config(f);
  if (!f.m) c.top_m = 5;
  const Dataset data = load_dataset(c);
  const auto scores = score_matrix(data.train);
  const auto rows = compare_classifiers(data, scores, c, c.top_m);
  prepare_output(c.output_dir);
  write_json(c.output_dir / "compare.json", compare_to_json(rows, c.top_m));
  std::cout << std::left << std::setw(18) << "classifier" << "avg_w(top " << c.top_m << ")\n";
  for (const auto& r : rows) {
    std::cout << std::left << std::setw(18) << r.classifier << format_double(r.avg_w) << '\n';
  }
  return kOk;
}

int cmd_serve(const Flags& f) {
  ServiceOptions opts;
  opts.config = build_config(f);
  if (f.session) opts.session_path = fs::path(*f.session);
  opts.cors_origin = f.cors_origin;
  Service service(std::move(opts));
  std::optional<fs::path> static_dir;
  if (f.static_dir) static_dir = fs::path(*f.static_dir);
  HttpServer server(service, static_dir);
  const int port = server.bind(f.host, f.port);
  std::cout << "listening on http://" << f.host << ":" << port << std::endl;
  server.serve();
  return kOk;
}

int cmd_render(const Flags& f) {
  const PipelineConfig c = build_config(f);
  const SyntheticSpec spec = resolve_synthetic_spec(c.synthetic.value_or("default"));
  std::vector<double> latent(spec.dims, 0.0);
  for (const auto& s : f.latent_sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects k=value, got '" + s + "'");
    std::size_t k = 0;
    double v = 0.0;
    try {
      k = std::stoul(s.substr(0, eq));
      v = std::stod(s.substr(eq + 1));
    } catch (const std::exception&) {
      throw ConfigError("--set expects k=value, got '" + s + "'");
    }
    if (k >= spec.dims) throw ConfigError("--set index " + std::to_string(k) + " out of range");
    latent[k] = v;
  }
  prepare_output(c.output_dir);
  const RenderedImage img = render(spec, latent);
  const fs::path p = c.output_dir / "render.pgm";
  write_pgm(img, p);
  std::cout << "wrote " << p.string() << '\n';
  nlohmann::json probes = nlohmann::json::object();
  for (const Semantic s : kAllSemantics) probes[to_string(s)] = measure_semantic(img, s);
  write_json(c.output_dir / "render_probes.json", probes);
  return kOk;
}

void fail(const char* category, const std::string& what) {
  std::string line = what;
  for (char& ch : line) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  std::cerr << "concept_tab: " << category << ": " << line << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concept discovery, explanation and debugging for tabular feature matrices"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--config", f.config_file, "JSON configuration file; flags override it");
  app.add_option("--threads", f.threads, "Worker cap (default CONCEPT_TAB_THREADS or all cores)")
      ->check(CLI::PositiveNumber);

  auto* synth = app.add_subcommand("synth", "Sample a synthetic dataset and write train/test/spec");
  add_data_options(synth, f);
  add_out_option(synth, f);
  synth->add_option("--format", f.format, "Dataset format: csv or bin (default csv)");

  auto* score = app.add_subcommand("score", "Compute W_k for every feature");
  add_data_options(score, f);
  add_out_option(score, f);
  score->add_option("--data", f.data, "Score a single labeled file");

  auto* train = app.add_subcommand("train", "Fit a classifier and save model and accuracy");
  add_data_options(train, f);
  add_gbdt_options(train, f);
  add_out_option(train, f);
  train->add_option("--classifier", f.classifier, "gbdt, logistic or svm (default gbdt)");

  auto* explain = app.add_subcommand("explain", "Explain the top-m GBDT concepts");
  add_data_options(explain, f);
  add_gbdt_options(explain, f);
  add_out_option(explain, f);
  explain->add_option("--m", f.m, "Number of concepts (default 4)");
  explain->add_option("--lambda", f.lambda, "Edit magnitude in standardized units (default 2)");
  explain->add_option("--sample", f.sample, "Test row used as the edit base (default 0)");
  explain->add_option("--model", f.model, "Saved GBDT model instead of training one");

  auto* debug = app.add_subcommand("debug", "Mask features, retrain and report the change");
  add_data_options(debug, f);
  add_gbdt_options(debug, f);
  add_out_option(debug, f);
  debug->add_option("--mask", f.mask, "Comma-separated feature indices to mask")->delimiter(',');
  debug->add_option("--model", f.model, "Saved reference GBDT model instead of training one");

  auto* compare = app.add_subcommand("compare", "avg W of the top-m important features per classifier");
  add_data_options(compare, f);
  add_gbdt_options(compare, f);
  add_out_option(compare, f);
  compare->add_option("--m", f.m, "Number of top features (default 5)");
  compare->add_option("--repeats", f.repeats, "Permutation importance repeats (default 10)");

  auto* serve = app.add_subcommand("serve", "Start the HTTP workbench service");
  add_data_options(serve, f);
  add_gbdt_options(serve, f);
  serve->add_option("--host", f.host, "Bind address (default 127.0.0.1)");
  serve->add_option("--port", f.port, "Port, 0 for ephemeral (default 8080)")
      ->check(CLI::Range(0, 65535));
  serve->add_option("--session", f.session, "Session file persisted after every mutation");
  serve->add_option("--static-dir", f.static_dir, "Directory mounted at / (UI bundle)");
  serve->add_option("--cors-origin", f.cors_origin, "Allowed CORS origin (default *)");
  serve->add_option("--lambda", f.lambda, "Default visualization lambda (default 2)");
  serve->add_option("--mask", f.mask, "Initial pending mask")->delimiter(',');

  auto* render_cmd = app.add_subcommand("render", "Render one synthetic image to PGM");
  render_cmd->add_option("--synthetic", f.synthetic, "Synthetic world (default 'default')");
  render_cmd->add_option("--set", f.latent_sets, "Latent override k=value (repeatable)");
  add_out_option(render_cmd, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    fail("usage", std::string(e.what()) + " (run with --help)");
    return kUsage;
  }

  try {
    if (f.threads) set_max_threads(*f.threads);
    if (synth->parsed()) return cmd_synth(f);
    if (score->parsed()) return cmd_score(f);
    if (train->parsed()) return cmd_train(f);
    if (explain->parsed()) return cmd_explain(f);
    if (debug->parsed()) return cmd_debug(f);
    if (compare->parsed()) return cmd_compare(f);
    if (serve->parsed()) return cmd_serve(f);
    if (render_cmd->parsed()) return cmd_render(f);
    fail("usage", "no subcommand");
    return kUsage;
  } catch (const ConfigError& e) {
    fail("config", e.what());
    return kConfig;
  } catch (const IoError& e) {
    fail("io", e.what());
    return kIo;
  } catch (const fs::filesystem_error& e) {
    fail("io", e.what());
    return kIo;
  } catch (const ParseError& e) {
    fail("data", e.what());
    return kData;
  } catch (const InvalidArgument& e) {
    fail("data", e.what());
    return kData;
  } catch (const std::exception& e) {
    fail("internal", e.what());
    return kInternal;
  }
}
