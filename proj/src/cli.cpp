#include "vrturn/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "vrturn/dataset.hpp"
#include "vrturn/error.hpp"
#include "vrturn/evaluation.hpp"
#include "vrturn/numeric_format.hpp"
#include "vrturn/parallel.hpp"
#include "vrturn/pipeline_config.hpp"
#include "vrturn/synth.hpp"

namespace vrturn::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct Options {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 0;
  std::string data;
  std::string out;
  std::string task;
  std::string model;
  std::string cv;
  std::string dataset;
  bool skip_synth = false;
};

struct Context {
  PipelineConfig cfg;
  std::string hash;
  fs::path data;
  fs::path out;
  int jobs = 1;
};

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

Context make_context(const Options& o) {
  Context c;
  if (!o.config.empty()) c.cfg = PipelineConfig::from_json(read_text_file(o.config));
  if (o.seed_set) c.cfg.seed = o.seed;
  if (!o.task.empty()) c.cfg.task = parse_task(o.task);
  if (!o.model.empty()) c.cfg.model.family = parse_model_family(o.model);
  if (!o.cv.empty()) c.cfg.cv = parse_cv_scheme(o.cv);
  // paths: flag, then environment, then config
  if (auto e = env("VRTURN_DATA_DIR")) c.cfg.paths.data = *e;
  if (auto e = env("VRTURN_OUT_DIR")) c.cfg.paths.out = *e;
  if (!o.data.empty()) c.cfg.paths.data = o.data;
  if (!o.out.empty()) c.cfg.paths.out = o.out;
  c.cfg.validate();
  c.hash = c.cfg.hash();
  c.data = c.cfg.paths.data;
  c.out = c.cfg.paths.out;
  c.jobs = o.jobs > 0 ? o.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return c;
}

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) fail(ErrorCode::Io, "cannot create directory " + p.string() + ": " + ec.message());
}

void write(const fs::path& p, std::string_view text) {
  ensure_dir(p.parent_path().empty() ? fs::path(".") : p.parent_path());
  write_text_file(p, text);
  std::cout << "wrote " << p.string() << "\n";
}

std::string csv_preamble(const Context& c) {
  return "# " + ordered_json{{"config_hash", c.hash}}.dump() + "\n";
}

std::string with_hash(const std::string& json_text, const Context& c) {
  ordered_json j = ordered_json::parse(json_text);
  j["config_hash"] = c.hash;
  return j.dump(2) + "\n";
}

std::string stem(const Context& c) {
  return std::string(to_string(c.cfg.task)) + "_" + std::string(to_string(c.cfg.model.family));
}

fs::path dataset_path(const Context& c) { return c.out / "datasets" / (std::string(to_string(c.cfg.task)) + ".csv"); }
fs::path model_path(const Context& c) { return c.out / "models" / (stem(c) + ".json"); }

void write_config(const Context& c, const fs::path& dir) { write(dir / "config.json", c.cfg.to_json()); }

std::vector<SessionRecording> load_data(const Context& c) {
  auto recs = load_recording_dir(c.data);
  if (recs.empty()) fail(ErrorCode::Io, "no recordings in " + c.data.string());
  return recs;
}

LabeledDataset load_task_dataset(const Context& c, const std::string& explicit_path) {
  const fs::path p = explicit_path.empty() ? dataset_path(c) : fs::path(explicit_path);
  LabeledDataset ds = load_dataset(p);
  if (ds.schema.hash() != turn_taking_schema().hash()) {
    fail(ErrorCode::SchemaMismatch, "dataset " + p.string() + " has schema " + ds.schema.hash() + ", expected " +
                                        turn_taking_schema().hash());
  }
  if (ds.task != c.cfg.task) {
    fail(ErrorCode::InvalidConfig,
         "dataset " + p.string() + " is for task '" + std::string(to_string(ds.task)) + "'");
  }
  return ds;
}

ModelConfig model_config(const Context& c) {
  ModelConfig m = c.cfg.model;
  m.seed = c.cfg.stage_seed("model");
  return m;
}

// ---------------------------------------------------------------------------

void run_synth(const Context& c) {
  CorpusConfig corpus = c.cfg.synth;
  corpus.seed = c.cfg.stage_seed("synth");
  const auto sessions = generate_corpus(corpus, c.jobs);
  ensure_dir(c.data);
  ordered_json index;
  index["config_hash"] = c.hash;
  index["sessions"] = ordered_json::array();
  for (const auto& s : sessions) {
    const auto& id = s.recording.manifest.session_id;
    save_recording_dir(s.recording, c.data);
    write_text_file(truth_path(c.data, id), s.truth.to_json());
    const LabelingScore score = verify_labeling(s.recording, s.truth, c.cfg.labels);
    index["sessions"].push_back({{"session_id", id},
                                 {"group_id", s.recording.manifest.group_id},
                                 {"week", s.recording.manifest.week},
                                 {"scripted_transitions", score.expected},
                                 {"recovered_transitions", score.recovered}});
  }
  std::cout << "wrote " << sessions.size() << " sessions to " << c.data.string() << "\n";
  write(c.data / "synth.json", index.dump(2) + "\n");
}

void run_validate(const Context& c) {
  const auto recs = load_data(c);
  ordered_json j;
  j["config_hash"] = c.hash;
  j["sessions"] = ordered_json::array();
  for (const auto& r : recs) {
    j["sessions"].push_back(ordered_json::parse(validate_recording(r, c.cfg.labels.volume_threshold).to_json()));
  }
  write(c.out / "validation.json", j.dump(2) + "\n");
}

void run_label(const Context& c) {
  const auto recs = load_data(c);
  const auto labeled = label_sessions(recs, c.cfg.labels, c.jobs);
  for (const auto& s : labeled) {
    const auto& id = s.recording->manifest.session_id;
    write(c.out / "labels" / (id + ".labels.json"), labels_to_json(id, s.labels, c.hash));
  }
}

// One row per turn-taking onset and candidate listener; reference = previous speaker.
void run_features(const Context& c) {
  const auto recs = load_data(c);
  const auto labeled = label_sessions(recs, c.cfg.labels, c.jobs);
  std::vector<std::vector<std::pair<std::string, FeatureVector>>> per(labeled.size());
  std::vector<std::size_t> skipped(labeled.size(), 0);
  parallel_for(labeled.size(), c.jobs, [&](std::size_t i) {
    const auto& rec = *labeled[i].recording;
    for (const auto& tr : labeled[i].labels.transitions) {
      if (!tr.is_turn_taking() || !tr.previous_speaker_id) continue;
      for (const auto& u : rec.manifest.users) {
        if (u.user_id == *tr.previous_speaker_id) continue;
        try {
          per[i].push_back({std::string(to_string(tr.category)),
                            extract_sample(rec, labeled[i].labels.timeline, tr.onset, u.user_id,
                                           *tr.previous_speaker_id, c.cfg.features)});
          per[i].back().first += u.user_id == tr.new_speaker_id ? ",1" : ",0";
        } catch (const Error& e) {
          if (e.code() != ErrorCode::WindowOutOfRange && e.code() != ErrorCode::WindowTooSparse &&
              e.code() != ErrorCode::CoincidentHeads)
            throw;
          ++skipped[i];
        }
      }
    }
  });
  const FeatureSchema& schema = turn_taking_schema();
  std::size_t rows = 0, skips = 0;
  for (std::size_t i = 0; i < per.size(); ++i) {
    rows += per[i].size();
    skips += skipped[i];
  }
  std::string out = "# " +
                    ordered_json{{"config_hash", c.hash},
                                 {"schema_hash", schema.hash()},
                                 {"rows", rows},
                                 {"skipped_windows", skips}}
                        .dump() +
                    "\n";
  out += "session_id,group_id,week,onset,main_user,reference_user,category,is_new_speaker";
  for (const auto& s : schema.specs()) out += "," + s.name;
  out += "\n";
  for (const auto& session : per) {
    for (const auto& [tag, fv] : session) {
      const auto& p = fv.provenance;
      out += p.session_id + "," + p.group_id + "," + std::to_string(p.week) + "," + format_double(p.onset) + "," +
             p.main_user + "," + p.reference_user + "," + tag;
      for (double v : fv.values) out += "," + format_double(v);
      out += "\n";
    }
  }
  const fs::path path = c.out / "features" / "features.csv";
  write(path, out);
  write(schema_sidecar_path(path), schema.to_json());
}

void run_build_dataset(const Context& c) {
  const auto recs = load_data(c);
  const LabeledDataset ds = build_dataset(c.cfg.task, recs, c.cfg.stage_seed("dataset"), c.cfg.dataset_config(c.jobs));
  const fs::path p = dataset_path(c);
  ensure_dir(p.parent_path());
  save_dataset(ds, p, c.hash);
  std::cout << "wrote " << p.string() << " (" << ds.size() << " rows, " << ds.positives() << " positive)\n";
}

TrainedModel train_full(const Context& c, const LabeledDataset& ds) {
  return train_model(ds.matrix(), ds.label_vector(), ds.schema, model_config(c));
}

void run_train(const Context& c, const Options& o) {
  const LabeledDataset ds = load_task_dataset(c, o.dataset);
  write(model_path(c), with_hash(train_full(c, ds).to_json(), c));
}

void run_evaluate(const Context& c, const Options& o) {
  const LabeledDataset ds = load_task_dataset(c, o.dataset);
  const EvalReport r = run_cv(ds, model_config(c), c.cfg.cv, c.cfg.stage_seed("cv"), c.jobs, c.cfg.folds);
  const std::string name = "eval_" + stem(c) + "_" + std::string(to_string(c.cfg.cv));
  write(c.out / "reports" / (name + ".json"), r.to_json(c.hash));
  write(c.out / "reports" / (name + ".csv"), csv_preamble(c) + r.to_csv());
}

std::string file_safe(std::string s) {
  for (char& ch : s) {
    if (ch == '*' || ch == '?' || ch == '/') ch = '_';
  }
  return s;
}

void run_interpret(const Context& c, const Options& o) {
  const LabeledDataset ds = load_task_dataset(c, o.dataset);
  const auto groups = c.cfg.interpret.resolved_groups();
  const ImportanceTable t = mda(ds, model_config(c), groups, c.cfg.cv, c.cfg.interpret.reps, c.cfg.stage_seed("mda"),
                                c.jobs, c.cfg.folds);
  const std::string name = "importance_" + stem(c) + "_" + std::string(to_string(c.cfg.cv));
  write(c.out / "reports" / (name + ".json"), t.to_json(c.hash));
  write(c.out / "reports" / (name + ".csv"), csv_preamble(c) + t.to_csv());

  if (c.cfg.interpret.dependence.empty() && c.cfg.interpret.surfaces.empty()) return;
  const fs::path mp = model_path(c);
  const TrainedModel model = fs::exists(mp) ? TrainedModel::from_json(read_text_file(mp)) : train_full(c, ds);
  for (const auto& f : c.cfg.interpret.dependence) {
    const DependenceCurve curve = partial_dependence(model, ds, f, c.cfg.interpret.grid_size, c.jobs);
    write(c.out / "reports" / ("pd_" + stem(c) + "_" + file_safe(f) + ".csv"), csv_preamble(c) + curve.to_csv());
  }
  for (const auto& s : c.cfg.interpret.surfaces) {
    const DependenceSurface surf = partial_dependence_2d(model, ds, s.feature_a, s.feature_b,
                                                         c.cfg.interpret.grid_size, s.negate_a, s.negate_b, c.jobs);
    write(c.out / "reports" / ("pd2d_" + stem(c) + "_" + file_safe(s.feature_a) + "__" + file_safe(s.feature_b) + ".csv"),
          csv_preamble(c) + surf.to_csv());
  }
}

void run_pipeline(const Context& c, const Options& o) {
  if (!o.skip_synth) run_synth(c);
  write_config(c, c.out);
  run_validate(c);
  run_label(c);
  run_build_dataset(c);
  run_train(c, o);
  run_evaluate(c, o);
  run_interpret(c, o);
}

int exit_code_for(const Error& e) { return is_input_error(e.code()) ? 2 : 3; }

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Turn-taking analytics for multi-user VR session recordings.", "vrturn"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* s) {
    s->add_option("--config", o.config, "Pipeline config (JSON)")->check(CLI::ExistingFile);
    s->add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& v) { o.seed = v, o.seed_set = true; }, "Master seed");
    s->add_option("--jobs", o.jobs, "Worker threads (default: all cores)")->check(CLI::PositiveNumber);
    s->add_option("--data", o.data, "Recordings directory (env VRTURN_DATA_DIR)");
  };
  auto out_opt = [&](CLI::App* s) { s->add_option("--out", o.out, "Output directory (env VRTURN_OUT_DIR)"); };
  auto task_opt = [&](CLI::App* s) {
    s->add_option("--task", o.task, "turn | next | timing")->check(CLI::IsMember({"turn", "next", "timing"}));
  };
  auto model_opt = [&](CLI::App* s) {
    s->add_option("--model", o.model, "logistic | mlp | rf | gbm")
        ->check(CLI::IsMember({"logistic", "mlp", "rf", "gbm"}));
  };
  auto cv_opt = [&](CLI::App* s) {
    s->add_option("--cv", o.cv, "session | group | week | week4")
        ->check(CLI::IsMember({"session", "group", "week", "week4"}));
  };
  auto dataset_opt = [&](CLI::App* s) { s->add_option("--dataset", o.dataset, "Dataset CSV (default: <out>/datasets/<task>.csv)"); };

  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with ground truth");
  common(synth);
  // for synth, --out is the recordings directory
  synth->add_option("--out", o.data, "Recordings directory (env VRTURN_DATA_DIR)");

  auto* validate = app.add_subcommand("validate", "Validate recordings and report gaps and speech fractions");
  common(validate);
  out_opt(validate);

  auto* label = app.add_subcommand("label", "Label transitions in every recording");
  common(label);
  out_opt(label);

  auto* features = app.add_subcommand("features", "Extract features at every turn-taking onset");
  common(features);
  out_opt(features);

  auto* build = app.add_subcommand("build-dataset", "Build a balanced dataset for one task");
  common(build);
  out_opt(build);
  task_opt(build);

  auto* train = app.add_subcommand("train", "Train a model on a dataset");
  common(train);
  out_opt(train);
  task_opt(train);
  model_opt(train);
  dataset_opt(train);

  auto* evaluate = app.add_subcommand("evaluate", "Cross-validated AUC");
  common(evaluate);
  out_opt(evaluate);
  task_opt(evaluate);
  model_opt(evaluate);
  cv_opt(evaluate);
  dataset_opt(evaluate);

  auto* interpret = app.add_subcommand("interpret", "Permutation importance and partial dependence");
  common(interpret);
  out_opt(interpret);
  task_opt(interpret);
  model_opt(interpret);
  cv_opt(interpret);
  dataset_opt(interpret);

  auto* pipeline = app.add_subcommand("pipeline", "Run every stage from synth to interpret");
  common(pipeline);
  out_opt(pipeline);
  task_opt(pipeline);
  model_opt(pipeline);
  cv_opt(pipeline);
  pipeline->add_flag("--skip-synth", o.skip_synth, "Use the recordings already in the data directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "vrturn: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    std::cerr << (subs.empty() ? app.help() : subs.front()->help());
    return 1;
  }

  try {
    const Context c = make_context(o);
    CLI::App* sub = app.get_subcommands().front();
    if (sub == synth) run_synth(c);
    else if (sub == validate) run_validate(c);
    else if (sub == label) run_label(c);
    else if (sub == features) run_features(c);
    else if (sub == build) run_build_dataset(c);
    else if (sub == train) run_train(c, o);
    else if (sub == evaluate) run_evaluate(c, o);
    else if (sub == interpret) run_interpret(c, o);
    else run_pipeline(c, o);
  } catch (const Error& e) {
    std::cerr << "vrturn: " << to_string(e.code()) << ": " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "vrturn: internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace vrturn::cli
