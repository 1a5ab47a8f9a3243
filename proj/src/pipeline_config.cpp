#include "vrturn/pipeline_config.hpp"

#include <cmath>

#include <json.hpp>

#include "vrturn/error.hpp"
#include "vrturn/numeric_format.hpp"
#include "vrturn/rng.hpp"

namespace vrturn {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json body(const PipelineConfig& c) {
  ordered_json j;
  j["schema_version"] = c.schema_version;
  j["seed"] = c.seed;
  j["labeling"] = {{"volume_threshold", c.labels.volume_threshold},
                   {"max_gap", c.labels.max_gap},
                   {"min_event_duration", c.labels.min_event_duration}};
  j["features"] = {{"window", c.features.window},
                   {"vs_l", std::vector<double>(c.features.shared_space_lengths.begin(),
                                                c.features.shared_space_lengths.end())}};
  j["dataset"] = {{"task", std::string(to_string(c.task))}, {"timing_offsets", c.timing_offsets}};
  ordered_json model = ordered_json::parse(model_config_to_json(c.model));
  model.erase("seed");
  j["model"] = model;
  j["evaluation"] = {{"cv", std::string(to_string(c.cv))}, {"folds", c.folds}};
  ordered_json in;
  in["groups"] = c.interpret.group_set;
  if (c.interpret.group_set == "custom") {
    in["custom_groups"] = ordered_json::parse(feature_groups_to_json(c.interpret.groups))["groups"];
  }
  in["reps"] = c.interpret.reps;
  in["grid_size"] = c.interpret.grid_size;
  in["dependence"] = c.interpret.dependence;
  in["surfaces"] = ordered_json::array();
  for (const auto& s : c.interpret.surfaces) {
    in["surfaces"].push_back(
        {{"a", s.feature_a}, {"b", s.feature_b}, {"negate_a", s.negate_a}, {"negate_b", s.negate_b}});
  }
  j["interpret"] = in;
  ordered_json synth = ordered_json::parse(c.synth.to_json());
  synth.erase("seed");
  j["synth"] = synth;
  return j;
}

}  // namespace

std::vector<FeatureGroupDef> InterpretConfig::resolved_groups() const {
  if (group_set == "default") return default_importance_groups();
  if (group_set == "detailed") return detailed_importance_groups();
  if (group_set == "custom") return groups;
  fail(ErrorCode::InvalidConfig, "unknown feature group set '" + group_set + "'");
}

DatasetConfig PipelineConfig::dataset_config(int jobs) const {
  DatasetConfig d;
  d.labels = labels;
  d.features = features;
  d.timing_offsets = timing_offsets;
  d.jobs = jobs;
  return d;
}

std::uint64_t PipelineConfig::stage_seed(std::string_view stage) const {
  if (stage == "dataset") return derive_seed(seed, "dataset:" + std::string(to_string(task)));
  return derive_seed(seed, stage);
}

std::string PipelineConfig::hash() const { return to_hex(fnv1a64(body(*this).dump())); }

std::string PipelineConfig::to_json() const {
  ordered_json j = body(*this);
  j["paths"] = {{"data", paths.data}, {"out", paths.out}};
  return j.dump(2) + "\n";
}

PipelineConfig PipelineConfig::from_json(std::string_view text) {
  PipelineConfig c;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) fail(ErrorCode::InvalidConfig, "pipeline config must be a JSON object");
    c.schema_version = j.value("schema_version", c.schema_version);
    if (c.schema_version != kPipelineSchemaVersion) {
      fail(ErrorCode::InvalidConfig, "unsupported pipeline config schema_version " + std::to_string(c.schema_version));
    }
    c.seed = j.value("seed", c.seed);
    if (j.contains("labeling")) {
      const auto& l = j["labeling"];
      c.labels.volume_threshold = l.value("volume_threshold", c.labels.volume_threshold);
      c.labels.max_gap = l.value("max_gap", c.labels.max_gap);
      c.labels.min_event_duration = l.value("min_event_duration", c.labels.min_event_duration);
    }
    if (j.contains("features")) {
      const auto& f = j["features"];
      c.features.window = f.value("window", c.features.window);
      if (f.contains("vs_l")) {
        const auto v = f["vs_l"].get<std::vector<double>>();
        if (v.size() != 3) fail(ErrorCode::InvalidConfig, "features.vs_l needs exactly three lengths");
        for (std::size_t i = 0; i < 3; ++i) c.features.shared_space_lengths[i] = v[i];
      }
    }
    if (j.contains("dataset")) {
      const auto& d = j["dataset"];
      if (d.contains("task")) c.task = parse_task(d["task"].get<std::string>());
      c.timing_offsets = d.value("timing_offsets", c.timing_offsets);
    }
    if (j.contains("model")) c.model = model_config_from_json(j["model"].dump());
    if (j.contains("evaluation")) {
      const auto& e = j["evaluation"];
      if (e.contains("cv")) c.cv = parse_cv_scheme(e["cv"].get<std::string>());
      c.folds = e.value("folds", c.folds);
    }
    if (j.contains("interpret")) {
      const auto& in = j["interpret"];
      c.interpret.group_set = in.value("groups", c.interpret.group_set);
      if (in.contains("custom_groups")) c.interpret.groups = feature_groups_from_json(in["custom_groups"].dump());
      c.interpret.reps = in.value("reps", c.interpret.reps);
      c.interpret.grid_size = in.value("grid_size", c.interpret.grid_size);
      c.interpret.dependence = in.value("dependence", c.interpret.dependence);
      if (in.contains("surfaces")) {
        c.interpret.surfaces.clear();
        for (const auto& s : in["surfaces"]) {
          c.interpret.surfaces.push_back({s.at("a").get<std::string>(), s.at("b").get<std::string>(),
                                          s.value("negate_a", false), s.value("negate_b", false)});
        }
      }
    }
    if (j.contains("synth")) c.synth = CorpusConfig::from_json(j["synth"].dump());
    if (j.contains("paths")) {
      c.paths.data = j["paths"].value("data", c.paths.data);
      c.paths.out = j["paths"].value("out", c.paths.out);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidConfig, std::string("pipeline config: ") + e.what());
  }
  c.validate();
  return c;
}

void PipelineConfig::validate() const {
  auto check = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorCode::InvalidConfig, "pipeline config: " + what);
  };
  check(labels.volume_threshold >= 0.0 && labels.volume_threshold <= 1.0, "volume_threshold must be in [0, 1]");
  check(labels.max_gap >= 0.0 && std::isfinite(labels.max_gap), "max_gap must be non-negative");
  check(labels.min_event_duration >= 0.0 && std::isfinite(labels.min_event_duration), "min_event_duration");
  check(features.window > 0.0 && std::isfinite(features.window), "window must be positive");
  for (double l : features.shared_space_lengths) check(l > 0.0 && std::isfinite(l), "vs_l must be positive");
  check(!timing_offsets.empty(), "timing_offsets must not be empty");
  for (double o : timing_offsets) check(o > 0.0 && std::isfinite(o), "timing offsets must be positive");
  check(folds >= 2, "folds must be at least 2");
  check(interpret.reps >= 1, "interpret.reps must be at least 1");
  check(interpret.grid_size >= 1, "interpret.grid_size must be at least 1");
  check(interpret.group_set == "default" || interpret.group_set == "detailed" ||
            (interpret.group_set == "custom" && !interpret.groups.empty()),
        "interpret.groups must be default, detailed or custom with custom_groups");
}

}  // namespace vrturn
