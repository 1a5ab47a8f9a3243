#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "vrturn/dataset.hpp"
#include "vrturn/evaluation.hpp"
#include "vrturn/models.hpp"
#include "vrturn/synth.hpp"

namespace vrturn {

inline constexpr int kPipelineSchemaVersion = 1;

struct SurfaceSpec {
  std::string feature_a;
  std::string feature_b;
  bool negate_a = false;
  bool negate_b = false;
};

struct InterpretConfig {
  std::string group_set = "default";  // "default", "detailed" or "custom"
  std::vector<FeatureGroupDef> groups;  // used when group_set == "custom"
  std::size_t reps = kDefaultImportanceReps;
  std::size_t grid_size = kDefaultGridSize;
  std::vector<std::string> dependence = {"ego.main.head.y.vel.mean", "ego.main.lh.y.vel.mean",
                                         "ego.main.head.pitch.vel.max", "speech.main.time_since_last",
                                         "traits.main.extraversion"};
  // upward speed (negated minimum pitch velocity) against downward speed
  std::vector<SurfaceSpec> surfaces = {{"ego.main.head.pitch.vel.min", "ego.main.head.pitch.vel.max", true, false}};

  std::vector<FeatureGroupDef> resolved_groups() const;
};

struct PipelinePaths {
  std::string data = "data";  // recordings + ground truth
  std::string out = "out";    // labels, datasets, models, reports
};

struct PipelineConfig {
  int schema_version = kPipelineSchemaVersion;
  std::uint64_t seed = 1;
  LabelConfig labels;
  FeatureConfig features;
  std::vector<double> timing_offsets = {2, 4, 6, 8, 10, 12};
  Task task = Task::NextSpeaker;
  ModelConfig model;
  CvScheme cv = CvScheme::SessionCV;
  std::size_t folds = kDefaultFolds;
  InterpretConfig interpret;
  CorpusConfig synth;
  PipelinePaths paths;

  DatasetConfig dataset_config(int jobs) const;

  /// Seeds for each stage, all derived from `seed`:
  ///   synth    derive_seed(seed, "synth")
  ///   dataset  derive_seed(seed, "dataset:<task>")
  ///   model    derive_seed(seed, "model")
  ///   cv       derive_seed(seed, "cv")
  ///   mda      derive_seed(seed, "mda")
  std::uint64_t stage_seed(std::string_view stage) const;

  /// Everything except paths, hashed; paths never change results.
  std::string hash() const;
  std::string to_json() const;
  /// Missing keys keep their defaults. Throws InvalidConfig.
  static PipelineConfig from_json(std::string_view text);
  void validate() const;
};

}  // namespace vrturn
