#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vrturn/dataset.hpp"
#include "vrturn/models.hpp"

namespace vrturn {

/// Mann-Whitney statistic with average ranks for ties. Throws
/// SingleClassInput.
double auc_roc(std::span<const double> scores, std::span<const int> labels);

enum class CvScheme { SessionCV, GroupCV, WeekCV, Week4Holdout };

/// "session", "group", "week", "week4"
std::string_view to_string(CvScheme s);
CvScheme parse_cv_scheme(std::string_view name);

inline constexpr std::size_t kDefaultFolds = 10;

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::vector<std::string> held_out;  // sessions, groups or weeks in the test side
};

struct FoldPlan {
  CvScheme scheme = CvScheme::SessionCV;
  std::vector<Fold> folds;
};

/// Session/group folds: entities sorted, shuffled with the seed and dealt
/// round-robin into k folds. Throws TooFewEntities.
FoldPlan make_folds(const LabeledDataset& ds, CvScheme scheme, std::uint64_t seed, std::size_t k = kDefaultFolds);

struct FoldResult {
  std::size_t index = 0;
  std::vector<std::string> held_out;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  double auc = 0.0;
};

struct EvalReport {
  Task task = Task::NextSpeaker;
  ModelFamily family = ModelFamily::GradientBoosting;
  CvScheme scheme = CvScheme::SessionCV;
  std::uint64_t seed = 0;
  std::vector<FoldResult> folds;
  double mean_auc = 0.0;
  double sd_auc = 0.0;  // population sd over folds

  std::string to_json(const std::string& config_hash = {}) const;
  std::string to_csv() const;
};

/// Model seeds per fold are derived from `seed`. Folds run on up to `jobs`
/// threads; results do not depend on `jobs`.
EvalReport run_cv(const LabeledDataset& ds, const ModelConfig& model, CvScheme scheme, std::uint64_t seed,
                  int jobs = 1, std::size_t k = kDefaultFolds);

/// Named set of columns, given as glob patterns over feature names.
struct FeatureGroupDef {
  std::string name;
  std::vector<std::string> patterns;
};

/// Columns of each group; throws UnknownFeatureGroup for a group that
/// matches nothing.
std::vector<std::vector<std::size_t>> resolve_groups(const FeatureSchema& schema,
                                                     std::span<const FeatureGroupDef> groups);

/// Two dozen groups: speech sequence and recency, traits by person, motion by
/// user x device x {position, rotation}, dyadic and group relations.
std::vector<FeatureGroupDef> default_importance_groups();
/// Finer split by user x device x degree of freedom.
std::vector<FeatureGroupDef> detailed_importance_groups();

std::vector<FeatureGroupDef> feature_groups_from_json(std::string_view text);
std::string feature_groups_to_json(std::span<const FeatureGroupDef> groups);

struct ImportanceRow {
  std::string group;
  std::size_t n_features = 0;
  double mean_delta = 0.0;  // shuffled minus intact AUC; negative = accuracy drop
  double sd_delta = 0.0;
  int rank = 0;  // 1 = largest drop
};

struct ImportanceTable {
  Task task = Task::NextSpeaker;
  ModelFamily family = ModelFamily::GradientBoosting;
  CvScheme scheme = CvScheme::SessionCV;
  std::size_t reps = 0;
  double base_auc = 0.0;  // mean intact test AUC over folds
  std::vector<ImportanceRow> rows;  // in group definition order

  const ImportanceRow& row(std::string_view group) const;
  std::string to_json(const std::string& config_hash = {}) const;
  std::string to_csv() const;
};

inline constexpr std::size_t kDefaultImportanceReps = 5;

/// Mean decrease in AUC: within each test fold, the group's columns are
/// permuted jointly (one row permutation for the whole group).
ImportanceTable mda(const LabeledDataset& ds, const ModelConfig& model, std::span<const FeatureGroupDef> groups,
                    CvScheme scheme, std::size_t reps, std::uint64_t seed, int jobs = 1,
                    std::size_t k = kDefaultFolds);

inline constexpr std::size_t kDefaultGridSize = 20;

/// Linear-interpolated percentile (p in [0, 1]).
double percentile(std::vector<double> values, double p);

/// grid_size points evenly spaced from the 5th to the 95th percentile;
/// a single point is the median.
std::vector<double> percentile_grid(std::span<const double> values, std::size_t grid_size);

struct DependenceCurve {
  std::string feature;
  std::vector<double> grid;
  std::vector<double> mean_proba;

  std::string to_csv() const;
};

struct DependenceSurface {
  std::string feature_a;
  std::string feature_b;
  bool negate_a = false;
  bool negate_b = false;
  std::vector<double> grid_a;  // as presented (negated when the flag is set)
  std::vector<double> grid_b;
  std::vector<std::vector<double>> mean_proba;  // [i][j] for grid_a[i], grid_b[j]

  std::string to_csv() const;
};

/// Throws NonContinuousFeature.
DependenceCurve partial_dependence(const TrainedModel& model, const LabeledDataset& ds, std::string_view feature,
                                   std::size_t grid_size = kDefaultGridSize, int jobs = 1);
/// Presentation flags negate an axis's grid values; the sweep itself covers
/// the same percentile range either way, and axis order stays ascending.
DependenceSurface partial_dependence_2d(const TrainedModel& model, const LabeledDataset& ds,
                                        std::string_view feature_a, std::string_view feature_b,
                                        std::size_t grid_size = kDefaultGridSize, bool negate_a = false,
                                        bool negate_b = false, int jobs = 1);

}  // namespace vrturn
