#include "vrturn/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include <json.hpp>

#include "vrturn/error.hpp"
#include "vrturn/numeric_format.hpp"
#include "vrturn/parallel.hpp"
#include "vrturn/rng.hpp"

namespace vrturn {

namespace {

using nlohmann::ordered_json;

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double population_sd(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& X, const std::vector<std::size_t>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), X.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

Eigen::VectorXd entries_of(const Eigen::VectorXd& y, const std::vector<std::size_t>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = y(static_cast<Eigen::Index>(idx[i]));
  return out;
}

std::vector<int> int_labels(const Eigen::VectorXd& y) {
  std::vector<int> out(static_cast<std::size_t>(y.size()));
  for (Eigen::Index i = 0; i < y.size(); ++i) out[static_cast<std::size_t>(i)] = static_cast<int>(y(i));
  return out;
}

double auc_of(const Eigen::VectorXd& scores, const std::vector<int>& labels) {
  return auc_roc(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())), labels);
}

std::uint64_t fold_model_seed(std::uint64_t seed, std::size_t fold) { return derive_seed(seed, "fold-model", fold); }

// Trained model plus its standardized test block.
struct FoldFit {
  TrainedModel model;
  Eigen::MatrixXd Z_test;
  std::vector<int> y_test;
  double auc = 0.0;
};

FoldFit fit_fold(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const FeatureSchema& schema,
                 const ModelConfig& model, const Fold& fold, std::uint64_t seed, std::size_t index) {
  ModelConfig cfg = model;
  cfg.seed = fold_model_seed(seed, index);
  FoldFit f;
  f.model = train_model(rows_of(X, fold.train), entries_of(y, fold.train), schema, cfg);
  f.Z_test = f.model.standardizer.apply(rows_of(X, fold.test));
  f.y_test = int_labels(entries_of(y, fold.test));
  f.auc = auc_of(f.model.predict_standardized(f.Z_test), f.y_test);
  return f;
}

void add_position_rotation(std::vector<FeatureGroupDef>& out, const std::string& user, const std::string& device,
                           const std::string& label) {
  const std::string base = "ego." + user + "." + device + ".";
  out.push_back({"ego." + user + "." + label + ".position", {base + "x.*", base + "y.*", base + "z.*"}});
  out.push_back({"ego." + user + "." + label + ".rotation", {base + "roll.*", base + "pitch.*", base + "yaw.*"}});
}

}  // namespace

double auc_roc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) fail(ErrorCode::Internal, "auc_roc: size mismatch");
  const std::size_t n = scores.size();
  std::size_t n_pos = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) fail(ErrorCode::MalformedInput, "auc_roc: labels must be 0 or 1");
    n_pos += static_cast<std::size_t>(l);
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) fail(ErrorCode::SingleClassInput, "AUC needs both classes");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum of positive ranks, with tied blocks sharing their mean rank. Ranks
  // are doubled so every value stays an integer.
  std::uint64_t twice_rank_sum = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const std::uint64_t twice_avg = (i + 1) + (j + 1);
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] == 1) twice_rank_sum += twice_avg;
    }
    i = j + 1;
  }
  const double u = static_cast<double>(twice_rank_sum) / 2.0 - static_cast<double>(n_pos) * (n_pos + 1) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

std::string_view to_string(CvScheme s) {
  switch (s) {
    case CvScheme::SessionCV: return "session";
    case CvScheme::GroupCV: return "group";
    case CvScheme::WeekCV: return "week";
    case CvScheme::Week4Holdout: return "week4";
  }
  return "?";
}

CvScheme parse_cv_scheme(std::string_view name) {
  for (auto s : {CvScheme::SessionCV, CvScheme::GroupCV, CvScheme::WeekCV, CvScheme::Week4Holdout}) {
    if (to_string(s) == name) return s;
  }
  fail(ErrorCode::InvalidConfig, "unknown CV scheme '" + std::string(name) + "' (expected session, group, week or week4)");
}

FoldPlan make_folds(const LabeledDataset& ds, CvScheme scheme, std::uint64_t seed, std::size_t k) {
  FoldPlan plan;
  plan.scheme = scheme;
  const std::size_t n = ds.size();
  auto entity = [&](std::size_t i) -> std::string {
    const auto& p = ds.rows[i].provenance;
    switch (scheme) {
      case CvScheme::SessionCV: return p.session_id;
      case CvScheme::GroupCV: return p.group_id;
      default: return std::to_string(p.week);
    }
  };
  std::set<std::string> unique;
  for (std::size_t i = 0; i < n; ++i) unique.insert(entity(i));
  std::vector<std::string> entities(unique.begin(), unique.end());

  std::map<std::string, std::size_t> fold_of;
  std::size_t n_folds = 0;
  if (scheme == CvScheme::SessionCV || scheme == CvScheme::GroupCV) {
    if (k < 2) fail(ErrorCode::InvalidConfig, "need at least 2 folds");
    if (entities.size() < k)
      fail(ErrorCode::TooFewEntities, std::to_string(entities.size()) + " " + std::string(to_string(scheme)) +
                                          " entities for " + std::to_string(k) + " folds");
    Rng rng(derive_seed(seed, "folds:" + std::string(to_string(scheme))));
    rng.shuffle(entities);
    for (std::size_t j = 0; j < entities.size(); ++j) fold_of[entities[j]] = j % k;
    n_folds = k;
  } else if (scheme == CvScheme::WeekCV) {
    if (entities.size() < 2) fail(ErrorCode::TooFewEntities, "week CV needs at least two weeks");
    for (std::size_t j = 0; j < entities.size(); ++j) fold_of[entities[j]] = j;
    n_folds = entities.size();
  } else {
    if (!unique.count("4") || unique.size() < 2)
      fail(ErrorCode::TooFewEntities, "week-4 holdout needs week 4 and at least one earlier week");
    for (const auto& e : entities) fold_of[e] = e == "4" ? 0 : 1;
    n_folds = 1;
  }

  plan.folds.resize(n_folds);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t f = fold_of.at(entity(i));
    for (std::size_t j = 0; j < n_folds; ++j) (j == f ? plan.folds[j].test : plan.folds[j].train).push_back(i);
  }
  for (const auto& [e, f] : fold_of) {
    if (f < n_folds) plan.folds[f].held_out.push_back(e);
  }
  return plan;
}

EvalReport run_cv(const LabeledDataset& ds, const ModelConfig& model, CvScheme scheme, std::uint64_t seed, int jobs,
                  std::size_t k) {
  const FoldPlan plan = make_folds(ds, scheme, seed, k);
  const Eigen::MatrixXd X = ds.matrix();
  const Eigen::VectorXd y = ds.label_vector();
  EvalReport r;
  r.task = ds.task;
  r.family = model.family;
  r.scheme = scheme;
  r.seed = seed;
  r.folds.resize(plan.folds.size());
  parallel_for(plan.folds.size(), jobs, [&](std::size_t i) {
    const Fold& fold = plan.folds[i];
    const FoldFit fit = fit_fold(X, y, ds.schema, model, fold, seed, i);
    r.folds[i] = FoldResult{i, fold.held_out, fold.train.size(), fold.test.size(), fit.auc};
  });
  std::vector<double> aucs;
  for (const auto& f : r.folds) aucs.push_back(f.auc);
  r.mean_auc = mean_of(aucs);
  r.sd_auc = population_sd(aucs);
  return r;
}

std::string EvalReport::to_json(const std::string& config_hash) const {
  ordered_json j;
  j["report"] = "cross_validation";
  j["task"] = std::string(vrturn::to_string(task));
  j["model"] = std::string(vrturn::to_string(family));
  j["scheme"] = std::string(vrturn::to_string(scheme));
  j["seed"] = seed;
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  j["mean_auc"] = mean_auc;
  j["sd_auc"] = sd_auc;
  j["folds"] = ordered_json::array();
  for (const auto& f : folds) {
    j["folds"].push_back(ordered_json{{"fold", f.index},
                                      {"held_out", f.held_out},
                                      {"n_train", f.n_train},
                                      {"n_test", f.n_test},
                                      {"auc", f.auc}});
  }
  return j.dump(2) + "\n";
}

std::string EvalReport::to_csv() const {
  std::string out = "fold,held_out,n_train,n_test,auc\n";
  for (const auto& f : folds) {
    std::string held;
    for (std::size_t i = 0; i < f.held_out.size(); ++i) held += (i ? ";" : "") + f.held_out[i];
    out += std::to_string(f.index) + "," + held + "," + std::to_string(f.n_train) + "," + std::to_string(f.n_test) +
           "," + format_double(f.auc) + "\n";
  }
  return out;
}

std::vector<std::vector<std::size_t>> resolve_groups(const FeatureSchema& schema,
                                                     std::span<const FeatureGroupDef> groups) {
  std::vector<std::vector<std::size_t>> out;
  for (const auto& g : groups) {
    std::set<std::size_t> cols;
    for (const auto& pat : g.patterns) {
      for (std::size_t c : schema.match(pat)) cols.insert(c);
    }
    if (cols.empty()) fail(ErrorCode::UnknownFeatureGroup, "feature group '" + g.name + "' matches no feature");
    out.emplace_back(cols.begin(), cols.end());
  }
  return out;
}

std::vector<FeatureGroupDef> default_importance_groups() {
  std::vector<FeatureGroupDef> g;
  g.push_back({"speech.sequence", {"speech.seq.*"}});
  g.push_back({"speech.recency", {"speech.main.*"}});
  g.push_back({"traits.main", {"traits.main.*"}});
  g.push_back({"traits.ref", {"traits.ref.*"}});
  g.push_back({"traits.group", {"traits.group_mean.*", "traits.group_size"}});
  for (const char* user : {"main", "ref"}) {
    add_position_rotation(g, user, "head", "head");
    add_position_rotation(g, user, "lh", "left_hand");
    add_position_rotation(g, user, "rh", "right_hand");
  }
  g.push_back({"dyad.gaze", {"dyad.gaze_*"}});
  g.push_back({"dyad.distance", {"dyad.ipd.*"}});
  g.push_back({"dyad.shared_space", {"dyad.vss*"}});
  for (const char* user : {"main", "ref"}) {
    const std::string u = user;
    g.push_back({"group." + u + ".gaze", {"group." + u + ".gaze_*"}});
    g.push_back({"group." + u + ".proximity", {"group." + u + ".ipd.*", "group." + u + ".vss*"}});
  }
  return g;
}

std::vector<FeatureGroupDef> detailed_importance_groups() {
  std::vector<FeatureGroupDef> g;
  g.push_back({"speech.sequence", {"speech.seq.*"}});
  g.push_back({"speech.recency", {"speech.main.*"}});
  g.push_back({"traits.main", {"traits.main.*"}});
  g.push_back({"traits.ref", {"traits.ref.*"}});
  g.push_back({"traits.group", {"traits.group_mean.*", "traits.group_size"}});
  for (const char* user : {"main", "ref"})
    for (const char* dev : {"head", "lh", "rh"})
      for (const char* dof : {"x", "y", "z", "roll", "pitch", "yaw"}) {
        const std::string name = std::string("ego.") + user + "." + dev + "." + dof;
        g.push_back({name, {name + ".*"}});
      }
  g.push_back({"dyad.gaze_main_to_ref", {"dyad.gaze_main_to_ref.*"}});
  g.push_back({"dyad.gaze_ref_to_main", {"dyad.gaze_ref_to_main.*"}});
  g.push_back({"dyad.ipd", {"dyad.ipd.*"}});
  g.push_back({"dyad.vss", {"dyad.vss*"}});
  for (const char* user : {"main", "ref"})
    for (const char* m : {"gaze_to_others", "gaze_from_others", "ipd"}) {
      const std::string name = std::string("group.") + user + "." + m;
      g.push_back({name, {name + ".*"}});
    }
  for (const char* user : {"main", "ref"}) {
    const std::string name = std::string("group.") + user + ".vss";
    g.push_back({name, {name + "*"}});
  }
  return g;
}

std::vector<FeatureGroupDef> feature_groups_from_json(std::string_view text) {
  std::vector<FeatureGroupDef> out;
  try {
    const auto j = nlohmann::json::parse(text);
    const auto& arr = j.is_object() ? j.at("groups") : j;
    for (const auto& g : arr) {
      FeatureGroupDef d;
      d.name = g.at("name").get<std::string>();
      if (g.at("patterns").is_string()) {
        d.patterns.push_back(g["patterns"].get<std::string>());
      } else {
        d.patterns = g["patterns"].get<std::vector<std::string>>();
      }
      out.push_back(std::move(d));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidConfig, std::string("feature groups: ") + e.what());
  }
  if (out.empty()) fail(ErrorCode::InvalidConfig, "feature groups: empty list");
  return out;
}

std::string feature_groups_to_json(std::span<const FeatureGroupDef> groups) {
  ordered_json j;
  j["groups"] = ordered_json::array();
  for (const auto& g : groups) j["groups"].push_back(ordered_json{{"name", g.name}, {"patterns", g.patterns}});
  return j.dump(2) + "\n";
}

const ImportanceRow& ImportanceTable::row(std::string_view group) const {
  for (const auto& r : rows) {
    if (r.group == group) return r;
  }
  fail(ErrorCode::UnknownFeatureGroup, "no importance row for '" + std::string(group) + "'");
}

ImportanceTable mda(const LabeledDataset& ds, const ModelConfig& model, std::span<const FeatureGroupDef> groups,
                    CvScheme scheme, std::size_t reps, std::uint64_t seed, int jobs, std::size_t k) {
  if (reps == 0) fail(ErrorCode::InvalidConfig, "importance needs at least one repetition");
  const auto columns = resolve_groups(ds.schema, groups);
  const FoldPlan plan = make_folds(ds, scheme, seed, k);
  const Eigen::MatrixXd X = ds.matrix();
  const Eigen::VectorXd y = ds.label_vector();

  // deltas[fold][group][rep]
  std::vector<std::vector<std::vector<double>>> deltas(plan.folds.size());
  std::vector<double> base(plan.folds.size());
  parallel_for(plan.folds.size(), jobs, [&](std::size_t fi) {
    const FoldFit fit = fit_fold(X, y, ds.schema, model, plan.folds[fi], seed, fi);
    base[fi] = fit.auc;
    deltas[fi].assign(groups.size(), {});
    Eigen::MatrixXd Z = fit.Z_test;
    const std::size_t m = static_cast<std::size_t>(Z.rows());
    for (std::size_t g = 0; g < groups.size(); ++g) {
      for (std::size_t r = 0; r < reps; ++r) {
        Rng rng(derive_seed(seed, "mda:" + groups[g].name, fi * 1000003ULL + r));
        std::vector<std::size_t> perm(m);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        rng.shuffle(perm);
        for (std::size_t c : columns[g]) {
          const auto col = static_cast<Eigen::Index>(c);
          for (std::size_t i = 0; i < m; ++i) Z(static_cast<Eigen::Index>(i), col) = fit.Z_test(static_cast<Eigen::Index>(perm[i]), col);
        }
        deltas[fi][g].push_back(auc_of(fit.model.predict_standardized(Z), fit.y_test) - fit.auc);
        for (std::size_t c : columns[g]) Z.col(static_cast<Eigen::Index>(c)) = fit.Z_test.col(static_cast<Eigen::Index>(c));
      }
    }
  });

  ImportanceTable t;
  t.task = ds.task;
  t.family = model.family;
  t.scheme = scheme;
  t.reps = reps;
  t.base_auc = mean_of(base);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::vector<double> all;
    for (const auto& fold : deltas) all.insert(all.end(), fold[g].begin(), fold[g].end());
    t.rows.push_back(ImportanceRow{groups[g].name, columns[g].size(), mean_of(all), population_sd(all), 0});
  }
  std::vector<std::size_t> order(t.rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return t.rows[a].mean_delta < t.rows[b].mean_delta; });
  for (std::size_t i = 0; i < order.size(); ++i) t.rows[order[i]].rank = static_cast<int>(i + 1);
  return t;
}

std::string ImportanceTable::to_json(const std::string& config_hash) const {
  ordered_json j;
  j["report"] = "importance";
  j["task"] = std::string(vrturn::to_string(task));
  j["model"] = std::string(vrturn::to_string(family));
  j["scheme"] = std::string(vrturn::to_string(scheme));
  j["reps"] = reps;
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  j["base_auc"] = base_auc;
  j["groups"] = ordered_json::array();
  for (const auto& r : rows) {
    j["groups"].push_back(ordered_json{{"group", r.group},
                                       {"n_features", r.n_features},
                                       {"mean_delta_auc", r.mean_delta},
                                       {"sd_delta_auc", r.sd_delta},
                                       {"rank", r.rank}});
  }
  return j.dump(2) + "\n";
}

std::string ImportanceTable::to_csv() const {
  std::string out = "group,n_features,mean_delta_auc,sd_delta_auc,rank\n";
  for (const auto& r : rows) {
    out += r.group + "," + std::to_string(r.n_features) + "," + format_double(r.mean_delta) + "," +
           format_double(r.sd_delta) + "," + std::to_string(r.rank) + "\n";
  }
  return out;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) fail(ErrorCode::InvalidConfig, "percentile of an empty column");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<double> percentile_grid(std::span<const double> values, std::size_t grid_size) {
  if (grid_size == 0) fail(ErrorCode::InvalidConfig, "grid size must be positive");
  std::vector<double> v(values.begin(), values.end());
  if (grid_size == 1) return {percentile(v, 0.5)};
  const double lo = percentile(v, 0.05);
  const double hi = percentile(v, 0.95);
  std::vector<double> grid(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) {
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid_size - 1);
  }
  grid.back() = hi;
  return grid;
}

namespace {

std::size_t continuous_column(const TrainedModel& model, const LabeledDataset& ds, std::string_view feature) {
  if (model.schema_hash != ds.schema.hash()) fail(ErrorCode::SchemaMismatch, "model and dataset schemas differ");
  const std::size_t c = ds.schema.index_of(feature);
  if (ds.schema[c].kind != FeatureKind::Continuous)
    fail(ErrorCode::NonContinuousFeature, "feature '" + std::string(feature) + "' is not continuous");
  return c;
}

std::vector<double> column_values(const Eigen::MatrixXd& X, std::size_t c) {
  const auto col = X.col(static_cast<Eigen::Index>(c));
  return std::vector<double>(col.data(), col.data() + col.size());
}

}  // namespace

DependenceCurve partial_dependence(const TrainedModel& model, const LabeledDataset& ds, std::string_view feature,
                                   std::size_t grid_size, int jobs) {
  const std::size_t c = continuous_column(model, ds, feature);
  const Eigen::MatrixXd X = ds.matrix();
  DependenceCurve curve;
  curve.feature = std::string(feature);
  curve.grid = percentile_grid(column_values(X, c), grid_size);
  curve.mean_proba.resize(curve.grid.size());
  parallel_for(curve.grid.size(), jobs, [&](std::size_t i) {
    Eigen::MatrixXd Xg = X;
    Xg.col(static_cast<Eigen::Index>(c)).setConstant(curve.grid[i]);
    curve.mean_proba[i] = model.predict_proba(Xg, ds.schema.hash()).mean();
  });
  return curve;
}

DependenceSurface partial_dependence_2d(const TrainedModel& model, const LabeledDataset& ds,
                                        std::string_view feature_a, std::string_view feature_b,
                                        std::size_t grid_size, bool negate_a, bool negate_b, int jobs) {
  const std::size_t ca = continuous_column(model, ds, feature_a);
  const std::size_t cb = continuous_column(model, ds, feature_b);
  if (ca == cb) fail(ErrorCode::InvalidConfig, "two-variable dependence needs two different features");
  const Eigen::MatrixXd X = ds.matrix();
  const auto ga = percentile_grid(column_values(X, ca), grid_size);
  const auto gb = percentile_grid(column_values(X, cb), grid_size);
  std::vector<std::vector<double>> raw(ga.size(), std::vector<double>(gb.size()));
  parallel_for(ga.size() * gb.size(), jobs, [&](std::size_t k) {
    const std::size_t i = k / gb.size(), j = k % gb.size();
    Eigen::MatrixXd Xg = X;
    Xg.col(static_cast<Eigen::Index>(ca)).setConstant(ga[i]);
    Xg.col(static_cast<Eigen::Index>(cb)).setConstant(gb[j]);
    raw[i][j] = model.predict_proba(Xg, ds.schema.hash()).mean();
  });

  DependenceSurface s;
  s.feature_a = std::string(feature_a);
  s.feature_b = std::string(feature_b);
  s.negate_a = negate_a;
  s.negate_b = negate_b;
  auto present = [](const std::vector<double>& g, bool negate) {
    std::vector<std::size_t> idx(g.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (negate) std::reverse(idx.begin(), idx.end());
    return idx;
  };
  const auto ia = present(ga, negate_a);
  const auto ib = present(gb, negate_b);
  for (std::size_t i : ia) s.grid_a.push_back(negate_a ? -ga[i] : ga[i]);
  for (std::size_t j : ib) s.grid_b.push_back(negate_b ? -gb[j] : gb[j]);
  s.mean_proba.assign(ia.size(), std::vector<double>(ib.size()));
  for (std::size_t i = 0; i < ia.size(); ++i)
    for (std::size_t j = 0; j < ib.size(); ++j) s.mean_proba[i][j] = raw[ia[i]][ib[j]];
  return s;
}

std::string DependenceCurve::to_csv() const {
  std::string out = feature + ",mean_proba\n";
  for (std::size_t i = 0; i < grid.size(); ++i) out += format_double(grid[i]) + "," + format_double(mean_proba[i]) + "\n";
  return out;
}

std::string DependenceSurface::to_csv() const {
  std::string out = std::string(negate_a ? "-" : "") + feature_a + "," + (negate_b ? "-" : "") + feature_b +
                    ",mean_proba\n";
  for (std::size_t i = 0; i < grid_a.size(); ++i)
    for (std::size_t j = 0; j < grid_b.size(); ++j)
      out += format_double(grid_a[i]) + "," + format_double(grid_b[j]) + "," + format_double(mean_proba[i][j]) + "\n";
  return out;
}

}  // namespace vrturn
