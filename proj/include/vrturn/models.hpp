#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "vrturn/features.hpp"
#include "vrturn/standardizer.hpp"
#include "vrturn/tree.hpp"

namespace vrturn {

enum class ModelFamily { Logistic, MLP, RandomForest, GradientBoosting };

/// "logistic", "mlp", "rf", "gbm"
std::string_view to_string(ModelFamily f);
ModelFamily parse_model_family(std::string_view name);

struct LogisticConfig {
  double l2 = 1.0;  // penalty 0.5 * l2 * |w|^2 on the summed log-loss; intercept unpenalized
  int max_iter = 100;
  double tol = 1e-6;  // gradient norm
};

struct MlpConfig {
  int hidden = 100;
  double learning_rate = 1e-3;
  double alpha = 1e-4;
  int batch_size = 200;
  int max_epochs = 200;
  double tol = 1e-4;
  int n_iter_no_change = 10;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct ForestConfig {
  int n_trees = 100;
  bool bootstrap = true;
  std::size_t max_features = 0;  // 0 = floor(sqrt(d))
  int max_depth = 0;
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
};

struct GbmConfig {
  int n_trees = 100;
  int max_depth = 3;
  double learning_rate = 0.1;
  double subsample = 1.0;
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
};

struct ModelConfig {
  ModelFamily family = ModelFamily::GradientBoosting;
  std::uint64_t seed = 0;
  LogisticConfig logistic;
  MlpConfig mlp;
  ForestConfig forest;
  GbmConfig gbm;

  static ModelConfig defaults(ModelFamily family);
};

std::string model_config_to_json(const ModelConfig& cfg);
/// Missing keys keep their defaults.
ModelConfig model_config_from_json(std::string_view text);

struct LogisticParams {
  Eigen::VectorXd w;
  double b = 0.0;
};

struct MlpParams {
  Eigen::MatrixXd W1;  // d x h
  Eigen::VectorXd b1;  // h
  Eigen::VectorXd w2;  // h
  double b2 = 0.0;
  int epochs = 0;
};

struct ForestParams {
  std::vector<RegressionTree> trees;
};

struct GbmParams {
  double init = 0.0;  // log-odds of the training prior
  double learning_rate = 0.1;
  std::vector<RegressionTree> trees;
};

using ModelParams = std::variant<LogisticParams, MlpParams, ForestParams, GbmParams>;

struct TrainedModel {
  ModelConfig config;
  Standardizer standardizer;
  std::string schema_hash;
  std::vector<std::string> feature_names;
  ModelParams params;

  /// Throws SchemaMismatch unless schema_hash matches.
  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& X, std::string_view schema_hash) const;
  /// For callers that already standardized X.
  Eigen::VectorXd predict_standardized(const Eigen::MatrixXd& Z) const;

  std::string to_json() const;
  static TrainedModel from_json(std::string_view text);
};

/// Standardizes with train statistics, then fits the configured family.
TrainedModel train_model(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const FeatureSchema& schema,
                         const ModelConfig& cfg);

LogisticParams train_logistic(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, const LogisticConfig& cfg);
MlpParams train_mlp(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, const MlpConfig& cfg, std::uint64_t seed);
ForestParams train_random_forest(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, const FeatureSchema& schema,
                                 const ForestConfig& cfg, std::uint64_t seed);
GbmParams train_gbm(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, const FeatureSchema& schema,
                    const GbmConfig& cfg, std::uint64_t seed);

/// Objective minimized by train_logistic and its gradient (w first, then b).
double logistic_objective(const Eigen::VectorXd& w, double b, const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                          double l2, Eigen::VectorXd* grad = nullptr);

/// Mean log-loss plus 0.5 * alpha * |W|^2 / n, and its gradient in the
/// layout of mlp_pack.
double mlp_objective(const MlpParams& p, const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, double alpha,
                     Eigen::VectorXd* grad = nullptr);
Eigen::VectorXd mlp_pack(const MlpParams& p);
MlpParams mlp_unpack(const Eigen::VectorXd& theta, Eigen::Index d, Eigen::Index h);

Eigen::VectorXd predict_logistic(const LogisticParams& p, const Eigen::MatrixXd& Z);
Eigen::VectorXd predict_mlp(const MlpParams& p, const Eigen::MatrixXd& Z);
Eigen::VectorXd predict_forest(const ForestParams& p, const Eigen::MatrixXd& Z);
/// Log-odds after the first `stages` trees (all when negative).
Eigen::VectorXd gbm_decision(const GbmParams& p, const Eigen::MatrixXd& Z, int stages = -1);
Eigen::VectorXd predict_gbm(const GbmParams& p, const Eigen::MatrixXd& Z);

double log_loss(const Eigen::VectorXd& proba, const Eigen::VectorXd& y);
/// Training log-loss after 0, 1, ..., n_trees stages.
std::vector<double> gbm_staged_log_loss(const GbmParams& p, const Eigen::MatrixXd& Z, const Eigen::VectorXd& y);

double sigmoid(double z);

}  // namespace vrturn
