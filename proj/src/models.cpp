#include "vrturn/models.hpp"

#include <cmath>
#include <numeric>

#include <json.hpp>

#include "vrturn/error.hpp"
#include "vrturn/numeric_format.hpp"
#include "vrturn/rng.hpp"

namespace vrturn {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

void check_training_data(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y) {
  if (Z.rows() == 0) fail(ErrorCode::EmptyTrainingSet, "no training rows");
  if (Z.rows() != y.size()) fail(ErrorCode::Internal, "row/label count mismatch");
  if (!Z.allFinite() || !y.allFinite()) fail(ErrorCode::NonFiniteInput, "non-finite training data");
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) != 0.0 && y(i) != 1.0) fail(ErrorCode::MalformedInput, "labels must be 0 or 1");
  }
}

std::vector<std::uint64_t> feature_keys(const FeatureSchema& schema) {
  std::vector<std::uint64_t> keys;
  keys.reserve(schema.size());
  for (const auto& s : schema.specs()) keys.push_back(fnv1a64(s.name));
  return keys;
}

ordered_json vector_json(const Eigen::VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd vector_from(const json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
  return v;
}

ordered_json tree_json(const RegressionTree& t) {
  ordered_json f = ordered_json::array(), th = ordered_json::array(), l = ordered_json::array(),
               r = ordered_json::array(), v = ordered_json::array();
  for (const auto& n : t.nodes) {
    f.push_back(n.feature);
    th.push_back(n.threshold);
    l.push_back(n.left);
    r.push_back(n.right);
    v.push_back(n.value);
  }
  return ordered_json{{"feature", f}, {"threshold", th}, {"left", l}, {"right", r}, {"value", v}};
}

RegressionTree tree_from(const json& j, std::size_t n_features) {
  RegressionTree t;
  const auto& f = j.at("feature");
  t.nodes.resize(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    auto& n = t.nodes[i];
    n.feature = f[i].get<int>();
    n.threshold = j.at("threshold")[i].get<double>();
    n.left = j.at("left")[i].get<int>();
    n.right = j.at("right")[i].get<int>();
    n.value = j.at("value")[i].get<double>();
    const int size = static_cast<int>(f.size());
    if (n.feature >= static_cast<int>(n_features) ||
        (n.feature >= 0 && (n.left <= static_cast<int>(i) || n.right <= static_cast<int>(i) || n.left >= size ||
                            n.right >= size)))
      fail(ErrorCode::MalformedInput, "model: inconsistent tree node " + std::to_string(i));
  }
  if (t.nodes.empty()) fail(ErrorCode::MalformedInput, "model: empty tree");
  return t;
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::string_view to_string(ModelFamily f) {
  switch (f) {
    case ModelFamily::Logistic: return "logistic";
    case ModelFamily::MLP: return "mlp";
    case ModelFamily::RandomForest: return "rf";
    case ModelFamily::GradientBoosting: return "gbm";
  }
  return "?";
}

ModelFamily parse_model_family(std::string_view name) {
  for (auto f : {ModelFamily::Logistic, ModelFamily::MLP, ModelFamily::RandomForest, ModelFamily::GradientBoosting}) {
    if (to_string(f) == name) return f;
  }
  fail(ErrorCode::InvalidConfig, "unknown model '" + std::string(name) + "' (expected logistic, mlp, rf or gbm)");
}

ModelConfig ModelConfig::defaults(ModelFamily family) {
  ModelConfig c;
  c.family = family;
  return c;
}

std::string model_config_to_json(const ModelConfig& c) {
  ordered_json j;
  j["family"] = std::string(to_string(c.family));
  j["seed"] = c.seed;
  j["logistic"] = {{"l2", c.logistic.l2}, {"max_iter", c.logistic.max_iter}, {"tol", c.logistic.tol}};
  j["mlp"] = {{"hidden", c.mlp.hidden},
              {"learning_rate", c.mlp.learning_rate},
              {"alpha", c.mlp.alpha},
              {"batch_size", c.mlp.batch_size},
              {"max_epochs", c.mlp.max_epochs},
              {"tol", c.mlp.tol},
              {"n_iter_no_change", c.mlp.n_iter_no_change},
              {"beta1", c.mlp.beta1},
              {"beta2", c.mlp.beta2},
              {"epsilon", c.mlp.epsilon}};
  j["forest"] = {{"n_trees", c.forest.n_trees},
                 {"bootstrap", c.forest.bootstrap},
                 {"max_features", c.forest.max_features},
                 {"max_depth", c.forest.max_depth},
                 {"min_samples_split", c.forest.min_samples_split},
                 {"min_samples_leaf", c.forest.min_samples_leaf}};
  j["gbm"] = {{"n_trees", c.gbm.n_trees},
              {"max_depth", c.gbm.max_depth},
              {"learning_rate", c.gbm.learning_rate},
              {"subsample", c.gbm.subsample},
              {"min_samples_split", c.gbm.min_samples_split},
              {"min_samples_leaf", c.gbm.min_samples_leaf}};
  return j.dump();
}

ModelConfig model_config_from_json(std::string_view text) {
  ModelConfig c;
  try {
    const json j = json::parse(text);
    if (j.contains("family")) c.family = parse_model_family(j["family"].get<std::string>());
    c.seed = j.value("seed", c.seed);
    if (j.contains("logistic")) {
      const auto& s = j["logistic"];
      c.logistic.l2 = s.value("l2", c.logistic.l2);
      c.logistic.max_iter = s.value("max_iter", c.logistic.max_iter);
      c.logistic.tol = s.value("tol", c.logistic.tol);
    }
    if (j.contains("mlp")) {
      const auto& s = j["mlp"];
      c.mlp.hidden = s.value("hidden", c.mlp.hidden);
      c.mlp.learning_rate = s.value("learning_rate", c.mlp.learning_rate);
      c.mlp.alpha = s.value("alpha", c.mlp.alpha);
      c.mlp.batch_size = s.value("batch_size", c.mlp.batch_size);
      c.mlp.max_epochs = s.value("max_epochs", c.mlp.max_epochs);
      c.mlp.tol = s.value("tol", c.mlp.tol);
      c.mlp.n_iter_no_change = s.value("n_iter_no_change", c.mlp.n_iter_no_change);
      c.mlp.beta1 = s.value("beta1", c.mlp.beta1);
      c.mlp.beta2 = s.value("beta2", c.mlp.beta2);
      c.mlp.epsilon = s.value("epsilon", c.mlp.epsilon);
    }
    if (j.contains("forest")) {
      const auto& s = j["forest"];
      c.forest.n_trees = s.value("n_trees", c.forest.n_trees);
      c.forest.bootstrap = s.value("bootstrap", c.forest.bootstrap);
      c.forest.max_features = s.value("max_features", c.forest.max_features);
      c.forest.max_depth = s.value("max_depth", c.forest.max_depth);
      c.forest.min_samples_split = s.value("min_samples_split", c.forest.min_samples_split);
      c.forest.min_samples_leaf = s.value("min_samples_leaf", c.forest.min_samples_leaf);
    }
    if (j.contains("gbm")) {
      const auto& s = j["gbm"];
      c.gbm.n_trees = s.value("n_trees", c.gbm.n_trees);
      c.gbm.max_depth = s.value("max_depth", c.gbm.max_depth);
      c.gbm.learning_rate = s.value("learning_rate", c.gbm.learning_rate);
      c.gbm.subsample = s.value("subsample", c.gbm.subsample);
      c.gbm.min_samples_split = s.value("min_samples_split", c.gbm.min_samples_split);
      c.gbm.min_samples_leaf = s.value("min_samples_leaf", c.gbm.min_samples_leaf);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidConfig, std::string("model config: ") + e.what());
  }
  if (c.logistic.l2 < 0 || c.mlp.hidden < 1 || c.mlp.batch_size < 1 || c.forest.n_trees < 1 || c.gbm.n_trees < 0 ||
      !(c.gbm.subsample > 0.0 && c.gbm.subsample <= 1.0) || !(c.gbm.learning_rate > 0.0))
    fail(ErrorCode::InvalidConfig, "model config out of range");
  return c;
}

// ---- logistic regression ----

double logistic_objective(const Eigen::VectorXd& w, double b, const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                          double l2, Eigen::VectorXd* grad) {
  const Eigen::VectorXd z = (Z * w).array() + b;
  double f = 0.5 * l2 * w.squaredNorm();
  Eigen::VectorXd r(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    f += softplus(z(i)) - y(i) * z(i);
    r(i) = sigmoid(z(i)) - y(i);
  }
  if (grad) {
    grad->resize(w.size() + 1);
    grad->head(w.size()) = Z.transpose() * r + l2 * w;
    (*grad)(w.size()) = r.sum();
  }
  return f;
}

LogisticParams train_logistic(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, const LogisticConfig& cfg) {
  check_training_data(Z, y);
  const Eigen::Index d = Z.cols();
  const Eigen::Index n = Z.rows();
  LogisticParams p{Eigen::VectorXd::Zero(d), 0.0};
  Eigen::VectorXd g;
  double f = logistic_objective(p.w, p.b, Z, y, cfg.l2, &g);
  for (int it = 0; it < cfg.max_iter && g.norm() >= cfg.tol; ++it) {
    Eigen::MatrixXd A(n, d + 1);
    A.leftCols(d) = Z;
    A.col(d).setOnes();
    const Eigen::VectorXd z = (Z * p.w).array() + p.b;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double q = sigmoid(z(i));
      A.row(i) *= std::sqrt(q * (1.0 - q));
    }
    Eigen::MatrixXd H = A.transpose() * A;
    H.diagonal().head(d).array() += cfg.l2;
    H(d, d) += 1e-12;
    const Eigen::VectorXd step = H.ldlt().solve(g);
    double t = 1.0;
    for (int k = 0; k < 50; ++k) {
      const Eigen::VectorXd w = p.w - t * step.head(d);
      const double b = p.b - t * step(d);
      const double fn = logistic_objective(w, b, Z, y, cfg.l2);
      if (fn <= f - 1e-4 * t * g.dot(step) || k == 49) {
        p.w = w;
        p.b = b;
        break;
      }
      t *= 0.5;
    }
    f = logistic_objective(p.w, p.b, Z, y, cfg.l2, &g);
  }
  return p;
}

Eigen::VectorXd predict_logistic(const LogisticParams& p, const Eigen::MatrixXd& Z) {
  Eigen::VectorXd z = (Z * p.w).array() + p.b;
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = sigmoid(z(i));
  return z;
}

// ---- multilayer perceptron ----

Eigen::VectorXd mlp_pack(const MlpParams& p) {
  const Eigen::Index d = p.W1.rows(), h = p.W1.cols();
  Eigen::VectorXd theta(d * h + 2 * h + 1);
  theta.head(d * h) = Eigen::Map<const Eigen::VectorXd>(p.W1.data(), d * h);
  theta.segment(d * h, h) = p.b1;
  theta.segment(d * h + h, h) = p.w2;
  theta(d * h + 2 * h) = p.b2;
  return theta;
}

MlpParams mlp_unpack(const Eigen::VectorXd& theta, Eigen::Index d, Eigen::Index h) {
  MlpParams p;
  p.W1 = Eigen::Map<const Eigen::MatrixXd>(theta.data(), d, h);
  p.b1 = theta.segment(d * h, h);
  p.w2 = theta.segment(d * h + h, h);
  p.b2 = theta(d * h + 2 * h);
  return p;
}

namespace {

struct MlpGrad {
  Eigen::MatrixXd W1;
  Eigen::VectorXd b1;
  Eigen::VectorXd w2;
  double b2 = 0.0;
};

double mlp_loss_grad(const MlpParams& p, const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, double alpha,
                     MlpGrad* g) {
  const double n = static_cast<double>(Z.rows());
  Eigen::MatrixXd pre = Z * p.W1;
  pre.rowwise() += p.b1.transpose();
  const Eigen::MatrixXd H = pre.cwiseMax(0.0);
  const Eigen::VectorXd z = (H * p.w2).array() + p.b2;
  double loss = 0.0;
  Eigen::VectorXd dz(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    loss += softplus(z(i)) - y(i) * z(i);
    dz(i) = (sigmoid(z(i)) - y(i)) / n;
  }
  loss = loss / n + 0.5 * alpha * (p.W1.squaredNorm() + p.w2.squaredNorm()) / n;
  if (g) {
    g->w2 = H.transpose() * dz + alpha * p.w2 / n;
    g->b2 = dz.sum();
    Eigen::MatrixXd dH = dz * p.w2.transpose();
    dH.array() *= (pre.array() > 0.0).cast<double>();
    g->W1 = Z.transpose() * dH + alpha * p.W1 / n;
    g->b1 = dH.colwise().sum().transpose();
  }
  return loss;
}

}  // namespace

double mlp_objective(const MlpParams& p, const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, double alpha,
                     Eigen::VectorXd* grad) {
  MlpGrad g;
  const double loss = mlp_loss_grad(p, Z, y, alpha, grad ? &g : nullptr);
  if (grad) *grad = mlp_pack(MlpParams{g.W1, g.b1, g.w2, g.b2, 0});
  return loss;
}

MlpParams train_mlp(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, const MlpConfig& cfg, std::uint64_t seed) {
  check_training_data(Z, y);
  const Eigen::Index n = Z.rows(), d = Z.cols(), h = cfg.hidden;
  Rng rng(derive_seed(seed, "mlp"));
  MlpParams p;
  const double bound1 = std::sqrt(6.0 / static_cast<double>(d + h));
  const double bound2 = std::sqrt(6.0 / static_cast<double>(h + 1));
  p.W1.resize(d, h);
  p.b1.resize(h);
  p.w2.resize(h);
  for (Eigen::Index j = 0; j < h; ++j)
    for (Eigen::Index i = 0; i < d; ++i) p.W1(i, j) = rng.uniform(-bound1, bound1);
  for (Eigen::Index j = 0; j < h; ++j) p.b1(j) = rng.uniform(-bound1, bound1);
  for (Eigen::Index j = 0; j < h; ++j) p.w2(j) = rng.uniform(-bound2, bound2);
  p.b2 = rng.uniform(-bound2, bound2);

  Eigen::VectorXd theta = mlp_pack(p);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(theta.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(theta.size());
  const Eigen::Index batch = std::min<Eigen::Index>(cfg.batch_size, n);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  double best_loss = std::numeric_limits<double>::infinity();
  int no_improve = 0;
  long step = 0;
  int epoch = 0;
  Eigen::MatrixXd Zb;
  Eigen::VectorXd yb;
  for (; epoch < cfg.max_epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (Eigen::Index start = 0; start < n; start += batch) {
      const Eigen::Index len = std::min(batch, n - start);
      Zb.resize(len, d);
      yb.resize(len);
      for (Eigen::Index k = 0; k < len; ++k) {
        Zb.row(k) = Z.row(order[static_cast<std::size_t>(start + k)]);
        yb(k) = y(order[static_cast<std::size_t>(start + k)]);
      }
      Eigen::VectorXd g;
      const double loss = mlp_objective(mlp_unpack(theta, d, h), Zb, yb, cfg.alpha, &g);
      epoch_loss += loss * static_cast<double>(len);
      ++step;
      m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
      v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
      const double lr = cfg.learning_rate * std::sqrt(1.0 - std::pow(cfg.beta2, static_cast<double>(step))) /
                        (1.0 - std::pow(cfg.beta1, static_cast<double>(step)));
      theta.array() -= lr * m.array() / (v.array().sqrt() + cfg.epsilon);
    }
    epoch_loss /= static_cast<double>(n);
    if (!std::isfinite(epoch_loss)) fail(ErrorCode::NonFiniteInput, "mlp training diverged");
    if (epoch_loss > best_loss - cfg.tol) {
      ++no_improve;
    } else {
      no_improve = 0;
    }
    best_loss = std::min(best_loss, epoch_loss);
    if (no_improve > cfg.n_iter_no_change) {
      ++epoch;
      break;
    }
  }
  MlpParams out = mlp_unpack(theta, d, h);
  out.epochs = epoch;
  return out;
}

Eigen::VectorXd predict_mlp(const MlpParams& p, const Eigen::MatrixXd& Z) {
  Eigen::MatrixXd pre = Z * p.W1;
  pre.rowwise() += p.b1.transpose();
  Eigen::VectorXd z = (pre.cwiseMax(0.0) * p.w2).array() + p.b2;
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = sigmoid(z(i));
  return z;
}

// ---- random forest ----

ForestParams train_random_forest(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, const FeatureSchema& schema,
                                 const ForestConfig& cfg, std::uint64_t seed) {
  check_training_data(Z, y);
  const auto n = static_cast<std::size_t>(Z.rows());
  const auto d = static_cast<std::size_t>(Z.cols());
  const PresortedColumns sorted(Z);
  const auto keys = feature_keys(schema);
  const std::vector<double> target(y.data(), y.data() + y.size());
  TreeParams tp;
  tp.max_depth = cfg.max_depth;
  tp.min_samples_split = cfg.min_samples_split;
  tp.min_samples_leaf = cfg.min_samples_leaf;
  tp.max_features =
      cfg.max_features > 0 ? cfg.max_features
                           : std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(d))));
  ForestParams out;
  for (int t = 0; t < cfg.n_trees; ++t) {
    const std::uint64_t tree_seed = derive_seed(seed, "forest-tree", static_cast<std::uint64_t>(t));
    std::vector<double> weight(n, cfg.bootstrap ? 0.0 : 1.0);
    if (cfg.bootstrap) {
      Rng rng(tree_seed);
      for (std::size_t k = 0; k < n; ++k) weight[rng.uniform_index(n)] += 1.0;
    }
    tp.seed = tree_seed;
    out.trees.push_back(build_tree(Z, sorted, target, weight, keys, tp));
  }
  return out;
}

Eigen::VectorXd predict_forest(const ForestParams& p, const Eigen::MatrixXd& Z) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(Z.rows());
  for (const auto& t : p.trees)
    for (Eigen::Index i = 0; i < Z.rows(); ++i) out(i) += t.predict(Z, i);
  return out / static_cast<double>(p.trees.size());
}

// ---- gradient boosting ----

GbmParams train_gbm(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, const FeatureSchema& schema,
                    const GbmConfig& cfg, std::uint64_t seed) {
  check_training_data(Z, y);
  const auto n = static_cast<std::size_t>(Z.rows());
  const double prior = y.mean();
  if (prior <= 0.0 || prior >= 1.0) fail(ErrorCode::SingleClassInput, "gbm needs both classes in training data");
  const PresortedColumns sorted(Z);
  const auto keys = feature_keys(schema);
  TreeParams tp;
  tp.max_depth = cfg.max_depth;
  tp.min_samples_split = cfg.min_samples_split;
  tp.min_samples_leaf = cfg.min_samples_leaf;

  GbmParams out;
  out.init = std::log(prior / (1.0 - prior));
  out.learning_rate = cfg.learning_rate;
  std::vector<double> F(n, out.init), residual(n), weight(n, 1.0);
  Rng rng(derive_seed(seed, "gbm-subsample"));
  for (int stage = 0; stage < cfg.n_trees; ++stage) {
    std::vector<double> prob(n);
    for (std::size_t i = 0; i < n; ++i) {
      prob[i] = sigmoid(F[i]);
      residual[i] = y(static_cast<Eigen::Index>(i)) - prob[i];
    }
    if (cfg.subsample < 1.0) {
      std::fill(weight.begin(), weight.end(), 0.0);
      const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(cfg.subsample * static_cast<double>(n)));
      for (std::size_t i : rng.sample_without_replacement(n, k)) weight[i] = 1.0;
    }
    RegressionTree tree = build_tree(Z, sorted, residual, weight, keys, tp);
    std::vector<double> num(tree.nodes.size(), 0.0), den(tree.nodes.size(), 0.0);
    std::vector<int> leaf(n);
    for (std::size_t i = 0; i < n; ++i) {
      leaf[i] = tree.apply(Z, static_cast<Eigen::Index>(i));
      if (weight[i] == 0.0) continue;
      num[leaf[i]] += residual[i];
      den[leaf[i]] += prob[i] * (1.0 - prob[i]);
    }
    for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
      if (tree.nodes[k].feature >= 0) continue;
      tree.nodes[k].value = std::abs(den[k]) < 1e-150 ? 0.0 : num[k] / den[k];
    }
    for (std::size_t i = 0; i < n; ++i) F[i] += cfg.learning_rate * tree.nodes[leaf[i]].value;
    out.trees.push_back(std::move(tree));
  }
  return out;
}

Eigen::VectorXd gbm_decision(const GbmParams& p, const Eigen::MatrixXd& Z, int stages) {
  const std::size_t m = stages < 0 ? p.trees.size() : std::min<std::size_t>(p.trees.size(), stages);
  Eigen::VectorXd F = Eigen::VectorXd::Constant(Z.rows(), p.init);
  for (std::size_t t = 0; t < m; ++t)
    for (Eigen::Index i = 0; i < Z.rows(); ++i) F(i) += p.learning_rate * p.trees[t].predict(Z, i);
  return F;
}

Eigen::VectorXd predict_gbm(const GbmParams& p, const Eigen::MatrixXd& Z) {
  Eigen::VectorXd F = gbm_decision(p, Z);
  for (Eigen::Index i = 0; i < F.size(); ++i) F(i) = sigmoid(F(i));
  return F;
}

double log_loss(const Eigen::VectorXd& proba, const Eigen::VectorXd& y) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double q = std::clamp(proba(i), 1e-15, 1.0 - 1e-15);
    s -= y(i) * std::log(q) + (1.0 - y(i)) * std::log(1.0 - q);
  }
  return s / static_cast<double>(y.size());
}

std::vector<double> gbm_staged_log_loss(const GbmParams& p, const Eigen::MatrixXd& Z, const Eigen::VectorXd& y) {
  std::vector<double> out;
  Eigen::VectorXd F = Eigen::VectorXd::Constant(Z.rows(), p.init);
  auto loss = [&] {
    double s = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) s += softplus(F(i)) - y(i) * F(i);
    return s / static_cast<double>(y.size());
  };
  out.push_back(loss());
  for (const auto& t : p.trees) {
    for (Eigen::Index i = 0; i < Z.rows(); ++i) F(i) += p.learning_rate * t.predict(Z, i);
    out.push_back(loss());
  }
  return out;
}

// ---- trained model ----

TrainedModel train_model(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const FeatureSchema& schema,
                         const ModelConfig& cfg) {
  if (static_cast<std::size_t>(X.cols()) != schema.size())
    fail(ErrorCode::SchemaMismatch, "training matrix width differs from schema");
  TrainedModel m;
  m.config = cfg;
  m.schema_hash = schema.hash();
  for (const auto& s : schema.specs()) m.feature_names.push_back(s.name);
  m.standardizer = fit_standardizer(X, schema);
  const Eigen::MatrixXd Z = m.standardizer.apply(X);
  switch (cfg.family) {
    case ModelFamily::Logistic: m.params = train_logistic(Z, y, cfg.logistic); break;
    case ModelFamily::MLP: m.params = train_mlp(Z, y, cfg.mlp, cfg.seed); break;
    case ModelFamily::RandomForest: m.params = train_random_forest(Z, y, schema, cfg.forest, cfg.seed); break;
    case ModelFamily::GradientBoosting: m.params = train_gbm(Z, y, schema, cfg.gbm, cfg.seed); break;
  }
  return m;
}

Eigen::VectorXd TrainedModel::predict_standardized(const Eigen::MatrixXd& Z) const {
  return std::visit(
      [&](const auto& p) -> Eigen::VectorXd {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LogisticParams>) return predict_logistic(p, Z);
        else if constexpr (std::is_same_v<T, MlpParams>) return predict_mlp(p, Z);
        else if constexpr (std::is_same_v<T, ForestParams>) return predict_forest(p, Z);
        else return predict_gbm(p, Z);
      },
      params);
}

Eigen::VectorXd TrainedModel::predict_proba(const Eigen::MatrixXd& X, std::string_view hash) const {
  if (hash != schema_hash)
    fail(ErrorCode::SchemaMismatch, "model expects schema " + schema_hash + ", got " + std::string(hash));
  if (!X.allFinite()) fail(ErrorCode::NonFiniteInput, "non-finite feature values");
  return predict_standardized(standardizer.apply(X));
}

std::string TrainedModel::to_json() const {
  ordered_json j;
  j["format"] = "vrturn-model";
  j["version"] = 1;
  j["family"] = std::string(vrturn::to_string(config.family));
  j["config"] = ordered_json::parse(model_config_to_json(config));
  j["schema_hash"] = schema_hash;
  j["features"] = feature_names;
  ordered_json st;
  st["mean"] = standardizer.mean;
  st["scale"] = standardizer.scale;
  st["passthrough"] = standardizer.passthrough;
  st["constant"] = standardizer.constant;
  j["standardizer"] = st;
  ordered_json p;
  std::visit(
      [&](const auto& q) {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, LogisticParams>) {
          p["w"] = vector_json(q.w);
          p["b"] = q.b;
        } else if constexpr (std::is_same_v<T, MlpParams>) {
          p["hidden"] = q.W1.cols();
          p["epochs"] = q.epochs;
          p["theta"] = vector_json(mlp_pack(q));
        } else if constexpr (std::is_same_v<T, ForestParams>) {
          p["trees"] = ordered_json::array();
          for (const auto& t : q.trees) p["trees"].push_back(tree_json(t));
        } else {
          p["init"] = q.init;
          p["learning_rate"] = q.learning_rate;
          p["trees"] = ordered_json::array();
          for (const auto& t : q.trees) p["trees"].push_back(tree_json(t));
        }
      },
      params);
  j["params"] = p;
  return j.dump() + "\n";
}

TrainedModel TrainedModel::from_json(std::string_view text) {
  TrainedModel m;
  try {
    const json j = json::parse(text);
    if (j.value("format", std::string()) != "vrturn-model") fail(ErrorCode::MalformedInput, "not a model document");
    m.config = model_config_from_json(j.at("config").dump());
    m.schema_hash = j.at("schema_hash").get<std::string>();
    m.feature_names = j.at("features").get<std::vector<std::string>>();
    const auto& st = j.at("standardizer");
    m.standardizer.mean = st.at("mean").get<std::vector<double>>();
    m.standardizer.scale = st.at("scale").get<std::vector<double>>();
    m.standardizer.passthrough = st.at("passthrough").get<std::vector<bool>>();
    m.standardizer.constant = st.at("constant").get<std::vector<bool>>();
    const std::size_t d = m.feature_names.size();
    if (m.standardizer.mean.size() != d || m.standardizer.scale.size() != d || m.standardizer.passthrough.size() != d)
      fail(ErrorCode::MalformedInput, "model: standardizer width mismatch");
    const auto& p = j.at("params");
    switch (m.config.family) {
      case ModelFamily::Logistic: {
        LogisticParams q{vector_from(p.at("w")), p.at("b").get<double>()};
        if (static_cast<std::size_t>(q.w.size()) != d) fail(ErrorCode::MalformedInput, "model: weight width mismatch");
        m.params = q;
        break;
      }
      case ModelFamily::MLP: {
        const auto h = p.at("hidden").get<Eigen::Index>();
        const Eigen::VectorXd theta = vector_from(p.at("theta"));
        if (theta.size() != static_cast<Eigen::Index>(d) * h + 2 * h + 1)
          fail(ErrorCode::MalformedInput, "model: mlp parameter count mismatch");
        MlpParams q = mlp_unpack(theta, static_cast<Eigen::Index>(d), h);
        q.epochs = p.value("epochs", 0);
        m.params = q;
        break;
      }
      case ModelFamily::RandomForest: {
        ForestParams q;
        for (const auto& t : p.at("trees")) q.trees.push_back(tree_from(t, d));
        if (q.trees.empty()) fail(ErrorCode::MalformedInput, "model: forest without trees");
        m.params = q;
        break;
      }
      case ModelFamily::GradientBoosting: {
        GbmParams q;
        q.init = p.at("init").get<double>();
        q.learning_rate = p.at("learning_rate").get<double>();
        for (const auto& t : p.at("trees")) q.trees.push_back(tree_from(t, d));
        m.params = q;
        break;
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::MalformedInput, std::string("model: ") + e.what());
  }
  return m;
}

}  // namespace vrturn
