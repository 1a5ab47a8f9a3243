#include "vrturn/standardizer.hpp"

#include <cmath>

#include "vrturn/error.hpp"

namespace vrturn {

Standardizer fit_standardizer(const Eigen::MatrixXd& X, const FeatureSchema& schema) {
  if (X.rows() < 2) fail(ErrorCode::EmptyTrainingSet, "standardizer needs at least two training rows");
  if (static_cast<std::size_t>(X.cols()) != schema.size())
    fail(ErrorCode::SchemaMismatch, "matrix width differs from schema");
  const auto d = static_cast<std::size_t>(X.cols());
  Standardizer s;
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 1.0);
  s.passthrough.assign(d, false);
  s.constant.assign(d, false);
  const double n = static_cast<double>(X.rows());
  for (std::size_t j = 0; j < d; ++j) {
    const auto col = X.col(static_cast<Eigen::Index>(j));
    if (!col.allFinite()) fail(ErrorCode::NonFiniteInput, "non-finite value in column " + schema[j].name);
    const double mu = col.sum() / n;
    const double var = (col.array() - mu).square().sum() / n;
    const double sd = std::sqrt(var);
    if (sd < kZeroVariance) s.constant[j] = true;
    if (schema[j].kind != FeatureKind::Continuous || s.constant[j]) {
      s.passthrough[j] = true;
      continue;
    }
    s.mean[j] = mu;
    s.scale[j] = sd;
  }
  return s;
}

void Standardizer::apply_inplace(Eigen::MatrixXd& X) const {
  if (static_cast<std::size_t>(X.cols()) != size()) fail(ErrorCode::SchemaMismatch, "matrix width differs from standardizer");
  for (std::size_t j = 0; j < size(); ++j) {
    if (passthrough[j]) continue;
    auto col = X.col(static_cast<Eigen::Index>(j));
    col = (col.array() - mean[j]) / scale[j];
  }
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& X) const {
  Eigen::MatrixXd out = X;
  apply_inplace(out);
  return out;
}

}  // namespace vrturn
