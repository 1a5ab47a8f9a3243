#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vrturn/features.hpp"

namespace vrturn {

/// Columns whose population sd is below this are left unscaled.
inline constexpr double kZeroVariance = 1e-12;

/// z-scores continuous columns with train-set statistics. Binary, one-hot and
/// constant columns pass through (mean 0, scale 1).
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;
  std::vector<bool> passthrough;
  std::vector<bool> constant;

  std::size_t size() const { return mean.size(); }
  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
  void apply_inplace(Eigen::MatrixXd& X) const;
};

/// Throws EmptyTrainingSet for fewer than two rows.
Standardizer fit_standardizer(const Eigen::MatrixXd& X, const FeatureSchema& schema);

}  // namespace vrturn
