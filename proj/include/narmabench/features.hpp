#pragma once

#include <Eigen/Dense>
#include <cstddef>

namespace narmabench {

/// Per-timestep reservoir feature rows, bias column last. The first
/// `washout` rows are transient and excluded from readout training.
struct ReservoirFeatures {
  Eigen::MatrixXd X;  // T x (feature_dim + 1), last column identically 1
  std::size_t washout = 0;

  Eigen::Index rows() const { return X.rows(); }
  Eigen::Index cols() const { return X.cols(); }
};

}  // namespace narmabench
