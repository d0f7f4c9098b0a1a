#pragma once

// Closed-form linear readout shared by the reservoir models. Solves
// min ||X w - y||^2 + lambda ||w||^2 on post-washout rows. lambda > 0 uses
// the QR factorization of the row-augmented system [X; sqrt(lambda) I];
// lambda = 0 falls back to column-pivoted QR, or an SVD minimum-norm
// solution when X is rank deficient.

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cstdio>
#include <span>
#include <stdexcept>

#include "narmabench/features.hpp"

namespace narmabench::readout {

struct TrainedReadout {
  Eigen::VectorXd weights;  // length == feature matrix width (bias included)
  double ridge_lambda = 0.0;
  bool rank_deficient = false;
};

inline TrainedReadout fit_readout(const ReservoirFeatures& features,
                                  std::span<const double> targets,
                                  double lambda) {
  const Eigen::Index rows = features.rows();
  const Eigen::Index cols = features.cols();
  if (static_cast<Eigen::Index>(targets.size()) != rows) {
    throw std::invalid_argument("fit_readout: target length mismatch");
  }
  if (lambda < 0.0) throw std::invalid_argument("fit_readout: lambda < 0");
  const Eigen::Index w = static_cast<Eigen::Index>(features.washout);
  const Eigen::Index n = rows - w;
  if (n < cols) {
    throw std::invalid_argument(
        "fit_readout: fewer post-washout rows than features");
  }
  const auto X = features.X.bottomRows(n);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = targets[w + i];

  TrainedReadout out;
  out.ridge_lambda = lambda;
  if (lambda > 0.0) {
    Eigen::MatrixXd aug(n + cols, cols);
    aug.topRows(n) = X;
    aug.bottomRows(cols) =
        std::sqrt(lambda) * Eigen::MatrixXd::Identity(cols, cols);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + cols);
    rhs.head(n) = y;
    out.weights = aug.colPivHouseholderQr().solve(rhs);
  } else {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < cols) {
      out.rank_deficient = true;
      std::fprintf(stderr,
                   "fit_readout: rank-deficient design matrix (rank %ld of "
                   "%ld), returning minimum-norm solution\n",
                   static_cast<long>(qr.rank()), static_cast<long>(cols));
      Eigen::BDCSVD<Eigen::MatrixXd> svd(
          X, Eigen::ComputeThinU | Eigen::ComputeThinV);
      out.weights = svd.solve(y);
    } else {
      out.weights = qr.solve(y);
    }
  }
  return out;
}

/// Predictions for every row of the feature matrix (washout rows included;
/// callers slice what they need).
inline Eigen::VectorXd apply_readout(const TrainedReadout& readout,
                                     const ReservoirFeatures& features) {
  if (features.cols() != readout.weights.size()) {
    throw std::invalid_argument("apply_readout: feature width mismatch");
  }
  return features.X * readout.weights;
}

}  // namespace narmabench::readout
