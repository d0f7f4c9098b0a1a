#pragma once

// Adam update, applied tensor-by-tensor. Callers keep one (m, v) slot of the
// same shape per trainable tensor and bump the shared step counter once per
// optimizer step before updating.

#include <Eigen/Dense>
#include <cmath>

namespace narmabench::optim {

struct AdamSpec {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename Derived1, typename Derived2, typename Derived3,
          typename Derived4>
void adam_update(Eigen::MatrixBase<Derived1>& param,
                 const Eigen::MatrixBase<Derived2>& grad,
                 Eigen::MatrixBase<Derived3>& m,
                 Eigen::MatrixBase<Derived4>& v, int step,
                 const AdamSpec& spec) {
  m = spec.beta1 * m + (1.0 - spec.beta1) * grad;
  v.array() =
      spec.beta2 * v.array() + (1.0 - spec.beta2) * grad.array().square();
  const double bc1 = 1.0 - std::pow(spec.beta1, step);
  const double bc2 = 1.0 - std::pow(spec.beta2, step);
  param.array() -= spec.learning_rate * (m.array() / bc1) /
                   ((v.array() / bc2).sqrt() + spec.eps);
}

inline void adam_update_scalar(double& param, double grad, double& m,
                               double& v, int step, const AdamSpec& spec) {
  m = spec.beta1 * m + (1.0 - spec.beta1) * grad;
  v = spec.beta2 * v + (1.0 - spec.beta2) * grad * grad;
  const double bc1 = 1.0 - std::pow(spec.beta1, step);
  const double bc2 = 1.0 - std::pow(spec.beta2, step);
  param -= spec.learning_rate * (m / bc1) / (std::sqrt(v / bc2) + spec.eps);
}

}  // namespace narmabench::optim
