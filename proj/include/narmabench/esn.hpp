#pragma once

// Echo State Network: fixed sparse random reservoir with tanh dynamics,
// rescaled to a target spectral radius, plus state harvesting. Only the
// linear readout (see readout.hpp) is ever trained.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "narmabench/features.hpp"
#include "narmabench/rng.hpp"

namespace narmabench::esn {

struct EsnConfig {
  int n_nodes = 300;
  double spectral_radius = 0.9;
  double internal_sparsity = 0.2;  // fraction of W entries that are nonzero
  double input_sparsity = 0.5;     // fraction of W_in entries that are nonzero
  double input_scale = 0.1;        // nonzero W_in entries uniform in +-scale
  std::size_t washout = 100;
  std::uint64_t seed = 0;
};

struct EsnReservoir {
  Eigen::MatrixXd W;      // n x n internal weights, |lambda|_max == target rho
  Eigen::VectorXd W_in;   // n input weights
  EsnConfig config;
  std::uint64_t seed_used = 0;  // seed after any degenerate-draw rebuilds
  int rebuilds = 0;
};

inline double spectral_radius_dense(const Eigen::MatrixXd& W) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(W, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

/// Power iteration estimating |lambda|_max of a general real matrix. Each
/// sweep fits W^2 x ~ tau W x - delta x, whose root moduli cover the dominant
/// eigenvalue even when it is a complex-conjugate pair (plain power iteration
/// would oscillate there). Returns NaN when the estimate fails to settle
/// within tol; callers then fall back to the dense solver.
inline double spectral_radius_power(const Eigen::MatrixXd& W,
                                    double tol = 1e-9, int max_iter = 20000) {
  const Eigen::Index n = W.rows();
  if (n == 1) return std::abs(W(0, 0));
  rng::RandomStream stream(rng::derive_seed(0x6ab5, "power-iteration"));
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = stream.normal();
  x.normalize();

  const int check_every = 20;
  double window_est = -1.0;
  int stable_windows = 0;
  double est = std::numeric_limits<double>::quiet_NaN();
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::VectorXd u = W * x;
    const double growth = u.norm();
    if (growth == 0.0) return 0.0;
    Eigen::VectorXd w2 = W * u;

    const double uu = u.squaredNorm();
    const double ux = u.dot(x);
    const double uw = u.dot(w2);
    const double xw = x.dot(w2);
    const double det = uu - ux * ux;  // x is unit
    if (det > 1e-12 * uu) {
      const double tau = (uw - ux * xw) / det;
      const double delta = (ux * uw - uu * xw) / det;
      const double disc = tau * tau - 4.0 * delta;
      if (disc >= 0.0) {
        const double root = std::sqrt(disc);
        est = std::max(std::abs((tau + root) / 2.0),
                       std::abs((tau - root) / 2.0));
      } else {
        est = std::sqrt(delta);
      }
    } else {
      est = growth;  // u parallel to x: x is already an eigenvector
    }

    if (it % check_every == 0) {
      if (window_est >= 0.0 &&
          std::abs(est - window_est) <= tol * std::max(est, 1e-30)) {
        if (++stable_windows >= 2) return est;
      } else {
        stable_windows = 0;
      }
      window_est = est;
    }
    x = u / growth;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

inline double spectral_radius(const Eigen::MatrixXd& W) {
  if (W.rows() <= 8) return spectral_radius_dense(W);
  const double est = spectral_radius_power(W);
  return std::isnan(est) ? spectral_radius_dense(W) : est;
}

namespace detail {

/// Exactly k positions sampled without replacement from [0, m).
inline std::vector<std::size_t> sample_positions(std::size_t k, std::size_t m,
                                                 rng::RandomStream& stream) {
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(idx[i], idx[i + stream.index(m - i)]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace detail

inline EsnReservoir build_reservoir(const EsnConfig& cfg) {
  if (cfg.n_nodes < 1) throw std::invalid_argument("esn: n_nodes < 1");
  if (!(cfg.spectral_radius > 0.0)) {
    throw std::invalid_argument("esn: spectral radius must be positive");
  }
  if (cfg.internal_sparsity < 0.0 || cfg.internal_sparsity > 1.0 ||
      cfg.input_sparsity < 0.0 || cfg.input_sparsity > 1.0) {
    throw std::invalid_argument("esn: sparsity outside [0, 1]");
  }
  const std::size_t n = static_cast<std::size_t>(cfg.n_nodes);
  for (std::uint64_t trial = cfg.seed;; ++trial) {
    rng::RandomStream stream(rng::derive_seed(trial, "esn-weights"));
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(cfg.n_nodes, cfg.n_nodes);
    const std::size_t k =
        static_cast<std::size_t>(cfg.internal_sparsity * double(n) * double(n));
    for (std::size_t pos : detail::sample_positions(k, n * n, stream)) {
      W(static_cast<Eigen::Index>(pos / n), static_cast<Eigen::Index>(pos % n)) =
          stream.uniform(-1.0, 1.0);
    }
    Eigen::VectorXd W_in = Eigen::VectorXd::Zero(cfg.n_nodes);
    const std::size_t k_in =
        static_cast<std::size_t>(cfg.input_sparsity * double(n));
    for (std::size_t pos : detail::sample_positions(k_in, n, stream)) {
      W_in[static_cast<Eigen::Index>(pos)] =
          stream.uniform(-cfg.input_scale, cfg.input_scale);
    }
    const double radius = spectral_radius(W);
    if (radius <= 1e-12) continue;  // degenerate draw, retry with next seed
    W *= cfg.spectral_radius / radius;
    EsnReservoir res;
    res.W = std::move(W);
    res.W_in = std::move(W_in);
    res.config = cfg;
    res.seed_used = trial;
    res.rebuilds = static_cast<int>(trial - cfg.seed);
    return res;
  }
}

/// Harvest states over an input sequence: row t holds x_t with
/// x_t = tanh(W x_{t-1} + W_in u_{t-1}), x_0 = initial state (zero unless
/// overridden), u_{-1} = 0. The bias column is appended per row.
inline ReservoirFeatures run_reservoir(const EsnReservoir& res,
                                       std::span<const double> u,
                                       const Eigen::VectorXd* x0 = nullptr) {
  if (u.empty()) throw std::invalid_argument("esn: empty input sequence");
  const Eigen::Index n = res.config.n_nodes;
  const Eigen::Index T = static_cast<Eigen::Index>(u.size());
  ReservoirFeatures out;
  out.X.resize(T, n + 1);
  out.X.col(n).setOnes();
  out.washout = res.config.washout;
  Eigen::VectorXd x = x0 ? *x0 : Eigen::VectorXd::Zero(n);
  out.X.row(0).head(n) = x;
  for (Eigen::Index t = 1; t < T; ++t) {
    x = (res.W * x + res.W_in * u[t - 1]).array().tanh();
    out.X.row(t).head(n) = x;
  }
  return out;
}

}  // namespace narmabench::esn
