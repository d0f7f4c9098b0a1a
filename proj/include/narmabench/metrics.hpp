#pragma once

// Comparison metrics: RMSE, NRMSE, delay-reconstruction memory capacity,
// trainable-parameter accounting, wall-clock timing, and the composite
// sustainability index.

#include <Eigen/Dense>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "narmabench/esn.hpp"
#include "narmabench/features.hpp"
#include "narmabench/lstm.hpp"
#include "narmabench/qlstm.hpp"
#include "narmabench/qrc.hpp"
#include "narmabench/readout.hpp"

namespace narmabench::metrics {

inline double rmse(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size() || pred.empty()) {
    throw std::invalid_argument("rmse: length mismatch or empty input");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - truth[i];
    acc += d * d;
  }
  return std::sqrt(acc / double(pred.size()));
}

/// RMSE over the population (1/N) standard deviation of the true targets.
inline double nrmse(std::span<const double> pred,
                    std::span<const double> truth) {
  const double e = rmse(pred, truth);
  double mean = 0.0;
  for (double v : truth) mean += v;
  mean /= double(truth.size());
  double var = 0.0;
  for (double v : truth) var += (v - mean) * (v - mean);
  var /= double(truth.size());
  if (var <= 0.0) {
    throw std::domain_error("nrmse: target standard deviation is zero");
  }
  return e / std::sqrt(var);
}

struct McOptions {
  int k_max = 20;
  double ridge = 1e-8;
};

struct McResult {
  double mc = 0.0;
  std::vector<double> r2;  // r2[k-1] for delay k
};

namespace detail {

inline double pearson_r2(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= double(n);
  mb /= double(n);
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  // Variance at rounding scale relative to the mean is degenerate, not signal.
  const double floor_a = 1e-24 * double(n) * std::max(1.0, ma * ma);
  const double floor_b = 1e-24 * double(n) * std::max(1.0, mb * mb);
  if (saa <= floor_a || sbb <= floor_b) return 0.0;
  const double r2 = (sab * sab) / (saa * sbb);
  return std::min(r2, 1.0);
}

}  // namespace detail

/// Memory capacity as the sum over delays k = 1..k_max of the squared
/// Pearson correlation between u_{t-k} and its best linear reconstruction
/// from the reservoir features. A fresh readout is fitted per delay on the
/// first half of the usable rows and scored on the held-out second half.
inline McResult memory_capacity(
    const std::function<ReservoirFeatures(std::span<const double>)>& runner,
    std::span<const double> probe_u, const McOptions& opts = {}) {
  if (opts.k_max < 1) throw std::invalid_argument("memory_capacity: k_max < 1");
  const ReservoirFeatures features = runner(probe_u);
  const Eigen::Index T = features.rows();
  const Eigen::Index cols = features.cols();
  McResult out;
  out.r2.resize(opts.k_max, 0.0);
  for (int k = 1; k <= opts.k_max; ++k) {
    const Eigen::Index t0 =
        std::max<Eigen::Index>(static_cast<Eigen::Index>(features.washout), k);
    const Eigen::Index usable = T - t0;
    const Eigen::Index n_fit = usable / 2;
    const Eigen::Index n_eval = usable - n_fit;
    if (n_fit < cols || n_eval < 2) {
      throw std::invalid_argument(
          "memory_capacity: probe too short for k_max and feature width");
    }
    ReservoirFeatures fit_block;
    fit_block.X = features.X.middleRows(t0, n_fit);
    fit_block.washout = 0;
    std::vector<double> fit_targets(n_fit);
    for (Eigen::Index i = 0; i < n_fit; ++i) {
      fit_targets[i] = probe_u[static_cast<std::size_t>(t0 + i - k)];
    }
    const readout::TrainedReadout ro =
        readout::fit_readout(fit_block, fit_targets, opts.ridge);

    ReservoirFeatures eval_block;
    eval_block.X = features.X.middleRows(t0 + n_fit, n_eval);
    eval_block.washout = 0;
    const Eigen::VectorXd pred = readout::apply_readout(ro, eval_block);
    std::vector<double> eval_targets(n_eval);
    for (Eigen::Index i = 0; i < n_eval; ++i) {
      eval_targets[i] = probe_u[static_cast<std::size_t>(t0 + n_fit + i - k)];
    }
    out.r2[k - 1] = detail::pearson_r2(
        std::span<const double>(pred.data(), pred.size()), eval_targets);
    out.mc += out.r2[k - 1];
  }
  return out;
}

struct ParamCount {
  long trainable = 0;
  std::string fixed_resources;  // reservoir size / shot budget, "-" if none
};

inline ParamCount count_params(const esn::EsnConfig& cfg) {
  char desc[64];
  std::snprintf(desc, sizeof(desc), "N=%d, rho=%g", cfg.n_nodes,
                cfg.spectral_radius);
  return {long(cfg.n_nodes) + 1, desc};
}

inline ParamCount count_params(const qrc::QrcConfig& cfg) {
  char desc[64];
  std::snprintf(desc, sizeof(desc), "%d qubits, %d shots", cfg.n_qubits,
                cfg.n_shots);
  return {long(cfg.n_qubits) + 1, desc};
}

inline ParamCount count_params_lstm(int hidden, int d_in) {
  return {lstm::count_lstm_params(hidden, d_in), "-"};
}

inline ParamCount count_params(const qlstm::QlstmConfig& cfg) {
  return {qlstm::count_qlstm_params(cfg.hidden, cfg.d_in, cfg.n_qubits,
                                    cfg.n_layers, cfg.input_bias,
                                    cfg.output_bias),
          "-"};
}

/// One model's full metric row, the unit of reporting.
struct BenchRecord {
  std::string model;
  double rmse = std::numeric_limits<double>::quiet_NaN();
  double nrmse = std::numeric_limits<double>::quiet_NaN();
  double train_time_s = std::numeric_limits<double>::quiet_NaN();
  long trainable_params = 0;
  std::string reservoir = "-";
  std::optional<double> memory_capacity;
  std::uint64_t seed = 0;
  int repeat = 0;
  bool failed = false;
  std::string error;
};

inline constexpr std::array<const char*, 4> kSustainabilityMetrics = {
    "rmse", "nrmse", "train_time_s", "params"};

struct SustainabilityReport {
  std::vector<std::string> models;
  Eigen::MatrixXd normalized;     // 4 metrics x M models, min-max x' values
  std::array<double, 4> weights;  // renormalized to sum 1
  std::vector<double> scores;     // S per model, in [0, 1]
  std::vector<std::string> warnings;
};

/// S = sum_m w_m (1 - x'_m) with x' the min-max normalized metric value;
/// lower raw metrics are better everywhere, so higher S is the better
/// trade-off. A metric that is constant across models contributes its full
/// weight to every model (with a warning).
inline SustainabilityReport sustainability_index(
    const std::vector<BenchRecord>& records,
    std::array<double, 4> weights = {0.25, 0.25, 0.25, 0.25}) {
  if (records.size() < 2) {
    throw std::invalid_argument("sustainability_index: need >= 2 models");
  }
  double wsum = 0.0;
  for (double w : weights) {
    if (w < 0.0) {
      throw std::invalid_argument("sustainability_index: negative weight");
    }
    wsum += w;
  }
  if (wsum <= 0.0) {
    throw std::invalid_argument("sustainability_index: zero weight sum");
  }
  for (double& w : weights) w /= wsum;

  const int m = static_cast<int>(records.size());
  Eigen::MatrixXd raw(4, m);
  for (int j = 0; j < m; ++j) {
    const BenchRecord& r = records[j];
    raw(0, j) = r.rmse;
    raw(1, j) = r.nrmse;
    raw(2, j) = r.train_time_s;
    raw(3, j) = double(r.trainable_params);
    for (int i = 0; i < 4; ++i) {
      if (!std::isfinite(raw(i, j))) {
        throw std::invalid_argument("sustainability_index: non-finite metric " +
                                    std::string(kSustainabilityMetrics[i]) +
                                    " for model " + r.model);
      }
    }
  }

  SustainabilityReport rep;
  rep.weights = weights;
  rep.normalized = Eigen::MatrixXd::Zero(4, m);
  for (const BenchRecord& r : records) rep.models.push_back(r.model);
  for (int i = 0; i < 4; ++i) {
    const double lo = raw.row(i).minCoeff();
    const double hi = raw.row(i).maxCoeff();
    if (hi > lo) {
      rep.normalized.row(i) = (raw.row(i).array() - lo) / (hi - lo);
    } else {
      rep.warnings.push_back(std::string("metric ") + kSustainabilityMetrics[i] +
                             " is constant across models; it contributes its "
                             "full weight to every score");
    }
  }
  rep.scores.resize(m);
  for (int j = 0; j < m; ++j) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i) {
      s += weights[i] * (1.0 - rep.normalized(i, j));
    }
    rep.scores[j] = s;
  }
  return rep;
}

/// Built-in reference rows used to cross-check the sustainability-index
/// computation and for side-by-side comparison in reports.
inline std::vector<BenchRecord> reference_records() {
  std::vector<BenchRecord> rows(4);
  rows[0].model = "esn";
  rows[0].rmse = 0.0177;
  rows[0].nrmse = 0.185;
  rows[0].train_time_s = 0.37;
  rows[0].trainable_params = 18246;
  rows[0].reservoir = "N=300, rho=0.9";
  rows[0].memory_capacity = 0.0128;
  rows[1].model = "lstm";
  rows[1].rmse = 0.0562;
  rows[1].nrmse = 0.530;
  rows[1].train_time_s = 105.09;
  rows[1].trainable_params = 17217;
  rows[2].model = "qlstm";
  rows[2].rmse = 0.1078;
  rows[2].nrmse = 1.050;
  rows[2].train_time_s = 10276.6;
  rows[2].trainable_params = 89;
  rows[3].model = "qrc";
  rows[3].rmse = 0.0533;
  rows[3].nrmse = 0.485;
  rows[3].train_time_s = 743.46;
  rows[3].trainable_params = 255;
  rows[3].reservoir = "4 qubits, 1000 shots";
  rows[3].memory_capacity = 0.7752;
  return rows;
}

/// Wall-clock a callable on the monotonic clock. Returns (result, seconds),
/// or just seconds for void callables.
template <typename F>
auto time_block(F&& f) {
  using R = std::invoke_result_t<F>;
  const auto t0 = std::chrono::steady_clock::now();
  if constexpr (std::is_void_v<R>) {
    std::forward<F>(f)();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  } else {
    R result = std::forward<F>(f)();
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return std::make_pair(std::move(result), seconds);
  }
}

}  // namespace narmabench::metrics
