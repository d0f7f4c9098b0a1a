#pragma once

// LSTM variant whose four gate transforms are variational quantum circuits.
//
// Per step: v_t = [h_{t-1}; x_t], q_t = W_in v_t (+ b_in). Each gate circuit
// runs on n_q qubits from |0..0>: an embedding layer Rx(q_i) per qubit, then
// per variational layer Rx(theta_{l,i}) per qubit followed by a closed CNOT
// ring (control i -> target (i+1) mod n_q); the outputs are exact per-wire
// <sigma_z> values. Gates decode through a shared W_out (+ b_out):
//   f,i,o = sigmoid(W_out E_gate), g = tanh(W_out E_gate)
// and the cell/hidden update is the classical one. A per-step linear readout
// maps h_t to the scalar prediction.
//
// Training: Adam over everything. Circuit angles (both the variational
// weights and the embedded inputs) get parameter-shift gradients,
//   dE/dtheta = [E(theta + pi/2) - E(theta - pi/2)] / 2,
// cached as per-step Jacobians; classical weights get exact backprop chained
// through those Jacobians.

#include <Eigen/Dense>
#include <chrono>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "narmabench/lstm.hpp"
#include "narmabench/optim.hpp"
#include "narmabench/quantum.hpp"
#include "narmabench/rng.hpp"
#include "narmabench/timeseries.hpp"

namespace narmabench::qlstm {

struct QlstmConfig {
  int hidden = 4;
  int d_in = 1;
  int n_qubits = 4;
  int n_layers = 1;
  bool input_bias = true;   // bias on the q_t projection
  bool output_bias = true;  // bias on the gate decode
};

struct QlstmParams {
  Eigen::MatrixXd W_in;   // n_q x (h + d)
  Eigen::VectorXd b_in;   // n_q (zeroed and frozen when input_bias is off)
  Eigen::MatrixXd theta_f, theta_i, theta_g, theta_o;  // n_layers x n_q
  Eigen::MatrixXd W_out;  // h x n_q, shared by the four gates
  Eigen::VectorXd b_out;  // h
  Eigen::RowVectorXd w_readout;  // 1 x h
  double b_readout = 0.0;
  QlstmConfig config;

  static QlstmParams zeros(const QlstmConfig& cfg) {
    QlstmParams p;
    p.config = cfg;
    p.W_in = Eigen::MatrixXd::Zero(cfg.n_qubits, cfg.hidden + cfg.d_in);
    p.b_in = Eigen::VectorXd::Zero(cfg.n_qubits);
    p.theta_f = Eigen::MatrixXd::Zero(cfg.n_layers, cfg.n_qubits);
    p.theta_i = p.theta_f;
    p.theta_g = p.theta_f;
    p.theta_o = p.theta_f;
    p.W_out = Eigen::MatrixXd::Zero(cfg.hidden, cfg.n_qubits);
    p.b_out = Eigen::VectorXd::Zero(cfg.hidden);
    p.w_readout = Eigen::RowVectorXd::Zero(cfg.hidden);
    p.b_readout = 0.0;
    return p;
  }

  /// Classical weights uniform [-1/sqrt(h), 1/sqrt(h)], circuit angles
  /// uniform [0, pi) as is usual for rotation layers.
  static QlstmParams init(const QlstmConfig& cfg, std::uint64_t seed) {
    QlstmParams p = zeros(cfg);
    rng::RandomStream stream(rng::derive_seed(seed, "qlstm-init"));
    const double bound = 1.0 / std::sqrt(double(cfg.hidden));
    auto fill = [&](auto& m, double lo, double hi) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
          m(i, j) = stream.uniform(lo, hi);
        }
      }
    };
    fill(p.W_in, -bound, bound);
    if (cfg.input_bias) fill(p.b_in, -bound, bound);
    const double pi = 3.14159265358979323846;
    fill(p.theta_f, 0.0, pi);
    fill(p.theta_i, 0.0, pi);
    fill(p.theta_g, 0.0, pi);
    fill(p.theta_o, 0.0, pi);
    fill(p.W_out, -bound, bound);
    if (cfg.output_bias) fill(p.b_out, -bound, bound);
    fill(p.w_readout, -bound, bound);
    p.b_readout = stream.uniform(-bound, bound);
    return p;
  }
};

/// Exact statevector evaluation of one gate circuit.
inline Eigen::VectorXd gate_circuit(const Eigen::VectorXd& q,
                                    const Eigen::MatrixXd& theta) {
  const int n_q = static_cast<int>(q.size());
  if (theta.cols() != n_q) {
    throw std::invalid_argument("gate_circuit: theta width mismatch");
  }
  qc::QuantumState state = qc::QuantumState::zero(n_q);
  for (int i = 0; i < n_q; ++i) {
    qc::apply_one_qubit(state, qc::rx(q[i]), i);
  }
  for (Eigen::Index l = 0; l < theta.rows(); ++l) {
    for (int i = 0; i < n_q; ++i) {
      qc::apply_one_qubit(state, qc::rx(theta(l, i)), i);
    }
    if (n_q >= 2) {
      for (int i = 0; i < n_q; ++i) {
        qc::apply_cnot(state, i, (i + 1) % n_q);
      }
    }
  }
  const std::vector<double> z = qc::pauli_z_expectations(state);
  return Eigen::Map<const Eigen::VectorXd>(z.data(), n_q);
}

struct CircuitJacobian {
  Eigen::MatrixXd d_q;      // n_q x n_q, dE_i / dq_j
  Eigen::MatrixXd d_theta;  // n_q x (n_layers * n_q), layer-major columns
};

/// Parameter-shift Jacobians for every angle of the circuit, embedded
/// inputs included.
inline CircuitJacobian parameter_shift(const Eigen::VectorXd& q,
                                       const Eigen::MatrixXd& theta) {
  const int n_q = static_cast<int>(q.size());
  const Eigen::Index n_layers = theta.rows();
  const double half_pi = 1.57079632679489661923;
  CircuitJacobian jac;
  jac.d_q.resize(n_q, n_q);
  jac.d_theta.resize(n_q, n_layers * n_q);
  Eigen::VectorXd q_shift = q;
  for (int j = 0; j < n_q; ++j) {
    q_shift[j] = q[j] + half_pi;
    const Eigen::VectorXd plus = gate_circuit(q_shift, theta);
    q_shift[j] = q[j] - half_pi;
    const Eigen::VectorXd minus = gate_circuit(q_shift, theta);
    q_shift[j] = q[j];
    jac.d_q.col(j) = 0.5 * (plus - minus);
  }
  Eigen::MatrixXd theta_shift = theta;
  for (Eigen::Index l = 0; l < n_layers; ++l) {
    for (int j = 0; j < n_q; ++j) {
      theta_shift(l, j) = theta(l, j) + half_pi;
      const Eigen::VectorXd plus = gate_circuit(q, theta_shift);
      theta_shift(l, j) = theta(l, j) - half_pi;
      const Eigen::VectorXd minus = gate_circuit(q, theta_shift);
      theta_shift(l, j) = theta(l, j);
      jac.d_theta.col(l * n_q + j) = 0.5 * (plus - minus);
    }
  }
  return jac;
}

struct CellState {
  Eigen::VectorXd h;
  Eigen::VectorXd c;
};

/// One cell step without gradient bookkeeping.
inline CellState qlstm_cell(const QlstmParams& p, const Eigen::VectorXd& x_t,
                            const Eigen::VectorXd& h_prev,
                            const Eigen::VectorXd& c_prev) {
  const QlstmConfig& cfg = p.config;
  if (x_t.size() != cfg.d_in || h_prev.size() != cfg.hidden ||
      c_prev.size() != cfg.hidden) {
    throw std::invalid_argument("qlstm_cell: shape mismatch");
  }
  Eigen::VectorXd v(cfg.hidden + cfg.d_in);
  v.head(cfg.hidden) = h_prev;
  v.tail(cfg.d_in) = x_t;
  Eigen::VectorXd q = p.W_in * v;
  if (cfg.input_bias) q += p.b_in;
  auto decode = [&](const Eigen::MatrixXd& theta) {
    Eigen::VectorXd a = p.W_out * gate_circuit(q, theta);
    if (cfg.output_bias) a += p.b_out;
    return a;
  };
  const Eigen::VectorXd f =
      decode(p.theta_f).unaryExpr([](double v_) { return lstm::sigmoid(v_); });
  const Eigen::VectorXd i =
      decode(p.theta_i).unaryExpr([](double v_) { return lstm::sigmoid(v_); });
  const Eigen::VectorXd g = decode(p.theta_g).array().tanh();
  const Eigen::VectorXd o =
      decode(p.theta_o).unaryExpr([](double v_) { return lstm::sigmoid(v_); });
  CellState out;
  out.c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
  out.h = o.cwiseProduct(out.c.array().tanh().matrix());
  return out;
}

namespace detail {

enum GateIdx { kF = 0, kI = 1, kG = 2, kO = 3 };

struct StepCache {
  Eigen::VectorXd v, q;
  Eigen::VectorXd expect[4];  // circuit outputs per gate
  CircuitJacobian jac[4];
  Eigen::VectorXd gate[4];  // f, i, g, o after the nonlinearity
  Eigen::VectorXd c, h, tc;
  double y_hat = 0.0;
};

struct Grads {
  Eigen::MatrixXd W_in;
  Eigen::VectorXd b_in;
  Eigen::MatrixXd theta[4];
  Eigen::MatrixXd W_out;
  Eigen::VectorXd b_out;
  Eigen::RowVectorXd w_readout;
  double b_readout = 0.0;

  static Grads zeros(const QlstmConfig& cfg) {
    Grads g;
    g.W_in = Eigen::MatrixXd::Zero(cfg.n_qubits, cfg.hidden + cfg.d_in);
    g.b_in = Eigen::VectorXd::Zero(cfg.n_qubits);
    for (auto& t : g.theta) {
      t = Eigen::MatrixXd::Zero(cfg.n_layers, cfg.n_qubits);
    }
    g.W_out = Eigen::MatrixXd::Zero(cfg.hidden, cfg.n_qubits);
    g.b_out = Eigen::VectorXd::Zero(cfg.hidden);
    g.w_readout = Eigen::RowVectorXd::Zero(cfg.hidden);
    g.b_readout = 0.0;
    return g;
  }
};

inline const Eigen::MatrixXd& theta_of(const QlstmParams& p, int gate) {
  switch (gate) {
    case kF: return p.theta_f;
    case kI: return p.theta_i;
    case kG: return p.theta_g;
    default: return p.theta_o;
  }
}

inline Eigen::MatrixXd& theta_of(QlstmParams& p, int gate) {
  switch (gate) {
    case kF: return p.theta_f;
    case kI: return p.theta_i;
    case kG: return p.theta_g;
    default: return p.theta_o;
  }
}

/// Forward over a window, caching circuit Jacobians when training.
inline std::vector<StepCache> forward_window(const QlstmParams& p,
                                             std::span<const double> u,
                                             bool with_jacobians) {
  const QlstmConfig& cfg = p.config;
  std::vector<StepCache> caches(u.size());
  Eigen::VectorXd h = Eigen::VectorXd::Zero(cfg.hidden);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(cfg.hidden);
  for (std::size_t t = 0; t < u.size(); ++t) {
    StepCache& sc = caches[t];
    sc.v.resize(cfg.hidden + cfg.d_in);
    sc.v.head(cfg.hidden) = h;
    sc.v.tail(cfg.d_in).setConstant(u[t]);
    sc.q = p.W_in * sc.v;
    if (cfg.input_bias) sc.q += p.b_in;
    for (int gidx = 0; gidx < 4; ++gidx) {
      sc.expect[gidx] = gate_circuit(sc.q, theta_of(p, gidx));
      if (with_jacobians) {
        sc.jac[gidx] = parameter_shift(sc.q, theta_of(p, gidx));
      }
      Eigen::VectorXd a = p.W_out * sc.expect[gidx];
      if (cfg.output_bias) a += p.b_out;
      if (gidx == kG) {
        sc.gate[gidx] = a.array().tanh();
      } else {
        sc.gate[gidx] =
            a.unaryExpr([](double v_) { return lstm::sigmoid(v_); });
      }
    }
    c = sc.gate[kF].cwiseProduct(c) + sc.gate[kI].cwiseProduct(sc.gate[kG]);
    sc.c = c;
    sc.tc = c.array().tanh();
    h = sc.gate[kO].cwiseProduct(sc.tc);
    sc.h = h;
    sc.y_hat = p.w_readout * h + p.b_readout;
  }
  return caches;
}

inline double window_loss(const std::vector<StepCache>& caches,
                          std::span<const double> targets) {
  double acc = 0.0;
  for (std::size_t t = 0; t < caches.size(); ++t) {
    const double d = caches[t].y_hat - targets[t];
    acc += d * d;
  }
  return acc / double(caches.size());
}

/// Exact BPTT through the classical update; circuit terms enter through the
/// cached parameter-shift Jacobians.
inline Grads backward_window(const QlstmParams& p,
                             const std::vector<StepCache>& caches,
                             std::span<const double> targets) {
  const QlstmConfig& cfg = p.config;
  const std::size_t T = caches.size();
  Grads g = Grads::zeros(cfg);
  Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(cfg.hidden);
  Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(cfg.hidden);
  for (std::size_t ti = T; ti-- > 0;) {
    const StepCache& sc = caches[ti];
    const double dy = 2.0 * (sc.y_hat - targets[ti]) / double(T);
    g.w_readout += dy * sc.h.transpose();
    g.b_readout += dy;
    Eigen::VectorXd dh = p.w_readout.transpose() * dy + dh_next;
    Eigen::VectorXd dc =
        dh.cwiseProduct(sc.gate[kO])
            .cwiseProduct((1.0 - sc.tc.array().square()).matrix()) +
        dc_next;
    const Eigen::VectorXd c_prev =
        ti > 0 ? caches[ti - 1].c : Eigen::VectorXd::Zero(cfg.hidden).eval();
    Eigen::VectorXd d_gate[4];
    d_gate[kF] = dc.cwiseProduct(c_prev);
    d_gate[kI] = dc.cwiseProduct(sc.gate[kG]);
    d_gate[kG] = dc.cwiseProduct(sc.gate[kI]);
    d_gate[kO] = dh.cwiseProduct(sc.tc);

    Eigen::VectorXd dq = Eigen::VectorXd::Zero(cfg.n_qubits);
    for (int gidx = 0; gidx < 4; ++gidx) {
      const auto& val = sc.gate[gidx].array();
      // d(loss)/d(pre-activation): sigmoid' for f/i/o, tanh' for g.
      Eigen::VectorXd da;
      if (gidx == kG) {
        da = d_gate[gidx].array() * (1.0 - val.square());
      } else {
        da = d_gate[gidx].array() * val * (1.0 - val);
      }
      g.W_out += da * sc.expect[gidx].transpose();
      if (cfg.output_bias) g.b_out += da;
      const Eigen::VectorXd dE = p.W_out.transpose() * da;
      const Eigen::VectorXd dtheta_flat = sc.jac[gidx].d_theta.transpose() * dE;
      g.theta[gidx] += Eigen::Map<const Eigen::MatrixXd>(
                           dtheta_flat.data(), cfg.n_qubits, cfg.n_layers)
                           .transpose();
      dq += sc.jac[gidx].d_q.transpose() * dE;
    }
    g.W_in += dq * sc.v.transpose();
    if (cfg.input_bias) g.b_in += dq;
    const Eigen::VectorXd dv = p.W_in.transpose() * dq;
    dh_next = dv.head(cfg.hidden);
    dc_next = dc.cwiseProduct(sc.gate[kF]);
  }
  return g;
}

struct AdamSlots {
  Grads m, v;
  int step = 0;
  explicit AdamSlots(const QlstmConfig& cfg)
      : m(Grads::zeros(cfg)), v(Grads::zeros(cfg)) {}
};

inline void adam_step(QlstmParams& p, const Grads& g, AdamSlots& slots,
                      const optim::AdamSpec& spec) {
  ++slots.step;
  const int t = slots.step;
  optim::adam_update(p.W_in, g.W_in, slots.m.W_in, slots.v.W_in, t, spec);
  if (p.config.input_bias) {
    optim::adam_update(p.b_in, g.b_in, slots.m.b_in, slots.v.b_in, t, spec);
  }
  for (int gidx = 0; gidx < 4; ++gidx) {
    optim::adam_update(theta_of(p, gidx), g.theta[gidx], slots.m.theta[gidx],
                       slots.v.theta[gidx], t, spec);
  }
  optim::adam_update(p.W_out, g.W_out, slots.m.W_out, slots.v.W_out, t, spec);
  if (p.config.output_bias) {
    optim::adam_update(p.b_out, g.b_out, slots.m.b_out, slots.v.b_out, t, spec);
  }
  optim::adam_update(p.w_readout, g.w_readout, slots.m.w_readout,
                     slots.v.w_readout, t, spec);
  optim::adam_update_scalar(p.b_readout, g.b_readout, slots.m.b_readout,
                            slots.v.b_readout, t, spec);
}

}  // namespace detail

struct TrainResult {
  QlstmParams params;
  double train_seconds = 0.0;
  std::vector<double> loss_curve;
  bool diverged = false;
};

inline long count_qlstm_params(int hidden, int d_in, int n_qubits,
                               int n_layers, bool input_bias = true,
                               bool output_bias = true) {
  if (hidden < 1 || d_in < 1 || n_qubits < 1 || n_layers < 1) {
    throw std::invalid_argument("count_qlstm_params: sizes must be >= 1");
  }
  long count = long(n_qubits) * (hidden + d_in);
  if (input_bias) count += n_qubits;
  count += 4L * n_layers * n_qubits;
  count += long(hidden) * n_qubits;
  if (output_bias) count += hidden;
  count += hidden + 1;
  return count;
}

/// Adam training over the train view; window layout as in train_lstm.
inline TrainResult train_qlstm(const ts::SeriesView& train,
                               const lstm::TrainSpec& spec,
                               const QlstmConfig& cfg) {
  if (cfg.d_in != 1) {
    throw std::invalid_argument("train_qlstm: only scalar inputs supported");
  }
  const std::size_t total = train.length();
  const auto windows = lstm::detail::make_windows(total, spec.window);
  if (windows.empty() || total < 2) {
    throw std::invalid_argument("train_qlstm: train view too short");
  }
  TrainResult result;
  result.params = QlstmParams::init(cfg, spec.seed);
  optim::AdamSpec adam{spec.learning_rate, spec.beta1, spec.beta2, spec.eps};
  detail::AdamSlots slots(cfg);

  auto eval_mean_loss = [&](const QlstmParams& p) {
    double acc = 0.0;
    for (const auto& [start, len] : windows) {
      const auto caches =
          detail::forward_window(p, train.u.subspan(start, len), false);
      acc += detail::window_loss(caches, train.y.subspan(start, len));
    }
    return acc / double(windows.size());
  };
  result.loss_curve.push_back(eval_mean_loss(result.params));

  std::vector<std::size_t> order(windows.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  rng::RandomStream shuffle_stream(
      rng::derive_seed(spec.seed, "qlstm-shuffle"));

  QlstmParams checkpoint = result.params;
  const auto start_time = std::chrono::steady_clock::now();
  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    shuffle_stream.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t k : order) {
      const auto [start, len] = windows[k];
      const auto caches = detail::forward_window(
          result.params, train.u.subspan(start, len), true);
      const double loss =
          detail::window_loss(caches, train.y.subspan(start, len));
      if (!std::isfinite(loss)) {
        result.params = checkpoint;
        result.diverged = true;
        result.train_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          start_time)
                .count();
        return result;
      }
      epoch_loss += loss;
      const detail::Grads grads = detail::backward_window(
          result.params, caches, train.y.subspan(start, len));
      detail::adam_step(result.params, grads, slots, adam);
    }
    result.loss_curve.push_back(epoch_loss / double(windows.size()));
    checkpoint = result.params;
  }
  result.train_seconds = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start_time)
                             .count();
  return result;
}

/// Deterministic rollout over a view (inputs u only).
inline Eigen::VectorXd predict_qlstm(const QlstmParams& p,
                                     const ts::SeriesView& view) {
  const auto caches = detail::forward_window(p, view.u, false);
  Eigen::VectorXd y_hat(caches.size());
  for (std::size_t t = 0; t < caches.size(); ++t) y_hat[t] = caches[t].y_hat;
  return y_hat;
}

}  // namespace narmabench::qlstm
