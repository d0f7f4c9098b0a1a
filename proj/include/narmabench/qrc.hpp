#pragma once

// Feedback-driven quantum reservoir. Each time step applies, in order,
//   1. the input block on qubits (0, 1), angle a_in * u_t,
//   2. one feedback block per qubit j on the ring pair (j, (j+1) mod N),
//      angle a_fb * (1 - 2 * bit_j) from the previous measurement,
//   3. the fixed Haar-random reservoir unitary,
// then measures all qubits, collapsing the state; the measured bits feed the
// next step. Features are per-step shot averages of the mapped bits
// (bit 0 -> +1, bit 1 -> -1, the sigma_z eigenvalue convention).
//
// Both blocks share one gate structure, applied to an ordered qubit pair
// (a, b) with a as the block's low bit:
//   CNOT(a->b) . Rz(angle) on b . CNOT(a->b) . Rx(angle) on both,
// rightmost factor first. Every shot is simulated as an independent
// pure-state trajectory with its own random stream derived from
// (seed, shot index), so results do not depend on shot execution order.

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "narmabench/features.hpp"
#include "narmabench/quantum.hpp"
#include "narmabench/rng.hpp"

namespace narmabench::qrc {

struct QrcConfig {
  int n_qubits = 4;
  double a_in = 1.0;
  double a_fb = 2.2;
  int n_shots = 1000;
  std::uint64_t seed = 0;
  std::size_t washout = 100;
};

struct QrcTrace {
  Eigen::MatrixXd features;  // T x N shot-averaged mapped bits, in [-1, 1]
  Eigen::MatrixXd exact_features;       // T x N pre-collapse <sigma_z> means
                                        // (empty unless requested)
  std::vector<std::uint8_t> shot_bits;  // T*shots*N bits (empty unless
                                        // requested), index [(t*S + s)*N + i]
  QrcConfig config;
};

struct RunOptions {
  bool record_exact = false;     // also average exact pre-collapse <sigma_z>
  bool record_shot_bits = false;
  std::vector<std::uint8_t> initial_bits;  // empty = all zeros
};

namespace detail {

/// The shared two-qubit gate block on a 2-qubit register, as a 4x4 matrix
/// in the (low bit, high bit) basis of quantum.hpp. Built by pushing basis
/// states through the gate sequence.
inline qc::Unitary two_qubit_block(double angle) {
  qc::Unitary u;
  u.n_qubits = 2;
  u.matrix.resize(4, 4);
  const Eigen::Matrix2cd rot_x = qc::rx(angle);
  const Eigen::Matrix2cd rot_z = qc::rz(angle);
  for (int col = 0; col < 4; ++col) {
    qc::QuantumState s = qc::QuantumState::zero(2);
    s.amplitudes.setZero();
    s.amplitudes[col] = 1.0;
    qc::apply_one_qubit(s, rot_x, 0);
    qc::apply_one_qubit(s, rot_x, 1);
    qc::apply_cnot(s, 0, 1);
    qc::apply_one_qubit(s, rot_z, 1);
    qc::apply_cnot(s, 0, 1);
    u.matrix.col(col) = s.amplitudes;
  }
  return u;
}

}  // namespace detail

inline qc::Unitary input_block(double u, double a_in) {
  return detail::two_qubit_block(a_in * u);
}

inline qc::Unitary feedback_block(int bit, double a_fb) {
  if (bit != 0 && bit != 1) {
    throw std::invalid_argument("feedback_block: bit must be 0 or 1");
  }
  return detail::two_qubit_block(a_fb * (bit == 0 ? 1.0 : -1.0));
}

/// Fixed reservoir unitary for a config.
inline qc::Unitary reservoir_unitary(const QrcConfig& cfg) {
  return qc::haar_random_unitary(cfg.n_qubits,
                                 rng::derive_seed(cfg.seed, "qrc-haar"));
}

/// One pre-measurement step: input block, feedback blocks for bits
/// m0..m{N-1} in that order, then the reservoir unitary.
inline void step(qc::QuantumState& state, double u_t,
                 std::span<const std::uint8_t> prev_bits,
                 const qc::Unitary& reservoir, const QrcConfig& cfg) {
  const int n = cfg.n_qubits;
  if (static_cast<int>(prev_bits.size()) != n) {
    throw std::invalid_argument("qrc::step: bit vector length mismatch");
  }
  if (state.n_qubits != n || reservoir.matrix.rows() != state.dim()) {
    throw std::invalid_argument("qrc::step: dimension mismatch");
  }
  const Eigen::Matrix4cd in_block = input_block(u_t, cfg.a_in).matrix;
  qc::apply_two_qubit(state, in_block, 0, 1);
  for (int j = 0; j < n; ++j) {
    const Eigen::Matrix4cd fb = feedback_block(prev_bits[j], cfg.a_fb).matrix;
    qc::apply_two_qubit(state, fb, j, (j + 1) % n);
  }
  qc::apply_unitary(state, reservoir);
}

/// Full reservoir run over an input sequence, shot-averaged.
inline QrcTrace run_reservoir(std::span<const double> u, const QrcConfig& cfg,
                              const RunOptions& opts = {}) {
  if (u.empty()) throw std::invalid_argument("qrc: empty input sequence");
  if (cfg.n_qubits < 2) throw std::invalid_argument("qrc: need >= 2 qubits");
  if (cfg.n_shots < 1) throw std::invalid_argument("qrc: need >= 1 shot");
  const int n = cfg.n_qubits;
  const Eigen::Index T = static_cast<Eigen::Index>(u.size());
  const int shots = cfg.n_shots;

  std::vector<std::uint8_t> init_bits = opts.initial_bits;
  if (init_bits.empty()) init_bits.assign(n, 0);
  if (static_cast<int>(init_bits.size()) != n) {
    throw std::invalid_argument("qrc: initial bit vector length mismatch");
  }

  const qc::Unitary reservoir = reservoir_unitary(cfg);
  // Blocks depend only on u_t and on the fed-back bit, so precompute one
  // input block per step and the two possible feedback blocks.
  std::vector<Eigen::Matrix4cd> in_blocks(T);
  for (Eigen::Index t = 0; t < T; ++t) {
    in_blocks[t] = input_block(u[t], cfg.a_in).matrix;
  }
  const Eigen::Matrix4cd fb_block[2] = {feedback_block(0, cfg.a_fb).matrix,
                                        feedback_block(1, cfg.a_fb).matrix};

  QrcTrace trace;
  trace.config = cfg;

  // Integer bit counts make the shot reduction exact and order-independent.
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts =
      Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(T, n);
  if (opts.record_exact) trace.exact_features = Eigen::MatrixXd::Zero(T, n);
  if (opts.record_shot_bits) {
    trace.shot_bits.assign(static_cast<std::size_t>(T) * shots * n, 0);
  }

  Eigen::VectorXcd scratch(Eigen::Index{1} << n);
  for (int s = 0; s < shots; ++s) {
    rng::RandomStream stream(rng::derive_seed(cfg.seed, "qrc-shot",
                                              static_cast<std::uint64_t>(s)));
    qc::QuantumState state = qc::QuantumState::zero(n);
    std::vector<std::uint8_t> bits = init_bits;
    for (Eigen::Index t = 0; t < T; ++t) {
      qc::apply_two_qubit(state, in_blocks[t], 0, 1);
      for (int j = 0; j < n; ++j) {
        qc::apply_two_qubit(state, fb_block[bits[j]], j, (j + 1) % n);
      }
      scratch.noalias() = reservoir.matrix * state.amplitudes;
      state.amplitudes.swap(scratch);
      if (opts.record_exact) {
        const std::vector<double> z = qc::pauli_z_expectations(state);
        for (int i = 0; i < n; ++i) trace.exact_features(t, i) += z[i];
      }
      bits = qc::measure_all(state, stream);
      for (int i = 0; i < n; ++i) counts(t, i) += bits[i];
      if (opts.record_shot_bits) {
        const std::size_t base =
            (static_cast<std::size_t>(t) * shots + s) * static_cast<std::size_t>(n);
        for (int i = 0; i < n; ++i) trace.shot_bits[base + i] = bits[i];
      }
    }
  }

  trace.features.resize(T, n);
  for (Eigen::Index t = 0; t < T; ++t) {
    for (int i = 0; i < n; ++i) {
      trace.features(t, i) =
          1.0 - 2.0 * static_cast<double>(counts(t, i)) / double(shots);
    }
  }
  if (opts.record_exact) trace.exact_features /= double(shots);
  return trace;
}

/// Trace rows with the bias column appended, ready for the linear readout.
inline ReservoirFeatures to_features(const QrcTrace& trace) {
  ReservoirFeatures out;
  const Eigen::Index T = trace.features.rows();
  const Eigen::Index n = trace.features.cols();
  out.X.resize(T, n + 1);
  out.X.leftCols(n) = trace.features;
  out.X.col(n).setOnes();
  out.washout = trace.config.washout;
  return out;
}

}  // namespace narmabench::qrc
