#pragma once

// Dense statevector simulator for small qubit counts.
//
// Conventions, fixed here and asserted in the tests:
//   * qubit k is the k-th least significant bit of the basis-state index;
//   * Rx(theta) = exp(-i theta X / 2), Rz(theta) = exp(-i theta Z / 2);
//   * two-qubit unitaries on an ordered pair (a, b) are written in the basis
//     index = bit(a) + 2*bit(b), i.e. the first qubit of the pair is the
//     low bit of the 4-dimensional block.

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "narmabench/rng.hpp"

namespace narmabench::qc {

using cd = std::complex<double>;

struct QuantumState {
  Eigen::VectorXcd amplitudes;
  int n_qubits = 0;

  static QuantumState zero(int n_qubits) {
    QuantumState s;
    s.n_qubits = n_qubits;
    s.amplitudes = Eigen::VectorXcd::Zero(std::int64_t{1} << n_qubits);
    s.amplitudes[0] = 1.0;
    return s;
  }

  Eigen::Index dim() const { return amplitudes.size(); }
  double norm() const { return amplitudes.norm(); }
};

struct Unitary {
  Eigen::MatrixXcd matrix;
  int n_qubits = 0;
};

inline Eigen::Matrix2cd rx(double theta) {
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  Eigen::Matrix2cd m;
  m << cd(c, 0), cd(0, -s), cd(0, -s), cd(c, 0);
  return m;
}

inline Eigen::Matrix2cd rz(double theta) {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  m(0, 0) = std::exp(cd(0, -theta / 2.0));
  m(1, 1) = std::exp(cd(0, theta / 2.0));
  return m;
}

inline void apply_one_qubit(QuantumState& state, const Eigen::Matrix2cd& gate,
                            int target) {
  if (target < 0 || target >= state.n_qubits) {
    throw std::invalid_argument("apply_one_qubit: target out of range");
  }
  const std::size_t dim = static_cast<std::size_t>(state.dim());
  const std::size_t step = std::size_t{1} << target;
  cd* a = state.amplitudes.data();
  for (std::size_t base = 0; base < dim; base += 2 * step) {
    for (std::size_t off = 0; off < step; ++off) {
      const std::size_t i0 = base + off;
      const std::size_t i1 = i0 + step;
      const cd a0 = a[i0];
      const cd a1 = a[i1];
      a[i0] = gate(0, 0) * a0 + gate(0, 1) * a1;
      a[i1] = gate(1, 0) * a0 + gate(1, 1) * a1;
    }
  }
}

inline void apply_cnot(QuantumState& state, int control, int target) {
  if (control == target) {
    throw std::invalid_argument("apply_cnot: control equals target");
  }
  if (control < 0 || control >= state.n_qubits || target < 0 ||
      target >= state.n_qubits) {
    throw std::invalid_argument("apply_cnot: qubit index out of range");
  }
  const std::size_t dim = static_cast<std::size_t>(state.dim());
  const std::size_t cmask = std::size_t{1} << control;
  const std::size_t tmask = std::size_t{1} << target;
  cd* a = state.amplitudes.data();
  for (std::size_t z = 0; z < dim; ++z) {
    if ((z & cmask) && !(z & tmask)) {
      std::swap(a[z], a[z | tmask]);
    }
  }
}

/// Apply a 4x4 unitary to the ordered qubit pair (a, b); see the basis
/// convention at the top of this header.
inline void apply_two_qubit(QuantumState& state, const Eigen::Matrix4cd& gate,
                            int a, int b) {
  if (a == b) throw std::invalid_argument("apply_two_qubit: a equals b");
  if (a < 0 || a >= state.n_qubits || b < 0 || b >= state.n_qubits) {
    throw std::invalid_argument("apply_two_qubit: qubit index out of range");
  }
  const std::size_t dim = static_cast<std::size_t>(state.dim());
  const std::size_t ma = std::size_t{1} << a;
  const std::size_t mb = std::size_t{1} << b;
  cd* amp = state.amplitudes.data();
  for (std::size_t z = 0; z < dim; ++z) {
    if (z & (ma | mb)) continue;
    const std::size_t idx[4] = {z, z | ma, z | mb, z | ma | mb};
    const cd in[4] = {amp[idx[0]], amp[idx[1]], amp[idx[2]], amp[idx[3]]};
    for (int r = 0; r < 4; ++r) {
      amp[idx[r]] = gate(r, 0) * in[0] + gate(r, 1) * in[1] +
                    gate(r, 2) * in[2] + gate(r, 3) * in[3];
    }
  }
}

/// Full 2^N x 2^N unitary application.
inline void apply_unitary(QuantumState& state, const Unitary& u) {
  if (u.matrix.rows() != state.dim()) {
    throw std::invalid_argument("apply_unitary: dimension mismatch");
  }
  state.amplitudes = (u.matrix * state.amplitudes).eval();
}

/// Haar-distributed unitary: complex Ginibre matrix, QR decomposition, then
/// each column multiplied by the phase of the matching diagonal entry of R
/// (which normalizes R's diagonal to be real positive).
inline Unitary haar_random_unitary(int n_qubits, std::uint64_t seed) {
  if (n_qubits < 1) {
    throw std::invalid_argument("haar_random_unitary: need at least 1 qubit");
  }
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  rng::RandomStream stream(rng::derive_seed(seed, "haar-ginibre"));
  Eigen::MatrixXcd g(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      g(i, j) = cd(stream.normal(), stream.normal());
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::VectorXcd diag = qr.matrixQR().diagonal();
  for (Eigen::Index j = 0; j < dim; ++j) {
    const double mag = std::abs(diag[j]);
    q.col(j) *= mag > 0.0 ? diag[j] / mag : cd(1.0, 0.0);
  }
  return Unitary{std::move(q), n_qubits};
}

/// Sample a computational-basis outcome with Born probabilities and collapse
/// the state onto it. Returns one classical bit per qubit, bit i for qubit i.
inline std::vector<std::uint8_t> measure_all(QuantumState& state,
                                             rng::RandomStream& stream) {
  const std::size_t dim = static_cast<std::size_t>(state.dim());
  const cd* a = state.amplitudes.data();
  double total = 0.0;
  for (std::size_t z = 0; z < dim; ++z) total += std::norm(a[z]);
  const double x = stream.uniform() * total;
  double cum = 0.0;
  std::size_t outcome = dim - 1;
  for (std::size_t z = 0; z < dim; ++z) {
    cum += std::norm(a[z]);
    if (x < cum) {
      outcome = z;
      break;
    }
  }
  state.amplitudes.setZero();
  state.amplitudes[static_cast<Eigen::Index>(outcome)] = 1.0;
  std::vector<std::uint8_t> bits(state.n_qubits);
  for (int i = 0; i < state.n_qubits; ++i) {
    bits[i] = static_cast<std::uint8_t>((outcome >> i) & 1u);
  }
  return bits;
}

/// Exact per-qubit <sigma_z>.
inline std::vector<double> pauli_z_expectations(const QuantumState& state) {
  const std::size_t dim = static_cast<std::size_t>(state.dim());
  const cd* a = state.amplitudes.data();
  std::vector<double> expect(state.n_qubits, 0.0);
  for (std::size_t z = 0; z < dim; ++z) {
    const double p = std::norm(a[z]);
    if (p == 0.0) continue;
    for (int i = 0; i < state.n_qubits; ++i) {
      expect[i] += ((z >> i) & 1u) ? -p : p;
    }
  }
  return expect;
}

}  // namespace narmabench::qc
