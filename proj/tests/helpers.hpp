#pragma once

// Shared test utilities: independent dense-matrix oracles for the gate
// machinery (kron-built, multiplied explicitly — never routed through the
// library's statevector updates) and small numeric helpers.

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <vector>

#include "narmabench/quantum.hpp"
#include "narmabench/rng.hpp"

namespace testutil {

using cd = std::complex<double>;

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a,
                             const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline Eigen::MatrixXcd identity(Eigen::Index dim) {
  return Eigen::MatrixXcd::Identity(dim, dim);
}

/// I (x) ... (x) gate (x) ... (x) I with `gate` at qubit `target` under the
/// low-bit-is-qubit-0 convention: kron factors run from high qubit to low.
inline Eigen::MatrixXcd embed_one_qubit(const Eigen::Matrix2cd& gate,
                                        int target, int n_qubits) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Ones(1, 1);
  for (int q = n_qubits - 1; q >= 0; --q) {
    out = q == target ? kron(out, gate) : kron(out, identity(2));
  }
  return out;
}

/// Dense CNOT with arbitrary control/target on n qubits, built entrywise
/// from the truth table.
inline Eigen::MatrixXcd dense_cnot(int control, int target, int n_qubits) {
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
  for (Eigen::Index z = 0; z < dim; ++z) {
    Eigen::Index dst = z;
    if ((z >> control) & 1) dst = z ^ (Eigen::Index{1} << target);
    out(dst, z) = 1.0;
  }
  return out;
}

/// Dense embedding of a 4x4 two-qubit matrix (basis index bit(a) + 2*bit(b))
/// onto qubits (a, b) of an n-qubit register, built entrywise.
inline Eigen::MatrixXcd embed_two_qubit(const Eigen::Matrix4cd& gate, int a,
                                        int b, int n_qubits) {
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
  for (Eigen::Index z = 0; z < dim; ++z) {
    const int la = static_cast<int>((z >> a) & 1);
    const int lb = static_cast<int>((z >> b) & 1);
    const int col = la + 2 * lb;
    const Eigen::Index base =
        z & ~((Eigen::Index{1} << a) | (Eigen::Index{1} << b));
    for (int row = 0; row < 4; ++row) {
      Eigen::Index dst = base;
      if (row & 1) dst |= Eigen::Index{1} << a;
      if (row & 2) dst |= Eigen::Index{1} << b;
      out(dst, z) += gate(row, col);
    }
  }
  return out;
}

/// The input/feedback block as an explicit 4x4 product:
/// CNOT . (Rz on pair-qubit 1) . CNOT . (Rx (x) Rx), rightmost factor first.
inline Eigen::Matrix4cd dense_block(double angle) {
  const Eigen::MatrixXcd rx2 =
      kron(narmabench::qc::rx(angle), narmabench::qc::rx(angle));
  const Eigen::MatrixXcd rz_hi =
      kron(narmabench::qc::rz(angle), identity(2));  // high bit = pair qubit 1
  const Eigen::MatrixXcd cnot = dense_cnot(0, 1, 2);
  return cnot * rz_hi * cnot * rx2;
}

inline Eigen::VectorXcd random_state(int n_qubits,
                                     narmabench::rng::RandomStream& stream) {
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  Eigen::VectorXcd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    v[i] = cd(stream.normal(), stream.normal());
  }
  v.normalize();
  return v;
}

inline double max_abs_diff(const Eigen::VectorXcd& a,
                           const Eigen::VectorXcd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace testutil
