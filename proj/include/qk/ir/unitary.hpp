#pragma once

#include <Eigen/Dense>
#include <complex>

#include "qk/ir/circuit.hpp"

namespace qk::ir {

// Dense complex matrix in the computational basis. Basis index convention is
// little-endian throughout: bit i of the index is qubit i, so qubit 0 is the
// least-significant bit.
using UnitaryMatrix = Eigen::MatrixXcd;

class NonUnitaryCircuit : public Error {
 public:
  using Error::Error;
};

class QubitOutOfRange : public Error {
 public:
  using Error::Error;
};

// 2x2 matrix of a single-qubit unitary kind.
Eigen::Matrix2cd gate_matrix_1q(GateKind k, const std::vector<double>& params);

// 4x4 matrix of a two-qubit kind, basis index (control_bit << 1) | target_bit.
Eigen::Matrix4cd gate_matrix_2q(GateKind k, const std::vector<double>& params);

// Applies one unitary instruction to each column of m, where columns are
// statevectors over n qubits. Shared by to_unitary and the simulator tests.
void apply_to_columns(Eigen::MatrixXcd& m, const Instruction& inst, std::uint32_t n);

// Full 2^n x 2^n matrix of the circuit. Throws NonUnitaryCircuit on Measure
// or Reset and QubitOutOfRange when an operand index is >= n. n is capped at
// 10 to keep the dense representation tractable.
UnitaryMatrix to_unitary(const Circuit& c, std::uint32_t n);
UnitaryMatrix to_unitary(const std::vector<Instruction>& instructions, std::uint32_t n);

bool is_unitary(const UnitaryMatrix& u, double tol = 1e-10);

// True when u and v are equal up to a global phase: u_dagger * v is within
// tol of a scalar multiple of the identity.
bool phase_equivalent(const UnitaryMatrix& u, const UnitaryMatrix& v, double tol);

// Largest absolute entry of u - v.
double max_abs_diff(const UnitaryMatrix& u, const UnitaryMatrix& v);

// Euler angles of a single-qubit unitary:
//   u == exp(i*alpha) * Rz(beta) * Ry(gamma) * Rz(delta)
// gamma is in [0, pi]; the degenerate cases gamma ~ 0 or pi pin delta to 0.
struct ZyzAngles {
  double alpha;
  double beta;
  double gamma;
  double delta;
};
ZyzAngles zyz_decompose(const Eigen::Matrix2cd& u);

}  // namespace qk::ir
