#include "qk/ir/unitary.hpp"

#include <cmath>

namespace qk::ir {

namespace {

using std::complex;
constexpr complex<double> I{0.0, 1.0};

Eigen::Matrix2cd mat2(complex<double> a, complex<double> b, complex<double> c,
                      complex<double> d) {
  Eigen::Matrix2cd m;
  m << a, b, c, d;
  return m;
}

}  // namespace

Eigen::Matrix2cd gate_matrix_1q(GateKind k, const std::vector<double>& p) {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  switch (k) {
    case GateKind::H:
      return mat2(inv_sqrt2, inv_sqrt2, inv_sqrt2, -inv_sqrt2);
    case GateKind::X:
      return mat2(0, 1, 1, 0);
    case GateKind::Y:
      return mat2(0, -I, I, 0);
    case GateKind::Z:
      return mat2(1, 0, 0, -1);
    case GateKind::S:
      return mat2(1, 0, 0, I);
    case GateKind::Sdg:
      return mat2(1, 0, 0, -I);
    case GateKind::T:
      return mat2(1, 0, 0, std::exp(I * (M_PI / 4)));
    case GateKind::Tdg:
      return mat2(1, 0, 0, std::exp(-I * (M_PI / 4)));
    case GateKind::Rx: {
      const double h = p[0] / 2;
      return mat2(std::cos(h), -I * std::sin(h), -I * std::sin(h), std::cos(h));
    }
    case GateKind::Ry: {
      const double h = p[0] / 2;
      return mat2(std::cos(h), -std::sin(h), std::sin(h), std::cos(h));
    }
    case GateKind::Rz: {
      const double h = p[0] / 2;
      return mat2(std::exp(-I * h), 0, 0, std::exp(I * h));
    }
    case GateKind::U1:
      return mat2(1, 0, 0, std::exp(I * p[0]));
    case GateKind::U3: {
      const double th = p[0] / 2, phi = p[1], lam = p[2];
      return mat2(std::cos(th), -std::exp(I * lam) * std::sin(th),
                  std::exp(I * phi) * std::sin(th),
                  std::exp(I * (phi + lam)) * std::cos(th));
    }
    default:
      throw NonUnitaryCircuit("no single-qubit matrix for " + gate_name(k));
  }
}

Eigen::Matrix4cd gate_matrix_2q(GateKind k, const std::vector<double>& p) {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Identity();
  switch (k) {
    case GateKind::CX:
    case GateKind::CY:
    case GateKind::CZ:
    case GateKind::CH:
    case GateKind::CRz: {
      GateKind base;
      switch (k) {
        case GateKind::CX: base = GateKind::X; break;
        case GateKind::CY: base = GateKind::Y; break;
        case GateKind::CZ: base = GateKind::Z; break;
        case GateKind::CH: base = GateKind::H; break;
        default: base = GateKind::Rz; break;
      }
      m.block<2, 2>(2, 2) = gate_matrix_1q(base, p);
      return m;
    }
    case GateKind::CPhase:
      m(3, 3) = std::exp(I * p[0]);
      return m;
    case GateKind::Swap:
      m.setZero();
      m(0, 0) = m(3, 3) = 1;
      m(1, 2) = m(2, 1) = 1;
      return m;
    default:
      throw NonUnitaryCircuit("no two-qubit matrix for " + gate_name(k));
  }
}

void apply_to_columns(Eigen::MatrixXcd& m, const Instruction& inst, std::uint32_t n) {
  for (const auto& q : inst.qubits())
    if (q.index >= n)
      throw QubitOutOfRange("qubit q" + std::to_string(q.index) +
                            " outside width " + std::to_string(n));
  const Eigen::Index dim = m.rows();
  const Eigen::Index cols = m.cols();
  if (gate_arity(inst.kind()) == 1) {
    const Eigen::Matrix2cd g = gate_matrix_1q(inst.kind(), inst.params());
    const Eigen::Index bit = Eigen::Index{1} << inst.qubits()[0].index;
    for (Eigen::Index col = 0; col < cols; ++col) {
      for (Eigen::Index i = 0; i < dim; ++i) {
        if (i & bit) continue;
        const auto a0 = m(i, col);
        const auto a1 = m(i | bit, col);
        m(i, col) = g(0, 0) * a0 + g(0, 1) * a1;
        m(i | bit, col) = g(1, 0) * a0 + g(1, 1) * a1;
      }
    }
  } else {
    const Eigen::Matrix4cd g = gate_matrix_2q(inst.kind(), inst.params());
    const Eigen::Index cbit = Eigen::Index{1} << inst.qubits()[0].index;
    const Eigen::Index tbit = Eigen::Index{1} << inst.qubits()[1].index;
    for (Eigen::Index col = 0; col < cols; ++col) {
      for (Eigen::Index i = 0; i < dim; ++i) {
        if ((i & cbit) || (i & tbit)) continue;
        Eigen::Index idx[4] = {i, i | tbit, i | cbit, i | cbit | tbit};
        complex<double> amp[4];
        for (int r = 0; r < 4; ++r) amp[r] = m(idx[r], col);
        for (int r = 0; r < 4; ++r) {
          complex<double> acc = 0;
          for (int s = 0; s < 4; ++s) acc += g(r, s) * amp[s];
          m(idx[r], col) = acc;
        }
      }
    }
  }
}

UnitaryMatrix to_unitary(const std::vector<Instruction>& instructions,
                         std::uint32_t n) {
  if (n == 0 || n > 10)
    throw Error("to_unitary supports 1..10 qubits, got " + std::to_string(n));
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
  for (const auto& inst : instructions) {
    if (!is_unitary_gate(inst.kind()))
      throw NonUnitaryCircuit(gate_name(inst.kind()) + " has no unitary");
    apply_to_columns(u, inst, n);
  }
  return u;
}

UnitaryMatrix to_unitary(const Circuit& c, std::uint32_t n) {
  return to_unitary(c.flatten(), n);
}

bool is_unitary(const UnitaryMatrix& u, double tol) {
  if (u.rows() != u.cols()) return false;
  const UnitaryMatrix p = u.adjoint() * u;
  return max_abs_diff(p, UnitaryMatrix::Identity(u.rows(), u.cols())) < tol;
}

bool phase_equivalent(const UnitaryMatrix& u, const UnitaryMatrix& v, double tol) {
  if (u.rows() != v.rows() || u.cols() != v.cols()) return false;
  const UnitaryMatrix m = u.adjoint() * v;
  const complex<double> c = m.trace() / static_cast<double>(m.rows());
  UnitaryMatrix scaled = UnitaryMatrix::Identity(m.rows(), m.cols());
  scaled *= c;
  return max_abs_diff(m, scaled) < tol;
}

double max_abs_diff(const UnitaryMatrix& u, const UnitaryMatrix& v) {
  return (u - v).cwiseAbs().maxCoeff();
}

ZyzAngles zyz_decompose(const Eigen::Matrix2cd& u) {
  const complex<double> det = u(0, 0) * u(1, 1) - u(0, 1) * u(1, 0);
  const double alpha = std::arg(det) / 2;
  const Eigen::Matrix2cd v = std::exp(-I * alpha) * u;
  const complex<double> a = v(0, 0);
  const complex<double> b = v(1, 0);
  const double gamma = 2 * std::atan2(std::abs(b), std::abs(a));
  double beta, delta;
  if (std::abs(b) < 1e-14) {
    beta = -2 * std::arg(a);
    delta = 0;
  } else if (std::abs(a) < 1e-14) {
    beta = 2 * std::arg(b);
    delta = 0;
  } else {
    beta = std::arg(b) - std::arg(a);
    delta = -std::arg(b) - std::arg(a);
  }
  return {alpha, beta, gamma, delta};
}

}  // namespace qk::ir
