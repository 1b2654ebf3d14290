#include "qk/frontend/decompose.hpp"

#include <bit>
#include <cmath>
#include <complex>

#include "qk/ir/circuit.hpp"
#include "qk/ir/transforms.hpp"

namespace qk::frontend {

namespace {

using complexd = std::complex<double>;

int log2_exact(Eigen::Index d) {
  int k = 0;
  while ((Eigen::Index{1} << k) < d) ++k;
  if ((Eigen::Index{1} << k) != d) return -1;
  return k;
}

std::uint32_t reverse_bits(std::uint32_t x, int k) {
  std::uint32_t r = 0;
  for (int i = 0; i < k; ++i)
    if (x & (1u << i)) r |= 1u << (k - 1 - i);
  return r;
}

// A two-level unitary: acts as `m` on basis states (a, b), identity elsewhere.
struct TwoLevel {
  int a, b;
  Eigen::Matrix2cd m;
};

// Exact single-qubit realization of an arbitrary 2x2 unitary, including the
// global phase (Rz(-2a) followed by U1(2a) is e^{ia} times identity).
std::vector<ir::Instruction> exact_1q(const Eigen::Matrix2cd& u,
                                      std::uint32_t q) {
  constexpr double eps = 1e-15;
  ir::ZyzAngles z = ir::zyz_decompose(u);
  std::vector<ir::Instruction> out;
  if (std::abs(z.delta) > eps)
    out.push_back(ir::rot(ir::GateKind::Rz, q, z.delta));
  if (std::abs(z.gamma) > eps)
    out.push_back(ir::rot(ir::GateKind::Ry, q, z.gamma));
  if (std::abs(z.beta) > eps)
    out.push_back(ir::rot(ir::GateKind::Rz, q, z.beta));
  if (std::abs(z.alpha) > eps) {
    out.push_back(ir::rot(ir::GateKind::Rz, q, -2 * z.alpha));
    out.push_back(ir::rot(ir::GateKind::U1, q, 2 * z.alpha));
  }
  return out;
}

// Multi-controlled arbitrary 2x2, phase-exact. Polarity false means the
// control fires on |0>.
void emit_mcu(std::vector<ir::Instruction>& out, const Eigen::Matrix2cd& u,
              std::uint32_t target, const std::vector<ir::QubitRef>& controls,
              const std::vector<bool>& polarity) {
  ir::Circuit core("mcu");
  for (const auto& inst : exact_1q(u, target)) core.add(inst);
  for (const auto& c : controls) core = ir::controlled(core, c);
  std::vector<ir::Instruction> flips;
  for (std::size_t i = 0; i < controls.size(); ++i)
    if (!polarity[i])
      flips.push_back(ir::gate(ir::GateKind::X, controls[i].index));
  for (const auto& f : flips) out.push_back(f);
  for (const auto& inst : core.flatten()) out.push_back(inst);
  for (const auto& f : flips) out.push_back(f);
}

void emit_mcx(std::vector<ir::Instruction>& out, std::uint32_t target,
              const std::vector<ir::QubitRef>& controls,
              const std::vector<bool>& polarity) {
  auto seq =
      ir::multi_controlled(ir::gate(ir::GateKind::X, target), controls, polarity);
  out.insert(out.end(), seq.begin(), seq.end());
}

// Synthesizes one two-level unitary on an n-qubit register via a Gray-code
// chain: relabel `a` next to `b` with multi-controlled X steps, apply the 2x2
// as a multi-controlled gate, undo the chain.
void emit_two_level(std::vector<ir::Instruction>& out, const TwoLevel& tl,
                    int n) {
  int diff = tl.a ^ tl.b;
  auto controls_for = [&](int state, int skip_bit) {
    std::vector<ir::QubitRef> ctrls;
    std::vector<bool> pol;
    for (int j = 0; j < n; ++j) {
      if (j == skip_bit) continue;
      ctrls.push_back(ir::QubitRef{static_cast<std::uint32_t>(j)});
      pol.push_back((state >> j) & 1);
    }
    return std::make_pair(ctrls, pol);
  };

  std::vector<int> bits;
  for (int j = 0; j < n; ++j)
    if ((diff >> j) & 1) bits.push_back(j);

  // Walk a -> g by flipping all differing bits except the last.
  std::vector<std::pair<int, int>> chain;  // (state before flip, bit)
  int g = tl.a;
  for (std::size_t i = 0; i + 1 < bits.size(); ++i) {
    chain.push_back({g, bits[i]});
    g ^= 1 << bits[i];
  }
  int p_last = bits.back();

  for (const auto& [state, bit] : chain) {
    auto [ctrls, pol] = controls_for(state, bit);
    emit_mcx(out, static_cast<std::uint32_t>(bit), ctrls, pol);
  }

  // g and b differ only at p_last; whichever holds a 0 there plays local |0>.
  Eigen::Matrix2cd local = tl.m;
  if ((g >> p_last) & 1) {
    local << tl.m(1, 1), tl.m(1, 0), tl.m(0, 1), tl.m(0, 0);
  }
  auto [ctrls, pol] = controls_for(g, p_last);
  emit_mcu(out, local, static_cast<std::uint32_t>(p_last), ctrls, pol);

  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    auto [ctrls2, pol2] = controls_for(it->first, it->second);
    emit_mcx(out, static_cast<std::uint32_t>(it->second), ctrls2, pol2);
  }
}

}  // namespace

ir::UnitaryMatrix bit_reverse_unitary(const ir::UnitaryMatrix& u) {
  int k = log2_exact(u.rows());
  if (k < 0 || u.rows() != u.cols())
    throw DimensionMismatch(
        "matrix must be square with power-of-two dimension");
  ir::UnitaryMatrix out(u.rows(), u.cols());
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    for (Eigen::Index j = 0; j < u.cols(); ++j)
      out(reverse_bits(static_cast<std::uint32_t>(i), k),
          reverse_bits(static_cast<std::uint32_t>(j), k)) = u(i, j);
  return out;
}

std::vector<ir::Instruction> decompose_unitary(const ir::UnitaryMatrix& u,
                                               double tolerance) {
  const Eigen::Index d = u.rows();
  if (u.cols() != d || d < 2)
    throw DimensionMismatch(
        "matrix must be square with power-of-two dimension");
  int n = log2_exact(d);
  if (n < 0)
    throw DimensionMismatch(
        "matrix must be square with power-of-two dimension");
  if (n > 3)
    throw TooManyQubitsForSynthesis("synthesis supports at most 3 qubits, got " +
                            std::to_string(n));
  double dev = (u.adjoint() * u - ir::UnitaryMatrix::Identity(d, d))
                   .cwiseAbs()
                   .maxCoeff();
  if (dev > std::max(tolerance, 1e-12))
    throw NotUnitary("matrix deviates from unitarity by " +
                           std::to_string(dev));

  // QR by two-level rotations: W_k ... W_1 U = I, so U = W_1^ ... W_k^ and
  // the circuit emits daggers in reverse recording order.
  ir::UnitaryMatrix m = u;
  std::vector<TwoLevel> rots;
  auto apply_rows = [&](int a, int b, const Eigen::Matrix2cd& w) {
    Eigen::RowVectorXcd ra = m.row(a), rb = m.row(b);
    m.row(a) = w(0, 0) * ra + w(0, 1) * rb;
    m.row(b) = w(1, 0) * ra + w(1, 1) * rb;
  };

  for (Eigen::Index c = 0; c < d; ++c) {
    for (Eigen::Index r = d - 1; r > c; --r) {
      if (std::abs(m(r, c)) <= 1e-14) continue;
      complexd u0 = m(c, c), v = m(r, c);
      double nrm = std::sqrt(std::norm(u0) + std::norm(v));
      Eigen::Matrix2cd w;
      w << std::conj(u0) / nrm, std::conj(v) / nrm, -v / nrm, u0 / nrm;
      apply_rows(static_cast<int>(c), static_cast<int>(r), w);
      rots.push_back({static_cast<int>(c), static_cast<int>(r), w});
    }
    double phase = std::arg(m(c, c));
    if (std::abs(phase) > 1e-14) {
      Eigen::Matrix2cd w = Eigen::Matrix2cd::Identity();
      int a, b;
      if (c < d - 1) {
        a = static_cast<int>(c);
        b = static_cast<int>(c) + 1;
        w(0, 0) = std::exp(complexd(0, -phase));
      } else {
        a = static_cast<int>(d) - 2;
        b = static_cast<int>(d) - 1;
        w(1, 1) = std::exp(complexd(0, -phase));
      }
      apply_rows(a, b, w);
      rots.push_back({a, b, w});
    }
  }
  double residual =
      (m - ir::UnitaryMatrix::Identity(d, d)).cwiseAbs().maxCoeff();
  if (residual > 1e-9)
    throw NotUnitary("triangularization failed, residual " +
                           std::to_string(residual));

  std::vector<ir::Instruction> out;
  for (auto it = rots.rbegin(); it != rots.rend(); ++it) {
    TwoLevel tl{it->a, it->b, it->m.adjoint()};
    emit_two_level(out, tl, n);
  }
  return out;
}

}  // namespace qk::frontend
