#pragma once

#include <vector>

#include "qk/errors.hpp"
#include "qk/ir/instruction.hpp"
#include "qk/ir/unitary.hpp"

namespace qk::frontend {

class NotUnitary : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Synthesis is limited to registers of up to three qubits.
class TooManyQubitsForSynthesis : public Error {
 public:
  using Error::Error;
};

// Reindexes a matrix between the two bit-order conventions: entry (i, j)
// moves to (rev(i), rev(j)) where rev reverses the qubit bits of a basis
// index. Involutive.
ir::UnitaryMatrix bit_reverse_unitary(const ir::UnitaryMatrix& u);

// Decomposes an arbitrary unitary on 1..3 qubits into native gates acting on
// qubits 0..k-1 (little-endian row convention). The reconstruction is exact
// including global phase; an identity input yields an empty sequence.
// `tolerance` bounds the accepted deviation of u from unitarity.
std::vector<ir::Instruction> decompose_unitary(const ir::UnitaryMatrix& u,
                                               double tolerance = 1e-8);

}  // namespace qk::frontend
