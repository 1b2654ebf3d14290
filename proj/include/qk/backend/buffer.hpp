#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "qk/errors.hpp"

namespace qk::backend {

class InvalidAllocation : public Error {
 public:
  using Error::Error;
};

class EmptyCounts : public Error {
 public:
  using Error::Error;
};

// Register of qubits plus the results of the last execution. Count keys are
// bitstrings over the measured classical slots in ascending slot order, one
// character per slot, '0'/'1', with slot i defaulting to qubit i.
struct QRegBuffer {
  std::string name = "q";
  std::uint32_t size = 0;
  std::map<std::string, std::int64_t> counts;
  std::int64_t shots = 0;
  // Quasi-probabilities after readout correction. When present they take
  // precedence over raw counts in exp_val_z.
  std::optional<std::map<std::string, double>> mitigated_probs;

  // Average parity: sum over outcomes of (-1)^popcount weighted by frequency.
  double exp_val_z() const;

  void clear_results();
};

// Allocates an n-qubit register. n == 0 is rejected.
QRegBuffer qalloc(std::uint32_t n);

// {"counts": {...}, "shots": N} with deterministic key order.
std::string counts_to_json(const QRegBuffer& buf);

}  // namespace qk::backend
