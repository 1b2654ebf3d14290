#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "qk/errors.hpp"

namespace qk::backend {

class InvalidNoiseModel : public Error {
 public:
  using Error::Error;
};

struct ReadoutError {
  double p01 = 0;  // P(read 1 | prepared 0)
  double p10 = 0;  // P(read 0 | prepared 1)
};

// Depolarizing-plus-readout noise. The mere presence of a model switches the
// simulator to per-shot trajectory sampling, even when all rates are zero.
struct NoiseModel {
  std::map<std::uint32_t, ReadoutError> readout;
  double depol_one_qubit = 0;
  double depol_two_qubit = 0;

  ReadoutError readout_for(std::uint32_t qubit) const;

  // Schema:
  //   {"readout_errors": [{"qubit": 0, "p01": 0.01, "p10": 0.02}, ...],
  //    "depolarizing": {"one_qubit": 0.001, "two_qubit": 0.01}}
  // Both sections optional; probabilities must lie in [0, 1].
  static NoiseModel from_json(const std::string& text);
  static NoiseModel from_file(const std::string& path);
};

}  // namespace qk::backend
