#pragma once

#include <random>

#include "qk/backend/backend.hpp"

namespace qk::backend {

// Dense statevector simulator. Gate application shares the matrix definition
// table with ir::to_unitary, so simulation and unitary reconstruction cannot
// drift apart.
//
// Sampling strategy:
//  - noiseless circuits whose measurements form a trailing suffix evolve the
//    state once and draw all shots from the final distribution;
//  - anything else (noise model attached, mid-circuit measurement, reset)
//    runs one full trajectory per shot.
// Circuits with no Measure at all are sampled over every qubit.
class StatevectorBackend : public Backend {
 public:
  static constexpr std::uint32_t kMaxQubits = 24;

  explicit StatevectorBackend(std::uint64_t seed = 7);

  std::string name() const override { return "sim"; }

  void execute(const ir::Circuit& c, QRegBuffer& buf, std::int64_t shots) override;

  // shots == 0 computes the exact parity expectation from the final state;
  // requires a noiseless suffix-measured circuit.
  double exp_val(const ir::Circuit& c, QRegBuffer& buf, std::int64_t shots) override;

  bool supports_streaming() const override { return true; }
  std::unique_ptr<Session> start_session(std::uint32_t nqubits) override;

  void set_seed(std::uint64_t seed) override;
  void set_noise(std::optional<NoiseModel> noise) override;

 private:
  std::uint64_t seed_;
  std::mt19937_64 rng_;
  std::optional<NoiseModel> noise_;
};

}  // namespace qk::backend
