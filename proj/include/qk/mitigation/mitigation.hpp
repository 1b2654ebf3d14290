#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "qk/backend/backend.hpp"
#include "qk/errors.hpp"

namespace qk::mitigation {

class TooManyQubitsForCalibration : public Error {
 public:
  using Error::Error;
};

class SingularConfusionMatrix : public Error {
 public:
  using Error::Error;
};

class FoldingNonUnitary : public Error {
 public:
  using Error::Error;
};

class UnknownMitigationStrategy : public Error {
 public:
  using Error::Error;
};

// Backend wrapper that forwards everything; concrete mitigators override the
// calls they intercept. Decorators do not own the wrapped backend.
class BackendDecorator : public backend::Backend {
 public:
  explicit BackendDecorator(backend::Backend& inner) : inner_(inner) {}

  std::string name() const override { return inner_.name(); }
  void execute(const ir::Circuit& c, backend::QRegBuffer& buf,
               std::int64_t shots) override {
    inner_.execute(c, buf, shots);
  }
  double exp_val(const ir::Circuit& c, backend::QRegBuffer& buf,
                 std::int64_t shots) override {
    return inner_.exp_val(c, buf, shots);
  }
  bool supports_streaming() const override {
    return inner_.supports_streaming();
  }
  std::unique_ptr<backend::Session> start_session(std::uint32_t n) override {
    return inner_.start_session(n);
  }
  void set_seed(std::uint64_t seed) override { inner_.set_seed(seed); }
  void set_noise(std::optional<backend::NoiseModel> noise) override {
    inner_.set_noise(std::move(noise));
  }

 protected:
  backend::Backend& inner_;
};

// Readout-error inversion with a tensor-product calibration model: two
// calibration circuits (all-|0> and all-X prep) estimate one 2x2 confusion
// matrix per qubit, and the inverse tensor product is applied to the raw
// distribution. Results land in buf.mitigated_probs; raw counts stay.
class ReadoutErrorMitigation : public BackendDecorator {
 public:
  static constexpr std::uint32_t kMaxCalibratedQubits = 12;

  explicit ReadoutErrorMitigation(backend::Backend& inner)
      : BackendDecorator(inner) {}

  void execute(const ir::Circuit& c, backend::QRegBuffer& buf,
               std::int64_t shots) override;
  double exp_val(const ir::Circuit& c, backend::QRegBuffer& buf,
                 std::int64_t shots) override;
  // Both invalidate the calibration cache: new noise changes the matrices,
  // and a reseed must replay the exact same inner call sequence to keep the
  // decorated backend deterministic.
  void set_noise(std::optional<backend::NoiseModel> noise) override;
  void set_seed(std::uint64_t seed) override;

 private:
  struct Confusion {
    double p01 = 0;  // P(read 1 | true 0)
    double p10 = 0;  // P(read 0 | true 1)
  };

  std::vector<Confusion> calibrate(std::uint32_t n_qubits, std::int64_t shots);

  std::mutex cache_mutex_;
  // keyed by (qubit count, shot count); cleared when the noise model changes
  std::map<std::pair<std::uint32_t, std::int64_t>, std::vector<Confusion>>
      cache_;
};

// Zero-noise extrapolation by global folding: the unitary prefix C becomes
// C (C-dagger C)^k for noise scales 1, 3, 5, and a least-squares line through
// the three expectation values is read off at scale 0. Plain execute() is
// forwarded untouched; only exp_val() is extrapolated.
class ZeroNoiseExtrapolation : public BackendDecorator {
 public:
  explicit ZeroNoiseExtrapolation(backend::Backend& inner)
      : BackendDecorator(inner) {}

  double exp_val(const ir::Circuit& c, backend::QRegBuffer& buf,
                 std::int64_t shots) override;

  // Exposed for tests. scale must be odd and >= 1; the measurement suffix is
  // reattached unfolded. Throws FoldingNonUnitary when gates follow a
  // measurement or the circuit contains Reset.
  static ir::Circuit fold_global(const ir::Circuit& c, int scale);
};

std::vector<std::string> available_mitigation_strategies();

// Builds the decorator chain around a base backend, taking ownership.
// names[0] sits innermost (closest to the hardware), matching command-line
// order semantics: listed first, applied first around each execution.
std::unique_ptr<backend::Backend> decorate(
    std::unique_ptr<backend::Backend> base,
    const std::vector<std::string>& names);

}  // namespace qk::mitigation
