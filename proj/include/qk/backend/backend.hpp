#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qk/backend/buffer.hpp"
#include "qk/backend/noise_model.hpp"
#include "qk/ir/circuit.hpp"

namespace qk::backend {

class ZeroShots : public Error {
 public:
  using Error::Error;
};

class TooManyQubits : public Error {
 public:
  using Error::Error;
};

class UnknownBackend : public Error {
 public:
  using Error::Error;
};

class NoActiveSession : public Error {
 public:
  using Error::Error;
};

class StreamingUnsupported : public Error {
 public:
  using Error::Error;
};

// One streaming execution: gates applied immediately, measurements return
// live results. Sessions hold mutable state and must not be shared between
// threads.
class Session {
 public:
  virtual ~Session() = default;

  virtual void apply(const ir::Instruction& inst) = 0;
  // Projective measurement; collapses the state and returns the observed bit.
  virtual int measure(ir::QubitRef q) = 0;
  virtual void reset(ir::QubitRef q) = 0;

  // Every bit this session has observed, in measurement order.
  virtual const std::vector<int>& measurement_log() const = 0;

  virtual void finish() = 0;
  virtual bool active() const = 0;
};

// Execution target contract. Implementations must be deterministic under a
// fixed seed: same circuit, shots and seed produce identical counts.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string name() const = 0;

  // Samples `shots` executions and fills buf.counts. shots must be positive.
  virtual void execute(const ir::Circuit& c, QRegBuffer& buf, std::int64_t shots) = 0;

  // Z-parity expectation over the measured qubits. shots == 0 requests the
  // exact value where the backend can provide one; the default implementation
  // samples and averages.
  virtual double exp_val(const ir::Circuit& c, QRegBuffer& buf, std::int64_t shots);

  virtual bool supports_streaming() const { return false; }
  virtual std::unique_ptr<Session> start_session(std::uint32_t nqubits);

  virtual void set_seed(std::uint64_t seed) = 0;
  virtual void set_noise(std::optional<NoiseModel> noise) = 0;
};

// Factory registry. Selector grammar, both spellings accepted:
//   name
//   name[option:value,option:value]
//   name:option=value,option=value
// Options understood by every stock backend: noise-model (path), seed (int).
std::unique_ptr<Backend> create_backend(const std::string& selector);

std::vector<std::string> available_backends();

void register_backend(const std::string& name,
                      std::function<std::unique_ptr<Backend>()> factory);

// Exposed for the CLI and tests.
struct BackendSelector {
  std::string name;
  std::vector<std::pair<std::string, std::string>> options;
};
BackendSelector parse_backend_selector(const std::string& selector);

}  // namespace qk::backend
