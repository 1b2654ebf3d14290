#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "qk/errors.hpp"
#include "qk/frontend/ast.hpp"
#include "qk/ir/circuit.hpp"

namespace qk::frontend {

class KernelRegistry;

class UnresolvedKernel : public Error {
 public:
  using Error::Error;
};

class ArgumentMismatch : public Error {
 public:
  using Error::Error;
};

// A qubit index fell outside its register, or a loop/vector subscript went
// out of bounds.
class RangeError : public Error {
 public:
  using Error::Error;
};

// NISQ-mode kernels may measure, but no classical control flow can depend on
// the outcome: the circuit must be fixed before submission.
class MeasurementDependentBranchInNisqMode : public Error {
 public:
  using Error::Error;
};

class InstantiationError : public Error {
 public:
  using Error::Error;
};

enum class ExecutionMode { nisq, ftqc };

// Streaming sink driving FTQC-mode execution, where instructions are
// forwarded as they are produced and measurement results come back live.
class LiveExecutor {
 public:
  virtual ~LiveExecutor() = default;
  virtual void apply(const ir::Instruction& inst) = 0;
  virtual int measure(std::uint32_t qubit) = 0;
};

struct QregArg {
  std::string name;
  std::uint32_t size;
};

using ArgValue = std::variant<long long, double, QregArg, std::vector<long long>,
                              std::vector<double>>;
using KernelArgs = std::vector<ArgValue>;

struct InstantiateOptions {
  ExecutionMode mode = ExecutionMode::nisq;
  LiveExecutor* live = nullptr;  // required when mode == ftqc
};

// Builds the circuit for a kernel invocation. Multiple qreg arguments occupy
// one flat index space in declaration order.
ir::Circuit instantiate(const KernelRegistry& registry,
                        const std::string& kernel, const KernelArgs& args,
                        const InstantiateOptions& opts = {});

// Same, appending into an existing parent. The parent gains exactly the
// instructions a fresh instantiation would produce.
void instantiate(const KernelRegistry& registry, const std::string& kernel,
                 const KernelArgs& args, ir::Circuit& parent,
                 const InstantiateOptions& opts = {});

}  // namespace qk::frontend
