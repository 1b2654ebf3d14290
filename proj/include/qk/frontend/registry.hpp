#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "qk/backend/backend.hpp"
#include "qk/frontend/ast.hpp"
#include "qk/frontend/instantiate.hpp"

namespace qk::frontend {

class UnknownKernelName : public Error {
 public:
  using Error::Error;
};

class DuplicateKernel : public Error {
 public:
  using Error::Error;
};

class KernelRegistry;

// Callable wrapper over a registered kernel.
class KernelHandle {
 public:
  KernelHandle(const KernelRegistry* registry, std::string name)
      : registry_(registry), name_(std::move(name)) {}

  const std::string& name() const { return name_; }
  ir::Circuit operator()(const KernelArgs& args,
                         const InstantiateOptions& opts = {}) const;

 private:
  const KernelRegistry* registry_;
  std::string name_;
};

// Kernel store with a JIT facade. Compilation results are cached by exact
// source text; re-submitting an identical buffer does not recompile. All
// entry points are safe to call from multiple threads.
class KernelRegistry {
 public:
  // Preloads the standard-library kernels (qft, iqft).
  KernelRegistry();

  void add(KernelDef def);
  bool contains(const std::string& name) const;
  const KernelDef* find(const std::string& name) const;  // nullptr if absent
  const KernelDef& get(const std::string& name) const;   // UnknownKernelName
  std::vector<std::string> kernel_names() const;

  // Parses the buffer and registers every kernel in it, returning their
  // names. A cache hit returns the previous names without reparsing.
  std::vector<std::string> jit_compile(const std::string& source);

  // Number of cache-miss compilations performed so far.
  std::size_t compile_count() const;

  KernelHandle get_kernel(const std::string& name) const;

 private:
  void add_locked(KernelDef def);

  mutable std::mutex mu_;
  std::map<std::string, KernelDef> kernels_;
  std::map<std::string, std::vector<std::string>> jit_cache_;
  std::size_t compile_count_ = 0;
};

// Instantiates a registered kernel over the buffer's register (plus any
// trailing scalar/vector arguments) and executes it.
void invoke(const KernelRegistry& registry, const std::string& name,
            backend::Backend& be, backend::QRegBuffer& buffer,
            std::int64_t shots, const KernelArgs& extra_args = {});

// Adapts a backend streaming session to the interpreter's live interface.
class SessionExecutor : public LiveExecutor {
 public:
  explicit SessionExecutor(backend::Session& session) : session_(session) {}

  void apply(const ir::Instruction& inst) override {
    if (inst.kind() == ir::GateKind::Measure) {
      session_.measure(inst.qubits()[0]);
    } else if (inst.kind() == ir::GateKind::Reset) {
      session_.reset(inst.qubits()[0]);
    } else {
      session_.apply(inst);
    }
  }
  int measure(std::uint32_t qubit) override {
    return session_.measure(ir::QubitRef{qubit});
  }

 private:
  backend::Session& session_;
};

}  // namespace qk::frontend
