#pragma once

#include <string>
#include <vector>

#include "qk/frontend/ast.hpp"

namespace qk::frontend {

// OpenQASM constructs outside the supported subset (gate definitions,
// conditionals, opaque declarations).
class UnsupportedQasmFeature : public SyntaxError {
 public:
  using SyntaxError::SyntaxError;
};

// Quil constructs outside the supported subset (DEFGATE, DEFCIRCUIT,
// DECLARE, control flow).
class UnsupportedQuilFeature : public SyntaxError {
 public:
  using SyntaxError::SyntaxError;
};

class FileError : public Error {
 public:
  using Error::Error;
};

// Extracts every __qpu__ kernel from a source buffer. Kernel bodies may mix
// languages at statement boundaries via `using qk::<lang>;` directives
// (qcor:: is accepted as an alias).
std::vector<KernelDef> parse_kernels(const std::string& source);

// Reads a file and splices `#include "..."` directives (resolved relative to
// the including file) before parsing. Include depth is capped at 16.
std::string load_source(const std::string& path);
std::vector<KernelDef> parse_file(const std::string& path);

// A self-contained OpenQASM 2 program. The qreg declaration defines the
// kernel's register; its size is recorded as declared_qreg_size.
KernelDef parse_openqasm_source(const std::string& source,
                                const std::string& kernel_name);

// A self-contained Quil program. Register size is one past the highest qubit
// index that appears.
KernelDef parse_quil_source(const std::string& source,
                            const std::string& kernel_name);

}  // namespace qk::frontend
