#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qk/backend/backend.hpp"
#include "qk/frontend/registry.hpp"
#include "qk/hybrid/operators.hpp"
#include "qk/ir/circuit.hpp"

namespace qk::hybrid {

class AlreadyMeasured : public Error {
 public:
  using Error::Error;
};

class NonHermitianOperator : public Error {
 public:
  using Error::Error;
};

class ComplexCoefficient : public Error {
 public:
  using Error::Error;
};

class ArityMismatch : public Error {
 public:
  using Error::Error;
};

class NoDefaultTranslatorForSignature : public Error {
 public:
  using Error::Error;
};

class ObjectiveEvaluationFailure : public Error {
 public:
  using Error::Error;
};

class DoubleSync : public Error {
 public:
  using Error::Error;
};

class UnknownOptimizer : public Error {
 public:
  using Error::Error;
};

// One measurable term of an observed operator: the state-preparation circuit
// plus basis changes (X: H, Y: Sdg then H, Z: none) and a Measure on each of
// the term's qubits.
struct ObservedTerm {
  std::complex<double> coefficient;
  PauliString pauli;
  ir::Circuit circuit;
};

struct Observation {
  std::complex<double> offset;  // identity term's coefficient
  std::vector<ObservedTerm> terms;
};

// Splits op into per-term measured circuits over a copy of `circuit`, which
// must not already contain Measure.
Observation observe(const PauliOperator& op, const ir::Circuit& circuit);

// offset + sum of coeff * <Z-parity> over the observed circuits. shots == 0
// requests exact per-term expectations from the backend. Throws
// NonHermitianOperator when any coefficient has |imag| >= 1e-9.
double expectation(const PauliOperator& op, const ir::Circuit& circuit,
                   backend::Backend& be, std::int64_t shots);
double expectation(const PauliOperator& op,
                   const frontend::KernelRegistry& registry,
                   const std::string& kernel, const frontend::KernelArgs& args,
                   backend::Backend& be, std::int64_t shots);

// First-order Trotter circuit for e^{-i theta op}: for each term c*P in
// sorted order, basis changes into Z, a CX parity ladder, Rz(2 theta c), and
// the conjugate unwinding. Exact when the terms commute. Identity terms are
// a global phase and emit nothing. Coefficients must be real within 1e-9.
ir::Circuit exp_i_theta(double theta, const PauliOperator& op);

using ArgsTranslator =
    std::function<frontend::KernelArgs(const std::vector<double>&)>;

struct ObjectiveOptions {
  std::int64_t shots = 0;  // 0 = exact expectation
  // "vqe-gather-statistics": evaluate this many times and return the mean.
  int gather_statistics = 1;
  // Register size handed to the default translator; defaults to the
  // operator's qubit count.
  std::optional<std::uint32_t> qreg_size;
  // When set, evaluation k (repetition r) reseeds the backend with a hash of
  // (seed, k, r), making every evaluation independent of call history.
  std::optional<std::uint64_t> seed;
};

// Parses the string-keyed option map used by the CLI: keys shots,
// vqe-gather-statistics, qreg-size, seed.
ObjectiveOptions options_from_map(
    const std::map<std::string, std::string>& options);

struct EvalRecord {
  int iter = 0;
  std::vector<double> params;
  double value = 0;
};

// Scalar function of a real parameter vector. Kernel-backed instances
// translate parameters to kernel arguments, instantiate, and take the
// operator expectation; function-backed instances wrap a plain callable
// (used by optimizer tests and custom workflows). Every evaluation is
// recorded for persist_data.
class ObjectiveFunction {
 public:
  ObjectiveFunction(const frontend::KernelRegistry& registry,
                    std::string kernel, PauliOperator op, std::size_t n_params,
                    backend::Backend& be, ArgsTranslator translator,
                    ObjectiveOptions options);

  static ObjectiveFunction from_function(
      std::function<double(const std::vector<double>&)> fn,
      std::size_t n_params);

  // Throws ArityMismatch when x.size() != n_params; wraps any evaluation
  // failure in ObjectiveEvaluationFailure.
  double operator()(const std::vector<double>& x);

  std::size_t n_params() const { return n_params_; }
  const std::vector<EvalRecord>& history() const { return history_; }

  // One JSON object per line, fields {iter, params, value}.
  void persist_data(const std::string& path) const;

 private:
  ObjectiveFunction() = default;

  const frontend::KernelRegistry* registry_ = nullptr;
  std::string kernel_;
  PauliOperator op_;
  std::size_t n_params_ = 0;
  backend::Backend* backend_ = nullptr;
  ArgsTranslator translator_;
  ObjectiveOptions options_;
  std::function<double(const std::vector<double>&)> raw_fn_;
  std::vector<EvalRecord> history_;
  int eval_index_ = 0;
};

// Builds a kernel-backed objective. Without an explicit translator the
// kernel signature must be (qreg) alone, (qreg, double) or
// (qreg, vector<double>); anything else throws
// NoDefaultTranslatorForSignature.
ObjectiveFunction create_objective(const frontend::KernelRegistry& registry,
                                   const std::string& kernel, PauliOperator op,
                                   std::size_t n_params, backend::Backend& be,
                                   ArgsTranslator translator = {},
                                   ObjectiveOptions options = {});

struct OptimizerSettings {
  int max_iters = 0;  // 0 = strategy default (500 nelder-mead, 200 adam)
  double f_tol = 1e-6;
  std::vector<double> initial_params;  // empty = zero vector
  double simplex_step = 0.1;           // nelder-mead initial displacement
  double learning_rate = 0.05;         // adam
  double fd_step = 1e-4;               // central-difference step
  std::string gradient_strategy = "central";
};

struct ResultsBuffer {
  double opt_val = 0;
  std::vector<double> opt_params;
};

// Derivative-free "nelder-mead" or gradient-based "adam". Both return the
// best evaluated sample even when stopped by the iteration cap.
class Optimizer {
 public:
  explicit Optimizer(std::string strategy, OptimizerSettings settings = {});

  const std::string& strategy() const { return strategy_; }
  const OptimizerSettings& settings() const { return settings_; }

  ResultsBuffer optimize(ObjectiveFunction& objective) const;

 private:
  std::string strategy_;
  OptimizerSettings settings_;
};

Optimizer create_optimizer(const std::string& strategy,
                           OptimizerSettings settings = {});

std::vector<std::string> available_optimizers();

// Central-difference gradient; the exact code path adam uses internally.
std::vector<double> central_gradient(ObjectiveFunction& objective,
                                     const std::vector<double>& x, double h);

// Join token for an asynchronous optimization; sync() may be called once.
class Handle {
 public:
  Handle(Handle&&) = default;
  Handle& operator=(Handle&&) = default;

 private:
  Handle() = default;

  friend Handle taskInitiate(ObjectiveFunction objective, Optimizer optimizer);
  friend ResultsBuffer sync(Handle& handle);

  std::future<ResultsBuffer> future_;
};

// Runs optimizer.optimize(objective) on a dedicated worker thread. The
// objective is moved into the worker; the host thread stays free.
Handle taskInitiate(ObjectiveFunction objective, Optimizer optimizer);

// Blocks until the task finishes. Evaluation errors surface here as
// ObjectiveEvaluationFailure; a second call throws DoubleSync.
ResultsBuffer sync(Handle& handle);

}  // namespace qk::hybrid
