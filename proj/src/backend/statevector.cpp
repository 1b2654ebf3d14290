#include "qk/backend/statevector.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "qk/ir/unitary.hpp"

namespace qk::backend {

namespace {

using ir::GateKind;
using ir::Instruction;

std::uint32_t slot_of(const Instruction& inst) {
  return inst.classical_target().value_or(inst.qubits()[0].index);
}

struct StateVec {
  std::uint32_t n;
  Eigen::MatrixXcd amp;  // dim x 1; column form reuses ir::apply_to_columns

  explicit StateVec(std::uint32_t nqubits) : n(nqubits) {
    reset_zero();
  }

  void reset_zero() {
    const Eigen::Index dim = Eigen::Index{1} << n;
    amp = Eigen::MatrixXcd::Zero(dim, 1);
    amp(0, 0) = 1.0;
  }

  void apply_unitary(const Instruction& inst) { ir::apply_to_columns(amp, inst, n); }

  double prob_one(std::uint32_t q) const {
    const Eigen::Index bit = Eigen::Index{1} << q;
    double p = 0;
    for (Eigen::Index i = 0; i < amp.rows(); ++i)
      if (i & bit) p += std::norm(amp(i, 0));
    return p;
  }

  void collapse(std::uint32_t q, int outcome, double p_outcome) {
    const Eigen::Index bit = Eigen::Index{1} << q;
    const double scale = 1.0 / std::sqrt(p_outcome);
    for (Eigen::Index i = 0; i < amp.rows(); ++i) {
      const bool one = (i & bit) != 0;
      if (one == (outcome == 1))
        amp(i, 0) *= scale;
      else
        amp(i, 0) = 0;
    }
  }

  int project(std::uint32_t q, double u) {
    const double p1 = prob_one(q);
    const int outcome = u < p1 ? 1 : 0;
    collapse(q, outcome, outcome ? p1 : 1 - p1);
    return outcome;
  }

  std::uint64_t sample_index(double u) const {
    double acc = 0;
    const Eigen::Index dim = amp.rows();
    for (Eigen::Index i = 0; i < dim; ++i) {
      acc += std::norm(amp(i, 0));
      if (u < acc) return static_cast<std::uint64_t>(i);
    }
    return static_cast<std::uint64_t>(dim - 1);
  }
};

struct CircuitShape {
  std::vector<Instruction> flat;
  bool has_reset = false;
  bool mid_circuit_measure = false;
  // slot -> qubit for every Measure, in slot order.
  std::map<std::uint32_t, std::uint32_t> slots;
};

CircuitShape analyze(const ir::Circuit& c, std::uint32_t n) {
  CircuitShape shape;
  shape.flat = c.flatten();
  bool seen_measure = false;
  for (const auto& inst : shape.flat) {
    for (const auto& q : inst.qubits())
      if (q.index >= n)
        throw ir::QubitOutOfRange("qubit q" + std::to_string(q.index) +
                                  " outside register of size " + std::to_string(n));
    if (inst.kind() == GateKind::Measure) {
      seen_measure = true;
      shape.slots[slot_of(inst)] = inst.qubits()[0].index;
    } else {
      if (seen_measure) shape.mid_circuit_measure = true;
      if (inst.kind() == GateKind::Reset) shape.has_reset = true;
    }
  }
  return shape;
}

std::string key_from_index(std::uint64_t idx, const CircuitShape& shape,
                           std::uint32_t n) {
  std::string key;
  if (shape.slots.empty()) {
    key.resize(n);
    for (std::uint32_t q = 0; q < n; ++q) key[q] = (idx >> q) & 1 ? '1' : '0';
  } else {
    key.reserve(shape.slots.size());
    for (const auto& [slot, qubit] : shape.slots)
      key.push_back((idx >> qubit) & 1 ? '1' : '0');
  }
  return key;
}

const GateKind kPauli[3] = {GateKind::X, GateKind::Y, GateKind::Z};

void apply_depolarizing(StateVec& state, const Instruction& inst,
                        const NoiseModel& noise, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  if (ir::gate_arity(inst.kind()) == 1) {
    if (noise.depol_one_qubit <= 0 || uniform(rng) >= noise.depol_one_qubit) return;
    const GateKind p = kPauli[rng() % 3];
    state.apply_unitary(ir::gate(p, inst.qubits()[0].index));
  } else {
    if (noise.depol_two_qubit <= 0 || uniform(rng) >= noise.depol_two_qubit) return;
    // Uniform non-identity two-qubit Pauli: index 1..15 over (P_a, P_b).
    const int code = 1 + static_cast<int>(rng() % 15);
    const int pa = code / 4, pb = code % 4;
    if (pa) state.apply_unitary(ir::gate(kPauli[pa - 1], inst.qubits()[0].index));
    if (pb) state.apply_unitary(ir::gate(kPauli[pb - 1], inst.qubits()[1].index));
  }
}

}  // namespace

StatevectorBackend::StatevectorBackend(std::uint64_t seed)
    : seed_(seed), rng_(seed) {}

void StatevectorBackend::set_seed(std::uint64_t seed) {
  seed_ = seed;
  rng_.seed(seed);
}

void StatevectorBackend::set_noise(std::optional<NoiseModel> noise) {
  noise_ = std::move(noise);
}

void StatevectorBackend::execute(const ir::Circuit& c, QRegBuffer& buf,
                                 std::int64_t shots) {
  if (shots <= 0) throw ZeroShots("shot count must be positive");
  const std::uint32_t n = buf.size;
  if (n > kMaxQubits)
    throw TooManyQubits(std::to_string(n) + " qubits exceed the dense limit of " +
                        std::to_string(kMaxQubits));
  const CircuitShape shape = analyze(c, n);
  buf.clear_results();
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  const bool trajectories = noise_.has_value() || shape.has_reset ||
                            shape.mid_circuit_measure;
  if (!trajectories) {
    StateVec state(n);
    for (const auto& inst : shape.flat)
      if (inst.kind() != GateKind::Measure) state.apply_unitary(inst);
    // Cumulative distribution once, then one binary search per shot.
    const Eigen::Index dim = state.amp.rows();
    std::vector<double> cdf(dim);
    double acc = 0;
    for (Eigen::Index i = 0; i < dim; ++i) {
      acc += std::norm(state.amp(i, 0));
      cdf[i] = acc;
    }
    for (std::int64_t s = 0; s < shots; ++s) {
      const double u = uniform(rng_) * acc;
      const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      const std::uint64_t idx = static_cast<std::uint64_t>(it - cdf.begin());
      ++buf.counts[key_from_index(std::min<std::uint64_t>(idx, dim - 1), shape, n)];
    }
  } else {
    const NoiseModel noise = noise_.value_or(NoiseModel{});
    for (std::int64_t s = 0; s < shots; ++s) {
      StateVec state(n);
      std::map<std::uint32_t, int> slots;
      for (const auto& inst : shape.flat) {
        switch (inst.kind()) {
          case GateKind::Measure: {
            const std::uint32_t q = inst.qubits()[0].index;
            int bit = state.project(q, uniform(rng_));
            const ReadoutError ro = noise.readout_for(q);
            if (bit == 0 && ro.p01 > 0 && uniform(rng_) < ro.p01) bit = 1;
            else if (bit == 1 && ro.p10 > 0 && uniform(rng_) < ro.p10) bit = 0;
            slots[slot_of(inst)] = bit;
            break;
          }
          case GateKind::Reset: {
            const std::uint32_t q = inst.qubits()[0].index;
            if (state.project(q, uniform(rng_)) == 1)
              state.apply_unitary(ir::gate(GateKind::X, q));
            break;
          }
          default:
            state.apply_unitary(inst);
            if (noise_) apply_depolarizing(state, inst, noise, rng_);
        }
      }
      std::string key;
      if (slots.empty() && shape.slots.empty()) {
        const std::uint64_t idx = state.sample_index(uniform(rng_));
        key = key_from_index(idx, shape, n);
      } else {
        key.reserve(shape.slots.size());
        for (const auto& [slot, qubit] : shape.slots) {
          auto it = slots.find(slot);
          key.push_back(it != slots.end() && it->second ? '1' : '0');
        }
      }
      ++buf.counts[key];
    }
  }
  buf.shots = shots;
}

double StatevectorBackend::exp_val(const ir::Circuit& c, QRegBuffer& buf,
                                   std::int64_t shots) {
  if (shots > 0) return Backend::exp_val(c, buf, shots);
  if (noise_)
    throw Error("exact expectation is unavailable under a noise model");
  const std::uint32_t n = buf.size;
  if (n > kMaxQubits)
    throw TooManyQubits(std::to_string(n) + " qubits exceed the dense limit of " +
                        std::to_string(kMaxQubits));
  const CircuitShape shape = analyze(c, n);
  if (shape.has_reset || shape.mid_circuit_measure)
    throw Error("exact expectation requires a unitary circuit prefix");
  StateVec state(n);
  for (const auto& inst : shape.flat)
    if (inst.kind() != GateKind::Measure) state.apply_unitary(inst);
  std::uint64_t mask = 0;
  if (shape.slots.empty()) {
    mask = (std::uint64_t{1} << n) - 1;
  } else {
    for (const auto& [slot, qubit] : shape.slots) mask |= std::uint64_t{1} << qubit;
  }
  double acc = 0;
  for (Eigen::Index i = 0; i < state.amp.rows(); ++i) {
    const double p = std::norm(state.amp(i, 0));
    const int sign = std::popcount(static_cast<std::uint64_t>(i) & mask) % 2 ? -1 : 1;
    acc += sign * p;
  }
  buf.clear_results();
  return acc;
}

namespace {

class SimSession : public Session {
 public:
  SimSession(std::uint32_t n, std::uint64_t seed, std::optional<NoiseModel> noise)
      : state_(n), rng_(seed), noise_(std::move(noise)) {}

  void apply(const Instruction& inst) override {
    require_active();
    switch (inst.kind()) {
      case GateKind::Measure:
        measure(inst.qubits()[0]);
        break;
      case GateKind::Reset:
        reset(inst.qubits()[0]);
        break;
      default: {
        check_range(inst);
        state_.apply_unitary(inst);
        if (noise_) apply_depolarizing(state_, inst, *noise_, rng_);
      }
    }
  }

  int measure(ir::QubitRef q) override {
    require_active();
    if (q.index >= state_.n) throw ir::QubitOutOfRange("measure outside register");
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    int bit = state_.project(q.index, uniform(rng_));
    if (noise_) {
      const ReadoutError ro = noise_->readout_for(q.index);
      if (bit == 0 && ro.p01 > 0 && uniform(rng_) < ro.p01) bit = 1;
      else if (bit == 1 && ro.p10 > 0 && uniform(rng_) < ro.p10) bit = 0;
    }
    log_.push_back(bit);
    return bit;
  }

  void reset(ir::QubitRef q) override {
    require_active();
    if (q.index >= state_.n) throw ir::QubitOutOfRange("reset outside register");
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    if (state_.project(q.index, uniform(rng_)) == 1)
      state_.apply_unitary(ir::gate(GateKind::X, q.index));
  }

  const std::vector<int>& measurement_log() const override { return log_; }

  void finish() override { active_ = false; }
  bool active() const override { return active_; }

 private:
  void require_active() const {
    if (!active_) throw NoActiveSession("session already finished");
  }
  void check_range(const Instruction& inst) const {
    for (const auto& q : inst.qubits())
      if (q.index >= state_.n) throw ir::QubitOutOfRange("gate outside register");
  }

  StateVec state_;
  std::mt19937_64 rng_;
  std::optional<NoiseModel> noise_;
  std::vector<int> log_;
  bool active_ = true;
};

}  // namespace

std::unique_ptr<Session> StatevectorBackend::start_session(std::uint32_t nqubits) {
  if (nqubits == 0) throw InvalidAllocation("cannot open a session on 0 qubits");
  if (nqubits > kMaxQubits)
    throw TooManyQubits(std::to_string(nqubits) + " qubits exceed the dense limit");
  return std::make_unique<SimSession>(nqubits, rng_(), noise_);
}

}  // namespace qk::backend
