#include "qk/mitigation/mitigation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include "qk/ir/transforms.hpp"

namespace qk::mitigation {

namespace {

// slot -> measured qubit, mirroring the backend's key layout: key character
// i carries the bit of the i-th smallest slot. A circuit without Measure
// samples every qubit with slot == qubit.
std::map<std::uint32_t, std::uint32_t> slot_map(
    const std::vector<ir::Instruction>& flat, std::uint32_t width) {
  std::map<std::uint32_t, std::uint32_t> slots;
  for (const auto& inst : flat) {
    if (inst.kind() != ir::GateKind::Measure) continue;
    const std::uint32_t q = inst.qubits()[0].index;
    slots[inst.classical_target().value_or(q)] = q;
  }
  if (slots.empty())
    for (std::uint32_t q = 0; q < width; ++q) slots[q] = q;
  return slots;
}

}  // namespace

std::vector<ReadoutErrorMitigation::Confusion> ReadoutErrorMitigation::calibrate(
    std::uint32_t n_qubits, std::int64_t shots) {
  const auto key = std::make_pair(n_qubits, shots);
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }

  ir::Circuit zero("ro_cal_zero");
  ir::Circuit one("ro_cal_one");
  for (std::uint32_t q = 0; q < n_qubits; ++q) {
    zero.add(ir::measure(q));
    one.add(ir::gate(ir::GateKind::X, q));
  }
  for (std::uint32_t q = 0; q < n_qubits; ++q) one.add(ir::measure(q));

  std::vector<Confusion> est(n_qubits);
  backend::QRegBuffer b0;
  b0.name = "cal";
  b0.size = n_qubits;
  backend::QRegBuffer b1 = b0;
  inner_.execute(zero, b0, shots);
  inner_.execute(one, b1, shots);

  // Keys from the calibration circuits index qubits directly: slot q == q.
  for (const auto& [bits, cnt] : b0.counts)
    for (std::uint32_t q = 0; q < n_qubits; ++q)
      if (bits[q] == '1') est[q].p01 += static_cast<double>(cnt);
  for (const auto& [bits, cnt] : b1.counts)
    for (std::uint32_t q = 0; q < n_qubits; ++q)
      if (bits[q] == '0') est[q].p10 += static_cast<double>(cnt);
  for (auto& cm : est) {
    cm.p01 /= static_cast<double>(shots);
    cm.p10 /= static_cast<double>(shots);
  }

  std::lock_guard<std::mutex> lock(cache_mutex_);
  return cache_.emplace(key, std::move(est)).first->second;
}

void ReadoutErrorMitigation::execute(const ir::Circuit& c,
                                     backend::QRegBuffer& buf,
                                     std::int64_t shots) {
  const auto slots = slot_map(c.flatten(), buf.size);
  if (slots.size() > kMaxCalibratedQubits)
    throw TooManyQubitsForCalibration(
        std::to_string(slots.size()) +
        " measured qubits exceed the calibration limit of " +
        std::to_string(kMaxCalibratedQubits));

  inner_.execute(c, buf, shots);

  const auto confusion = calibrate(buf.size, shots);
  std::vector<std::uint32_t> axis_qubit;
  axis_qubit.reserve(slots.size());
  for (const auto& [slot, q] : slots) axis_qubit.push_back(q);
  for (std::uint32_t q : axis_qubit) {
    const Confusion& cm = confusion[q];
    if (cm.p01 + cm.p10 >= 1.0)
      throw SingularConfusionMatrix(
          "qubit " + std::to_string(q) + " confusion matrix is singular (p01=" +
          std::to_string(cm.p01) + ", p10=" + std::to_string(cm.p10) + ")");
  }

  const std::size_t m = axis_qubit.size();
  double raw_total = 0;
  for (const auto& [bits, cnt] : buf.counts) raw_total += static_cast<double>(cnt);

  std::vector<double> p(std::size_t{1} << m, 0.0);
  for (const auto& [bits, cnt] : buf.counts) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < m; ++i)
      if (bits[i] == '1') idx |= std::size_t{1} << i;
    p[idx] += static_cast<double>(cnt) / raw_total;
  }

  // Tensor-product inverse applied one axis at a time:
  //   M = [[1-p01, p10], [p01, 1-p10]],  M^-1 = 1/det [[1-p10, -p10], [-p01, 1-p01]]
  for (std::size_t i = 0; i < m; ++i) {
    const Confusion& cm = confusion[axis_qubit[i]];
    const double det = 1.0 - cm.p01 - cm.p10;
    const double a = (1.0 - cm.p10) / det;
    const double b = -cm.p10 / det;
    const double cc = -cm.p01 / det;
    const double d = (1.0 - cm.p01) / det;
    const std::size_t stride = std::size_t{1} << i;
    for (std::size_t base = 0; base < p.size(); base += 2 * stride)
      for (std::size_t j = base; j < base + stride; ++j) {
        const double x0 = p[j];
        const double x1 = p[j + stride];
        p[j] = a * x0 + b * x1;
        p[j + stride] = cc * x0 + d * x1;
      }
  }

  double total = 0;
  for (double& v : p) {
    if (v < 0) v = 0;
    total += v;
  }

  std::map<std::string, double> corrected;
  if (total <= 0) {
    // Every corrected entry clipped away; keep the raw distribution rather
    // than emit garbage.
    for (const auto& [bits, cnt] : buf.counts)
      corrected[bits] = static_cast<double>(cnt) / raw_total;
  } else {
    for (std::size_t idx = 0; idx < p.size(); ++idx) {
      if (p[idx] <= 0) continue;
      std::string bits(m, '0');
      for (std::size_t i = 0; i < m; ++i)
        if (idx & (std::size_t{1} << i)) bits[i] = '1';
      corrected[bits] = p[idx] / total;
    }
  }
  buf.mitigated_probs = std::move(corrected);
}

double ReadoutErrorMitigation::exp_val(const ir::Circuit& c,
                                       backend::QRegBuffer& buf,
                                       std::int64_t shots) {
  // Exact evaluation is noiseless on every stock backend; nothing to correct.
  if (shots <= 0) return inner_.exp_val(c, buf, shots);
  execute(c, buf, shots);
  return buf.exp_val_z();
}

void ReadoutErrorMitigation::set_noise(std::optional<backend::NoiseModel> noise) {
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    cache_.clear();
  }
  inner_.set_noise(std::move(noise));
}

void ReadoutErrorMitigation::set_seed(std::uint64_t seed) {
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    cache_.clear();
  }
  inner_.set_seed(seed);
}

ir::Circuit ZeroNoiseExtrapolation::fold_global(const ir::Circuit& c, int scale) {
  if (scale < 1 || scale % 2 == 0)
    throw Error("fold scale must be odd and positive, got " +
                std::to_string(scale));

  std::vector<ir::Instruction> prefix;
  std::vector<ir::Instruction> suffix;
  for (const auto& inst : c.flatten()) {
    if (inst.kind() == ir::GateKind::Reset)
      throw FoldingNonUnitary("circuit contains Reset; folding needs a unitary prefix");
    if (inst.kind() == ir::GateKind::Measure) {
      suffix.push_back(inst);
      continue;
    }
    if (!suffix.empty())
      throw FoldingNonUnitary("gates after a measurement cannot be folded");
    prefix.push_back(inst);
  }

  ir::Circuit folded(c.name());
  folded.add_all(prefix);
  if (scale > 1) {
    const auto reversed = ir::adjoint(ir::Circuit("fold", prefix)).flatten();
    for (int k = 0; k < (scale - 1) / 2; ++k) {
      folded.add_all(reversed);
      folded.add_all(prefix);
    }
  }
  folded.add_all(suffix);
  return folded;
}

double ZeroNoiseExtrapolation::exp_val(const ir::Circuit& c,
                                       backend::QRegBuffer& buf,
                                       std::int64_t shots) {
  static constexpr std::array<int, 3> kScales{1, 3, 5};
  std::array<double, 3> y{};
  for (std::size_t i = 0; i < kScales.size(); ++i) {
    const ir::Circuit folded = fold_global(c, kScales[i]);
    if (kScales[i] == 1) {
      // The unscaled run lands in the caller's buffer so raw counts stay
      // inspectable next to the extrapolated value.
      y[i] = inner_.exp_val(folded, buf, shots);
    } else {
      backend::QRegBuffer scratch;
      scratch.name = buf.name;
      scratch.size = buf.size;
      y[i] = inner_.exp_val(folded, scratch, shots);
    }
  }

  double ybar = 0;
  for (double v : y) ybar += v;
  ybar /= 3.0;
  const double xbar = 3.0;
  double sxx = 0;
  double sxy = 0;
  for (std::size_t i = 0; i < kScales.size(); ++i) {
    const double dx = kScales[i] - xbar;
    sxx += dx * dx;
    sxy += dx * (y[i] - ybar);
  }
  return ybar - (sxy / sxx) * xbar;
}

std::vector<std::string> available_mitigation_strategies() {
  return {"ro-error", "zne"};
}

namespace {

// Owns the base backend plus every decorator layer; forwards the Backend
// interface to the outermost layer.
class OwningChain : public backend::Backend {
 public:
  explicit OwningChain(std::unique_ptr<backend::Backend> base)
      : base_(std::move(base)), tip_(base_.get()) {}

  void wrap(const std::string& strategy) {
    if (strategy == "ro-error") {
      layers_.push_back(std::make_unique<ReadoutErrorMitigation>(*tip_));
    } else if (strategy == "zne") {
      layers_.push_back(std::make_unique<ZeroNoiseExtrapolation>(*tip_));
    } else {
      throw UnknownMitigationStrategy("unknown mitigation strategy '" +
                                      strategy + "'");
    }
    tip_ = layers_.back().get();
  }

  std::string name() const override { return tip_->name(); }
  void execute(const ir::Circuit& c, backend::QRegBuffer& buf,
               std::int64_t shots) override {
    tip_->execute(c, buf, shots);
  }
  double exp_val(const ir::Circuit& c, backend::QRegBuffer& buf,
                 std::int64_t shots) override {
    return tip_->exp_val(c, buf, shots);
  }
  bool supports_streaming() const override { return tip_->supports_streaming(); }
  std::unique_ptr<backend::Session> start_session(std::uint32_t n) override {
    return tip_->start_session(n);
  }
  void set_seed(std::uint64_t seed) override { tip_->set_seed(seed); }
  void set_noise(std::optional<backend::NoiseModel> noise) override {
    tip_->set_noise(std::move(noise));
  }

 private:
  std::unique_ptr<backend::Backend> base_;
  std::vector<std::unique_ptr<backend::Backend>> layers_;
  backend::Backend* tip_;
};

}  // namespace

std::unique_ptr<backend::Backend> decorate(
    std::unique_ptr<backend::Backend> base,
    const std::vector<std::string>& names) {
  if (names.empty()) return base;
  auto chain = std::make_unique<OwningChain>(std::move(base));
  for (const auto& strategy : names) chain->wrap(strategy);
  return chain;
}

}  // namespace qk::mitigation
