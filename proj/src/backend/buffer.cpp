#include "qk/backend/buffer.hpp"

#include <nlohmann/json.hpp>

namespace qk::backend {

namespace {

int parity(const std::string& key) {
  int ones = 0;
  for (char c : key) ones += c == '1';
  return ones % 2 ? -1 : 1;
}

}  // namespace

double QRegBuffer::exp_val_z() const {
  if (mitigated_probs) {
    if (mitigated_probs->empty()) throw EmptyCounts("no mitigated outcomes");
    double acc = 0;
    for (const auto& [key, p] : *mitigated_probs) acc += p * parity(key);
    return acc;
  }
  if (counts.empty() || shots == 0) throw EmptyCounts("no counts recorded");
  double acc = 0;
  for (const auto& [key, n] : counts) acc += static_cast<double>(n) * parity(key);
  return acc / static_cast<double>(shots);
}

void QRegBuffer::clear_results() {
  counts.clear();
  shots = 0;
  mitigated_probs.reset();
}

QRegBuffer qalloc(std::uint32_t n) {
  if (n == 0) throw InvalidAllocation("cannot allocate an empty register");
  QRegBuffer buf;
  buf.size = n;
  return buf;
}

std::string counts_to_json(const QRegBuffer& buf) {
  nlohmann::json j;
  j["counts"] = nlohmann::json::object();
  for (const auto& [key, n] : buf.counts) j["counts"][key] = n;
  j["shots"] = buf.shots;
  return j.dump();
}

}  // namespace qk::backend
