#include "qk/backend/noise_model.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace qk::backend {

namespace {

double checked_prob(const nlohmann::json& j, const std::string& key) {
  if (!j.contains(key)) return 0;
  if (!j[key].is_number())
    throw InvalidNoiseModel("'" + key + "' must be a number");
  const double v = j[key].get<double>();
  if (v < 0 || v > 1)
    throw InvalidNoiseModel("'" + key + "' outside [0, 1]: " + std::to_string(v));
  return v;
}

}  // namespace

ReadoutError NoiseModel::readout_for(std::uint32_t qubit) const {
  auto it = readout.find(qubit);
  return it == readout.end() ? ReadoutError{} : it->second;
}

NoiseModel NoiseModel::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidNoiseModel(std::string("noise model is not valid JSON: ") + e.what());
  }
  NoiseModel m;
  if (j.contains("readout_errors")) {
    if (!j["readout_errors"].is_array())
      throw InvalidNoiseModel("'readout_errors' must be an array");
    for (const auto& entry : j["readout_errors"]) {
      if (!entry.contains("qubit") || !entry["qubit"].is_number_unsigned())
        throw InvalidNoiseModel("readout entry needs an unsigned 'qubit'");
      ReadoutError e;
      e.p01 = checked_prob(entry, "p01");
      e.p10 = checked_prob(entry, "p10");
      m.readout[entry["qubit"].get<std::uint32_t>()] = e;
    }
  }
  if (j.contains("depolarizing")) {
    m.depol_one_qubit = checked_prob(j["depolarizing"], "one_qubit");
    m.depol_two_qubit = checked_prob(j["depolarizing"], "two_qubit");
  }
  return m;
}

NoiseModel NoiseModel::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidNoiseModel("cannot open noise model file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace qk::backend
