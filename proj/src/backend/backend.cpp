#include "qk/backend/backend.hpp"

#include <map>
#include <mutex>

#include "qk/backend/statevector.hpp"

namespace qk::backend {

double Backend::exp_val(const ir::Circuit& c, QRegBuffer& buf, std::int64_t shots) {
  execute(c, buf, shots);
  return buf.exp_val_z();
}

std::unique_ptr<Session> Backend::start_session(std::uint32_t) {
  throw StreamingUnsupported("backend '" + name() + "' cannot stream instructions");
}

namespace {

using Factory = std::function<std::unique_ptr<Backend>()>;

std::map<std::string, Factory>& factories() {
  static std::map<std::string, Factory> reg = {
      {"sim", [] { return std::make_unique<StatevectorBackend>(); }},
  };
  return reg;
}

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

void register_backend(const std::string& name, Factory factory) {
  std::lock_guard lock(registry_mutex());
  factories()[name] = std::move(factory);
}

std::vector<std::string> available_backends() {
  std::lock_guard lock(registry_mutex());
  std::vector<std::string> names;
  for (const auto& [name, f] : factories()) names.push_back(name);
  return names;
}

BackendSelector parse_backend_selector(const std::string& selector) {
  BackendSelector out;
  std::string opts;
  auto bracket = selector.find('[');
  auto colon = selector.find(':');
  if (bracket != std::string::npos) {
    if (selector.back() != ']')
      throw UnknownBackend("unterminated '[' in backend selector: " + selector);
    out.name = selector.substr(0, bracket);
    opts = selector.substr(bracket + 1, selector.size() - bracket - 2);
  } else if (colon != std::string::npos) {
    out.name = selector.substr(0, colon);
    opts = selector.substr(colon + 1);
  } else {
    out.name = selector;
  }
  // Options are comma-separated key:value or key=value pairs.
  std::size_t pos = 0;
  while (pos < opts.size()) {
    auto end = opts.find(',', pos);
    if (end == std::string::npos) end = opts.size();
    const std::string pair = opts.substr(pos, end - pos);
    if (!pair.empty()) {
      auto sep = pair.find_first_of(":=");
      if (sep == std::string::npos)
        throw UnknownBackend("malformed backend option '" + pair + "'");
      out.options.emplace_back(pair.substr(0, sep), pair.substr(sep + 1));
    }
    pos = end + 1;
  }
  return out;
}

std::unique_ptr<Backend> create_backend(const std::string& selector) {
  const BackendSelector parsed = parse_backend_selector(selector);
  Factory factory;
  {
    std::lock_guard lock(registry_mutex());
    auto it = factories().find(parsed.name);
    if (it == factories().end())
      throw UnknownBackend("no backend named '" + parsed.name + "'");
    factory = it->second;
  }
  auto backend = factory();
  for (const auto& [key, value] : parsed.options) {
    if (key == "seed") {
      backend->set_seed(std::stoull(value));
    } else if (key == "noise-model") {
      backend->set_noise(NoiseModel::from_file(value));
    } else {
      throw UnknownBackend("unknown backend option '" + key + "'");
    }
  }
  return backend;
}

}  // namespace qk::backend
