#include <fstream>
#include <stdexcept>
#include <utility>

#include <nlohmann/json.hpp>

#include "qk/hybrid/hybrid.hpp"

namespace qk::hybrid {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

ObjectiveOptions options_from_map(
    const std::map<std::string, std::string>& options) {
  ObjectiveOptions out;
  for (const auto& [key, value] : options) {
    try {
      if (key == "shots") {
        out.shots = std::stoll(value);
      } else if (key == "vqe-gather-statistics") {
        out.gather_statistics = std::stoi(value);
      } else if (key == "qreg-size") {
        out.qreg_size = static_cast<std::uint32_t>(std::stoul(value));
      } else if (key == "seed") {
        out.seed = std::stoull(value);
      } else {
        throw Error("unknown objective option '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw Error("bad value for objective option '" + key + "': " + value);
    } catch (const std::out_of_range&) {
      throw Error("value out of range for objective option '" + key +
                  "': " + value);
    }
  }
  return out;
}

ObjectiveFunction::ObjectiveFunction(const frontend::KernelRegistry& registry,
                                     std::string kernel, PauliOperator op,
                                     std::size_t n_params, backend::Backend& be,
                                     ArgsTranslator translator,
                                     ObjectiveOptions options)
    : registry_(&registry),
      kernel_(std::move(kernel)),
      op_(std::move(op)),
      n_params_(n_params),
      backend_(&be),
      translator_(std::move(translator)),
      options_(options) {}

ObjectiveFunction ObjectiveFunction::from_function(
    std::function<double(const std::vector<double>&)> fn,
    std::size_t n_params) {
  ObjectiveFunction out;
  out.raw_fn_ = std::move(fn);
  out.n_params_ = n_params;
  return out;
}

double ObjectiveFunction::operator()(const std::vector<double>& x) {
  if (x.size() != n_params_)
    throw ArityMismatch("objective expects " + std::to_string(n_params_) +
                        " parameters, got " + std::to_string(x.size()));
  double value = 0;
  try {
    if (raw_fn_) {
      value = raw_fn_(x);
    } else {
      const int reps = std::max(1, options_.gather_statistics);
      double acc = 0;
      for (int r = 0; r < reps; ++r) {
        if (options_.seed)
          backend_->set_seed(splitmix64(
              *options_.seed ^
              splitmix64(static_cast<std::uint64_t>(eval_index_) * 0x10001u +
                         static_cast<std::uint64_t>(r))));
        const ir::Circuit circuit =
            frontend::instantiate(*registry_, kernel_, translator_(x));
        acc += expectation(op_, circuit, *backend_, options_.shots);
      }
      value = acc / reps;
    }
  } catch (const ArityMismatch&) {
    throw;
  } catch (const std::exception& e) {
    throw ObjectiveEvaluationFailure(e.what());
  }
  history_.push_back({eval_index_, x, value});
  ++eval_index_;
  return value;
}

void ObjectiveFunction::persist_data(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  for (const auto& rec : history_) {
    const nlohmann::json line{
        {"iter", rec.iter}, {"params", rec.params}, {"value", rec.value}};
    out << line.dump() << "\n";
  }
}

ObjectiveFunction create_objective(const frontend::KernelRegistry& registry,
                                   const std::string& kernel, PauliOperator op,
                                   std::size_t n_params, backend::Backend& be,
                                   ArgsTranslator translator,
                                   ObjectiveOptions options) {
  const frontend::KernelDef& def = registry.get(kernel);
  if (!translator) {
    const auto& params = def.signature.params;
    const std::uint32_t width =
        options.qreg_size.value_or(std::max(op.num_qubits(), 1u));
    if (params.empty() || params[0].type != frontend::ParamType::qreg)
      throw NoDefaultTranslatorForSignature(
          "kernel '" + kernel + "' must take a qreg as its first parameter");
    const std::string reg_name = params[0].name;
    if (params.size() == 1) {
      translator = [width, reg_name](const std::vector<double>&) {
        return frontend::KernelArgs{frontend::QregArg{reg_name, width}};
      };
    } else if (params.size() == 2 &&
               params[1].type == frontend::ParamType::real) {
      translator = [width, reg_name](const std::vector<double>& x) {
        if (x.size() != 1)
          throw ArityMismatch(
              "default scalar translator expects 1 parameter, got " +
              std::to_string(x.size()));
        return frontend::KernelArgs{frontend::QregArg{reg_name, width}, x[0]};
      };
    } else if (params.size() == 2 &&
               params[1].type == frontend::ParamType::real_vector) {
      translator = [width, reg_name](const std::vector<double>& x) {
        return frontend::KernelArgs{frontend::QregArg{reg_name, width}, x};
      };
    } else {
      throw NoDefaultTranslatorForSignature(
          "no default argument translator for the signature of kernel '" +
          kernel + "'");
    }
  }
  return ObjectiveFunction(registry, kernel, std::move(op), n_params, be,
                           std::move(translator), options);
}

}  // namespace qk::hybrid
