#include "qk/frontend/registry.hpp"

#include "qk/frontend/parser.hpp"

namespace qk::frontend {

namespace {

// Little-endian QFT: qubit start+i carries weight 2^i of the transformed
// index. The swap flag appends the usual order-reversal swaps.
const char* kStdlibSource = R"(
__qpu__ void qft(qreg q, int start, int n, int do_swap) {
  for (int i = n - 1; i >= 0; i--) {
    H(q[start + i]);
    for (int j = i - 1; j >= 0; j--) {
      CPhase(q[start + j], q[start + i], pi / (1 << (i - j)));
    }
  }
  if (do_swap) {
    for (int i = 0; i < n / 2; i++) {
      Swap(q[start + i], q[start + n - 1 - i]);
    }
  }
}

__qpu__ void iqft(qreg q, int start, int n, int do_swap) {
  qft::adjoint(q, start, n, do_swap);
}
)";

}  // namespace

ir::Circuit KernelHandle::operator()(const KernelArgs& args,
                                     const InstantiateOptions& opts) const {
  return instantiate(*registry_, name_, args, opts);
}

KernelRegistry::KernelRegistry() {
  for (auto& def : parse_kernels(kStdlibSource)) add_locked(std::move(def));
}

void KernelRegistry::add_locked(KernelDef def) {
  auto [it, inserted] = kernels_.emplace(def.name, std::move(def));
  if (!inserted)
    throw DuplicateKernel("kernel '" + it->first + "' is already registered");
}

void KernelRegistry::add(KernelDef def) {
  std::lock_guard<std::mutex> lock(mu_);
  add_locked(std::move(def));
}

bool KernelRegistry::contains(const std::string& name) const {
  std::lock_guard<std::mutex> lock(mu_);
  return kernels_.count(name) > 0;
}

const KernelDef* KernelRegistry::find(const std::string& name) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = kernels_.find(name);
  return it == kernels_.end() ? nullptr : &it->second;
}

const KernelDef& KernelRegistry::get(const std::string& name) const {
  const KernelDef* def = find(name);
  if (!def) throw UnknownKernelName("unknown kernel '" + name + "'");
  return *def;
}

std::vector<std::string> KernelRegistry::kernel_names() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<std::string> out;
  for (const auto& [name, def] : kernels_) out.push_back(name);
  return out;
}

std::vector<std::string> KernelRegistry::jit_compile(const std::string& source) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto hit = jit_cache_.find(source);
    if (hit != jit_cache_.end()) return hit->second;
  }
  // Parse outside the lock; parsing is pure.
  std::vector<KernelDef> defs = parse_kernels(source);

  std::lock_guard<std::mutex> lock(mu_);
  auto hit = jit_cache_.find(source);
  if (hit != jit_cache_.end()) return hit->second;  // lost a race, reuse
  std::vector<std::string> names;
  for (auto& def : defs) {
    names.push_back(def.name);
    add_locked(std::move(def));
  }
  ++compile_count_;
  jit_cache_.emplace(source, names);
  return names;
}

std::size_t KernelRegistry::compile_count() const {
  std::lock_guard<std::mutex> lock(mu_);
  return compile_count_;
}

KernelHandle KernelRegistry::get_kernel(const std::string& name) const {
  if (!contains(name))
    throw UnknownKernelName("unknown kernel '" + name + "'");
  return KernelHandle(this, name);
}

void invoke(const KernelRegistry& registry, const std::string& name,
            backend::Backend& be, backend::QRegBuffer& buffer,
            std::int64_t shots, const KernelArgs& extra_args) {
  KernelArgs args;
  args.push_back(QregArg{buffer.name, buffer.size});
  for (const auto& a : extra_args) args.push_back(a);
  ir::Circuit circuit = instantiate(registry, name, args);
  be.execute(circuit, buffer, shots);
}

}  // namespace qk::frontend
