#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "qk/placement/placement.hpp"

namespace qk::placement {

namespace {

using ir::GateKind;
using ir::Instruction;

struct Mapper {
  std::vector<std::uint32_t> l2p;
  std::vector<std::optional<std::uint32_t>> p2l;

  Mapper(const std::vector<std::uint32_t>& init, std::uint32_t n_phys)
      : l2p(init) {
    p2l.assign(n_phys, std::nullopt);
    for (std::uint32_t l = 0; l < l2p.size(); ++l) p2l[l2p[l]] = l;
  }

  void swap_physical(std::uint32_t x, std::uint32_t y) {
    auto lx = p2l[x], ly = p2l[y];
    if (lx) l2p[*lx] = y;
    if (ly) l2p[*ly] = x;
    std::swap(p2l[x], p2l[y]);
  }
};

Instruction remap_inst(const Instruction& inst,
                       const std::vector<std::uint32_t>& l2p) {
  std::vector<ir::QubitRef> qubits;
  for (const auto& q : inst.qubits()) qubits.push_back({l2p[q.index]});
  return Instruction(inst.kind(), std::move(qubits), inst.params(),
                     inst.classical_target());
}

// Shortest path, endpoints included. Ascending neighbor exploration makes
// the choice deterministic among equal-length paths.
std::vector<std::uint32_t> bfs_path(
    const std::vector<std::vector<std::uint32_t>>& adj, std::uint32_t from,
    std::uint32_t to) {
  std::vector<std::int64_t> parent(adj.size(), -1);
  std::deque<std::uint32_t> queue{from};
  parent[from] = from;
  while (!queue.empty()) {
    const auto cur = queue.front();
    queue.pop_front();
    if (cur == to) break;
    for (auto nb : adj[cur]) {
      if (parent[nb] >= 0) continue;
      parent[nb] = cur;
      queue.push_back(nb);
    }
  }
  if (parent[to] < 0)
    throw DisconnectedGraph("no path between physical qubits " +
                            std::to_string(from) + " and " +
                            std::to_string(to));
  std::vector<std::uint32_t> path{to};
  while (path.back() != from)
    path.push_back(static_cast<std::uint32_t>(parent[path.back()]));
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<std::vector<int>> all_pairs_distance(
    const std::vector<std::vector<std::uint32_t>>& adj) {
  const std::size_t n = adj.size();
  std::vector<std::vector<int>> dist(n, std::vector<int>(n, 1 << 20));
  for (std::size_t s = 0; s < n; ++s) {
    dist[s][s] = 0;
    std::deque<std::uint32_t> queue{static_cast<std::uint32_t>(s)};
    while (!queue.empty()) {
      const auto cur = queue.front();
      queue.pop_front();
      for (auto nb : adj[cur])
        if (dist[s][nb] > dist[s][cur] + 1) {
          dist[s][nb] = dist[s][cur] + 1;
          queue.push_back(nb);
        }
    }
  }
  return dist;
}

PlacementResult run_ssp(const ir::Circuit& c,
                        const std::vector<Instruction>& flat,
                        const CouplingGraph& g,
                        const std::vector<std::vector<std::uint32_t>>& adj,
                        const std::vector<std::uint32_t>& init) {
  Mapper m(init, g.n_physical);
  ir::Circuit out(c.name());
  std::uint32_t added = 0;
  for (const auto& inst : flat) {
    if (inst.qubits().size() == 2) {
      const auto a = inst.qubits()[0].index;
      const auto b = inst.qubits()[1].index;
      if (!g.has_edge(m.l2p[a], m.l2p[b])) {
        // Walk the first operand toward the second; the permutation stays
        // applied afterwards instead of being mirrored back.
        const auto path = bfs_path(adj, m.l2p[a], m.l2p[b]);
        for (std::size_t i = 0; i + 2 < path.size(); ++i) {
          out.add(ir::gate(GateKind::Swap, path[i], path[i + 1]));
          m.swap_physical(path[i], path[i + 1]);
          ++added;
        }
      }
    }
    out.add(remap_inst(inst, m.l2p));
  }
  return {std::move(out), init, m.l2p, added};
}

struct Dag {
  std::vector<std::vector<std::size_t>> succ;
  std::vector<int> indeg;
};

Dag build_dag(const std::vector<Instruction>& flat) {
  Dag d;
  d.succ.resize(flat.size());
  d.indeg.assign(flat.size(), 0);
  std::map<std::uint32_t, std::size_t> last;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    for (const auto& q : flat[i].qubits()) {
      auto it = last.find(q.index);
      if (it != last.end()) {
        d.succ[it->second].push_back(i);
        ++d.indeg[i];
      }
      last[q.index] = i;
    }
  }
  return d;
}

constexpr std::size_t kExtendedSize = 20;
constexpr double kExtendedWeight = 0.5;
constexpr double kDecayStep = 0.001;
constexpr int kDecayResetInterval = 5;

// One SABRE traversal. Emits into `out`/`added` when given; used without
// them for the map-selection passes.
std::vector<std::uint32_t> sabre_route(
    const std::vector<Instruction>& flat, const CouplingGraph& g,
    const std::vector<std::vector<std::uint32_t>>& adj,
    const std::vector<std::vector<int>>& dist,
    const std::vector<std::uint32_t>& init, ir::Circuit* out,
    std::uint32_t* added) {
  Mapper m(init, g.n_physical);
  Dag dag = build_dag(flat);
  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < flat.size(); ++i)
    if (dag.indeg[i] == 0) ready.insert(i);

  std::vector<double> decay(g.n_physical, 1.0);
  int swaps_since_reset = 0;
  std::size_t executed = 0;
  std::size_t stall = 0;
  const std::size_t stall_limit =
      4ull * g.n_physical * g.n_physical + 16;

  auto complete = [&](std::size_t i) {
    ready.erase(i);
    ++executed;
    for (auto s : dag.succ[i])
      if (--dag.indeg[s] == 0) ready.insert(s);
  };
  auto executable = [&](std::size_t i) {
    const auto& qs = flat[i].qubits();
    return qs.size() == 1 ||
           g.has_edge(m.l2p[qs[0].index], m.l2p[qs[1].index]);
  };
  auto emit_swap = [&](std::uint32_t x, std::uint32_t y) {
    if (out) out->add(ir::gate(GateKind::Swap, x, y));
    if (added) ++*added;
    m.swap_physical(x, y);
  };

  while (executed < flat.size()) {
    const std::size_t before = executed;
    bool progressed = true;
    while (progressed) {
      progressed = false;
      for (auto it = ready.begin(); it != ready.end();) {
        const std::size_t i = *it;
        ++it;
        if (!executable(i)) continue;
        if (out) out->add(remap_inst(flat[i], m.l2p));
        complete(i);
        progressed = true;
      }
    }
    if (executed > before) stall = 0;
    if (executed == flat.size()) break;

    const std::vector<std::size_t> front(ready.begin(), ready.end());
    if (++stall > stall_limit) {
      // Heuristic is cycling; route the lowest-index blocked gate directly.
      const auto& qs = flat[front.front()].qubits();
      const auto path = bfs_path(adj, m.l2p[qs[0].index], m.l2p[qs[1].index]);
      for (std::size_t i = 0; i + 2 < path.size(); ++i)
        emit_swap(path[i], path[i + 1]);
      stall = 0;
      continue;
    }

    std::vector<std::size_t> extended;
    {
      std::deque<std::size_t> queue(front.begin(), front.end());
      std::set<std::size_t> seen(front.begin(), front.end());
      while (!queue.empty() && extended.size() < kExtendedSize) {
        const auto i = queue.front();
        queue.pop_front();
        for (auto s : dag.succ[i]) {
          if (!seen.insert(s).second) continue;
          if (flat[s].qubits().size() == 2 && extended.size() < kExtendedSize)
            extended.push_back(s);
          queue.push_back(s);
        }
      }
    }

    std::set<std::uint32_t> active;
    for (auto i : front) {
      active.insert(m.l2p[flat[i].qubits()[0].index]);
      active.insert(m.l2p[flat[i].qubits()[1].index]);
    }

    double best_score = std::numeric_limits<double>::infinity();
    std::pair<std::uint32_t, std::uint32_t> best_edge{0, 0};
    for (const auto& [x, y] : g.edges) {
      if (!active.count(x) && !active.count(y)) continue;
      const auto trial = [&, x = x, y = y](std::uint32_t p) {
        return p == x ? y : p == y ? x : p;
      };
      double front_cost = 0;
      for (auto i : front)
        front_cost += dist[trial(m.l2p[flat[i].qubits()[0].index])]
                          [trial(m.l2p[flat[i].qubits()[1].index])];
      front_cost /= static_cast<double>(front.size());
      double ext_cost = 0;
      if (!extended.empty()) {
        for (auto i : extended)
          ext_cost += dist[trial(m.l2p[flat[i].qubits()[0].index])]
                          [trial(m.l2p[flat[i].qubits()[1].index])];
        ext_cost /= static_cast<double>(extended.size());
      }
      const double score = std::max(decay[x], decay[y]) *
                           (front_cost + kExtendedWeight * ext_cost);
      if (score < best_score) {
        best_score = score;
        best_edge = {x, y};
      }
    }

    emit_swap(best_edge.first, best_edge.second);
    decay[best_edge.first] += kDecayStep;
    decay[best_edge.second] += kDecayStep;
    if (++swaps_since_reset >= kDecayResetInterval) {
      std::fill(decay.begin(), decay.end(), 1.0);
      swaps_since_reset = 0;
    }
  }
  return m.l2p;
}

}  // namespace

PlacementResult place(const ir::Circuit& c, const CouplingGraph& g, Strategy s,
                      std::optional<std::vector<std::uint32_t>> initial_map) {
  auto flat = c.flatten();
  const std::uint32_t n_logical = c.min_width();
  if (n_logical > g.n_physical)
    throw GraphTooSmall("circuit uses " + std::to_string(n_logical) +
                        " qubits but the graph has " +
                        std::to_string(g.n_physical));

  std::vector<std::uint32_t> init;
  if (initial_map) {
    init = *initial_map;
    if (init.size() < n_logical)
      throw MapTooShort("initial map has " + std::to_string(init.size()) +
                        " entries but the circuit uses " +
                        std::to_string(n_logical) + " qubits");
    init.resize(n_logical);
    for (auto p : init)
      if (p >= g.n_physical)
        throw GraphTooSmall("initial map entry " + std::to_string(p) +
                            " is outside the graph");
    auto sorted = init;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw DuplicatePhysicalIndex("initial map entries must be distinct");
  } else {
    init.resize(n_logical);
    std::iota(init.begin(), init.end(), 0u);
  }

  if (flat.empty()) return {ir::Circuit(c.name()), init, init, 0};

  const auto adj = g.adjacency();

  // The routed component must contain every used qubit's starting position.
  {
    std::set<std::uint32_t> used_phys;
    for (const auto& inst : flat)
      for (const auto& q : inst.qubits()) used_phys.insert(init[q.index]);
    if (!used_phys.empty()) {
      std::vector<bool> seen(g.n_physical, false);
      std::deque<std::uint32_t> queue{*used_phys.begin()};
      seen[*used_phys.begin()] = true;
      while (!queue.empty()) {
        const auto cur = queue.front();
        queue.pop_front();
        for (auto nb : adj[cur])
          if (!seen[nb]) {
            seen[nb] = true;
            queue.push_back(nb);
          }
      }
      for (auto p : used_phys)
        if (!seen[p])
          throw DisconnectedGraph(
              "used qubits span disconnected graph components");
    }
  }

  // Already-valid circuits pass through untouched under either strategy.
  bool valid = true;
  for (const auto& inst : flat)
    if (inst.qubits().size() == 2 &&
        !g.has_edge(init[inst.qubits()[0].index], init[inst.qubits()[1].index])) {
      valid = false;
      break;
    }
  if (valid) {
    ir::Circuit out(c.name());
    for (const auto& inst : flat) out.add(remap_inst(inst, init));
    return {std::move(out), init, init, 0};
  }

  if (s == Strategy::ssp) return run_ssp(c, flat, g, adj, init);

  const auto dist = all_pairs_distance(adj);
  std::vector<std::uint32_t> start = init;
  if (!initial_map) {
    // Forward-backward-forward traversal: each direction refines the layout
    // the next one starts from.
    auto m1 = sabre_route(flat, g, adj, dist, start, nullptr, nullptr);
    std::vector<Instruction> reversed(flat.rbegin(), flat.rend());
    start = sabre_route(reversed, g, adj, dist, m1, nullptr, nullptr);
  }
  ir::Circuit out(c.name());
  std::uint32_t added = 0;
  auto final_map = sabre_route(flat, g, adj, dist, start, &out, &added);
  return {std::move(out), start, final_map, added};
}

}  // namespace qk::placement
