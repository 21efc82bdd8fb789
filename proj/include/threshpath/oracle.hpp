#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "expanded.hpp"
#include "graph.hpp"

namespace threshpath {

enum class CostKind { primary, secondary };

inline Cost arc_cost(const Arc& a, CostKind kind) {
  return kind == CostKind::primary ? a.gamma : a.sigma;
}

// Distances from every node to its closest sink, with the canonical next
// hop toward the target set. `next_hop` chains always terminate at a sink;
// following them yields the lexicographically smallest optimal node
// sequence, because the smallest tight successor is chosen at every node.
struct DistanceMap {
  std::vector<NodeId> nodes;                    // ascending, the network's nodes
  std::vector<std::optional<Cost>> dist;        // nullopt: no sink reachable
  std::vector<std::optional<NodeId>> next_hop;  // nullopt at sinks and dead ends

  std::optional<Cost> dist_of(NodeId id) const {
    const auto it = std::lower_bound(nodes.begin(), nodes.end(), id);
    if (it == nodes.end() || *it != id) throw InputError("unknown node id " + std::to_string(id));
    return dist[static_cast<std::size_t>(it - nodes.begin())];
  }
};

// Label-correcting relaxation on the reversed graph, all sinks seeded at
// zero. Bounded by |N| passes over the arcs; a pass count overrun means a
// negative circuit fed the labels, which validated inputs exclude.
inline DistanceMap shortest_to_sinks(const Network& net, CostKind kind = CostKind::primary) {
  const std::size_t n = net.node_count();
  DistanceMap map;
  map.nodes = net.nodes();
  map.dist.assign(n, std::nullopt);
  map.next_hop.assign(n, std::nullopt);
  for (const NodeId t : net.sinks()) map.dist[net.index_of(t)] = 0;

  bool changed = n > 0;
  for (std::size_t pass = 0; pass < n && changed; ++pass) {
    changed = false;
    for (std::size_t a = 0; a < net.arc_count(); ++a) {
      const std::size_t tail = net.arc_tail_index(a);
      const std::size_t head = net.arc_head_index(a);
      if (!map.dist[head]) continue;
      const Cost through = *map.dist[head] + arc_cost(net.arc(a), kind);
      if (!map.dist[tail] || through < *map.dist[tail]) {
        map.dist[tail] = through;
        changed = true;
      }
    }
  }
  if (changed) {
    // One verification pass: anything still relaxing sits on a negative circuit.
    for (std::size_t a = 0; a < net.arc_count(); ++a) {
      const std::size_t tail = net.arc_tail_index(a);
      const std::size_t head = net.arc_head_index(a);
      if (!map.dist[head]) continue;
      if (!map.dist[tail] || *map.dist[head] + arc_cost(net.arc(a), kind) < *map.dist[tail])
        throw InternalError("shortest-distance relaxation did not converge; "
                            "non-positive circuit present");
    }
  }

  // Canonical next hops: smallest tight successor, none at sinks.
  for (std::size_t i = 0; i < n; ++i) {
    if (!map.dist[i] || net.is_sink_index(i)) continue;
    for (const std::uint32_t a : net.out_arcs(i)) {
      const std::size_t head = net.arc_head_index(a);
      if (map.dist[head] && *map.dist[head] + arc_cost(net.arc(a), kind) == *map.dist[i]) {
        map.next_hop[i] = net.id_at(head);
        break;  // out-arcs are head-ordered, first tight arc is canonical
      }
    }
  }
  return map;
}

// Follows canonical next hops from `from` to a sink. Empty when no sink is
// reachable.
inline std::optional<Path> canonical_path(const Network& net, const DistanceMap& map,
                                          NodeId from) {
  std::size_t idx = net.index_of(from);
  if (!map.dist[idx]) return std::nullopt;
  std::vector<NodeId> nodes{from};
  while (!net.is_sink_index(idx)) {
    const auto next = map.next_hop[idx];
    if (!next)
      throw InternalError("optimal next-hop chain broke before reaching a sink");
    nodes.push_back(*next);
    if (nodes.size() > net.node_count() + 1)
      throw InternalError("optimal next-hop chain cycles; non-positive circuit present");
    idx = net.index_of(*next);
  }
  return path_of(net, nodes);
}

// Every optimal sink-bound path from `from`, lexicographically ordered, up
// to `limit` paths. Intended for small networks when one canonical path is
// not enough (e.g. checking stochastic route spreading).
inline std::vector<Path> enumerate_shortest_paths(const Network& net, const DistanceMap& map,
                                                  NodeId from, std::size_t limit = 1024) {
  std::vector<Path> out;
  if (!map.dist[net.index_of(from)]) return out;
  std::vector<NodeId> stack{from};
  // Depth-first over tight arcs; tightness guarantees termination because
  // repeating a node would close a zero-cost circuit.
  auto dfs = [&](auto&& self, std::size_t idx) -> void {
    if (out.size() >= limit) return;
    if (net.is_sink_index(idx)) {
      out.push_back(path_of(net, stack));
      return;
    }
    for (const std::uint32_t a : net.out_arcs(idx)) {
      const std::size_t head = net.arc_head_index(a);
      if (!map.dist[head]) continue;
      if (*map.dist[head] + net.arc(a).gamma != *map.dist[idx]) continue;
      stack.push_back(net.id_at(head));
      self(self, head);
      stack.pop_back();
    }
  };
  dfs(dfs, net.index_of(from));
  return out;
}

namespace detail {

// Negative-circuit detection by relaxation from a virtual super source
// (all labels start at zero), predecessors tracked for witness recovery.
inline std::optional<std::vector<NodeId>> find_negative_circuit(const Network& net,
                                                                const std::vector<Cost>& w) {
  const std::size_t n = net.node_count();
  if (n == 0 || net.arc_count() == 0) return std::nullopt;
  std::vector<Cost> dist(n, 0);
  std::vector<std::int64_t> pred(n, -1);  // predecessor node index

  bool changed = true;
  for (std::size_t pass = 0; pass < n && changed; ++pass) {
    changed = false;
    for (std::size_t a = 0; a < net.arc_count(); ++a) {
      const std::size_t tail = net.arc_tail_index(a);
      const std::size_t head = net.arc_head_index(a);
      if (dist[tail] + w[a] < dist[head]) {
        dist[head] = dist[tail] + w[a];
        pred[head] = static_cast<std::int64_t>(tail);
        changed = true;
      }
    }
  }
  if (!changed) return std::nullopt;

  std::size_t on_cycle = 0;
  bool found = false;
  for (std::size_t a = 0; a < net.arc_count() && !found; ++a) {
    const std::size_t tail = net.arc_tail_index(a);
    const std::size_t head = net.arc_head_index(a);
    if (dist[tail] + w[a] < dist[head]) {
      on_cycle = tail;
      found = true;
    }
  }
  if (!found) return std::nullopt;

  // Walk predecessors n times to land strictly inside the circuit, then
  // collect it.
  for (std::size_t i = 0; i < n; ++i) {
    if (pred[on_cycle] < 0) throw InternalError("broken predecessor chain in circuit recovery");
    on_cycle = static_cast<std::size_t>(pred[on_cycle]);
  }
  std::vector<NodeId> cycle;
  std::size_t v = on_cycle;
  do {
    cycle.push_back(net.id_at(v));
    v = static_cast<std::size_t>(pred[v]);
  } while (v != on_cycle);
  std::reverse(cycle.begin(), cycle.end());

  // Canonical rotation: smallest node id first, closed by repeating it.
  const auto min_it = std::min_element(cycle.begin(), cycle.end());
  std::rotate(cycle.begin(), min_it, cycle.end());
  cycle.push_back(cycle.front());
  return cycle;
}

}  // namespace detail

// Finds a circuit whose summed cost is <= 0 (include_zero) or < 0. The
// <=0 search maps every cost w to (|N|+1)*w - 1: a k-arc circuit of weight W
// becomes (|N|+1)*W - k, negative exactly when W <= 0 since k <= |N|. The
// witness is returned as a closed node sequence rotated to its smallest id.
inline std::optional<std::vector<NodeId>> detect_nonpositive_circuit(const Network& net,
                                                                     CostKind kind,
                                                                     bool include_zero = true) {
  const std::size_t n = net.node_count();
  std::vector<Cost> w(net.arc_count());
  const Cost scale = static_cast<Cost>(n) + 1;
  for (std::size_t a = 0; a < net.arc_count(); ++a) {
    const Cost c = arc_cost(net.arc(a), kind);
    if (include_zero) {
      if (c > (std::numeric_limits<Cost>::max() / 4) / scale ||
          c < (std::numeric_limits<Cost>::min() / 4) / scale)
        throw InputError("cost magnitude too large for circuit detection");
      w[a] = scale * c - 1;
    } else {
      w[a] = c;
    }
  }
  auto cycle = detail::find_negative_circuit(net, w);
  if (!cycle) return std::nullopt;

  // The recovered circuit is negative in the transformed weights; sanity
  // check it against the original costs.
  Cost sum = 0;
  for (std::size_t i = 0; i + 1 < cycle->size(); ++i) {
    const auto a = net.find_arc((*cycle)[i], (*cycle)[i + 1]);
    if (!a) throw InternalError("circuit witness uses a missing arc");
    sum += arc_cost(net.arc(*a), kind);
  }
  if (include_zero ? sum > 0 : sum >= 0)
    throw InternalError("circuit witness does not meet the detection condition");
  return cycle;
}

struct SinkPairReport {
  bool ok = true;
  std::optional<Path> witness;  // a negative-length path between two sinks
};

// Checks that no path between two sinks has negative primary length, by a
// forward relaxation from each sink. Requires circuits to be positive, which
// the circuit detector establishes first during validation.
inline SinkPairReport sink_pair_paths_nonnegative(const Network& net) {
  SinkPairReport rep;
  const std::size_t n = net.node_count();
  for (const NodeId t : net.sinks()) {
    std::vector<std::optional<Cost>> dist(n, std::nullopt);
    std::vector<std::int64_t> pred(n, -1);
    dist[net.index_of(t)] = 0;
    bool changed = true;
    for (std::size_t pass = 0; pass < n && changed; ++pass) {
      changed = false;
      for (std::size_t a = 0; a < net.arc_count(); ++a) {
        const std::size_t tail = net.arc_tail_index(a);
        const std::size_t head = net.arc_head_index(a);
        if (!dist[tail]) continue;
        const Cost through = *dist[tail] + net.arc(a).gamma;
        if (!dist[head] || through < *dist[head]) {
          dist[head] = through;
          pred[head] = static_cast<std::int64_t>(tail);
          changed = true;
        }
      }
    }
    if (changed)
      throw InternalError("sink-pair relaxation did not converge; "
                          "non-positive circuit present");
    for (const NodeId other : net.sinks()) {
      if (other == t) continue;
      const std::size_t oi = net.index_of(other);
      if (dist[oi] && *dist[oi] < 0) {
        std::vector<NodeId> nodes;
        std::size_t v = oi;
        while (true) {
          nodes.push_back(net.id_at(v));
          if (pred[v] < 0) break;
          v = static_cast<std::size_t>(pred[v]);
          if (nodes.size() > n + 1)
            throw InternalError("broken predecessor chain in sink-pair witness");
        }
        std::reverse(nodes.begin(), nodes.end());
        rep.ok = false;
        rep.witness = path_of(net, nodes);
        return rep;
      }
    }
  }
  return rep;
}

struct ConstrainedAnswer {
  bool feasible = false;
  Cost length = 0;
  Cost secondary = 0;
  Path path;  // in base node ids
};

// Shortest feasible (budget <= c_max) path from `from` to any sink: the
// unconstrained distance computation run on the expansion rooted at `from`.
inline ConstrainedAnswer constrained_shortest(const Network& net, NodeId from, Cost c_max) {
  ConstrainedAnswer ans;
  if (net.is_sink(from)) {
    ans.feasible = true;
    ans.path.nodes = {from};
    return ans;
  }
  const std::vector<NodeId> roots{from};
  const ExpandedNetwork exp = expand(net, c_max, /*prune=*/true, &roots);
  const NodeId start = exp.encode(from, 0);
  if (!exp.net.has_node(start)) return ans;
  const DistanceMap map = shortest_to_sinks(exp.net);
  const auto d = map.dist_of(start);
  if (!d) return ans;
  const auto epath = canonical_path(exp.net, map, start);
  if (!epath) throw InternalError("distance finite but no optimal path recovered");
  ans.feasible = true;
  ans.length = *d;
  ans.secondary = exp.decode(epath->nodes.back()).second;
  ans.path.nodes = exp.project_walk(epath->nodes);
  ans.path.length = *d;
  ans.path.secondary = ans.secondary;
  return ans;
}

}  // namespace threshpath
