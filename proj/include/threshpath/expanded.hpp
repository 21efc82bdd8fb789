#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "errors.hpp"
#include "graph.hpp"

namespace threshpath {

// Budget-expanded companion network. Node i^c stands for "at i having spent
// c"; the arc (i, j) of the base yields (i^c, j^{c+sigma_ij}) wherever the
// budget allows. Copies keep the base gamma and carry sigma 0, so the
// expansion is a plain Network and every unconstrained tool runs on it
// unchanged. Sources are the step-0 source replicas, sinks are every sink
// replica.
class ExpandedNetwork {
 public:
  Network net;       // node ids are encoded (base index, step) pairs
  Network base;      // the network that was expanded
  Cost c_max = 0;

  NodeId encode(NodeId base_id, Cost step) const {
    return static_cast<NodeId>(base.index_of(base_id)) * (c_max + 1) + step;
  }

  // (base id, step) of an expanded node id.
  std::pair<NodeId, Cost> decode(NodeId expanded_id) const {
    const NodeId width = c_max + 1;
    const NodeId bidx = expanded_id / width;
    const Cost step = static_cast<Cost>(expanded_id % width);
    if (bidx < 0 || bidx >= static_cast<NodeId>(base.node_count()))
      throw InputError("not an expanded node id: " + std::to_string(expanded_id));
    return {base.id_at(static_cast<std::size_t>(bidx)), step};
  }

  bool contains(NodeId base_id, Cost step) const {
    return step >= 0 && step <= c_max && net.has_node(encode(base_id, step));
  }

  // Maps a walk through the expansion back to base node ids.
  std::vector<NodeId> project_walk(const std::vector<NodeId>& expanded_walk) const {
    std::vector<NodeId> out;
    out.reserve(expanded_walk.size());
    for (const NodeId v : expanded_walk) out.push_back(decode(v).first);
    return out;
  }
};

// Builds the expansion. When `prune` is set (the default), nodes a token
// injected at a root can never occupy are dropped; reachability does not
// continue through sink replicas because tokens leave there. `roots`
// overrides the base sources as the injection points (used when asking for
// a constrained distance from an arbitrary node).
inline ExpandedNetwork expand(const Network& base, Cost c_max, bool prune = true,
                              const std::vector<NodeId>* roots = nullptr) {
  if (c_max < 0) throw InputError("c_max must be non-negative");
  for (const Arc& a : base.arcs()) {
    if (a.sigma < 0)
      throw InputError("negative secondary costs are not supported by the expansion");
  }
  const std::int64_t width = c_max + 1;
  if (static_cast<std::int64_t>(base.node_count()) * width > (1LL << 26))
    throw InputError("expansion too large");

  ExpandedNetwork exp;
  exp.base = base;
  exp.c_max = c_max;

  const std::size_t n = base.node_count();
  auto eid = [&](std::size_t bidx, Cost step) {
    return static_cast<NodeId>(bidx) * width + step;
  };

  std::vector<char> keep(n * static_cast<std::size_t>(width), 1);
  if (prune) {
    std::fill(keep.begin(), keep.end(), 0);
    std::deque<std::pair<std::size_t, Cost>> frontier;
    auto visit = [&](std::size_t bidx, Cost step) {
      char& flag = keep[bidx * width + static_cast<std::size_t>(step)];
      if (flag) return;
      flag = 1;
      frontier.emplace_back(bidx, step);
    };
    if (roots) {
      for (const NodeId r : *roots) visit(base.index_of(r), 0);
    } else {
      for (const NodeId s : base.sources()) visit(base.index_of(s), 0);
    }
    while (!frontier.empty()) {
      const auto [bidx, step] = frontier.front();
      frontier.pop_front();
      if (base.is_sink_index(bidx)) continue;  // tokens exit here
      for (const std::uint32_t a : base.out_arcs(bidx)) {
        const Cost next = step + base.arc(a).sigma;
        if (next <= c_max) visit(base.arc_head_index(a), next);
      }
    }
  }

  std::vector<NodeId> nodes;
  std::vector<Arc> arcs;
  std::vector<NodeId> sources;
  std::vector<NodeId> sinks;
  for (std::size_t b = 0; b < n; ++b) {
    for (Cost step = 0; step <= c_max; ++step) {
      if (!keep[b * width + static_cast<std::size_t>(step)]) continue;
      const NodeId v = eid(b, step);
      nodes.push_back(v);
      if (base.is_sink_index(b)) sinks.push_back(v);
      for (const std::uint32_t a : base.out_arcs(b)) {
        const Cost next = step + base.arc(a).sigma;
        if (next > c_max) continue;
        const std::size_t hb = base.arc_head_index(a);
        if (!keep[hb * width + static_cast<std::size_t>(next)]) continue;
        arcs.push_back(Arc{v, eid(hb, next), base.arc(a).gamma, 0});
      }
    }
  }
  const std::vector<NodeId>& root_ids = roots ? *roots : base.sources();
  for (const NodeId s : root_ids) {
    const std::size_t bidx = base.index_of(s);
    if (base.is_sink_index(bidx)) continue;  // a sink root stays a sink
    if (keep[bidx * width]) sources.push_back(eid(bidx, 0));
  }

  exp.net = Network(std::move(nodes), std::move(arcs), std::move(sources), std::move(sinks));
  return exp;
}

}  // namespace threshpath
