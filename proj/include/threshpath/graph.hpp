#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "errors.hpp"

namespace threshpath {

using NodeId = std::int64_t;
using Cost = std::int64_t;

struct Arc {
  NodeId tail = 0;
  NodeId head = 0;
  Cost gamma = 0;  // primary cost; doubles as the movement threshold
  Cost sigma = 0;  // secondary cost charged against the budget

  friend bool operator==(const Arc&, const Arc&) = default;
};

// Weighted directed network with designated source and sink nodes.
// Canonical form: nodes ascending, arcs sorted by (tail, head), at most one
// arc per ordered pair, no self-loops. Out-adjacency is therefore sorted by
// head id, which fixes the scan order every deterministic rule relies on.
class Network {
 public:
  Network() = default;

  Network(std::vector<NodeId> nodes, std::vector<Arc> arcs,
          std::vector<NodeId> sources, std::vector<NodeId> sinks)
      : nodes_(std::move(nodes)),
        arcs_(std::move(arcs)),
        sources_(std::move(sources)),
        sinks_(std::move(sinks)) {
    canonicalize();
  }

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t arc_count() const { return arcs_.size(); }
  const std::vector<NodeId>& nodes() const { return nodes_; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  const std::vector<NodeId>& sources() const { return sources_; }
  const std::vector<NodeId>& sinks() const { return sinks_; }

  bool has_node(NodeId id) const { return index_.count(id) != 0; }

  std::size_t index_of(NodeId id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) throw InputError("unknown node id " + std::to_string(id));
    return it->second;
  }

  NodeId id_at(std::size_t idx) const { return nodes_[idx]; }
  bool is_sink_index(std::size_t idx) const { return sink_mask_[idx] != 0; }
  bool is_sink(NodeId id) const { return is_sink_index(index_of(id)); }
  bool is_source(NodeId id) const {
    return std::binary_search(sources_.begin(), sources_.end(), id);
  }

  // Arc indices leaving the node, ordered by head id.
  const std::vector<std::uint32_t>& out_arcs(std::size_t idx) const { return out_[idx]; }

  const Arc& arc(std::size_t arc_idx) const { return arcs_[arc_idx]; }
  std::size_t arc_tail_index(std::size_t arc_idx) const { return arc_tail_idx_[arc_idx]; }
  std::size_t arc_head_index(std::size_t arc_idx) const { return arc_head_idx_[arc_idx]; }

  std::optional<std::size_t> find_arc(NodeId tail, NodeId head) const {
    if (!has_node(tail) || !has_node(head)) return std::nullopt;
    for (const std::uint32_t a : out_[index_of(tail)]) {
      if (arcs_[a].head == head) return a;
    }
    return std::nullopt;
  }

  // Largest gamma over all arcs; the classical cost upper bound. Zero on
  // arcless networks so derived bounds stay well defined.
  Cost max_gamma() const {
    Cost g = 0;
    for (const Arc& a : arcs_) g = std::max(g, a.gamma);
    return g;
  }
  Cost max_abs_gamma() const {
    Cost g = 0;
    for (const Arc& a : arcs_) g = std::max(g, a.gamma < 0 ? -a.gamma : a.gamma);
    return g;
  }
  Cost max_sigma() const {
    Cost s = 0;
    for (const Arc& a : arcs_) s = std::max(s, a.sigma);
    return s;
  }

  // Fingerprint over the node list and sink mask; states carry the same
  // value so mismatched network/state pairs are rejected in O(1).
  std::uint64_t fingerprint() const { return fingerprint_; }

  friend bool operator==(const Network& a, const Network& b) {
    return a.nodes_ == b.nodes_ && a.arcs_ == b.arcs_ &&
           a.sources_ == b.sources_ && a.sinks_ == b.sinks_;
  }

 private:
  void canonicalize() {
    std::sort(nodes_.begin(), nodes_.end());
    if (std::adjacent_find(nodes_.begin(), nodes_.end()) != nodes_.end())
      throw InputError("duplicate node id");
    index_.reserve(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) index_[nodes_[i]] = i;

    std::sort(arcs_.begin(), arcs_.end(), [](const Arc& a, const Arc& b) {
      return a.tail != b.tail ? a.tail < b.tail : a.head < b.head;
    });
    for (std::size_t i = 0; i < arcs_.size(); ++i) {
      const Arc& a = arcs_[i];
      if (a.tail == a.head)
        throw InputError("self-loop at node " + std::to_string(a.tail));
      if (!has_node(a.tail) || !has_node(a.head))
        throw InputError("arc endpoint not declared: " + std::to_string(a.tail) +
                         "->" + std::to_string(a.head));
      if (i > 0 && arcs_[i - 1].tail == a.tail && arcs_[i - 1].head == a.head)
        throw InputError("duplicate arc " + std::to_string(a.tail) + "->" +
                         std::to_string(a.head));
    }

    auto prep_set = [&](std::vector<NodeId>& set, const char* what) {
      std::sort(set.begin(), set.end());
      set.erase(std::unique(set.begin(), set.end()), set.end());
      for (const NodeId id : set) {
        if (!has_node(id))
          throw InputError(std::string(what) + " node not declared: " + std::to_string(id));
      }
    };
    prep_set(sources_, "source");
    prep_set(sinks_, "sink");
    for (const NodeId s : sources_) {
      if (std::binary_search(sinks_.begin(), sinks_.end(), s))
        throw InputError("node " + std::to_string(s) + " is both source and sink");
    }

    sink_mask_.assign(nodes_.size(), 0);
    for (const NodeId t : sinks_) sink_mask_[index_of(t)] = 1;

    out_.assign(nodes_.size(), {});
    arc_tail_idx_.resize(arcs_.size());
    arc_head_idx_.resize(arcs_.size());
    for (std::size_t i = 0; i < arcs_.size(); ++i) {
      arc_tail_idx_[i] = index_of(arcs_[i].tail);
      arc_head_idx_[i] = index_of(arcs_[i].head);
      out_[arc_tail_idx_[i]].push_back(static_cast<std::uint32_t>(i));
    }

    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a over ids and sink mask
    auto mix = [&h](std::uint64_t v) {
      h ^= v;
      h *= 1099511628211ULL;
    };
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      mix(static_cast<std::uint64_t>(nodes_[i]));
      mix(sink_mask_[i]);
    }
    fingerprint_ = h;
  }

  std::vector<NodeId> nodes_;
  std::vector<Arc> arcs_;
  std::vector<NodeId> sources_;
  std::vector<NodeId> sinks_;
  std::unordered_map<NodeId, std::size_t> index_;
  std::vector<char> sink_mask_;
  std::vector<std::vector<std::uint32_t>> out_;
  std::vector<std::size_t> arc_tail_idx_;
  std::vector<std::size_t> arc_head_idx_;
  std::uint64_t fingerprint_ = 0;
};

// Per-node token counts. Sinks are pinned to zero: tokens reaching a sink
// leave the network, so a sink buffer never holds anything. Counts may go
// negative when negative thresholds let virtual tokens flow (the counter
// is the state, not a physical inventory).
class NetworkState {
 public:
  NetworkState() = default;

  explicit NetworkState(const Network& net)
      : fingerprint_(net.fingerprint()),
        ids_(net.nodes()),
        x_(net.node_count(), 0) {
    sink_.resize(net.node_count());
    for (std::size_t i = 0; i < net.node_count(); ++i) sink_[i] = net.is_sink_index(i) ? 1 : 0;
  }

  bool matches(const Network& net) const {
    return fingerprint_ == net.fingerprint() && ids_.size() == net.node_count();
  }

  std::size_t size() const { return ids_.size(); }
  const std::vector<NodeId>& ids() const { return ids_; }

  std::int64_t get(NodeId id) const { return x_[index_of(id)]; }

  void set(NodeId id, std::int64_t value) {
    const std::size_t i = index_of(id);
    if (sink_[i] && value != 0)
      throw InputError("sink node " + std::to_string(id) + " must hold zero tokens");
    x_[i] = value;
  }

  // Index-based accessors for the hot paths; indices follow the owning
  // network's node order.
  std::int64_t at(std::size_t idx) const { return x_[idx]; }
  void bump(std::size_t idx, std::int64_t delta) { x_[idx] += delta; }
  bool is_sink_index(std::size_t idx) const { return sink_[idx] != 0; }

  std::int64_t total() const {
    std::int64_t v = 0;
    for (const std::int64_t c : x_) v += c;
    return v;
  }

  friend bool operator==(const NetworkState& a, const NetworkState& b) {
    return a.ids_ == b.ids_ && a.x_ == b.x_;
  }

 private:
  std::size_t index_of(NodeId id) const {
    const auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it == ids_.end() || *it != id)
      throw InputError("state has no node " + std::to_string(id));
    return static_cast<std::size_t>(it - ids_.begin());
  }

  std::uint64_t fingerprint_ = 0;
  std::vector<NodeId> ids_;
  std::vector<char> sink_;
  std::vector<std::int64_t> x_;
};

inline std::int64_t total_tokens(const NetworkState& state) { return state.total(); }

// Node sequence with its accumulated costs. A Walk may revisit nodes; a
// Path may not. Both are built through the checked factories below.
struct Walk {
  std::vector<NodeId> nodes;
  Cost length = 0;     // sum of gamma over consecutive arcs
  Cost secondary = 0;  // sum of sigma
};
using Path = Walk;

inline Walk walk_of(const Network& net, const std::vector<NodeId>& nodes) {
  if (nodes.empty()) throw InputError("empty walk");
  Walk w;
  w.nodes = nodes;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const auto a = net.find_arc(nodes[i], nodes[i + 1]);
    if (!a)
      throw InputError("walk uses missing arc " + std::to_string(nodes[i]) +
                       "->" + std::to_string(nodes[i + 1]));
    w.length += net.arc(*a).gamma;
    w.secondary += net.arc(*a).sigma;
  }
  return w;
}

inline Path path_of(const Network& net, const std::vector<NodeId>& nodes) {
  std::vector<NodeId> sorted = nodes;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw InputError("path repeats a node");
  return walk_of(net, nodes);
}

struct AdmissibilityReport {
  bool admissible = true;
  std::vector<Arc> violations;  // arcs with x_tail - x_head > gamma
};

// Arc form of admissibility. By telescoping this is equivalent to
// x_i - x_j <= L(p) for every path p from i to j.
inline AdmissibilityReport is_admissible(const Network& net, const NetworkState& state) {
  if (!state.matches(net)) throw InputError("state does not belong to this network");
  AdmissibilityReport rep;
  for (std::size_t a = 0; a < net.arc_count(); ++a) {
    const std::int64_t xt = state.at(net.arc_tail_index(a));
    const std::int64_t xh = state.at(net.arc_head_index(a));
    if (xt - xh > net.arc(a).gamma) {
      rep.admissible = false;
      rep.violations.push_back(net.arc(a));
    }
  }
  return rep;
}

// Incidence matrix with sink rows removed: rows follow non-sink nodes in
// ascending id order, columns follow the canonical arc order, entries are
// -1 at the tail and +1 at the head.
struct IncidenceMatrix {
  std::vector<NodeId> row_nodes;
  std::size_t cols = 0;
  std::vector<std::int8_t> entries;  // row-major

  std::int8_t at(std::size_t row, std::size_t col) const { return entries[row * cols + col]; }
};

inline IncidenceMatrix incidence_matrix(const Network& net) {
  IncidenceMatrix m;
  std::vector<std::int64_t> row_of(net.node_count(), -1);
  for (std::size_t i = 0; i < net.node_count(); ++i) {
    if (!net.is_sink_index(i)) {
      row_of[i] = static_cast<std::int64_t>(m.row_nodes.size());
      m.row_nodes.push_back(net.id_at(i));
    }
  }
  m.cols = net.arc_count();
  m.entries.assign(m.row_nodes.size() * m.cols, 0);
  for (std::size_t a = 0; a < net.arc_count(); ++a) {
    const std::int64_t rt = row_of[net.arc_tail_index(a)];
    const std::int64_t rh = row_of[net.arc_head_index(a)];
    if (rt >= 0) m.entries[static_cast<std::size_t>(rt) * m.cols + a] = -1;
    if (rh >= 0) m.entries[static_cast<std::size_t>(rh) * m.cols + a] = 1;
  }
  return m;
}

enum class ModKind {
  remove_nodes,
  add_nodes,
  remove_arcs,
  add_arcs,
  set_sources,
  set_sinks,
};

// One structural change to a live network. node_ids carries the payload for
// node and source/sink kinds; arcs for the arc kinds (gamma/sigma ignored on
// removal). at_step orders events inside a scenario.
struct Modification {
  ModKind kind = ModKind::remove_nodes;
  std::vector<NodeId> node_ids;
  std::vector<Arc> arcs;
  std::int64_t at_step = 0;
};

template <typename StateT>
struct ModifiedNetwork {
  Network net;
  StateT state;
  std::int64_t tokens_discarded = 0;  // buffered tokens dropped by the change
};

namespace detail {

inline void collect_modified_shape(const Network& net, const Modification& mod,
                                   std::vector<NodeId>& nodes, std::vector<Arc>& arcs,
                                   std::vector<NodeId>& sources, std::vector<NodeId>& sinks,
                                   std::vector<NodeId>& dropped_nodes,
                                   std::vector<NodeId>& new_sinks) {
  nodes = net.nodes();
  arcs = net.arcs();
  sources = net.sources();
  sinks = net.sinks();
  auto erase_id = [](std::vector<NodeId>& v, NodeId id) {
    v.erase(std::remove(v.begin(), v.end(), id), v.end());
  };
  std::vector<NodeId> payload_ids = mod.node_ids;
  std::sort(payload_ids.begin(), payload_ids.end());
  payload_ids.erase(std::unique(payload_ids.begin(), payload_ids.end()), payload_ids.end());
  switch (mod.kind) {
    case ModKind::remove_nodes:
      for (const NodeId id : payload_ids) {
        if (!net.has_node(id)) throw InputError("cannot remove unknown node " + std::to_string(id));
        erase_id(nodes, id);
        erase_id(sources, id);
        erase_id(sinks, id);
        dropped_nodes.push_back(id);
        arcs.erase(std::remove_if(arcs.begin(), arcs.end(),
                                  [id](const Arc& a) { return a.tail == id || a.head == id; }),
                   arcs.end());
      }
      break;
    case ModKind::add_nodes:
      for (const NodeId id : payload_ids) {
        if (net.has_node(id)) throw InputError("node " + std::to_string(id) + " already exists");
        nodes.push_back(id);
      }
      break;
    case ModKind::remove_arcs:
      for (const Arc& spec : mod.arcs) {
        const auto found = net.find_arc(spec.tail, spec.head);
        if (!found)
          throw InputError("cannot remove missing arc " + std::to_string(spec.tail) + "->" +
                           std::to_string(spec.head));
        arcs.erase(std::remove_if(arcs.begin(), arcs.end(),
                                  [&spec](const Arc& a) {
                                    return a.tail == spec.tail && a.head == spec.head;
                                  }),
                   arcs.end());
      }
      break;
    case ModKind::add_arcs:
      for (const Arc& a : mod.arcs) arcs.push_back(a);
      break;
    case ModKind::set_sources:
      sources = mod.node_ids;
      break;
    case ModKind::set_sinks: {
      sinks = mod.node_ids;
      for (const NodeId id : mod.node_ids) {
        if (!net.has_node(id)) throw InputError("cannot make unknown node a sink");
        if (!net.is_sink(id)) new_sinks.push_back(id);
      }
      break;
    }
  }
}

}  // namespace detail

// Applies a single modification, returning the rebuilt network plus a state
// carried over node by node. Tokens buffered in removed nodes or in nodes
// that just became sinks are discarded and reported.
inline ModifiedNetwork<NetworkState> apply_modification(const Network& net,
                                                        const NetworkState& state,
                                                        const Modification& mod) {
  if (!state.matches(net)) throw InputError("state does not belong to this network");
  std::vector<NodeId> nodes, sources, sinks, dropped, new_sinks;
  std::vector<Arc> arcs;
  detail::collect_modified_shape(net, mod, nodes, arcs, sources, sinks, dropped, new_sinks);

  ModifiedNetwork<NetworkState> out{Network(nodes, arcs, sources, sinks), NetworkState{}, 0};
  out.state = NetworkState(out.net);
  for (const NodeId id : dropped) out.tokens_discarded += state.get(id);
  for (const NodeId id : out.net.nodes()) {
    if (!net.has_node(id)) continue;  // freshly added, stays zero
    const std::int64_t v = state.get(id);
    if (out.net.is_sink(id)) {
      out.tokens_discarded += v;  // zero unless the node just became a sink
      continue;
    }
    out.state.set(id, v);
  }
  return out;
}

}  // namespace threshpath
