#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "expanded.hpp"
#include "graph.hpp"
#include "oracle.hpp"

namespace threshpath {

// Findings of validate_assumptions. Failures carry witnesses instead of
// throwing: callers decide whether a red report is fatal.
struct ValidationReport {
  bool weakly_connected = true;
  std::map<NodeId, bool> feasible_path_per_source;  // budget-aware when c_max given
  std::optional<std::vector<NodeId>> nonpositive_gamma_circuit;
  std::optional<std::vector<NodeId>> negative_sigma_circuit;
  std::optional<Path> negative_sink_pair_path;
  std::optional<Arc> negative_sigma_arc;  // sigma < 0 is rejected outright
  bool overflow_safe = true;
  bool has_sink = true;  // only required when sources exist
  Cost gamma_bound = 0;  // max gamma, the classical cost bound
  Cost sigma_bound = 0;  // max sigma
  std::vector<std::string> messages;

  bool passed() const {
    bool feasible = true;
    for (const auto& [src, ok] : feasible_path_per_source) feasible = feasible && ok;
    return weakly_connected && feasible && has_sink && overflow_safe &&
           !nonpositive_gamma_circuit && !negative_sigma_circuit &&
           !negative_sink_pair_path && !negative_sigma_arc;
  }
};

// Checks every admission condition the policy relies on: weak connectivity,
// a (budget-)feasible sink path from every source, no circuits of
// non-positive primary cost, no circuits of negative secondary cost, no
// negative paths between sinks, and enough 64-bit headroom that the derived
// bounds cannot overflow.
inline ValidationReport validate_assumptions(const Network& net,
                                             std::optional<Cost> c_max = std::nullopt) {
  ValidationReport rep;
  const std::size_t n = net.node_count();
  rep.gamma_bound = net.max_gamma();
  rep.sigma_bound = net.max_sigma();

  // Weak connectivity: BFS over arcs in both directions.
  if (n > 1) {
    std::vector<std::vector<std::size_t>> und(n);
    for (std::size_t a = 0; a < net.arc_count(); ++a) {
      und[net.arc_tail_index(a)].push_back(net.arc_head_index(a));
      und[net.arc_head_index(a)].push_back(net.arc_tail_index(a));
    }
    std::vector<char> seen(n, 0);
    std::deque<std::size_t> frontier{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!frontier.empty()) {
      const std::size_t v = frontier.front();
      frontier.pop_front();
      for (const std::size_t w : und[v]) {
        if (!seen[w]) {
          seen[w] = 1;
          ++count;
          frontier.push_back(w);
        }
      }
    }
    rep.weakly_connected = count == n;
    if (!rep.weakly_connected) rep.messages.push_back("network is not weakly connected");
  }

  for (const Arc& a : net.arcs()) {
    if (a.sigma < 0) {
      rep.negative_sigma_arc = a;
      rep.messages.push_back("negative secondary costs are not supported (arc " +
                             std::to_string(a.tail) + "->" + std::to_string(a.head) + ")");
      break;
    }
  }

  rep.has_sink = net.sources().empty() || !net.sinks().empty();
  if (!rep.has_sink) rep.messages.push_back("sources present but no sink declared");

  // Overflow headroom: the circuit transform multiplies costs by |N|+1 and
  // the rest-state bound accumulates gamma over |N|^2 / 2 terms.
  const Cost mag = std::max<Cost>(net.max_abs_gamma(),
                                  rep.sigma_bound < 0 ? -rep.sigma_bound : rep.sigma_bound);
  const Cost limit = (std::numeric_limits<Cost>::max() / 8);
  if (n > 0 && mag > 0 &&
      (mag > limit / static_cast<Cost>(n + 1) ||
       mag > limit / static_cast<Cost>(n) / static_cast<Cost>(n))) {
    rep.overflow_safe = false;
    rep.messages.push_back("cost magnitudes too large for 64-bit accumulation bounds");
  }

  if (rep.overflow_safe) {
    rep.nonpositive_gamma_circuit =
        detect_nonpositive_circuit(net, CostKind::primary, /*include_zero=*/true);
    if (rep.nonpositive_gamma_circuit)
      rep.messages.push_back("circuit with non-positive primary cost found");
    if (!rep.negative_sigma_arc) {
      rep.negative_sigma_circuit =
          detect_nonpositive_circuit(net, CostKind::secondary, /*include_zero=*/false);
      if (rep.negative_sigma_circuit)
        rep.messages.push_back("circuit with negative secondary cost found");
    }
    if (!rep.nonpositive_gamma_circuit) {
      const SinkPairReport sp = sink_pair_paths_nonnegative(net);
      if (!sp.ok) {
        rep.negative_sink_pair_path = sp.witness;
        rep.messages.push_back("negative-length path between sinks found");
      }
    }
  }

  // Feasibility per source: plain reachability of a sink, or reachability
  // within the budget when c_max is given.
  if (!c_max || rep.negative_sigma_arc) {
    std::vector<char> reaches_sink(n, 0);
    std::vector<std::vector<std::size_t>> rev(n);
    for (std::size_t a = 0; a < net.arc_count(); ++a)
      rev[net.arc_head_index(a)].push_back(net.arc_tail_index(a));
    std::deque<std::size_t> frontier;
    for (const NodeId t : net.sinks()) {
      const std::size_t i = net.index_of(t);
      reaches_sink[i] = 1;
      frontier.push_back(i);
    }
    while (!frontier.empty()) {
      const std::size_t v = frontier.front();
      frontier.pop_front();
      for (const std::size_t w : rev[v]) {
        if (!reaches_sink[w]) {
          reaches_sink[w] = 1;
          frontier.push_back(w);
        }
      }
    }
    for (const NodeId s : net.sources())
      rep.feasible_path_per_source[s] = reaches_sink[net.index_of(s)] != 0;
  } else {
    const ExpandedNetwork exp = expand(net, *c_max, /*prune=*/true);
    for (const NodeId s : net.sources()) {
      // BFS from the source's step-0 replica until a sink replica appears.
      bool ok = false;
      if (exp.net.has_node(exp.encode(s, 0))) {
        std::vector<char> seen(exp.net.node_count(), 0);
        std::deque<std::size_t> frontier{exp.net.index_of(exp.encode(s, 0))};
        seen[frontier.front()] = 1;
        while (!frontier.empty() && !ok) {
          const std::size_t v = frontier.front();
          frontier.pop_front();
          if (exp.net.is_sink_index(v)) {
            ok = true;
            break;
          }
          for (const std::uint32_t a : exp.net.out_arcs(v)) {
            const std::size_t h = exp.net.arc_head_index(a);
            if (!seen[h]) {
              seen[h] = 1;
              frontier.push_back(h);
            }
          }
        }
      }
      rep.feasible_path_per_source[s] = ok;
    }
  }
  for (const auto& [src, ok] : rep.feasible_path_per_source) {
    if (!ok)
      rep.messages.push_back("source " + std::to_string(src) +
                             " has no feasible path to a sink" +
                             (c_max ? " within the budget" : ""));
  }
  return rep;
}

}  // namespace threshpath
