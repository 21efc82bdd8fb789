#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "expanded.hpp"
#include "graph.hpp"
#include "policy.hpp"

namespace threshpath {

// Token counts bucketed by spent budget: x(i, c) counts tokens resting at i
// that arrived having consumed c of the secondary budget. Sinks stay zero in
// every bucket.
class BucketedState {
 public:
  BucketedState() = default;

  BucketedState(const Network& net, Cost c_max)
      : fingerprint_(net.fingerprint()),
        c_max_(c_max),
        ids_(net.nodes()),
        x_(net.node_count() * static_cast<std::size_t>(c_max + 1), 0) {
    if (c_max < 0) throw InputError("c_max must be non-negative");
    sink_.resize(net.node_count());
    for (std::size_t i = 0; i < net.node_count(); ++i) sink_[i] = net.is_sink_index(i) ? 1 : 0;
  }

  bool matches(const Network& net) const {
    return fingerprint_ == net.fingerprint() && ids_.size() == net.node_count();
  }

  Cost c_max() const { return c_max_; }
  std::size_t node_count() const { return ids_.size(); }
  const std::vector<NodeId>& ids() const { return ids_; }

  std::int64_t get(NodeId id, Cost step) const { return x_[slot(index_of(id), step)]; }

  void set(NodeId id, Cost step, std::int64_t value) {
    const std::size_t i = index_of(id);
    if (sink_[i] && value != 0)
      throw InputError("sink node " + std::to_string(id) + " must hold zero tokens");
    x_[slot(i, step)] = value;
  }

  std::int64_t at(std::size_t idx, Cost step) const { return x_[slot(idx, step)]; }
  void bump(std::size_t idx, Cost step, std::int64_t delta) { x_[slot(idx, step)] += delta; }
  bool is_sink_index(std::size_t idx) const { return sink_[idx] != 0; }

  // Tokens at the node across all buckets.
  std::int64_t node_total(NodeId id) const {
    const std::size_t i = index_of(id);
    std::int64_t v = 0;
    for (Cost c = 0; c <= c_max_; ++c) v += x_[slot(i, c)];
    return v;
  }

  std::int64_t total() const {
    std::int64_t v = 0;
    for (const std::int64_t c : x_) v += c;
    return v;
  }

  friend bool operator==(const BucketedState& a, const BucketedState& b) {
    return a.c_max_ == b.c_max_ && a.ids_ == b.ids_ && a.x_ == b.x_;
  }

 private:
  std::size_t index_of(NodeId id) const {
    const auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it == ids_.end() || *it != id)
      throw InputError("state has no node " + std::to_string(id));
    return static_cast<std::size_t>(it - ids_.begin());
  }

  std::size_t slot(std::size_t idx, Cost step) const {
    if (step < 0 || step > c_max_)
      throw InputError("budget step " + std::to_string(step) + " out of range");
    return idx * static_cast<std::size_t>(c_max_ + 1) + static_cast<std::size_t>(step);
  }

  std::uint64_t fingerprint_ = 0;
  Cost c_max_ = 0;
  std::vector<NodeId> ids_;
  std::vector<char> sink_;
  std::vector<std::int64_t> x_;
};

inline std::int64_t total_tokens(const BucketedState& state) { return state.total(); }

struct BucketViolation {
  Arc arc;
  Cost step = 0;  // tail bucket of the violated condition
};

struct BucketedAdmissibilityReport {
  bool admissible = true;
  std::vector<BucketViolation> violations;
};

// Bucketed admissibility: x(i, c) - x(j, c + sigma_ij) <= gamma_ij wherever
// the budget allows the move.
inline BucketedAdmissibilityReport is_admissible(const Network& net, const BucketedState& state) {
  if (!state.matches(net)) throw InputError("state does not belong to this network");
  BucketedAdmissibilityReport rep;
  for (std::size_t a = 0; a < net.arc_count(); ++a) {
    const Arc& arc = net.arc(a);
    for (Cost c = 0; c + arc.sigma <= state.c_max(); ++c) {
      const std::int64_t xt = state.at(net.arc_tail_index(a), c);
      const std::int64_t xh = state.at(net.arc_head_index(a), c + arc.sigma);
      if (xt - xh > arc.gamma) {
        rep.admissible = false;
        rep.violations.push_back(BucketViolation{arc, c});
      }
    }
  }
  return rep;
}

namespace detail {

// Budget-aware walk. Mirrors run_token_impl: same occupancy convention, but
// a move additionally requires c + sigma <= c_max, and a token that cannot
// afford any out-arc falls asleep where it stands (the asleep test comes
// before virtual generation, so the enhanced rule never pays a sleeping
// token's way out).
inline TokenOutcome constrained_run_token_impl(const Network& net, BucketedState& state,
                                               NodeId start, Cost start_step,
                                               ChoicePicker& picker, bool arriving,
                                               bool enhanced) {
  if (!state.matches(net)) throw InputError("state does not belong to this network");
  std::size_t idx = net.index_of(start);
  if (net.is_sink_index(idx)) throw InputError("token walks cannot start at a sink");
  if (start_step < 0 || start_step > state.c_max())
    throw InputError("budget step out of range");

  const Cost c_max = state.c_max();
  const std::int64_t n_eff = static_cast<std::int64_t>(net.node_count()) * (c_max + 1);
  const Cost gamma_mag = std::max<Cost>(net.max_abs_gamma(), 1);
  const std::int64_t cap = enhanced ? n_eff * (1 + gamma_mag * n_eff) : n_eff;

  TokenOutcome out;
  out.walk.push_back(start);
  bool counted = !arriving;
  Cost step = start_step;
  std::vector<std::uint32_t> permitted;

  for (;;) {
    const std::int64_t occupancy = state.at(idx, step) + (counted ? 0 : 1);
    permitted.clear();
    bool any_affordable = false;
    for (const std::uint32_t a : net.out_arcs(idx)) {
      const Cost next = step + net.arc(a).sigma;
      if (next > c_max) continue;
      any_affordable = true;
      if (move_permitted(occupancy, state.at(net.arc_head_index(a), next), net.arc(a).gamma))
        permitted.push_back(a);
    }

    std::uint32_t chosen;
    if (!permitted.empty()) {
      chosen = permitted[picker.pick(permitted.size())];
    } else if (enhanced && any_affordable) {
      const std::int64_t x_here = state.at(idx, step);
      std::uint32_t best = 0;
      std::int64_t best_gap = 0;
      bool first = true;
      for (const std::uint32_t a : net.out_arcs(idx)) {
        const Cost next = step + net.arc(a).sigma;
        if (next > c_max) continue;
        const std::int64_t gap =
            net.arc(a).gamma + state.at(net.arc_head_index(a), next) - x_here;
        if (first || gap < best_gap) {
          best = a;
          best_gap = gap;
          first = false;
        }
      }
      const std::int64_t block = counted ? best_gap + 1 : best_gap;
      if (block <= 0) throw InternalError("virtual block must be positive");
      state.bump(idx, step, block);
      out.virtual_tokens += block;
      out.virtual_blocks.emplace_back(net.id_at(idx), block);
      chosen = best;
    } else {
      if (!counted) state.bump(idx, step, 1);
      out.terminal = net.id_at(idx);
      out.asleep = !any_affordable && !net.out_arcs(idx).empty();
      out.final_budget = step;
      return out;
    }

    if (counted) {
      state.bump(idx, step, -1);
      counted = false;
    }
    out.transitions += 1;
    if (out.transitions > cap)
      throw InternalError("constrained walk exceeded its transition bound");
    step += net.arc(chosen).sigma;
    idx = net.arc_head_index(chosen);
    out.walk.push_back(net.id_at(idx));
    if (net.is_sink_index(idx)) {
      out.exited = true;
      out.terminal = net.id_at(idx);
      out.final_budget = step;
      return out;
    }
  }
}

}  // namespace detail

// Injects one budget-carrying token at a source with zero spent budget.
inline StepResult constrained_inject(const Network& net, BucketedState& state, NodeId source,
                                     ChoicePicker& picker, bool enhanced = false) {
  if (!net.is_source(source))
    throw InputError("injection requires a source node, got " + std::to_string(source));
  StepResult res;
  res.outcome = detail::constrained_run_token_impl(net, state, source, 0, picker,
                                                   /*arriving=*/true, enhanced);
  if (!res.outcome.exited) res.incremented = res.outcome.terminal;
  return res;
}

// Fast dynamics over buckets: scan (node id, step) ascending; the first
// resident bucket above threshold on an affordable arc releases a token.
// This is settle run on the expansion, expressed directly on the base.
inline SettleLog constrained_settle(const Network& net, BucketedState& state,
                                    ChoicePicker& picker) {
  if (!state.matches(net)) throw InputError("state does not belong to this network");
  const Cost c_max = state.c_max();
  const std::int64_t n_eff = static_cast<std::int64_t>(net.node_count()) * (c_max + 1);
  const Cost gamma_mag = std::max<Cost>(net.max_abs_gamma(), 1);

  std::int64_t violation = 0;
  for (std::size_t a = 0; a < net.arc_count(); ++a) {
    const Arc& arc = net.arc(a);
    for (Cost c = 0; c + arc.sigma <= c_max; ++c) {
      const std::int64_t gap = state.at(net.arc_tail_index(a), c) -
                               state.at(net.arc_head_index(a), c + arc.sigma) - arc.gamma;
      if (gap > 0) violation += gap;
    }
  }
  const std::int64_t cap = (n_eff + 1) * (violation + (n_eff + 1) * (gamma_mag + 1));

  SettleLog log;
  for (;;) {
    std::optional<std::pair<std::size_t, Cost>> hot;
    for (std::size_t i = 0; i < net.node_count() && !hot; ++i) {
      if (net.is_sink_index(i)) continue;
      for (Cost c = 0; c <= c_max && !hot; ++c) {
        const std::int64_t x_here = state.at(i, c);
        for (const std::uint32_t a : net.out_arcs(i)) {
          const Cost next = c + net.arc(a).sigma;
          if (next > c_max) continue;
          if (move_permitted(x_here, state.at(net.arc_head_index(a), next), net.arc(a).gamma)) {
            hot = {i, c};
            break;
          }
        }
      }
    }
    if (!hot) return log;
    TokenOutcome out = detail::constrained_run_token_impl(
        net, state, net.id_at(hot->first), hot->second, picker,
        /*arriving=*/false, /*enhanced=*/false);
    if (out.exited) ++log.tokens_exited;
    log.walks.push_back(std::move(out));
    if (static_cast<std::int64_t>(log.walks.size()) > cap)
      throw InternalError("constrained settling exceeded its walk bound");
  }
}

inline bool constrained_is_global_rest(const Network& net, BucketedState& state,
                                       ChoicePicker& picker, bool enhanced = false) {
  for (const NodeId s : net.sources()) {
    const StepResult res = constrained_inject(net, state, s, picker, enhanced);
    if (res.state_changed()) return false;
  }
  return true;
}

// Lays the buckets out on the expansion: x(i, c) becomes the count at node
// i^c. Tokens sitting on buckets the expansion pruned away have nowhere to
// go and are rejected.
inline NetworkState lift_state(const ExpandedNetwork& exp, const BucketedState& state) {
  if (!state.matches(exp.base)) throw InputError("state does not belong to the expanded base");
  if (state.c_max() != exp.c_max) throw InputError("c_max mismatch between state and expansion");
  NetworkState out(exp.net);
  for (const NodeId id : state.ids()) {
    for (Cost c = 0; c <= exp.c_max; ++c) {
      const std::int64_t v = state.get(id, c);
      if (v == 0) continue;
      if (!exp.contains(id, c))
        throw InputError("bucketed state holds tokens outside the reachable expansion");
      out.set(exp.encode(id, c), v);
    }
  }
  return out;
}

// Inverse of lift_state; components of pruned replicas read as zero.
inline BucketedState project_state(const ExpandedNetwork& exp, const NetworkState& state) {
  if (!state.matches(exp.net)) throw InputError("state does not belong to this expansion");
  BucketedState out(exp.base, exp.c_max);
  for (const NodeId v : exp.net.nodes()) {
    const auto [base_id, step] = exp.decode(v);
    if (exp.base.is_sink(base_id)) continue;
    out.set(base_id, step, state.get(v));
  }
  return out;
}

// Modification support for bucketed states; bucket contents move with their
// node, removed or newly sunk nodes lose theirs.
inline ModifiedNetwork<BucketedState> apply_modification(const Network& net,
                                                         const BucketedState& state,
                                                         const Modification& mod) {
  if (!state.matches(net)) throw InputError("state does not belong to this network");
  std::vector<NodeId> nodes, sources, sinks, dropped, new_sinks;
  std::vector<Arc> arcs;
  detail::collect_modified_shape(net, mod, nodes, arcs, sources, sinks, dropped, new_sinks);

  ModifiedNetwork<BucketedState> out{Network(nodes, arcs, sources, sinks), BucketedState{}, 0};
  out.state = BucketedState(out.net, state.c_max());
  for (const NodeId id : dropped) out.tokens_discarded += state.node_total(id);
  for (const NodeId id : out.net.nodes()) {
    if (!net.has_node(id)) continue;
    if (out.net.is_sink(id)) {
      out.tokens_discarded += state.node_total(id);
      continue;
    }
    for (Cost c = 0; c <= state.c_max(); ++c) {
      const std::int64_t v = state.get(id, c);
      if (v != 0) out.state.set(id, c, v);
    }
  }
  return out;
}

}  // namespace threshpath
