#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "graph.hpp"
#include "rng.hpp"

namespace threshpath {

enum class ChoiceMode { deterministic, stochastic };

// Declarative choice configuration; the live stream is a ChoicePicker.
struct ChoiceModel {
  ChoiceMode mode = ChoiceMode::deterministic;
  std::uint64_t seed = 0;
};

// Resolves one decision among the permitted arcs. Deterministic picks the
// first arc in scan order; stochastic draws uniformly from the pinned
// splitmix64 stream (one draw per decision, even with a single option, so
// stream positions depend only on the decision sequence).
class ChoicePicker {
 public:
  explicit ChoicePicker(const ChoiceModel& model)
      : mode_(model.mode), rng_(model.seed) {}

  std::size_t pick(std::size_t options) {
    if (options == 0) throw InternalError("choice over an empty option set");
    if (mode_ == ChoiceMode::deterministic) return 0;
    return static_cast<std::size_t>(rng_.next_below(options));
  }

  ChoiceMode mode() const { return mode_; }

 private:
  ChoiceMode mode_;
  SplitMix64 rng_;
};

// The movement test. A token contributing `occupancy` tokens' worth of
// presence at the arc tail may traverse iff occupancy - x_head > gamma.
inline bool move_permitted(std::int64_t occupancy, std::int64_t x_head, Cost gamma) {
  return occupancy - x_head > gamma;
}

// Outcome of one token's walk through the network.
struct TokenOutcome {
  std::vector<NodeId> walk;             // nodes visited, start included
  bool exited = false;                  // true: left via a sink; false: stopped
  NodeId terminal = 0;                  // sink it exited through, or stop node
  std::int64_t transitions = 0;         // elementary arc traversals
  std::int64_t virtual_tokens = 0;      // generated along the way (enhanced rule)
  std::vector<std::pair<NodeId, std::int64_t>> virtual_blocks;  // (node, amount)
  bool asleep = false;                  // stopped because no arc fit the budget
  Cost final_budget = 0;                // accumulated sigma at the terminal node
};

// One slow-dynamics step: Outcome plus the resulting state delta. The
// original policy changes the state by at most one increment (`incremented`);
// the enhanced rule may additionally leave virtual tokens recorded in the
// outcome.
struct StepResult {
  TokenOutcome outcome;
  std::optional<NodeId> incremented;

  bool state_changed() const {
    return incremented.has_value() || outcome.virtual_tokens > 0;
  }
};

// Arcs a token with the given occupancy at `node` may take, in scan order.
inline std::vector<Arc> permitted_moves(const Network& net, const NetworkState& state,
    NodeId node, std::int64_t occupancy) {
  if (!state.matches(net)) throw InputError("state does not belong to this network");
  const std::size_t idx = net.index_of(node);
  std::vector<Arc> moves;
  for (const std::uint32_t a : net.out_arcs(idx)) {
    if (move_permitted(occupancy, state.at(net.arc_head_index(a)), net.arc(a).gamma))
      moves.push_back(net.arc(a));
  }
  return moves;
}

namespace detail {

// Walks one token from `start` until it stops or exits.
//
// Occupancy convention: an arriving (injected or in-flight) token counts
// itself on top of the buffer, so its test is x_i + 1 - x_j > gamma_ij. A
// resident token starting a settling walk is already counted in x_i, so its
// first test is x_i - x_j > gamma_ij; the moment it moves it is decremented
// out of the buffer and behaves like an arriving token. Stopping commits one
// increment at the final node; entering a sink removes the token with no
// state change.
inline TokenOutcome run_token_impl(const Network& net, NetworkState& state, NodeId start,
                                   ChoicePicker& picker, bool arriving, bool enhanced) {
  if (!state.matches(net)) throw InputError("state does not belong to this network");
  std::size_t idx = net.index_of(start);
  if (net.is_sink_index(idx)) throw InputError("token walks cannot start at a sink");

  const std::int64_t n = static_cast<std::int64_t>(net.node_count());
  const Cost gamma_mag = std::max<Cost>(net.max_abs_gamma(), 1);
  // Plain walks are simple whenever no non-positive circuit exists, so n
  // transitions suffice; virtual generation can lawfully revisit nodes while
  // it raises buffers, bounded by the potential it can add.
  const std::int64_t cap = enhanced ? n * (1 + gamma_mag * n) : n;

  TokenOutcome out;
  out.walk.push_back(start);
  bool counted = !arriving;
  std::vector<std::uint32_t> permitted;

  for (;;) {
    const std::int64_t occupancy = state.at(idx) + (counted ? 0 : 1);
    permitted.clear();
    for (const std::uint32_t a : net.out_arcs(idx)) {
      if (move_permitted(occupancy, state.at(net.arc_head_index(a)), net.arc(a).gamma))
        permitted.push_back(a);
    }

    std::uint32_t chosen;
    if (!permitted.empty()) {
      chosen = permitted[picker.pick(permitted.size())];
    } else if (enhanced && !net.out_arcs(idx).empty()) {
      // No arc is above threshold: raise this buffer just enough to free the
      // cheapest arc (ties by scan order) and take it. The raise amount is
      // the block of virtual tokens; it is >= 1 exactly because no move was
      // permitted.
      const auto& outs = net.out_arcs(idx);
      std::uint32_t best = outs[0];
      std::int64_t best_gap = 0;
      bool first = true;
      for (const std::uint32_t a : outs) {
        const std::int64_t gap =
            net.arc(a).gamma + state.at(net.arc_head_index(a)) - state.at(idx);
        if (first || gap < best_gap) {
          best = a;
          best_gap = gap;
          first = false;
        }
      }
      const std::int64_t block = counted ? best_gap + 1 : best_gap;
      if (block <= 0) throw InternalError("virtual block must be positive");
      state.bump(idx, block);
      out.virtual_tokens += block;
      out.virtual_blocks.emplace_back(net.id_at(idx), block);
      chosen = best;
    } else {
      // Token stops here for good.
      if (!counted) state.bump(idx, 1);
      out.terminal = net.id_at(idx);
      return out;
    }

    if (counted) {
      state.bump(idx, -1);
      counted = false;
    }
    out.transitions += 1;
    if (out.transitions > cap)
      throw InternalError(enhanced ? "enhanced walk exceeded its transition bound"
                                   : "walk exceeded |N| transitions; non-positive "
                                     "circuit traversed");
    idx = net.arc_head_index(chosen);
    out.walk.push_back(net.id_at(idx));
    if (net.is_sink_index(idx)) {
      out.exited = true;
      out.terminal = net.id_at(idx);
      return out;
    }
  }
}

}  // namespace detail

// Walks a token under the original threshold rule. `arriving` selects the
// occupancy convention described above; injected tokens arrive, settling
// tokens are residents.
inline TokenOutcome run_token(const Network& net, NetworkState& state, NodeId start,
                              ChoicePicker& picker, bool arriving) {
  return detail::run_token_impl(net, state, start, picker, arriving, false);
}

// Enhanced variant: a stuck token generates virtual tokens instead of
// stopping. It only stops at nodes with no outgoing arcs.
inline TokenOutcome run_token_enhanced(const Network& net, NetworkState& state, NodeId start,
                                       ChoicePicker& picker) {
  return detail::run_token_impl(net, state, start, picker, true, true);
}

// Injects one token at a source. The state either gains exactly one token at
// the stop node or (exit) is unchanged, up to virtual blocks under the
// enhanced rule.
inline StepResult inject(const Network& net, NetworkState& state, NodeId source,
                         ChoicePicker& picker, bool enhanced = false) {
  if (!net.is_source(source))
    throw InputError("injection requires a source node, got " + std::to_string(source));
  StepResult res;
  res.outcome = detail::run_token_impl(net, state, source, picker, true, enhanced);
  if (!res.outcome.exited) res.incremented = res.outcome.terminal;
  return res;
}

struct SettleLog {
  std::vector<TokenOutcome> walks;
  std::int64_t tokens_exited = 0;  // residents that left via a sink
};

// Fast dynamics between injections: while any node holds a resident token
// above threshold, the lowest-id such node releases one token, which walks
// to completion before the scan restarts. Negative thresholds may summon
// walks out of empty buffers, driving counts negative; that is the intended
// virtual-token reading. Total tokens never increase.
inline SettleLog settle(const Network& net, NetworkState& state, ChoicePicker& picker) {
  if (!state.matches(net)) throw InputError("state does not belong to this network");
  const std::int64_t n = static_cast<std::int64_t>(net.node_count());
  const Cost gamma_mag = std::max<Cost>(net.max_abs_gamma(), 1);

  std::int64_t violation = 0;  // total excess over thresholds, a settling potential
  for (std::size_t a = 0; a < net.arc_count(); ++a) {
    const std::int64_t gap = state.at(net.arc_tail_index(a)) -
                             state.at(net.arc_head_index(a)) - net.arc(a).gamma;
    if (gap > 0) violation += gap;
  }
  const std::int64_t cap = (n + 1) * (violation + (n + 1) * (gamma_mag + 1));

  SettleLog log;
  for (;;) {
    std::optional<std::size_t> hot;
    for (std::size_t i = 0; i < net.node_count() && !hot; ++i) {
      if (net.is_sink_index(i)) continue;
      for (const std::uint32_t a : net.out_arcs(i)) {
        if (move_permitted(state.at(i), state.at(net.arc_head_index(a)), net.arc(a).gamma)) {
          hot = i;
          break;
        }
      }
    }
    if (!hot) return log;
    TokenOutcome out = detail::run_token_impl(net, state, net.id_at(*hot), picker,
                                              /*arriving=*/false, /*enhanced=*/false);
    if (out.exited) ++log.tokens_exited;
    log.walks.push_back(std::move(out));
    if (static_cast<std::int64_t>(log.walks.size()) > cap)
      throw InternalError("settling exceeded its walk bound; assumptions likely violated");
  }
}

// Probes every source in ascending order with a real injection. A probe that
// exits without touching the state is free; the first probe that changes the
// state stays committed and the answer is false. True means every source's
// token exits untouched, which is exactly the global rest property.
inline bool is_global_rest(const Network& net, NetworkState& state, ChoicePicker& picker,
                           bool enhanced = false) {
  for (const NodeId s : net.sources()) {
    const StepResult res = inject(net, state, s, picker, enhanced);
    if (res.state_changed()) return false;
  }
  return true;
}

}  // namespace threshpath
