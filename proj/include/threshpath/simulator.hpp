#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "constrained.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "policy.hpp"
#include "rng.hpp"
#include "validate.hpp"

namespace threshpath {

enum class PolicyKind { original, enhanced };
enum class InjectionSchedule { round_robin, single_source, uniform_random };
enum class StopRule { at_rest, max_steps, rest_then_extra };

// Full description of a run. Injection steps are the slow dynamics: one
// token per step, walks resolve instantly. c_max switches to the bucketed
// budget-aware engine.
struct SimConfig {
  PolicyKind policy = PolicyKind::original;
  ChoiceModel choice;
  InjectionSchedule schedule = InjectionSchedule::round_robin;
  NodeId single_source_id = 0;
  StopRule stop = StopRule::at_rest;
  std::int64_t max_steps = 0;         // stop == max_steps
  std::int64_t post_rest = -1;        // rest_then_extra; -1 means the default
  std::optional<Cost> c_max;
  std::vector<Modification> scenario;
  bool record_trace = false;

  // Post-rest measurement walks per source: one suffices deterministically,
  // stochastic runs take more to spread over equally short routes.
  std::int64_t post_rest_count() const {
    if (stop == StopRule::rest_then_extra && post_rest >= 0) return post_rest;
    if (post_rest >= 0) return post_rest;
    return choice.mode == ChoiceMode::deterministic ? 1 : 100;
  }
};

struct StepRecord {
  std::int64_t k = 0;  // injection counter, 1-based
  std::int64_t v = 0;  // total tokens after the step
  NodeId source = 0;
  bool exited = false;
  std::optional<NodeId> stopped_at;
  bool asleep = false;
  std::int64_t virtual_tokens = 0;
};

struct TraceEvent {
  enum class Kind { injection, settle_walk, modification };
  Kind kind = Kind::injection;
  std::int64_t k = 0;  // step counter when the event happened
  NodeId source = 0;   // injection source or settling walk's start
  TokenOutcome outcome;
  Modification mod;
  std::int64_t tokens_discarded = 0;
};

struct SourceStats {
  Cost length = 0;       // L of the first post-rest walk
  Cost secondary = 0;    // C of that walk
  std::int64_t arcs = 0; // E, arcs traversed
  std::vector<NodeId> walk;
  Cost length_min = 0;   // across all post-rest walks; equal when healthy
  Cost length_max = 0;
};

struct SegmentMetrics {
  std::int64_t index = 0;
  std::int64_t start_k = 0;
  std::int64_t settle_walks = 0;
  std::int64_t settle_v_drop = 0;
  std::int64_t tokens_discarded = 0;
  bool rest_reached = false;
  std::int64_t t_ss = 0;  // absolute step of the last state change
  std::int64_t v_ss = 0;  // total tokens once at rest
  std::int64_t l_ss = 0;  // injected tokens lost (stopped or asleep)
  std::map<NodeId, SourceStats> per_source;
  std::map<std::pair<NodeId, NodeId>, std::int64_t> arc_histogram;
};

struct MetricsLog {
  // configuration echo, enough to reproduce the run
  PolicyKind policy = PolicyKind::original;
  ChoiceMode choice_mode = ChoiceMode::deterministic;
  std::uint64_t seed = 0;
  std::string rng_algorithm = kRngAlgorithm;
  InjectionSchedule schedule = InjectionSchedule::round_robin;
  StopRule stop = StopRule::at_rest;
  std::optional<Cost> c_max;
  std::int64_t post_rest = 0;

  std::int64_t initial_v = 0;
  std::map<NodeId, std::int64_t> initial_state;  // pre-settle node totals
  std::vector<StepRecord> steps;
  std::vector<SegmentMetrics> segments;
  std::vector<TraceEvent> trace;
  std::map<NodeId, std::int64_t> final_state;  // node totals
  std::map<NodeId, std::vector<std::int64_t>> final_buckets;  // constrained only
  bool rest_reached = false;

  // V(x(k)) for k = 0..t_ss of the last segment: the convergence transient.
  // Without certification it covers every recorded step.
  std::vector<std::pair<std::int64_t, std::int64_t>> v_series() const {
    std::vector<std::pair<std::int64_t, std::int64_t>> out{{0, initial_v}};
    const std::int64_t cut =
        rest_reached && !segments.empty() ? segments.back().t_ss : INT64_MAX;
    for (const StepRecord& s : steps) {
      if (s.k > cut) break;
      out.emplace_back(s.k, s.v);
    }
    return out;
  }
};

namespace detail {

// Uniform driver interface over the plain and bucketed engines.
class UnconstrainedEngine {
 public:
  UnconstrainedEngine(const Network& net, std::optional<NetworkState> initial)
      : net_(net), state_(initial ? std::move(*initial) : NetworkState(net)) {
    if (!state_.matches(net_)) throw InputError("initial state does not fit the network");
  }

  const Network& net() const { return net_; }
  std::int64_t total() const { return state_.total(); }

  SettleLog settle(ChoicePicker& picker) { return threshpath::settle(net_, state_, picker); }

  StepResult inject(NodeId source, ChoicePicker& picker, bool enhanced) {
    return threshpath::inject(net_, state_, source, picker, enhanced);
  }

  std::int64_t apply(const Modification& mod) {
    auto changed = apply_modification(net_, state_, mod);
    net_ = std::move(changed.net);
    state_ = std::move(changed.state);
    return changed.tokens_discarded;
  }

  ValidationReport validate() const { return validate_assumptions(net_); }

  Cost walk_secondary(const std::vector<NodeId>& nodes) const {
    return walk_of(net_, nodes).secondary;
  }

  std::map<NodeId, std::int64_t> node_totals() const {
    std::map<NodeId, std::int64_t> out;
    for (const NodeId id : net_.nodes()) out[id] = state_.get(id);
    return out;
  }
  void fill_buckets(std::map<NodeId, std::vector<std::int64_t>>&) const {}

  const NetworkState& state() const { return state_; }

 private:
  Network net_;
  NetworkState state_;
};

class ConstrainedEngine {
 public:
  ConstrainedEngine(const Network& net, Cost c_max, std::optional<BucketedState> initial)
      : net_(net), state_(initial ? std::move(*initial) : BucketedState(net, c_max)) {
    if (!state_.matches(net_)) throw InputError("initial state does not fit the network");
    if (state_.c_max() != c_max) throw InputError("initial state has a different c_max");
  }

  const Network& net() const { return net_; }
  std::int64_t total() const { return state_.total(); }

  SettleLog settle(ChoicePicker& picker) { return constrained_settle(net_, state_, picker); }

  StepResult inject(NodeId source, ChoicePicker& picker, bool enhanced) {
    return constrained_inject(net_, state_, source, picker, enhanced);
  }

  std::int64_t apply(const Modification& mod) {
    auto changed = apply_modification(net_, state_, mod);
    net_ = std::move(changed.net);
    state_ = std::move(changed.state);
    return changed.tokens_discarded;
  }

  ValidationReport validate() const { return validate_assumptions(net_, state_.c_max()); }

  Cost walk_secondary(const std::vector<NodeId>& nodes) const {
    return walk_of(net_, nodes).secondary;
  }

  std::map<NodeId, std::int64_t> node_totals() const {
    std::map<NodeId, std::int64_t> out;
    for (const NodeId id : net_.nodes()) out[id] = state_.node_total(id);
    return out;
  }
  void fill_buckets(std::map<NodeId, std::vector<std::int64_t>>& out) const {
    for (const NodeId id : net_.nodes()) {
      std::vector<std::int64_t>& buckets = out[id];
      buckets.resize(static_cast<std::size_t>(state_.c_max()) + 1);
      for (Cost c = 0; c <= state_.c_max(); ++c)
        buckets[static_cast<std::size_t>(c)] = state_.get(id, c);
    }
  }

  const BucketedState& state() const { return state_; }

 private:
  Network net_;
  BucketedState state_;
};

struct RunCursor {
  std::int64_t k = 0;
  std::size_t rr_pos = 0;
  SplitMix64 schedule_rng;
  ChoicePicker picker;
  bool enhanced = false;

  RunCursor(const SimConfig& cfg)
      // Schedule draws live on their own stream so choice decisions and
      // source draws cannot perturb each other.
      : schedule_rng(cfg.choice.seed ^ 0xD1B54A32D192ED03ULL),
        picker(cfg.choice),
        enhanced(cfg.policy == PolicyKind::enhanced) {}
};

template <typename Engine>
void record_settle(Engine& eng, ChoicePicker& picker, const SimConfig& cfg, RunCursor& cur,
                   MetricsLog& log, SegmentMetrics& seg) {
  const std::int64_t before = eng.total();
  SettleLog slog = eng.settle(picker);
  seg.settle_walks += static_cast<std::int64_t>(slog.walks.size());
  seg.settle_v_drop += before - eng.total();
  if (cfg.record_trace) {
    for (TokenOutcome& w : slog.walks) {
      TraceEvent ev;
      ev.kind = TraceEvent::Kind::settle_walk;
      ev.k = cur.k;
      ev.source = w.walk.front();
      ev.outcome = std::move(w);
      log.trace.push_back(std::move(ev));
    }
  }
}

template <typename Engine>
NodeId pick_source(Engine& eng, const SimConfig& cfg, RunCursor& cur,
                   const std::set<NodeId>& clean, bool want_rest) {
  const std::vector<NodeId>& sources = eng.net().sources();
  if (sources.empty()) throw InputError("cannot inject: network has no sources");
  NodeId chosen;
  switch (cfg.schedule) {
    case InjectionSchedule::round_robin:
      chosen = sources[cur.rr_pos % sources.size()];
      ++cur.rr_pos;
      break;
    case InjectionSchedule::single_source:
      if (!eng.net().is_source(cfg.single_source_id))
        throw InputError("configured injection node is not a source");
      chosen = cfg.single_source_id;
      break;
    case InjectionSchedule::uniform_random:
      chosen = sources[cur.schedule_rng.next_below(sources.size())];
      break;
  }
  // Rest certification needs a verified exit from every source. When the
  // schedule re-offers an already verified source, probe the lowest
  // unverified one instead; its injection is as legitimate as any other.
  if (want_rest && clean.count(chosen) != 0) {
    for (const NodeId s : sources) {
      if (clean.count(s) == 0) return s;
    }
  }
  return chosen;
}

template <typename Engine>
void run_segment(Engine& eng, const SimConfig& cfg, RunCursor& cur, MetricsLog& log,
                 const std::vector<Modification>* absolute_events) {
  SegmentMetrics seg;
  seg.index = static_cast<std::int64_t>(log.segments.size());
  seg.start_k = cur.k;

  const bool want_rest = cfg.stop != StopRule::max_steps;
  record_settle(eng, cur.picker, cfg, cur, log, seg);

  // Generous diagnostic cap derived from the invariant-set volume bound; a
  // healthy run certifies rest far earlier.
  const Network& net0 = eng.net();
  const std::int64_t n_eff = static_cast<std::int64_t>(net0.node_count()) *
                             (cfg.c_max ? *cfg.c_max + 1 : 1);
  const std::int64_t gamma_mag = std::max<Cost>(net0.max_abs_gamma(), 1);
  std::int64_t start_total = eng.total();
  const std::int64_t cap =
      (static_cast<std::int64_t>(net0.sources().size()) + 2) *
          (gamma_mag * n_eff * n_eff + n_eff + 4) +
      (start_total < 0 ? -start_total : start_total) + 64;

  std::set<NodeId> clean;
  std::int64_t last_change = cur.k;
  std::size_t next_event = 0;
  bool certified = false;

  for (;;) {
    if (absolute_events) {
      bool applied = false;
      while (next_event < absolute_events->size() &&
             (*absolute_events)[next_event].at_step <= cur.k) {
        const Modification& mod = (*absolute_events)[next_event];
        const std::int64_t discarded = eng.apply(mod);
        seg.tokens_discarded += discarded;
        if (cfg.record_trace) {
          TraceEvent ev;
          ev.kind = TraceEvent::Kind::modification;
          ev.k = cur.k;
          ev.mod = mod;
          ev.tokens_discarded = discarded;
          log.trace.push_back(std::move(ev));
        }
        ++next_event;
        applied = true;
      }
      if (applied) {
        record_settle(eng, cur.picker, cfg, cur, log, seg);
        clean.clear();
        cur.rr_pos = 0;
        last_change = cur.k;
      }
    }

    if (cfg.stop == StopRule::max_steps && cur.k >= cfg.max_steps) break;
    if (want_rest) {
      const std::size_t n_sources = eng.net().sources().size();
      if (clean.size() >= n_sources) {
        certified = true;
        break;
      }
    }

    const NodeId source = pick_source(eng, cfg, cur, clean, want_rest);
    const StepResult res = eng.inject(source, cur.picker, cur.enhanced);
    ++cur.k;

    StepRecord rec;
    rec.k = cur.k;
    rec.v = eng.total();
    rec.source = source;
    rec.exited = res.outcome.exited;
    rec.stopped_at = res.incremented;
    rec.asleep = res.outcome.asleep;
    rec.virtual_tokens = res.outcome.virtual_tokens;
    log.steps.push_back(rec);
    if (cfg.record_trace) {
      TraceEvent ev;
      ev.kind = TraceEvent::Kind::injection;
      ev.k = cur.k;
      ev.source = source;
      ev.outcome = res.outcome;
      log.trace.push_back(std::move(ev));
    }

    if (res.incremented) ++seg.l_ss;
    if (res.state_changed()) {
      last_change = cur.k;
      clean.clear();
    } else {
      clean.insert(source);
    }
    if (cur.k - seg.start_k > cap)
      throw InternalError("run exceeded its injection bound without certifying rest");
  }

  if (certified) {
    seg.rest_reached = true;
    seg.t_ss = last_change;
    seg.v_ss = eng.total();
    const std::int64_t n_post = cfg.post_rest_count();
    for (const NodeId s : eng.net().sources()) {
      for (std::int64_t r = 0; r < n_post; ++r) {
        const StepResult res = eng.inject(s, cur.picker, cur.enhanced);
        ++cur.k;
        if (res.state_changed())
          throw InternalError("state moved during post-rest measurement");
        StepRecord rec;
        rec.k = cur.k;
        rec.v = eng.total();
        rec.source = s;
        rec.exited = true;
        log.steps.push_back(rec);
        if (cfg.record_trace) {
          TraceEvent ev;
          ev.kind = TraceEvent::Kind::injection;
          ev.k = cur.k;
          ev.source = s;
          ev.outcome = res.outcome;
          log.trace.push_back(std::move(ev));
        }

        const Walk w = walk_of(eng.net(), res.outcome.walk);
        if (r == 0) {
          SourceStats stats;
          stats.length = w.length;
          stats.secondary = w.secondary;
          stats.arcs = res.outcome.transitions;
          stats.walk = res.outcome.walk;
          stats.length_min = w.length;
          stats.length_max = w.length;
          seg.per_source[s] = stats;
        } else {
          SourceStats& stats = seg.per_source[s];
          stats.length_min = std::min(stats.length_min, w.length);
          stats.length_max = std::max(stats.length_max, w.length);
        }
        for (std::size_t i = 0; i + 1 < res.outcome.walk.size(); ++i)
          ++seg.arc_histogram[{res.outcome.walk[i], res.outcome.walk[i + 1]}];
      }
    }
  } else {
    seg.rest_reached = false;
    seg.t_ss = -1;
    seg.v_ss = eng.total();
  }
  log.segments.push_back(std::move(seg));
}

template <typename Engine>
MetricsLog run_with_engine(Engine& eng, const SimConfig& cfg, bool dynamic) {
  MetricsLog log;
  log.policy = cfg.policy;
  log.choice_mode = cfg.choice.mode;
  log.seed = cfg.choice.seed;
  log.schedule = cfg.schedule;
  log.stop = cfg.stop;
  log.c_max = cfg.c_max;
  log.post_rest = cfg.post_rest_count();
  log.initial_v = eng.total();
  log.initial_state = eng.node_totals();

  RunCursor cur(cfg);

  if (cfg.stop != StopRule::max_steps) {
    const ValidationReport rep = eng.validate();
    if (!rep.passed()) {
      std::string msg = "network fails validation, rest cannot be certified";
      for (const std::string& m : rep.messages) msg += "; " + m;
      throw InputError(msg);
    }
  }

  if (!dynamic) {
    std::vector<Modification> events = cfg.scenario;
    std::stable_sort(events.begin(), events.end(),
                     [](const Modification& a, const Modification& b) {
                       return a.at_step < b.at_step;
                     });
    run_segment(eng, cfg, cur, log, events.empty() ? nullptr : &events);
  } else {
    if (cfg.stop == StopRule::max_steps)
      throw InputError("segmented runs need a rest-based stop rule");
    run_segment(eng, cfg, cur, log, nullptr);
    std::vector<Modification> events = cfg.scenario;
    std::stable_sort(events.begin(), events.end(),
                     [](const Modification& a, const Modification& b) {
                       return a.at_step < b.at_step;
                     });
    std::size_t i = 0;
    while (i < events.size()) {
      // One segment per batch of events sharing an at_step.
      const std::int64_t at = events[i].at_step;
      SegmentMetrics pending;  // discarded-token accounting happens in run_segment
      std::int64_t discarded_here = 0;
      while (i < events.size() && events[i].at_step == at) {
        const std::int64_t d = eng.apply(events[i]);
        discarded_here += d;
        if (cfg.record_trace) {
          TraceEvent ev;
          ev.kind = TraceEvent::Kind::modification;
          ev.k = cur.k;
          ev.mod = events[i];
          ev.tokens_discarded = d;
          log.trace.push_back(std::move(ev));
        }
        ++i;
      }
      (void)pending;
      const ValidationReport rep = eng.validate();
      if (!rep.passed()) {
        std::string msg = "modified network fails validation";
        for (const std::string& m : rep.messages) msg += "; " + m;
        throw InputError(msg);
      }
      cur.rr_pos = 0;
      run_segment(eng, cfg, cur, log, nullptr);
      log.segments.back().tokens_discarded += discarded_here;
    }
  }

  log.rest_reached = !log.segments.empty() && log.segments.back().rest_reached;
  log.final_state = eng.node_totals();
  eng.fill_buckets(log.final_buckets);
  return log;
}

}  // namespace detail

// Runs the slow dynamics on one engine picked by cfg.c_max. Scenario events
// fire at their absolute step counts. Rest-based stop rules insist on a
// validated network; max_steps runs take the network as given.
inline MetricsLog run(const Network& net, const SimConfig& cfg,
                      std::optional<NetworkState> initial_state = std::nullopt,
                      std::optional<BucketedState> initial_buckets = std::nullopt) {
  if (cfg.c_max) {
    if (initial_state) throw InputError("constrained runs take a bucketed initial state");
    detail::ConstrainedEngine eng(net, *cfg.c_max, std::move(initial_buckets));
    return detail::run_with_engine(eng, cfg, /*dynamic=*/false);
  }
  if (initial_buckets) throw InputError("unconstrained runs take a plain initial state");
  detail::UnconstrainedEngine eng(net, std::move(initial_state));
  return detail::run_with_engine(eng, cfg, /*dynamic=*/false);
}

// Segmented variant: converge to rest, apply the next batch of scenario
// events (batched by equal at_step, which act as ordering keys), converge
// again, one MetricsLog segment per configuration.
inline MetricsLog run_dynamic(const Network& net, const SimConfig& cfg,
                              std::optional<NetworkState> initial_state = std::nullopt,
                              std::optional<BucketedState> initial_buckets = std::nullopt) {
  if (cfg.c_max) {
    if (initial_state) throw InputError("constrained runs take a bucketed initial state");
    detail::ConstrainedEngine eng(net, *cfg.c_max, std::move(initial_buckets));
    return detail::run_with_engine(eng, cfg, /*dynamic=*/true);
  }
  if (initial_buckets) throw InputError("unconstrained runs take a plain initial state");
  detail::UnconstrainedEngine eng(net, std::move(initial_state));
  return detail::run_with_engine(eng, cfg, /*dynamic=*/true);
}

// Table-style roll-up of one segment.
struct SegmentSummary {
  std::int64_t segment = 0;
  bool rest_reached = false;
  std::int64_t t_ss = -1;
  std::int64_t v_ss = 0;
  std::int64_t l_ss = 0;
  // Scalars when the segment has exactly one source, else -1 with the
  // per-source map carrying the detail.
  Cost L_ss = -1;
  Cost C_ss = -1;
  std::int64_t E_ss = -1;
  std::map<NodeId, SourceStats> per_source;
};

inline std::vector<SegmentSummary> summarize(const MetricsLog& log) {
  std::vector<SegmentSummary> out;
  for (const SegmentMetrics& seg : log.segments) {
    SegmentSummary s;
    s.segment = seg.index;
    s.rest_reached = seg.rest_reached;
    s.t_ss = seg.t_ss;
    s.v_ss = seg.v_ss;
    s.l_ss = seg.l_ss;
    s.per_source = seg.per_source;
    if (seg.per_source.size() == 1) {
      const SourceStats& stats = seg.per_source.begin()->second;
      s.L_ss = stats.length;
      s.C_ss = stats.secondary;
      s.E_ss = stats.arcs;
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace threshpath
