#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "constrained.hpp"
#include "errors.hpp"
#include "expanded.hpp"
#include "graph.hpp"
#include "simulator.hpp"

namespace threshpath {

// Insertion-ordered JSON keeps files readable and byte-stable across runs.
using json = nlohmann::ordered_json;

namespace detail {

inline json parse_stream(std::istream& in, const std::string& what) {
  try {
    return json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(what + ": " + e.what());
  }
}

inline const json& field(const json& j, const char* key, const std::string& ctx) {
  auto it = j.find(key);
  if (it == j.end()) throw InputError(ctx + ": missing field '" + key + "'");
  return *it;
}

inline std::int64_t as_int(const json& j, const std::string& ctx) {
  if (j.is_number_integer() || j.is_number_unsigned()) return j.get<std::int64_t>();
  throw InputError(ctx + ": expected an integer, got " + std::string(j.type_name()));
}

inline std::vector<NodeId> as_id_list(const json& j, const std::string& ctx) {
  if (!j.is_array()) throw InputError(ctx + ": expected an array of node ids");
  std::vector<NodeId> out;
  out.reserve(j.size());
  for (const json& v : j) out.push_back(as_int(v, ctx));
  return out;
}

inline NodeId key_to_id(const std::string& key, const std::string& ctx) {
  std::size_t used = 0;
  std::int64_t id = 0;
  try {
    id = std::stoll(key, &used);
  } catch (const std::exception&) {
    throw InputError(ctx + ": '" + key + "' is not a node id");
  }
  if (used != key.size()) throw InputError(ctx + ": '" + key + "' is not a node id");
  return id;
}

}  // namespace detail

// ---- networks ----

inline json arc_to_json(const Arc& a) {
  return json{{"tail", a.tail}, {"head", a.head}, {"gamma", a.gamma}, {"sigma", a.sigma}};
}

inline Arc arc_from_json(const json& j, const std::string& ctx) {
  if (!j.is_object()) throw InputError(ctx + ": an arc must be an object");
  Arc a;
  a.tail = detail::as_int(detail::field(j, "tail", ctx), ctx + ".tail");
  a.head = detail::as_int(detail::field(j, "head", ctx), ctx + ".head");
  a.gamma = detail::as_int(detail::field(j, "gamma", ctx), ctx + ".gamma");
  a.sigma = j.contains("sigma") ? detail::as_int(j.at("sigma"), ctx + ".sigma") : 0;
  return a;
}

inline json network_to_json(const Network& net) {
  json arcs = json::array();
  for (const Arc& a : net.arcs()) arcs.push_back(arc_to_json(a));
  return json{{"nodes", net.nodes()},
              {"arcs", std::move(arcs)},
              {"sources", net.sources()},
              {"sinks", net.sinks()}};
}

// A parsed network file: the canonical network plus any extra top-level
// fields, preserved verbatim so tooling metadata survives a round trip.
struct NetworkDocument {
  Network net;
  json metadata = json::object();
};

inline NetworkDocument network_from_json(const json& j) {
  const std::string ctx = "network";
  if (!j.is_object()) throw InputError(ctx + ": expected a JSON object");
  std::vector<NodeId> nodes = detail::as_id_list(detail::field(j, "nodes", ctx), ctx + ".nodes");
  const json& jarcs = detail::field(j, "arcs", ctx);
  if (!jarcs.is_array()) throw InputError(ctx + ".arcs: expected an array");
  std::vector<Arc> arcs;
  arcs.reserve(jarcs.size());
  for (const json& ja : jarcs) arcs.push_back(arc_from_json(ja, ctx + ".arcs"));
  std::vector<NodeId> sources =
      j.contains("sources") ? detail::as_id_list(j.at("sources"), ctx + ".sources")
                            : std::vector<NodeId>{};
  std::vector<NodeId> sinks = j.contains("sinks")
                                  ? detail::as_id_list(j.at("sinks"), ctx + ".sinks")
                                  : std::vector<NodeId>{};
  NetworkDocument doc{Network(std::move(nodes), std::move(arcs), std::move(sources),
                              std::move(sinks)),
                      json::object()};
  for (const auto& [key, value] : j.items()) {
    if (key == "nodes" || key == "arcs" || key == "sources" || key == "sinks") continue;
    doc.metadata[key] = value;
  }
  return doc;
}

inline json document_to_json(const NetworkDocument& doc) {
  json out = network_to_json(doc.net);
  for (const auto& [key, value] : doc.metadata.items()) out[key] = value;
  return out;
}

inline NetworkDocument read_network(std::istream& in) {
  return network_from_json(detail::parse_stream(in, "network"));
}

inline void write_network(std::ostream& out, const NetworkDocument& doc) {
  out << document_to_json(doc).dump(2) << '\n';
}

// ---- states ----

inline json state_to_json(const Network& net, const NetworkState& state) {
  json x = json::object();
  for (const NodeId id : net.nodes()) {
    const std::int64_t v = state.get(id);
    if (v != 0) x[std::to_string(id)] = v;
  }
  return json{{"kind", "plain"}, {"x", std::move(x)}};
}

inline json state_to_json(const Network& net, const BucketedState& state) {
  json x = json::object();
  for (const NodeId id : net.nodes()) {
    std::vector<std::int64_t> buckets(static_cast<std::size_t>(state.c_max()) + 1);
    bool any = false;
    for (Cost c = 0; c <= state.c_max(); ++c) {
      buckets[static_cast<std::size_t>(c)] = state.get(id, c);
      any = any || buckets[static_cast<std::size_t>(c)] != 0;
    }
    if (any) x[std::to_string(id)] = buckets;
  }
  return json{{"kind", "bucketed"}, {"c_max", state.c_max()}, {"x", std::move(x)}};
}

inline NetworkState plain_state_from_json(const Network& net, const json& j) {
  const std::string ctx = "state";
  if (!j.is_object()) throw InputError(ctx + ": expected a JSON object");
  if (j.contains("kind") && j.at("kind") != "plain")
    throw InputError(ctx + ": expected kind 'plain'");
  NetworkState state(net);
  const json& x = detail::field(j, "x", ctx);
  if (!x.is_object()) throw InputError(ctx + ".x: expected an object keyed by node id");
  for (const auto& [key, value] : x.items()) {
    const NodeId id = detail::key_to_id(key, ctx + ".x");
    state.set(id, detail::as_int(value, ctx + ".x." + key));
  }
  return state;
}

inline BucketedState bucketed_state_from_json(const Network& net, const json& j, Cost c_max) {
  const std::string ctx = "state";
  if (!j.is_object()) throw InputError(ctx + ": expected a JSON object");
  if (j.contains("kind") && j.at("kind") != "bucketed")
    throw InputError(ctx + ": expected kind 'bucketed'");
  if (j.contains("c_max") && detail::as_int(j.at("c_max"), ctx + ".c_max") != c_max)
    throw InputError(ctx + ": state c_max does not match the requested budget");
  BucketedState state(net, c_max);
  const json& x = detail::field(j, "x", ctx);
  if (!x.is_object()) throw InputError(ctx + ".x: expected an object keyed by node id");
  for (const auto& [key, value] : x.items()) {
    const NodeId id = detail::key_to_id(key, ctx + ".x");
    if (!value.is_array()) throw InputError(ctx + ".x." + key + ": expected a bucket array");
    if (static_cast<Cost>(value.size()) != c_max + 1)
      throw InputError(ctx + ".x." + key + ": bucket array must have c_max+1 entries");
    for (Cost c = 0; c <= c_max; ++c) {
      const std::int64_t v =
          detail::as_int(value.at(static_cast<std::size_t>(c)), ctx + ".x." + key);
      if (v != 0) state.set(id, c, v);
    }
  }
  return state;
}

// ---- scenarios ----

inline const char* mod_kind_name(ModKind kind) {
  switch (kind) {
    case ModKind::remove_nodes: return "remove_nodes";
    case ModKind::add_nodes: return "add_nodes";
    case ModKind::remove_arcs: return "remove_arcs";
    case ModKind::add_arcs: return "add_arcs";
    case ModKind::set_sources: return "set_sources";
    case ModKind::set_sinks: return "set_sinks";
  }
  throw InternalError("unhandled modification kind");
}

inline ModKind mod_kind_from_name(const std::string& name) {
  if (name == "remove_nodes") return ModKind::remove_nodes;
  if (name == "add_nodes") return ModKind::add_nodes;
  if (name == "remove_arcs") return ModKind::remove_arcs;
  if (name == "add_arcs") return ModKind::add_arcs;
  if (name == "set_sources") return ModKind::set_sources;
  if (name == "set_sinks") return ModKind::set_sinks;
  throw InputError("scenario: unknown event kind '" + name + "'");
}

inline json modification_to_json(const Modification& mod) {
  json out{{"kind", mod_kind_name(mod.kind)}, {"at_step", mod.at_step}};
  if (mod.kind == ModKind::add_arcs || mod.kind == ModKind::remove_arcs) {
    json arcs = json::array();
    for (const Arc& a : mod.arcs) arcs.push_back(arc_to_json(a));
    out["arcs"] = std::move(arcs);
  } else {
    out["nodes"] = mod.node_ids;
  }
  return out;
}

inline Modification modification_from_json(const json& j) {
  const std::string ctx = "scenario event";
  if (!j.is_object()) throw InputError(ctx + ": expected a JSON object");
  Modification mod;
  const json& kind = detail::field(j, "kind", ctx);
  if (!kind.is_string()) throw InputError(ctx + ".kind: expected a string");
  mod.kind = mod_kind_from_name(kind.get<std::string>());
  mod.at_step = j.contains("at_step") ? detail::as_int(j.at("at_step"), ctx + ".at_step") : 0;
  if (mod.kind == ModKind::add_arcs || mod.kind == ModKind::remove_arcs) {
    const json& arcs = detail::field(j, "arcs", ctx);
    if (!arcs.is_array()) throw InputError(ctx + ".arcs: expected an array");
    for (const json& ja : arcs) mod.arcs.push_back(arc_from_json(ja, ctx + ".arcs"));
  } else {
    mod.node_ids = detail::as_id_list(detail::field(j, "nodes", ctx), ctx + ".nodes");
  }
  return mod;
}

inline std::vector<Modification> scenario_from_json(const json& j) {
  const std::string ctx = "scenario";
  if (!j.is_object()) throw InputError(ctx + ": expected a JSON object");
  const json& events = detail::field(j, "events", ctx);
  if (!events.is_array()) throw InputError(ctx + ".events: expected an array");
  std::vector<Modification> out;
  out.reserve(events.size());
  for (const json& je : events) out.push_back(modification_from_json(je));
  return out;
}

inline std::vector<Modification> read_scenario(std::istream& in) {
  return scenario_from_json(detail::parse_stream(in, "scenario"));
}

// ---- run outputs ----

inline const char* policy_name(PolicyKind p) {
  return p == PolicyKind::original ? "original" : "enhanced";
}
inline const char* choice_name(ChoiceMode m) {
  return m == ChoiceMode::deterministic ? "deterministic" : "stochastic";
}
inline const char* schedule_name(InjectionSchedule s) {
  switch (s) {
    case InjectionSchedule::round_robin: return "round_robin";
    case InjectionSchedule::single_source: return "single_source";
    case InjectionSchedule::uniform_random: return "uniform_random";
  }
  throw InternalError("unhandled schedule");
}
inline const char* stop_name(StopRule s) {
  switch (s) {
    case StopRule::at_rest: return "at_rest";
    case StopRule::max_steps: return "max_steps";
    case StopRule::rest_then_extra: return "rest_then_extra";
  }
  throw InternalError("unhandled stop rule");
}

// Per-step CSV. The k=0 row carries the starting total; each later row is
// one injection with where it ended up.
inline void write_metrics_csv(std::ostream& out, const MetricsLog& log) {
  out << "k,v,source,event,node,virtual_tokens\n";
  out << "0," << log.initial_v << ",,initial,,0\n";
  for (const StepRecord& s : log.steps) {
    const char* event = s.exited ? "exit" : (s.asleep ? "asleep" : "stop");
    out << s.k << ',' << s.v << ',' << s.source << ',' << event << ',';
    if (s.stopped_at) out << *s.stopped_at;
    out << ',' << s.virtual_tokens << '\n';
  }
}

inline json summary_to_json(const MetricsLog& log) {
  json cfg{{"policy", policy_name(log.policy)},
           {"choice", choice_name(log.choice_mode)},
           {"seed", log.seed},
           {"rng", log.rng_algorithm},
           {"schedule", schedule_name(log.schedule)},
           {"stop", stop_name(log.stop)},
           {"post_rest", log.post_rest}};
  if (log.c_max) cfg["c_max"] = *log.c_max;

  json segments = json::array();
  for (const SegmentSummary& s : summarize(log)) {
    json sources = json::object();
    for (const auto& [id, stats] : s.per_source) {
      sources[std::to_string(id)] = json{{"L", stats.length},
                                         {"C", stats.secondary},
                                         {"E", stats.arcs},
                                         {"walk", stats.walk},
                                         {"L_min", stats.length_min},
                                         {"L_max", stats.length_max}};
    }
    json jseg{{"segment", s.segment}, {"rest_reached", s.rest_reached},
              {"t_ss", s.t_ss},       {"v_ss", s.v_ss},
              {"l_ss", s.l_ss},       {"sources", std::move(sources)}};
    if (s.L_ss >= 0) {
      jseg["L_ss"] = s.L_ss;
      jseg["C_ss"] = s.C_ss;
      jseg["E_ss"] = s.E_ss;
    }
    segments.push_back(std::move(jseg));
  }

  json hist = json::array();
  if (!log.segments.empty()) {
    for (const auto& [arc, count] : log.segments.back().arc_histogram)
      hist.push_back(json{{"tail", arc.first}, {"head", arc.second}, {"count", count}});
  }

  json final_state = json::object();
  for (const auto& [id, v] : log.final_state)
    if (v != 0) final_state[std::to_string(id)] = v;
  json final_buckets = json::object();
  for (const auto& [id, buckets] : log.final_buckets) {
    bool any = false;
    for (const std::int64_t b : buckets) any = any || b != 0;
    if (any) final_buckets[std::to_string(id)] = buckets;
  }

  json v_series = json::array();
  for (const auto& [k, v] : log.v_series()) v_series.push_back(json::array({k, v}));

  json out{{"config", std::move(cfg)},
           {"rest_reached", log.rest_reached},
           {"initial_v", log.initial_v},
           {"steps_recorded", log.steps.size()},
           {"segments", std::move(segments)},
           {"arc_histogram", std::move(hist)},
           {"v_series", std::move(v_series)},
           {"final_state", std::move(final_state)}};
  if (log.c_max) out["final_buckets"] = std::move(final_buckets);
  return out;
}

inline json outcome_to_json(const TokenOutcome& o) {
  json blocks = json::array();
  for (const auto& [node, count] : o.virtual_blocks)
    blocks.push_back(json{{"node", node}, {"count", count}});
  json out{{"walk", o.walk},
           {"exited", o.exited},
           {"transitions", o.transitions},
           {"asleep", o.asleep},
           {"virtual_blocks", std::move(blocks)}};
  if (!o.exited) out["terminal"] = o.terminal;
  if (o.final_budget >= 0) out["final_budget"] = o.final_budget;
  return out;
}

// One JSON object per line; replaying walks against the incidence matrix
// reproduces every state delta.
inline void write_trace_jsonl(std::ostream& out, const MetricsLog& log) {
  for (const TraceEvent& ev : log.trace) {
    json j;
    switch (ev.kind) {
      case TraceEvent::Kind::injection:
        j = json{{"kind", "injection"}, {"k", ev.k}, {"source", ev.source}};
        j["outcome"] = outcome_to_json(ev.outcome);
        break;
      case TraceEvent::Kind::settle_walk:
        j = json{{"kind", "settle_walk"}, {"k", ev.k}, {"start", ev.source}};
        j["outcome"] = outcome_to_json(ev.outcome);
        break;
      case TraceEvent::Kind::modification:
        j = json{{"kind", "modification"},
                 {"k", ev.k},
                 {"event", modification_to_json(ev.mod)},
                 {"tokens_discarded", ev.tokens_discarded}};
        break;
    }
    out << j.dump() << '\n';
  }
}

// ---- expanded-network export ----

// Human-oriented: replica ids rendered as "node@budget", arcs annotated
// with the budget shift they consume.
inline json expanded_to_json(const ExpandedNetwork& exp) {
  auto label = [&exp](NodeId eid) {
    const auto [base, step] = exp.decode(eid);
    return std::to_string(base) + "@" + std::to_string(step);
  };
  json nodes = json::array();
  for (const NodeId eid : exp.net.nodes()) nodes.push_back(label(eid));
  json arcs = json::array();
  for (const Arc& a : exp.net.arcs()) {
    const Cost shift = exp.decode(a.head).second - exp.decode(a.tail).second;
    arcs.push_back(json{{"tail", label(a.tail)},
                        {"head", label(a.head)},
                        {"gamma", a.gamma},
                        {"shift", shift}});
  }
  json sources = json::array();
  for (const NodeId eid : exp.net.sources()) sources.push_back(label(eid));
  json sinks = json::array();
  for (const NodeId eid : exp.net.sinks()) sinks.push_back(label(eid));
  return json{{"c_max", exp.c_max},
              {"nodes", std::move(nodes)},
              {"arcs", std::move(arcs)},
              {"sources", std::move(sources)},
              {"sinks", std::move(sinks)}};
}

}  // namespace threshpath
