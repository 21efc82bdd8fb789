// Command-line front end: generate networks, validate assumptions, run the
// token dynamics, query the reference shortest-path solver, and cross-check
// the two against each other.
//
// Exit codes: 0 success, 2 unusable input, 3 run did not converge or an
// internal bound tripped, 4 simulation and reference disagree.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "threshpath/threshpath.hpp"

namespace tp = threshpath;
using tp::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNoConverge = 3;
constexpr int kExitMismatch = 4;

tp::NetworkDocument load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw tp::InputError("cannot open network file: " + path);
  return tp::read_network(in);
}

json load_json(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw tp::InputError(std::string("cannot open ") + what + " file: " + path);
  return tp::detail::parse_stream(in, what);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw tp::InputError("cannot write to " + path);
  out << text;
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// Shared simulate/compare options, bound by add_sim_options.
struct SimOpts {
  std::string network;
  std::string policy = "original";
  std::string choice = "deterministic";
  std::uint64_t seed = 1;
  std::string schedule = "round-robin";
  tp::NodeId source = 0;
  bool source_set = false;
  std::string stop = "rest";
  std::int64_t max_steps = 0;
  std::int64_t post_rest = -1;
  std::int64_t c_max = -1;
  std::string initial_state;
  std::string scenario;
  bool dynamic = false;
};

void add_sim_options(CLI::App* cmd, SimOpts& o, bool with_scenario) {
  cmd->add_option("--network", o.network, "network JSON file")->required();
  cmd->add_option("--policy", o.policy, "original|enhanced")
      ->check(CLI::IsMember({"original", "enhanced"}));
  cmd->add_option("--choice", o.choice, "deterministic|stochastic")
      ->check(CLI::IsMember({"deterministic", "stochastic"}));
  cmd->add_option("--seed", o.seed, "seed for every random stream");
  cmd->add_option("--schedule", o.schedule, "round-robin|single-source|random")
      ->check(CLI::IsMember({"round-robin", "single-source", "random"}));
  cmd->add_option("--source", o.source, "injection node for --schedule single-source")
      ->each([&o](const std::string&) { o.source_set = true; });
  cmd->add_option("--post-rest", o.post_rest,
                  "measurement walks per source once at rest (default 1, stochastic 100)");
  cmd->add_option("--c-max", o.c_max, "secondary cost budget; enables the bucketed engine");
  cmd->add_option("--initial-state", o.initial_state, "state JSON to start from");
  if (with_scenario) {
    cmd->add_option("--stop", o.stop, "rest|steps|rest-extra")
        ->check(CLI::IsMember({"rest", "steps", "rest-extra"}));
    cmd->add_option("--max-steps", o.max_steps, "injection budget for --stop steps");
    cmd->add_option("--scenario", o.scenario, "scenario JSON with modification events");
    cmd->add_flag("--dynamic", o.dynamic,
                  "re-converge after each batch of scenario events (segment per batch)");
  }
}

tp::SimConfig build_config(const SimOpts& o) {
  tp::SimConfig cfg;
  cfg.policy = o.policy == "enhanced" ? tp::PolicyKind::enhanced : tp::PolicyKind::original;
  cfg.choice.mode = o.choice == "stochastic" ? tp::ChoiceMode::stochastic
                                             : tp::ChoiceMode::deterministic;
  cfg.choice.seed = o.seed;
  if (o.schedule == "single-source") {
    if (!o.source_set) throw tp::InputError("--schedule single-source needs --source");
    cfg.schedule = tp::InjectionSchedule::single_source;
    cfg.single_source_id = o.source;
  } else if (o.schedule == "random") {
    cfg.schedule = tp::InjectionSchedule::uniform_random;
  } else {
    cfg.schedule = tp::InjectionSchedule::round_robin;
  }
  if (o.stop == "steps") {
    cfg.stop = tp::StopRule::max_steps;
    if (o.max_steps <= 0) throw tp::InputError("--stop steps needs a positive --max-steps");
    cfg.max_steps = o.max_steps;
  } else if (o.stop == "rest-extra") {
    cfg.stop = tp::StopRule::rest_then_extra;
  } else {
    cfg.stop = tp::StopRule::at_rest;
  }
  cfg.post_rest = o.post_rest;
  if (o.c_max >= 0) cfg.c_max = o.c_max;
  return cfg;
}

struct LoadedStates {
  std::optional<tp::NetworkState> plain;
  std::optional<tp::BucketedState> buckets;
};

LoadedStates load_initial_state(const SimOpts& o, const tp::Network& net) {
  LoadedStates out;
  if (o.initial_state.empty()) return out;
  const json j = load_json(o.initial_state, "state");
  if (o.c_max >= 0)
    out.buckets = tp::bucketed_state_from_json(net, j, o.c_max);
  else
    out.plain = tp::plain_state_from_json(net, j);
  return out;
}

// ---- generate ----

tp::NodeId parse_pixel(const std::string& text, std::int64_t width, std::int64_t height) {
  const auto comma = text.find(',');
  if (comma == std::string::npos)
    throw tp::InputError("pixel '" + text + "' must be row,col");
  std::int64_t r = 0;
  std::int64_t c = 0;
  try {
    std::size_t used = 0;
    r = std::stoll(text.substr(0, comma), &used);
    if (used != comma) throw std::invalid_argument("");
    const std::string rest = text.substr(comma + 1);
    c = std::stoll(rest, &used);
    if (used != rest.size()) throw std::invalid_argument("");
  } catch (const std::exception&) {
    throw tp::InputError("pixel '" + text + "' must be row,col");
  }
  if (r < 0 || r >= height || c < 0 || c >= width)
    throw tp::InputError("pixel '" + text + "' lies outside the raster");
  return r * width + c;
}

int run_generate_fig2(const std::string& out) {
  tp::NetworkDocument doc{tp::fig2_network(), json::object()};
  doc.metadata["generator"] = json{{"kind", "reference-example"}};
  write_json(out, tp::document_to_json(doc));
  return kExitOk;
}

int run_generate_grid(const std::string& pgm, std::int64_t h0, const std::string& m_minus,
                      const std::string& m_plus, const std::vector<std::string>& sources,
                      const std::vector<std::string>& sinks,
                      std::optional<std::int64_t> obstacle_level, const std::string& out) {
  std::ifstream in(pgm);
  if (!in) throw tp::InputError("cannot open raster file: " + pgm);
  tp::AltitudeMap map = tp::read_pgm(in);
  if (obstacle_level) {
    map.obstacle.assign(static_cast<std::size_t>(map.pixels()), 0);
    for (std::int64_t p = 0; p < map.pixels(); ++p)
      if (map.h[static_cast<std::size_t>(p)] == *obstacle_level)
        map.obstacle[static_cast<std::size_t>(p)] = 1;
  }
  for (const std::string& s : sources)
    map.sources.push_back(parse_pixel(s, map.width, map.height));
  for (const std::string& t : sinks)
    map.sinks.push_back(parse_pixel(t, map.width, map.height));

  const tp::Rational mm = tp::parse_rational(m_minus);
  const tp::Rational mp = tp::parse_rational(m_plus);
  tp::NetworkDocument doc{tp::grid_from_altitude(map, h0, mm, mp), json::object()};
  doc.metadata["generator"] = json{{"kind", "altitude-grid"},
                                   {"width", map.width},
                                   {"height", map.height},
                                   {"h0", h0},
                                   {"m_minus", m_minus},
                                   {"m_plus", m_plus}};
  write_json(out, tp::document_to_json(doc));
  return kExitOk;
}

int run_generate_small_world(const tp::SmallWorldParams& params, const std::string& out) {
  tp::NetworkDocument doc{tp::small_world(params), json::object()};
  doc.metadata["generator"] = json{{"kind", "small-world"}, {"n", params.n},
                                   {"delta", params.delta}, {"beta", params.beta},
                                   {"gamma_max", params.gamma_max},
                                   {"sigma_max", params.sigma_max}, {"seed", params.seed},
                                   {"rng", tp::kRngAlgorithm}};
  write_json(out, tp::document_to_json(doc));
  return kExitOk;
}

// ---- validate ----

json validation_to_json(const tp::ValidationReport& rep) {
  json feasible = json::object();
  for (const auto& [id, ok] : rep.feasible_path_per_source)
    feasible[std::to_string(id)] = ok;
  json out{{"passed", rep.passed()},
           {"weakly_connected", rep.weakly_connected},
           {"has_sink", rep.has_sink},
           {"overflow_safe", rep.overflow_safe},
           {"gamma_bound", rep.gamma_bound},
           {"sigma_bound", rep.sigma_bound},
           {"feasible_path_per_source", std::move(feasible)},
           {"messages", rep.messages}};
  if (rep.nonpositive_gamma_circuit)
    out["nonpositive_gamma_circuit"] = *rep.nonpositive_gamma_circuit;
  if (rep.negative_sigma_circuit)
    out["negative_sigma_circuit"] = *rep.negative_sigma_circuit;
  if (rep.negative_sink_pair_path)
    out["negative_sink_pair_path"] = rep.negative_sink_pair_path->nodes;
  if (rep.negative_sigma_arc) out["negative_sigma_arc"] = tp::arc_to_json(*rep.negative_sigma_arc);
  return out;
}

int run_validate(const std::string& network, std::int64_t c_max, const std::string& out) {
  const tp::NetworkDocument doc = load_network(network);
  const std::optional<tp::Cost> budget =
      c_max >= 0 ? std::optional<tp::Cost>(c_max) : std::nullopt;
  const tp::ValidationReport rep = tp::validate_assumptions(doc.net, budget);
  write_json(out, validation_to_json(rep));
  return rep.passed() ? kExitOk : kExitInput;
}

// ---- simulate ----

json replication_row(std::uint64_t seed, const tp::MetricsLog& log) {
  json row{{"seed", seed}, {"rest_reached", log.rest_reached}};
  const auto summaries = tp::summarize(log);
  if (!summaries.empty()) {
    const tp::SegmentSummary& last = summaries.back();
    row["t_ss"] = last.t_ss;
    row["v_ss"] = last.v_ss;
    row["l_ss"] = last.l_ss;
    if (last.L_ss >= 0) {
      row["L_ss"] = last.L_ss;
      row["C_ss"] = last.C_ss;
      row["E_ss"] = last.E_ss;
    }
  }
  return row;
}

int run_simulate(const SimOpts& opts, std::int64_t replications, const std::string& metrics,
                 const std::string& summary, const std::string& trace) {
  const tp::NetworkDocument doc = load_network(opts.network);
  tp::SimConfig cfg = build_config(opts);
  cfg.record_trace = !trace.empty();
  if (!opts.scenario.empty()) cfg.scenario = tp::scenario_from_json(load_json(opts.scenario, "scenario"));
  if (replications < 1) throw tp::InputError("--replications must be at least 1");
  if (replications > 1 && (!metrics.empty() || !trace.empty()))
    throw tp::InputError("--metrics/--trace apply to single runs; drop --replications");

  auto run_once = [&](std::uint64_t seed) {
    tp::SimConfig c = cfg;
    c.choice.seed = seed;
    LoadedStates init = load_initial_state(opts, doc.net);
    return opts.dynamic
               ? tp::run_dynamic(doc.net, c, std::move(init.plain), std::move(init.buckets))
               : tp::run(doc.net, c, std::move(init.plain), std::move(init.buckets));
  };

  if (replications == 1) {
    const tp::MetricsLog log = run_once(cfg.choice.seed);
    if (!metrics.empty()) {
      std::ostringstream csv;
      tp::write_metrics_csv(csv, log);
      write_text(metrics, csv.str());
    }
    if (!trace.empty()) {
      std::ostringstream lines;
      tp::write_trace_jsonl(lines, log);
      write_text(trace, lines.str());
    }
    if (!summary.empty()) write_json(summary, tp::summary_to_json(log));
    const auto summaries = tp::summarize(log);
    if (!summaries.empty()) {
      const tp::SegmentSummary& last = summaries.back();
      std::cout << "rest_reached=" << (log.rest_reached ? "yes" : "no")
                << " t_ss=" << last.t_ss << " v_ss=" << last.v_ss << " l_ss=" << last.l_ss
                << '\n';
    }
    if (cfg.stop != tp::StopRule::max_steps && !log.rest_reached) return kExitNoConverge;
    return kExitOk;
  }

  json rows = json::array();
  bool all_rest = true;
  std::int64_t sum_t = 0;
  std::int64_t sum_v = 0;
  std::int64_t sum_l = 0;
  for (std::int64_t i = 0; i < replications; ++i) {
    const std::uint64_t seed = cfg.choice.seed + static_cast<std::uint64_t>(i);
    const tp::MetricsLog log = run_once(seed);
    rows.push_back(replication_row(seed, log));
    all_rest = all_rest && log.rest_reached;
    const auto summaries = tp::summarize(log);
    if (!summaries.empty()) {
      sum_t += summaries.back().t_ss;
      sum_v += summaries.back().v_ss;
      sum_l += summaries.back().l_ss;
    }
  }
  const double denom = static_cast<double>(replications);
  json agg{{"replications", replications},
           {"rest_reached_all", all_rest},
           {"t_ss_mean", static_cast<double>(sum_t) / denom},
           {"v_ss_mean", static_cast<double>(sum_v) / denom},
           {"l_ss_mean", static_cast<double>(sum_l) / denom}};
  if (!summary.empty())
    write_json(summary, json{{"rows", std::move(rows)}, {"aggregate", agg}});
  std::cout << "replications=" << replications
            << " rest_all=" << (all_rest ? "yes" : "no")
            << " t_ss_mean=" << agg["t_ss_mean"].get<double>() << '\n';
  return all_rest || cfg.stop == tp::StopRule::max_steps ? kExitOk : kExitNoConverge;
}

// ---- oracle ----

int run_oracle(const std::string& network, std::int64_t c_max, bool secondary,
               const std::string& out) {
  const tp::NetworkDocument doc = load_network(network);
  json result = json::object();

  if (c_max < 0) {
    auto dump = [&doc](tp::CostKind kind) {
      const tp::DistanceMap map = tp::shortest_to_sinks(doc.net, kind);
      json dist = json::object();
      json hops = json::object();
      for (std::size_t i = 0; i < map.nodes.size(); ++i) {
        const std::string key = std::to_string(map.nodes[i]);
        dist[key] = map.dist[i] ? json(*map.dist[i]) : json(nullptr);
        hops[key] = map.next_hop[i] ? json(*map.next_hop[i]) : json(nullptr);
      }
      json paths = json::object();
      for (const tp::NodeId s : doc.net.sources()) {
        const auto path = tp::canonical_path(doc.net, map, s);
        if (!path) {
          paths[std::to_string(s)] = nullptr;
          continue;
        }
        paths[std::to_string(s)] = json{{"nodes", path->nodes},
                                        {"length", path->length},
                                        {"secondary", path->secondary}};
      }
      return json{{"distances", std::move(dist)},
                  {"next_hop", std::move(hops)},
                  {"source_paths", std::move(paths)}};
    };
    result["primary"] = dump(tp::CostKind::primary);
    if (secondary) result["secondary"] = dump(tp::CostKind::secondary);
  } else {
    result["c_max"] = c_max;
    json answers = json::object();
    for (const tp::NodeId s : doc.net.sources()) {
      const tp::ConstrainedAnswer ans = tp::constrained_shortest(doc.net, s, c_max);
      json ja{{"feasible", ans.feasible}};
      if (ans.feasible) {
        ja["length"] = ans.length;
        ja["secondary"] = ans.secondary;
        ja["nodes"] = ans.path.nodes;
      }
      answers[std::to_string(s)] = std::move(ja);
    }
    result["answers"] = std::move(answers);
  }
  write_json(out, result);
  return kExitOk;
}

// ---- expand ----

int run_expand(const std::string& network, std::int64_t c_max, bool no_prune,
               const std::string& out) {
  const tp::NetworkDocument doc = load_network(network);
  if (c_max < 0) throw tp::InputError("expand needs --c-max >= 0");
  const tp::ExpandedNetwork exp = tp::expand(doc.net, c_max, !no_prune);
  write_json(out, tp::expanded_to_json(exp));
  return kExitOk;
}

// ---- compare ----

struct SourceCheck {
  bool match = true;
  json detail;
};

SourceCheck check_source_unconstrained(const tp::Network& net, const tp::DistanceMap& map,
                                       tp::NodeId s, tp::Cost sim_min, tp::Cost sim_max,
                                       const std::vector<tp::NodeId>& walk) {
  SourceCheck out;
  const std::optional<tp::Cost> want = map.dist_of(s);
  out.detail = json{{"sim_L", sim_min}, {"oracle_L", want ? json(*want) : json(nullptr)},
                    {"sim_walk", walk}};
  if (!want) {
    out.match = false;
    out.detail["note"] = "no route to a sink, yet the token exited";
    return out;
  }
  if (sim_min != *want || sim_max != *want) {
    out.match = false;
    if (sim_min != sim_max) {
      out.detail["sim_L_max"] = sim_max;
      out.detail["note"] = "post-rest walks vary in length";
    }
  }
  try {
    tp::path_of(net, walk);
  } catch (const tp::InputError& e) {
    out.match = false;
    out.detail["note"] = std::string("walk is not a simple path: ") + e.what();
  }
  out.detail["match"] = out.match;
  return out;
}

SourceCheck check_source_constrained(const tp::Network& net, tp::NodeId s, tp::Cost c_max,
                                     tp::Cost sim_min, tp::Cost sim_max, tp::Cost sim_C,
                                     const std::vector<tp::NodeId>& walk) {
  SourceCheck out;
  const tp::ConstrainedAnswer ans = tp::constrained_shortest(net, s, c_max);
  out.detail = json{{"sim_L", sim_min}, {"sim_C", sim_C},
                    {"oracle_L", ans.feasible ? json(ans.length) : json(nullptr)},
                    {"sim_walk", walk}};
  if (!ans.feasible) {
    out.match = false;
    out.detail["note"] = "budget makes the sink unreachable, yet the token exited";
  } else if (sim_min != ans.length || sim_max != ans.length) {
    out.match = false;
    if (sim_min != sim_max) out.detail["sim_L_max"] = sim_max;
  } else if (sim_C > c_max) {
    out.match = false;
    out.detail["note"] = "walk exceeds the secondary budget";
  }
  try {
    tp::path_of(net, walk);
  } catch (const tp::InputError& e) {
    out.match = false;
    out.detail["note"] = std::string("walk is not a simple path: ") + e.what();
  }
  out.detail["match"] = out.match;
  return out;
}

int run_compare(const SimOpts& opts, bool assume_rest, const std::string& out) {
  const tp::NetworkDocument doc = load_network(opts.network);
  tp::SimConfig cfg = build_config(opts);
  if (cfg.stop == tp::StopRule::max_steps)
    throw tp::InputError("compare needs a rest-based stop rule");

  json report{{"mode", assume_rest ? "assumed-rest" : "converged"}};
  bool all_match = true;
  json per_source = json::object();

  const bool constrained = cfg.c_max.has_value();
  std::optional<tp::DistanceMap> map;
  if (!constrained) map = tp::shortest_to_sinks(doc.net);

  if (assume_rest) {
    if (opts.initial_state.empty())
      throw tp::InputError("--assume-rest needs --initial-state");
    LoadedStates init = load_initial_state(opts, doc.net);
    tp::ChoicePicker picker(cfg.choice);
    const bool enhanced = cfg.policy == tp::PolicyKind::enhanced;

    bool at_rest = false;
    if (constrained)
      at_rest = tp::constrained_is_global_rest(doc.net, *init.buckets, picker, enhanced);
    else
      at_rest = tp::is_global_rest(doc.net, *init.plain, picker, enhanced);
    report["state_at_rest"] = at_rest;
    if (!at_rest) {
      report["ok"] = false;
      report["note"] = "supplied state is not at rest; injections still change it";
      write_json(out, report);
      return kExitMismatch;
    }

    for (const tp::NodeId s : doc.net.sources()) {
      tp::StepResult res;
      if (constrained)
        res = tp::constrained_inject(doc.net, *init.buckets, s, picker, enhanced);
      else
        res = tp::inject(doc.net, *init.plain, s, picker, enhanced);
      const tp::Walk w = tp::walk_of(doc.net, res.outcome.walk);
      SourceCheck chk =
          constrained
              ? check_source_constrained(doc.net, s, *cfg.c_max, w.length, w.length,
                                         w.secondary, res.outcome.walk)
              : check_source_unconstrained(doc.net, *map, s, w.length, w.length,
                                           res.outcome.walk);
      all_match = all_match && chk.match;
      per_source[std::to_string(s)] = std::move(chk.detail);
    }
  } else {
    LoadedStates init = load_initial_state(opts, doc.net);
    const tp::MetricsLog log =
        tp::run(doc.net, cfg, std::move(init.plain), std::move(init.buckets));
    if (!log.rest_reached) {
      report["ok"] = false;
      report["note"] = "run ended without certifying rest";
      write_json(out, report);
      return kExitNoConverge;
    }
    const tp::SegmentMetrics& seg = log.segments.back();
    report["t_ss"] = seg.t_ss;
    report["v_ss"] = seg.v_ss;
    report["l_ss"] = seg.l_ss;
    for (const auto& [s, stats] : seg.per_source) {
      SourceCheck chk = constrained
                            ? check_source_constrained(doc.net, s, *cfg.c_max,
                                                       stats.length_min, stats.length_max,
                                                       stats.secondary, stats.walk)
                            : check_source_unconstrained(doc.net, *map, s, stats.length_min,
                                                         stats.length_max, stats.walk);
      all_match = all_match && chk.match;
      per_source[std::to_string(s)] = std::move(chk.detail);
    }
  }

  report["per_source"] = std::move(per_source);
  report["ok"] = all_match;
  write_json(out, report);
  std::cout << (all_match ? "match" : "MISMATCH") << '\n';
  return all_match ? kExitOk : kExitMismatch;
}

// ---- export-plot ----

int run_export_plot(const std::string& summary_path, const std::string& prefix) {
  const json j = load_json(summary_path, "summary");
  if (!j.contains("v_series"))
    throw tp::InputError("summary has no v_series; was it written by 'simulate --summary'?");

  std::ostringstream v_dat;
  v_dat << "# k V\n";
  for (const json& pair : j.at("v_series"))
    v_dat << pair.at(0).get<std::int64_t>() << ' ' << pair.at(1).get<std::int64_t>() << '\n';
  write_text(prefix + "v_series.dat", v_dat.str());

  std::ostringstream h_dat;
  h_dat << "# tail head count\n";
  if (j.contains("arc_histogram")) {
    for (const json& row : j.at("arc_histogram"))
      h_dat << row.at("tail").get<std::int64_t>() << ' ' << row.at("head").get<std::int64_t>()
            << ' ' << row.at("count").get<std::int64_t>() << '\n';
  }
  write_text(prefix + "arc_histogram.dat", h_dat.str());

  std::cout << "wrote " << prefix << "v_series.dat and " << prefix << "arc_histogram.dat\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Threshold-policy shortest path toolkit"};
  app.require_subcommand(1);

  // generate
  CLI::App* generate = app.add_subcommand("generate", "emit a network JSON file");
  generate->require_subcommand(1);
  std::string gen_out = "-";

  CLI::App* gen_fig2 = generate->add_subcommand("fig2", "five-node reference example");
  gen_fig2->add_option("-o,--output", gen_out, "output path (default stdout)");

  CLI::App* gen_grid = generate->add_subcommand("grid", "altitude raster with 8-neighbour moves");
  std::string grid_pgm;
  std::int64_t grid_h0 = -30;
  std::string grid_mm = "2/5";
  std::string grid_mp = "9/10";
  std::vector<std::string> grid_sources;
  std::vector<std::string> grid_sinks;
  std::int64_t grid_obstacle = -1;
  bool grid_obstacle_set = false;
  gen_grid->add_option("--pgm", grid_pgm, "plain P2 PGM altitude raster")->required();
  gen_grid->add_option("--h0", grid_h0, "altitude-gain threshold, negative");
  gen_grid->add_option("--m-minus", grid_mm, "slope below h0, rational like 2/5");
  gen_grid->add_option("--m-plus", grid_mp, "slope above h0, rational like 9/10");
  gen_grid->add_option("--source", grid_sources, "source pixel row,col (repeatable)")
      ->required();
  gen_grid->add_option("--sink", grid_sinks, "sink pixel row,col (repeatable)")->required();
  gen_grid
      ->add_option("--obstacle-level", grid_obstacle,
                   "altitude value marking impassable pixels")
      ->each([&grid_obstacle_set](const std::string&) { grid_obstacle_set = true; });
  gen_grid->add_option("-o,--output", gen_out, "output path (default stdout)");

  CLI::App* gen_sw = generate->add_subcommand("small-world", "rewired ring lattice");
  tp::SmallWorldParams sw;
  gen_sw->add_option("--n", sw.n, "node count")->required();
  gen_sw->add_option("--delta", sw.delta, "even ring degree");
  gen_sw->add_option("--beta", sw.beta, "rewiring probability");
  gen_sw->add_option("--gamma-max", sw.gamma_max, "primary costs drawn from 1..gamma-max");
  gen_sw->add_option("--sigma-max", sw.sigma_max, "secondary costs drawn from 1..sigma-max");
  gen_sw->add_option("--seed", sw.seed, "generator seed");
  gen_sw->add_option("-o,--output", gen_out, "output path (default stdout)");

  // validate
  CLI::App* validate = app.add_subcommand("validate", "check the standing assumptions");
  std::string val_network;
  std::int64_t val_cmax = -1;
  std::string val_out = "-";
  validate->add_option("--network", val_network, "network JSON file")->required();
  validate->add_option("--c-max", val_cmax, "also check budget feasibility per source");
  validate->add_option("-o,--output", val_out, "report path (default stdout)");

  // simulate
  CLI::App* simulate = app.add_subcommand("simulate", "run the token dynamics");
  SimOpts sim_opts;
  add_sim_options(simulate, sim_opts, /*with_scenario=*/true);
  std::int64_t replications = 1;
  std::string sim_metrics;
  std::string sim_summary;
  std::string sim_trace;
  simulate->add_option("--replications", replications,
                       "repeat with seeds seed..seed+R-1 and aggregate");
  simulate->add_option("--metrics", sim_metrics, "per-step CSV path");
  simulate->add_option("--summary", sim_summary, "summary JSON path");
  simulate->add_option("--trace", sim_trace, "walk-level JSONL path");

  // oracle
  CLI::App* oracle = app.add_subcommand("oracle", "reference shortest-path answers");
  std::string ora_network;
  std::int64_t ora_cmax = -1;
  bool ora_secondary = false;
  std::string ora_out = "-";
  oracle->add_option("--network", ora_network, "network JSON file")->required();
  oracle->add_option("--c-max", ora_cmax, "budget-constrained answers per source");
  oracle->add_flag("--secondary", ora_secondary, "also solve over secondary costs");
  oracle->add_option("-o,--output", ora_out, "output path (default stdout)");

  // expand
  CLI::App* expand = app.add_subcommand("expand", "emit the budget-expanded network");
  std::string exp_network;
  std::int64_t exp_cmax = -1;
  bool exp_no_prune = false;
  std::string exp_out = "-";
  expand->add_option("--network", exp_network, "network JSON file")->required();
  expand->add_option("--c-max", exp_cmax, "secondary cost budget")->required();
  expand->add_flag("--no-prune", exp_no_prune, "keep replicas unreachable from the sources");
  expand->add_option("-o,--output", exp_out, "output path (default stdout)");

  // compare
  CLI::App* compare = app.add_subcommand(
      "compare", "run to rest and check walks against the reference solver");
  SimOpts cmp_opts;
  add_sim_options(compare, cmp_opts, /*with_scenario=*/false);
  bool assume_rest = false;
  std::string cmp_out = "-";
  compare->add_flag("--assume-rest", assume_rest,
                    "trust --initial-state to be at rest instead of converging");
  compare->add_option("-o,--output", cmp_out, "report path (default stdout)");

  // export-plot
  CLI::App* export_plot =
      app.add_subcommand("export-plot", "turn a summary JSON into gnuplot-ready tables");
  std::string plot_summary;
  std::string plot_prefix;
  export_plot->add_option("--summary", plot_summary, "summary JSON from simulate")->required();
  export_plot->add_option("--out-prefix", plot_prefix, "prefix for the .dat files")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kExitInput;
  }

  try {
    if (gen_fig2->parsed()) return run_generate_fig2(gen_out);
    if (gen_grid->parsed()) {
      return run_generate_grid(grid_pgm, grid_h0, grid_mm, grid_mp, grid_sources, grid_sinks,
                               grid_obstacle_set ? std::optional<std::int64_t>(grid_obstacle)
                                                 : std::nullopt,
                               gen_out);
    }
    if (gen_sw->parsed()) return run_generate_small_world(sw, gen_out);
    if (validate->parsed()) return run_validate(val_network, val_cmax, val_out);
    if (simulate->parsed())
      return run_simulate(sim_opts, replications, sim_metrics, sim_summary, sim_trace);
    if (oracle->parsed()) return run_oracle(ora_network, ora_cmax, ora_secondary, ora_out);
    if (expand->parsed()) return run_expand(exp_network, exp_cmax, exp_no_prune, exp_out);
    if (compare->parsed()) return run_compare(cmp_opts, assume_rest, cmp_out);
    if (export_plot->parsed()) return run_export_plot(plot_summary, plot_prefix);
  } catch (const tp::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const tp::InternalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNoConverge;
  }
  std::cerr << "error: no subcommand handled\n";
  return kExitInput;
}
