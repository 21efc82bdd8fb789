#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>
#include <vector>

#include "threshpath/generators.hpp"
#include "threshpath/oracle.hpp"
#include "threshpath/simulator.hpp"

#include "support/builders.hpp"

using namespace threshpath;

namespace {

SimConfig base_cfg() {
  SimConfig cfg;
  cfg.choice.seed = 1;
  return cfg;
}

// Replays the trace against the incidence matrix: every state delta must be
// B*u plus the injection and virtual-token vectors.
std::map<NodeId, std::int64_t> replay(const Network& net0, const MetricsLog& log) {
  Network net = net0;
  std::map<NodeId, std::int64_t> x = log.initial_state;
  IncidenceMatrix b = incidence_matrix(net);

  auto row_of = [&b](NodeId id) -> std::int64_t {
    for (std::size_t r = 0; r < b.row_nodes.size(); ++r)
      if (b.row_nodes[r] == id) return static_cast<std::int64_t>(r);
    return -1;
  };
  auto col_of = [&net](NodeId tail, NodeId head) {
    for (std::size_t c = 0; c < net.arc_count(); ++c)
      if (net.arcs()[c].tail == tail && net.arcs()[c].head == head) return c;
    throw InternalError("trace uses an arc missing from the network");
  };
  auto apply_walk = [&](const std::vector<NodeId>& walk) {
    for (std::size_t i = 0; i + 1 < walk.size(); ++i) {
      const std::size_t c = col_of(walk[i], walk[i + 1]);
      for (std::size_t r = 0; r < b.row_nodes.size(); ++r) {
        if (b.at(r, c) != 0) x[b.row_nodes[r]] += b.at(r, c);
      }
    }
  };

  for (const TraceEvent& ev : log.trace) {
    switch (ev.kind) {
      case TraceEvent::Kind::injection:
        apply_walk(ev.outcome.walk);
        if (row_of(ev.source) >= 0) x[ev.source] += 1;
        for (const auto& [node, count] : ev.outcome.virtual_blocks) x[node] += count;
        break;
      case TraceEvent::Kind::settle_walk:
        apply_walk(ev.outcome.walk);
        for (const auto& [node, count] : ev.outcome.virtual_blocks) x[node] += count;
        break;
      case TraceEvent::Kind::modification: {
        NetworkState s(net);
        for (const auto& [id, v] : x)
          if (v != 0) s.set(id, v);
        auto changed = apply_modification(net, s, ev.mod);
        net = changed.net;
        x.clear();
        for (const NodeId id : net.nodes()) x[id] = changed.state.get(id);
        b = incidence_matrix(net);
        break;
      }
    }
  }
  return x;
}

void check_replay(const Network& net, const MetricsLog& log) {
  std::map<NodeId, std::int64_t> got = replay(net, log);
  for (const auto& [id, v] : log.final_state) CHECK(got[id] == v);
  for (const auto& [id, v] : got) {
    if (log.final_state.count(id) == 0) CHECK(v == 0);
  }
}

}  // namespace

TEST_CASE("reference run: six lost injections, certified rest, optimal walk") {
  Network net = fig2_network();
  SimConfig cfg = base_cfg();
  cfg.record_trace = true;
  const MetricsLog log = run(net, cfg);

  REQUIRE(log.segments.size() == 1);
  const SegmentMetrics& seg = log.segments[0];
  CHECK(log.rest_reached);
  CHECK(seg.t_ss == 6);
  CHECK(seg.v_ss == 6);
  CHECK(seg.l_ss == 6);

  const std::vector<NodeId> want_stops{1, 2, 1, 3, 2, 1};
  REQUIRE(log.steps.size() == 8);  // 6 stops, the certification probe, 1 measurement
  for (std::size_t k = 0; k < 6; ++k) {
    CHECK(log.steps[k].v == static_cast<std::int64_t>(k) + 1);
    REQUIRE(log.steps[k].stopped_at.has_value());
    CHECK(*log.steps[k].stopped_at == want_stops[k]);
  }
  CHECK(log.steps[6].exited);
  CHECK(log.steps[7].exited);

  REQUIRE(seg.per_source.count(1) == 1);
  const SourceStats& stats = seg.per_source.at(1);
  CHECK(stats.walk == std::vector<NodeId>{1, 2, 3, 4, 5});
  CHECK(stats.length == 3);
  CHECK(stats.secondary == 3);
  CHECK(stats.arcs == 4);

  CHECK(log.final_state == std::map<NodeId, std::int64_t>{{1, 3}, {2, 2}, {3, 1}, {4, 0}, {5, 0}});
  const auto series = log.v_series();
  REQUIRE(series.size() == 7);
  for (std::int64_t k = 0; k <= 6; ++k) {
    CHECK(series[static_cast<std::size_t>(k)].first == k);
    CHECK(series[static_cast<std::size_t>(k)].second == k);
  }
  check_replay(net, log);
}

TEST_CASE("constrained reference run keeps budget buckets at rest") {
  Network net = fig2_network();
  SimConfig cfg = base_cfg();
  cfg.c_max = 2;
  cfg.record_trace = true;
  const MetricsLog log = run(net, cfg);

  CHECK(log.rest_reached);
  const SegmentMetrics& seg = log.segments.back();
  CHECK(seg.t_ss == 10);
  CHECK(seg.v_ss == 10);
  CHECK(seg.l_ss == 10);
  const SourceStats& stats = seg.per_source.at(1);
  CHECK(stats.walk == std::vector<NodeId>{1, 2, 4, 5});
  CHECK(stats.length == 4);
  CHECK(stats.secondary == 2);
  CHECK(stats.arcs == 3);
  CHECK(log.final_buckets.at(1) == std::vector<std::int64_t>{4, 0, 0});
  CHECK(log.final_buckets.at(2) == std::vector<std::int64_t>{0, 3, 0});
  CHECK(log.final_buckets.at(3) == std::vector<std::int64_t>{0, 0, 3});
  std::int64_t asleep = 0;
  for (const StepRecord& s : log.steps)
    if (s.asleep) ++asleep;
  CHECK(asleep == 3);
  check_replay(net, log);
}

TEST_CASE("enhanced reference run loses nothing and rests after three steps") {
  Network net = fig2_network();
  SimConfig cfg = base_cfg();
  cfg.policy = PolicyKind::enhanced;
  cfg.record_trace = true;
  const MetricsLog log = run(net, cfg);

  const SegmentMetrics& seg = log.segments.back();
  CHECK(seg.t_ss == 3);
  CHECK(seg.v_ss == 6);
  CHECK(seg.l_ss == 0);
  CHECK(log.final_state.at(1) == 3);
  CHECK(log.final_state.at(2) == 2);
  CHECK(log.final_state.at(3) == 1);
  REQUIRE(log.steps.size() >= 3);
  CHECK(log.steps[0].virtual_tokens == 3);
  CHECK(log.steps[1].virtual_tokens == 2);
  CHECK(log.steps[2].virtual_tokens == 1);
  check_replay(net, log);
}

TEST_CASE("rest-based runs refuse networks that fail validation") {
  Network bad({1, 2, 3}, {Arc{1, 2, 0, 0}, Arc{2, 1, 0, 0}, Arc{2, 3, 1, 0}}, {1}, {3});
  SimConfig cfg = base_cfg();
  CHECK_THROWS_AS(run(bad, cfg), InputError);
}

TEST_CASE("step-bounded runs record exactly the requested injections") {
  Network net = fig2_network();
  SimConfig cfg = base_cfg();
  cfg.stop = StopRule::max_steps;
  cfg.max_steps = 5;
  const MetricsLog log = run(net, cfg);
  CHECK(log.steps.size() == 5);
  CHECK_FALSE(log.rest_reached);
  CHECK(log.segments.back().t_ss == -1);
  CHECK(log.segments.back().per_source.empty());
}

TEST_CASE("extra measurement walks repeat the optimal route") {
  Network net = fig2_network();
  SimConfig cfg = base_cfg();
  cfg.stop = StopRule::rest_then_extra;
  cfg.post_rest = 3;
  const MetricsLog log = run(net, cfg);
  CHECK(log.steps.size() == 10);  // 6 stops + probe + 3 measurements
  const SourceStats& stats = log.segments.back().per_source.at(1);
  CHECK(stats.length_min == 3);
  CHECK(stats.length_max == 3);
  CHECK(log.segments.back().arc_histogram.at({1, 2}) == 3);
}

TEST_CASE("starting from a rest state certifies immediately") {
  Network net = fig2_network();
  NetworkState x(net);
  x.set(1, 3);
  x.set(2, 2);
  x.set(3, 1);
  SimConfig cfg = base_cfg();
  const MetricsLog log = run(net, cfg, x);
  CHECK(log.rest_reached);
  CHECK(log.segments.back().t_ss == 0);
  CHECK(log.segments.back().v_ss == 6);
  CHECK(log.segments.back().l_ss == 0);
  CHECK(log.initial_v == 6);
  CHECK(log.steps.size() == 2);  // probe plus measurement
}

TEST_CASE("initial state of the wrong flavour is rejected") {
  Network net = fig2_network();
  SimConfig cfg = base_cfg();
  cfg.c_max = 2;
  NetworkState plain(net);
  CHECK_THROWS_AS(run(net, cfg, plain), InputError);
  SimConfig uncon = base_cfg();
  BucketedState buckets(net, 2);
  CHECK_THROWS_AS(run(net, uncon, std::nullopt, buckets), InputError);
}

TEST_CASE("single-source schedules still certify the other sources") {
  Network net({1, 2, 3}, {Arc{1, 3, 1, 1}, Arc{2, 3, 1, 1}}, {1, 2}, {3});
  SimConfig cfg = base_cfg();
  cfg.schedule = InjectionSchedule::single_source;
  cfg.single_source_id = 1;
  const MetricsLog log = run(net, cfg);
  CHECK(log.rest_reached);
  CHECK(log.segments.back().t_ss == 3);
  CHECK(log.segments.back().v_ss == 2);
  bool probed_2 = false;
  for (const StepRecord& s : log.steps) probed_2 = probed_2 || s.source == 2;
  CHECK(probed_2);  // the redirect rule reached the off-schedule source
  CHECK(log.segments.back().per_source.count(2) == 1);
}

TEST_CASE("random injection schedules reach oracle-exact rest") {
  AltitudeMap map;
  map.width = 3;
  map.height = 3;
  map.h = std::vector<std::int64_t>(9, 0);
  map.sources = {0, 2};
  map.sinks = {8};
  Network net = grid_from_altitude(map, -30, Rational(2, 5), Rational(9, 10));
  SimConfig cfg = base_cfg();
  cfg.schedule = InjectionSchedule::uniform_random;
  cfg.choice.seed = 77;
  const MetricsLog log = run(net, cfg);
  CHECK(log.rest_reached);
  const DistanceMap dm = shortest_to_sinks(net);
  for (const auto& [s, stats] : log.segments.back().per_source) {
    CHECK(stats.length == *dm.dist_of(s));
    CHECK(log.final_state.at(s) == *dm.dist_of(s));
  }
}

TEST_CASE("scenario events fire at their absolute step inside one segment") {
  Network net = fig2_network();
  SimConfig cfg = base_cfg();
  cfg.record_trace = true;
  Modification drop;
  drop.kind = ModKind::remove_arcs;
  drop.arcs = {Arc{2, 3, 0, 0}};
  drop.at_step = 3;
  cfg.scenario = {drop};
  const MetricsLog log = run(net, cfg);

  CHECK(log.rest_reached);
  const SegmentMetrics& seg = log.segments.back();
  CHECK(seg.t_ss == 7);
  CHECK(seg.v_ss == 7);
  CHECK(seg.l_ss == 7);
  CHECK(seg.per_source.at(1).walk == std::vector<NodeId>{1, 2, 4, 5});
  CHECK(seg.per_source.at(1).length == 4);
  CHECK(log.final_state.at(1) == 4);
  CHECK(log.final_state.at(2) == 3);
  CHECK(log.final_state.at(3) == 0);
  check_replay(net, log);
}

TEST_CASE("segmented runs converge between modification batches") {
  Network net = fig2_network();
  SimConfig cfg = base_cfg();
  cfg.record_trace = true;
  Modification drop;
  drop.kind = ModKind::remove_arcs;
  drop.arcs = {Arc{2, 3, 0, 0}};
  drop.at_step = 1;
  Modification put_back;
  put_back.kind = ModKind::add_arcs;
  put_back.arcs = {Arc{2, 3, 1, 1}};
  put_back.at_step = 2;
  cfg.scenario = {drop, put_back};
  const MetricsLog log = run_dynamic(net, cfg);

  REQUIRE(log.segments.size() == 3);
  CHECK(log.segments[0].t_ss == 6);
  CHECK(log.segments[0].v_ss == 6);
  CHECK(log.segments[0].l_ss == 6);
  CHECK(log.segments[0].per_source.at(1).length == 3);

  CHECK(log.segments[1].t_ss == 10);
  CHECK(log.segments[1].v_ss == 8);
  CHECK(log.segments[1].l_ss == 2);
  CHECK(log.segments[1].per_source.at(1).length == 4);
  CHECK(log.segments[1].per_source.at(1).walk == std::vector<NodeId>{1, 2, 4, 5});

  // restoring the arc makes the old state inadmissible: settling sheds two
  // tokens through the sink and rest holds again at the original values
  CHECK(log.segments[2].settle_walks == 2);
  CHECK(log.segments[2].settle_v_drop == 2);
  CHECK(log.segments[2].t_ss == 12);
  CHECK(log.segments[2].v_ss == 6);
  CHECK(log.segments[2].l_ss == 0);
  CHECK(log.segments[2].per_source.at(1).length == 3);
  CHECK(log.final_state.at(1) == 3);
  CHECK(log.final_state.at(2) == 2);
  CHECK(log.final_state.at(3) == 1);
  check_replay(net, log);
}

TEST_CASE("segmented runs demand a rest-based stop rule") {
  Network net = fig2_network();
  SimConfig cfg = base_cfg();
  cfg.stop = StopRule::max_steps;
  cfg.max_steps = 3;
  Modification drop;
  drop.kind = ModKind::remove_arcs;
  drop.arcs = {Arc{2, 3, 0, 0}};
  cfg.scenario = {drop};
  CHECK_THROWS_AS(run_dynamic(net, cfg), InputError);
}

TEST_CASE("stochastic runs are reproducible bit for bit") {
  Network net = fig2_network();
  SimConfig cfg = base_cfg();
  cfg.choice.mode = ChoiceMode::stochastic;
  cfg.choice.seed = 42;
  cfg.post_rest = 5;
  const MetricsLog a = run(net, cfg);
  const MetricsLog b = run(net, cfg);
  CHECK(a.steps.size() == b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    CHECK(a.steps[i].v == b.steps[i].v);
    CHECK(a.steps[i].source == b.steps[i].source);
    CHECK(a.steps[i].stopped_at == b.steps[i].stopped_at);
  }
  CHECK(a.final_state == b.final_state);
}

TEST_CASE("summaries flatten single-source segments to scalar stats") {
  Network net = fig2_network();
  SimConfig cfg = base_cfg();
  const MetricsLog log = run(net, cfg);
  const auto rows = summarize(log);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].L_ss == 3);
  CHECK(rows[0].C_ss == 3);
  CHECK(rows[0].E_ss == 4);
  CHECK(rows[0].t_ss == 6);
  CHECK(rows[0].rest_reached);
}
