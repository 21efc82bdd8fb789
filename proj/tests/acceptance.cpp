// Acceptance checks: one line per criterion, exit code = number of failures.
// Each criterion carries a wall-clock budget; blowing the budget fails it
// even when every assertion holds.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "support/brute_force.hpp"
#include "threshpath/threshpath.hpp"

using namespace threshpath;

namespace {

struct Checker {
  std::vector<std::string> problems;
  std::vector<std::string> notes;  // printed after the verdict line

  void expect(bool ok, const std::string& msg) {
    if (!ok && problems.size() < 64) problems.push_back(msg);
  }
};

std::string fmt_walk(const std::vector<NodeId>& nodes) {
  std::ostringstream out;
  out << "{";
  for (std::size_t i = 0; i < nodes.size(); ++i) out << (i ? "," : "") << nodes[i];
  out << "}";
  return out.str();
}

Network validated_small_world(SmallWorldParams p, Checker& ck, int max_tries = 20) {
  for (int t = 0; t < max_tries; ++t) {
    Network net = small_world(p);
    if (validate_assumptions(net).passed()) return net;
    p.seed += 1000;
  }
  ck.expect(false, "no validated small-world instance near seed " + std::to_string(p.seed));
  return fig2_network();
}

Network random_net(SplitMix64& rng, std::int64_t n) {
  std::vector<NodeId> nodes;
  for (NodeId i = 1; i <= n; ++i) nodes.push_back(i);
  std::vector<Arc> arcs;
  for (NodeId t = 1; t <= n; ++t) {
    for (NodeId h = 1; h <= n; ++h) {
      if (t == h || rng.next_below(100) >= 45) continue;
      arcs.push_back(Arc{t, h, 1 + static_cast<Cost>(rng.next_below(5)),
                         static_cast<Cost>(rng.next_below(3))});
    }
  }
  return Network(std::move(nodes), std::move(arcs), {1}, {n});
}

// ---------------------------------------------------------------------------
// 1. Reference network, unconstrained: rest [3,2,1,0,0] after 6 lost
//    injections, the 7th token exits via 1-2-3-4-5 with L=3, C=3, E=4.
void criterion_1(Checker& ck) {
  const Network net = fig2_network();
  const MetricsLog log = run(net, SimConfig{});
  ck.expect(log.rest_reached, "run did not certify rest");
  if (log.segments.empty()) return;
  const SegmentMetrics& seg = log.segments.back();
  ck.expect(seg.t_ss == 6, "t_ss = " + std::to_string(seg.t_ss) + ", want 6");
  ck.expect(seg.l_ss == 6, "l_ss = " + std::to_string(seg.l_ss) + ", want 6");
  ck.expect(seg.v_ss == 6, "v_ss = " + std::to_string(seg.v_ss) + ", want 6");
  const std::map<NodeId, std::int64_t> want{{1, 3}, {2, 2}, {3, 1}, {4, 0}, {5, 0}};
  ck.expect(log.final_state == want, "rest state is not [3,2,1,0,0]");
  for (int k = 0; k < 6 && k < static_cast<int>(log.steps.size()); ++k)
    ck.expect(log.steps[static_cast<std::size_t>(k)].stopped_at.has_value(),
              "injection " + std::to_string(k + 1) + " was not lost");
  ck.expect(log.steps.size() >= 7 && log.steps[6].exited, "7th token did not exit");
  const SourceStats& st = seg.per_source.at(1);
  ck.expect(st.walk == std::vector<NodeId>{1, 2, 3, 4, 5},
            "post-rest walk " + fmt_walk(st.walk) + ", want {1,2,3,4,5}");
  ck.expect(st.length == 3 && st.secondary == 3 && st.arcs == 4,
            "post-rest walk not (L=3, C=3, E=4)");
}

// ---------------------------------------------------------------------------
// 2. Reference network, budget 2: rest buckets x_1^0=4, x_2^1=3, x_3^2=3
//    after 10 lost injections; the next token exits via 1-2-4-5, L=4, C=2.
void criterion_2(Checker& ck) {
  const Network net = fig2_network();
  SimConfig cfg;
  cfg.c_max = 2;
  const MetricsLog log = run(net, cfg);
  ck.expect(log.rest_reached, "run did not certify rest");
  if (log.segments.empty()) return;
  const SegmentMetrics& seg = log.segments.back();
  ck.expect(seg.t_ss == 10, "t_ss = " + std::to_string(seg.t_ss) + ", want 10");
  ck.expect(seg.l_ss == 10, "l_ss = " + std::to_string(seg.l_ss) + ", want 10");
  ck.expect(seg.v_ss == 10, "v_ss = " + std::to_string(seg.v_ss) + ", want 10");
  const std::map<NodeId, std::vector<std::int64_t>> want{
      {1, {4, 0, 0}}, {2, {0, 3, 0}}, {3, {0, 0, 3}}, {4, {0, 0, 0}}, {5, {0, 0, 0}}};
  ck.expect(log.final_buckets == want, "rest buckets are not {x_1^0=4, x_2^1=3, x_3^2=3}");
  ck.expect(log.steps.size() >= 11 && log.steps[10].exited, "11th token did not exit");
  const SourceStats& st = seg.per_source.at(1);
  ck.expect(st.walk == std::vector<NodeId>{1, 2, 4, 5},
            "post-rest walk " + fmt_walk(st.walk) + ", want {1,2,4,5}");
  ck.expect(st.length == 4 && st.secondary == 2, "post-rest walk not (L=4, C=2)");
}

// ---------------------------------------------------------------------------
// 3. Over 100 validated small-world instances: post-rest walk lengths and
//    the source state both equal the oracle distance, unconstrained and
//    with a per-instance budget.
void criterion_3(Checker& ck) {
  int checked = 0;
  for (int i = 0; checked < 100 && i < 400; ++i) {
    SmallWorldParams p;
    p.n = 10 + 10 * (checked % 10);
    p.seed = 1000 + static_cast<std::uint64_t>(i);
    const Network net = small_world(p);
    if (!validate_assumptions(net).passed()) continue;
    ++checked;
    const std::string tag = "instance seed " + std::to_string(p.seed) + ": ";

    const DistanceMap dm = shortest_to_sinks(net);
    const MetricsLog log = run(net, SimConfig{});
    ck.expect(log.rest_reached, tag + "unconstrained run did not certify rest");
    if (!log.rest_reached) continue;
    const SegmentMetrics& seg = log.segments.back();
    Cost sigma_need = 0;  // budget that keeps every source feasible
    Cost along_opt = 0;   // sigma along the unconstrained optimum
    const DistanceMap sm = shortest_to_sinks(net, CostKind::secondary);
    for (const NodeId s : net.sources()) {
      const auto dist = dm.dist_of(s);
      ck.expect(dist.has_value(), tag + "oracle sees no sink from a source");
      if (!dist) return;
      const SourceStats& st = seg.per_source.at(s);
      ck.expect(st.length == *dist && st.length_min == *dist && st.length_max == *dist,
                tag + "post-rest walk length " + std::to_string(st.length) + " != oracle " +
                    std::to_string(*dist));
      ck.expect(log.final_state.at(s) == *dist,
                tag + "x_source = " + std::to_string(log.final_state.at(s)) +
                    " != oracle " + std::to_string(*dist));
      sigma_need = std::max(sigma_need, *sm.dist_of(s));
      const auto opt = canonical_path(net, dm, s);
      if (opt) along_opt = std::max(along_opt, opt->secondary);
    }

    // Budget between the cheapest feasible and 80% of the optimum's spend,
    // so the constraint usually bites without starving any source.
    const Cost c_max = std::max(sigma_need, (8 * along_opt + 9) / 10);
    SimConfig ccfg;
    ccfg.c_max = c_max;
    const MetricsLog clog = run(net, ccfg);
    ck.expect(clog.rest_reached, tag + "constrained run did not certify rest");
    if (!clog.rest_reached) continue;
    const SegmentMetrics& cseg = clog.segments.back();
    for (const NodeId s : net.sources()) {
      const ConstrainedAnswer ans = constrained_shortest(net, s, c_max);
      ck.expect(ans.feasible, tag + "constrained oracle says infeasible");
      if (!ans.feasible) continue;
      const SourceStats& st = cseg.per_source.at(s);
      ck.expect(st.length == ans.length && st.length_min == ans.length &&
                    st.length_max == ans.length,
                tag + "constrained walk length " + std::to_string(st.length) +
                    " != oracle " + std::to_string(ans.length));
      ck.expect(st.secondary <= c_max, tag + "post-rest walk overspent the budget");
      ck.expect(clog.final_buckets.at(s).at(0) == ans.length,
                tag + "x_source^0 != constrained oracle length");
    }
  }
  ck.expect(checked == 100, "only " + std::to_string(checked) + " validated instances");
}

// ---------------------------------------------------------------------------
// 4. Single-source instances: injections to rest never exceed
//    gamma_max * n(n-1)/2 - V(x(0)).
void criterion_4(Checker& ck) {
  int checked = 0;
  for (int i = 0; checked < 100 && i < 400; ++i) {
    SmallWorldParams p;
    p.n = 10 + 5 * (checked % 8);
    p.seed = 2000 + static_cast<std::uint64_t>(i);
    const Network net = small_world(p);
    if (!validate_assumptions(net).passed()) continue;
    ++checked;
    const std::string tag = "instance seed " + std::to_string(p.seed) + ": ";

    const std::int64_t n = static_cast<std::int64_t>(net.node_count());
    const std::int64_t cap = net.max_gamma() * n * (n - 1) / 2;

    std::optional<NetworkState> start;
    std::int64_t v0 = 0;
    if (checked % 3 == 0) {
      // admissible non-zero start: perturb, then settle
      NetworkState st(net);
      SplitMix64 r(7000 + static_cast<std::uint64_t>(i));
      for (int t = 0; t < 5; ++t) {
        const NodeId v = net.id_at(static_cast<std::size_t>(r.next_below(net.node_count())));
        if (net.is_sink(v)) continue;
        st.set(v, st.get(v) + 1 + static_cast<std::int64_t>(r.next_below(
                                      static_cast<std::uint64_t>(net.max_gamma()))));
      }
      ChoicePicker picker{ChoiceModel{}};
      settle(net, st, picker);
      v0 = st.total();
      start = std::move(st);
    }

    const MetricsLog log = run(net, SimConfig{}, std::move(start));
    ck.expect(log.rest_reached, tag + "run did not certify rest");
    ck.expect(log.initial_v == v0, tag + "initial V mismatch");
    if (log.segments.empty()) continue;
    const std::int64_t t_ss = log.segments.back().t_ss;
    ck.expect(t_ss <= cap - v0, tag + "t_ss = " + std::to_string(t_ss) +
                                    " exceeds bound " + std::to_string(cap - v0));
  }
  ck.expect(checked == 100, "only " + std::to_string(checked) + " validated instances");
}

// ---------------------------------------------------------------------------
// 5. The bucketed engine and the plain engine on the pruned expansion march
//    in lockstep under matched choice streams, projected step for step.
void criterion_5(Checker& ck) {
  SplitMix64 gen(99);
  for (int inst = 0; inst < 50; ++inst) {
    const std::int64_t n = 4 + inst % 5;
    const Network net = random_net(gen, n);
    const Cost c_max = 1 + inst % 4;
    const ExpandedNetwork exp = expand(net, c_max);
    const NodeId s = net.sources().front();
    const NodeId es = exp.encode(s, 0);
    const std::string tag = "instance " + std::to_string(inst) + ": ";

    BucketedState buckets(net, c_max);
    NetworkState plain(exp.net);
    ChoicePicker pa{ChoiceModel{ChoiceMode::stochastic, 4242 + static_cast<std::uint64_t>(inst)}};
    ChoicePicker pb{ChoiceModel{ChoiceMode::stochastic, 4242 + static_cast<std::uint64_t>(inst)}};
    for (int k = 0; k < 30; ++k) {
      const StepResult a = constrained_inject(net, buckets, s, pa);
      const StepResult b = inject(exp.net, plain, es, pb);
      ck.expect(a.outcome.exited == b.outcome.exited &&
                    a.outcome.walk == exp.project_walk(b.outcome.walk),
                tag + "walk diverged at injection " + std::to_string(k + 1));
      ck.expect(project_state(exp, plain) == buckets,
                tag + "states diverged after injection " + std::to_string(k + 1));
      if (!ck.problems.empty()) return;
    }
  }
}

// ---------------------------------------------------------------------------
// 6. Dumping up to 3*gamma_max extra tokens on random nodes of a rest state:
//    settling alone restores admissibility and never raises V.
void criterion_6(Checker& ck) {
  int checked = 0;
  for (int i = 0; checked < 40 && i < 160; ++i) {
    SmallWorldParams p;
    p.n = 10 + 5 * (checked % 6);
    p.seed = 3000 + static_cast<std::uint64_t>(i);
    const Network net = small_world(p);
    if (!validate_assumptions(net).passed()) continue;
    ++checked;
    const std::string tag = "instance seed " + std::to_string(p.seed) + ": ";

    const MetricsLog log = run(net, SimConfig{});
    ck.expect(log.rest_reached, tag + "run did not certify rest");
    NetworkState st(net);
    for (const auto& [id, v] : log.final_state)
      if (!net.is_sink(id)) st.set(id, v);

    SplitMix64 r(7100 + static_cast<std::uint64_t>(i));
    const std::uint64_t lid = 3 * static_cast<std::uint64_t>(net.max_gamma());
    for (int t = 0; t < 6; ++t) {
      const NodeId v = net.id_at(static_cast<std::size_t>(r.next_below(net.node_count())));
      if (net.is_sink(v)) continue;
      st.set(v, st.get(v) + 1 + static_cast<std::int64_t>(r.next_below(lid)));
    }

    const std::int64_t v_before = st.total();
    ChoicePicker picker{ChoiceModel{}};
    const SettleLog sl = settle(net, st, picker);
    ck.expect(is_admissible(net, st).admissible, tag + "settled state inadmissible");
    ck.expect(st.total() == v_before - sl.tokens_exited,
              tag + "V changed by something other than exits");
    ck.expect(st.total() <= v_before, tag + "V increased during settling");
  }
  ck.expect(checked == 40, "only " + std::to_string(checked) + " validated instances");
}

// ---------------------------------------------------------------------------
// 7. The budget expansion is acyclic exactly when the base has no circuit of
//    zero total sigma. Exhaustive over 3-node graphs, sampled at 4-5 nodes,
//    plus hand-built witnesses on both sides.
void criterion_7(Checker& ck) {
  auto check_net = [&ck](const Network& net, const std::string& tag) {
    const bool zero_circuit =
        detect_nonpositive_circuit(net, CostKind::secondary, /*include_zero=*/true)
            .has_value();
    const ExpandedNetwork exp = expand(net, 2, /*prune=*/false);
    ck.expect(brute::is_acyclic(exp.net) == !zero_circuit,
              tag + ": expansion acyclicity disagrees with the zero-sigma detector");
  };

  // every 3-node digraph, each possible arc absent or carrying sigma 0/1/2
  const std::pair<NodeId, NodeId> slots[6] = {{1, 2}, {1, 3}, {2, 1},
                                              {2, 3}, {3, 1}, {3, 2}};
  for (std::uint64_t code = 0; code < 4096; ++code) {
    std::vector<Arc> arcs;
    std::uint64_t rest = code;
    for (int p = 0; p < 6; ++p, rest /= 4) {
      const int opt = static_cast<int>(rest % 4);
      if (opt == 0) continue;
      arcs.push_back(Arc{slots[p].first, slots[p].second, 1, static_cast<Cost>(opt - 1)});
    }
    check_net(Network({1, 2, 3}, arcs, {1}, {3}), "code " + std::to_string(code));
    if (!ck.problems.empty()) return;
  }

  // sampled 4- and 5-node graphs
  SplitMix64 r(1234);
  for (int i = 0; i < 400; ++i) {
    const std::int64_t n = 4 + i % 2;
    std::vector<NodeId> nodes;
    for (NodeId v = 1; v <= n; ++v) nodes.push_back(v);
    std::vector<Arc> arcs;
    for (NodeId t = 1; t <= n; ++t)
      for (NodeId h = 1; h <= n; ++h)
        if (t != h && r.next_below(100) < 50)
          arcs.push_back(Arc{t, h, 1, static_cast<Cost>(r.next_below(3))});
    check_net(Network(nodes, arcs, {1}, {n}), "sample " + std::to_string(i));
    if (!ck.problems.empty()) return;
  }

  // hand-built witnesses
  check_net(Network({1, 2, 3},
                    {Arc{1, 2, 1, 0}, Arc{2, 1, 1, 0}, Arc{2, 3, 1, 1}}, {1}, {3}),
            "free two-cycle");
  check_net(Network({1, 2, 3},
                    {Arc{1, 2, 1, 1}, Arc{2, 1, 1, 0}, Arc{2, 3, 1, 1}}, {1}, {3}),
            "paid two-cycle");
  check_net(fig2_network(), "reference network");
}

// ---------------------------------------------------------------------------
// 8. Structural changes mid-run: after each scenario segment converges, the
//    post-rest walks match the oracle on the network as modified so far.
void criterion_8(Checker& ck) {
  auto first_valid = [](const Network& net, const Modification& probe)
      -> std::optional<Network> {
    try {
      const auto m = apply_modification(net, NetworkState(net), probe);
      if (validate_assumptions(m.net).passed()) return m.net;
    } catch (const InputError&) {
    }
    return std::nullopt;
  };

  auto removable_node = [&](const Network& net) -> std::optional<NodeId> {
    const DistanceMap dm = shortest_to_sinks(net);
    std::vector<NodeId> candidates;
    for (const NodeId s : net.sources()) {
      const auto p = canonical_path(net, dm, s);
      if (!p) continue;
      for (std::size_t i = 1; i + 1 < p->nodes.size(); ++i) candidates.push_back(p->nodes[i]);
    }
    for (const NodeId v : net.nodes()) candidates.push_back(v);
    for (const NodeId v : candidates) {
      if (net.is_source(v) || net.is_sink(v)) continue;
      if (first_valid(net, Modification{ModKind::remove_nodes, {v}, {}, 0})) return v;
    }
    return std::nullopt;
  };

  auto new_sink = [&](const Network& net) -> std::optional<NodeId> {
    for (const NodeId t : net.nodes()) {
      if (net.is_source(t) || net.is_sink(t)) continue;
      if (first_valid(net, Modification{ModKind::set_sinks, {t}, {}, 0})) return t;
    }
    return std::nullopt;
  };

  std::vector<std::pair<std::string, Network>> pool;
  pool.emplace_back("fig2", fig2_network());
  for (int i = 0; i < 6; ++i) {
    SmallWorldParams p;
    p.n = i % 2 == 0 ? 20 : 30;
    p.seed = 4000 + static_cast<std::uint64_t>(i);
    pool.emplace_back("small-world " + std::to_string(p.seed), validated_small_world(p, ck));
  }
  SplitMix64 terrain(555);
  for (int i = 0; i < 4; ++i) {
    AltitudeMap map;
    map.width = map.height = 6;
    for (std::int64_t px = 0; px < map.pixels(); ++px)
      map.h.push_back(static_cast<std::int64_t>(terrain.next_below(41)));
    map.sources = {0};
    map.sinks = {35};
    pool.emplace_back("grid " + std::to_string(i),
                      grid_from_altitude(map, -30, Rational(2, 5), Rational(9, 10)));
  }

  for (const auto& [name, net] : pool) {
    const std::string tag = name + ": ";
    if (!validate_assumptions(net).passed()) {
      ck.expect(false, tag + "instance failed validation");
      continue;
    }

    std::vector<Modification> scenario;
    std::vector<Network> per_segment{net};
    Network cur = net;

    if (const auto v = removable_node(cur)) {
      std::vector<Arc> incident;
      for (const Arc& a : cur.arcs())
        if (a.tail == *v || a.head == *v) incident.push_back(a);
      const Modification rm{ModKind::remove_nodes, {*v}, {}, 1};
      scenario.push_back(rm);
      cur = apply_modification(cur, NetworkState(cur), rm).net;
      per_segment.push_back(cur);

      const Modification addn{ModKind::add_nodes, {*v}, {}, 2};
      const Modification adda{ModKind::add_arcs, {}, incident, 2};
      scenario.push_back(addn);
      scenario.push_back(adda);
      cur = apply_modification(cur, NetworkState(cur), addn).net;
      cur = apply_modification(cur, NetworkState(cur), adda).net;
      per_segment.push_back(cur);
    }
    if (const auto t = new_sink(cur)) {
      const Modification sink{ModKind::set_sinks, {*t}, {}, 3};
      scenario.push_back(sink);
      cur = apply_modification(cur, NetworkState(cur), sink).net;
      per_segment.push_back(cur);
    }
    ck.expect(scenario.size() >= 2, tag + "no applicable structural changes");
    if (scenario.empty()) continue;

    SimConfig cfg;
    cfg.scenario = scenario;
    const MetricsLog log = run_dynamic(net, cfg);
    ck.expect(log.segments.size() == per_segment.size(),
              tag + "segment count " + std::to_string(log.segments.size()) + ", want " +
                  std::to_string(per_segment.size()));
    for (std::size_t g = 0; g < log.segments.size() && g < per_segment.size(); ++g) {
      const SegmentMetrics& seg = log.segments[g];
      const Network& snet = per_segment[g];
      const std::string stag = tag + "segment " + std::to_string(g) + ": ";
      ck.expect(seg.rest_reached, stag + "did not certify rest");
      const DistanceMap dm = shortest_to_sinks(snet);
      for (const NodeId s : snet.sources()) {
        const auto it = seg.per_source.find(s);
        ck.expect(it != seg.per_source.end(), stag + "no post-rest measurement");
        if (it == seg.per_source.end()) continue;
        const auto dist = dm.dist_of(s);
        ck.expect(dist && it->second.length == *dist,
                  stag + "walk length " + std::to_string(it->second.length) +
                      " != oracle " + std::to_string(dist ? *dist : -1));
      }
    }
  }
}

// ---------------------------------------------------------------------------
// 9. On ring-lattice rewired instances the enhanced rule converges in no more
//    injections, finds the same optimum, and (arcs everywhere, so no token
//    ever stops) loses nothing.
void criterion_9(Checker& ck) {
  const std::pair<std::int64_t, std::uint64_t> specs[] = {
      {100, 21}, {100, 22}, {100, 23}, {100, 24}, {1000, 25}, {1000, 26}};
  for (const auto& [n, seed] : specs) {
    SmallWorldParams p;
    p.n = n;
    p.seed = seed;
    const Network net = validated_small_world(p, ck);
    const std::string tag = "n=" + std::to_string(n) + " seed " + std::to_string(seed) + ": ";

    const MetricsLog base = run(net, SimConfig{});
    SimConfig enh;
    enh.policy = PolicyKind::enhanced;
    const MetricsLog plus = run(net, enh);
    ck.expect(base.rest_reached && plus.rest_reached, tag + "a run did not certify rest");
    if (base.segments.empty() || plus.segments.empty()) continue;

    const std::int64_t t_base = base.segments.back().t_ss;
    const std::int64_t t_plus = plus.segments.back().t_ss;
    ck.expect(t_plus <= t_base, tag + "enhanced needed " + std::to_string(t_plus) +
                                    " > original " + std::to_string(t_base));
    const SegmentSummary so = summarize(base).back();
    const SegmentSummary se = summarize(plus).back();
    ck.expect(so.L_ss == se.L_ss && so.C_ss == se.C_ss && so.E_ss == se.E_ss,
              tag + "post-rest walk stats differ between policies");
    ck.expect(plus.segments.back().l_ss == 0,
              tag + "enhanced lost " + std::to_string(plus.segments.back().l_ss) + " tokens");
  }
}

// ---------------------------------------------------------------------------
// 10. A 20x20 altitude bowl with the reference cost rule converges to oracle
//     distances from all four corners, unconstrained and with budget 10.
//     The full-size 50x50 reproduction only runs when its raster is present.
void criterion_10(Checker& ck) {
  AltitudeMap map;
  map.width = map.height = 20;
  for (std::int64_t r = 0; r < 20; ++r)
    for (std::int64_t c = 0; c < 20; ++c)
      map.h.push_back(std::llround(
          40.0 * (1.0 - std::sin(std::numbers::pi * static_cast<double>(r) / 19.0) *
                            std::sin(std::numbers::pi * static_cast<double>(c) / 19.0))));
  map.sources = {0, 19, 380, 399};
  map.sinks = {210};
  const Network net = grid_from_altitude(map, -30, Rational(2, 5), Rational(9, 10));
  ck.expect(validate_assumptions(net).passed(), "bowl grid failed validation");

  const DistanceMap dm = shortest_to_sinks(net);
  const MetricsLog log = run(net, SimConfig{});
  ck.expect(log.rest_reached, "unconstrained run did not certify rest");
  if (!log.segments.empty()) {
    const SegmentMetrics& seg = log.segments.back();
    for (const NodeId s : net.sources()) {
      const auto dist = dm.dist_of(s);
      ck.expect(dist && seg.per_source.at(s).length == *dist,
                "source " + std::to_string(s) + ": walk length != oracle distance");
      ck.expect(dist && log.final_state.at(s) == *dist,
                "source " + std::to_string(s) + ": x_source != oracle distance");
    }
  }

  const Cost c_max = 10;  // budget 25 on the 50-wide original, scaled by 20/50
  const DistanceMap sm = shortest_to_sinks(net, CostKind::secondary);
  for (const NodeId s : net.sources())
    ck.expect(*sm.dist_of(s) <= c_max, "corner cannot reach the sink inside the budget");
  SimConfig cc;
  cc.c_max = c_max;
  const MetricsLog clog = run(net, cc);
  ck.expect(clog.rest_reached, "constrained run did not certify rest");
  if (!clog.segments.empty()) {
    const SegmentMetrics& seg = clog.segments.back();
    for (const NodeId s : net.sources()) {
      const ConstrainedAnswer ans = constrained_shortest(net, s, c_max);
      ck.expect(ans.feasible && seg.per_source.at(s).length == ans.length,
                "source " + std::to_string(s) + ": constrained walk != oracle");
      ck.expect(ans.feasible && clog.final_buckets.at(s).at(0) == ans.length,
                "source " + std::to_string(s) + ": x_source^0 != constrained oracle");
    }
  }

  // full-size reproduction, only with the raster and its endpoints on disk
  const std::filesystem::path raster =
      std::filesystem::path(ACCEPTANCE_DATA_DIR) / "altitude_50x50.pgm";
  const std::filesystem::path endpoints =
      std::filesystem::path(ACCEPTANCE_DATA_DIR) / "altitude_50x50.endpoints.json";
  if (!std::filesystem::exists(raster) || !std::filesystem::exists(endpoints)) {
    ck.notes.push_back("full 50x50 reproduction skipped, raster not present");
    return;
  }
  std::ifstream rin(raster);
  AltitudeMap big = read_pgm(rin);
  std::ifstream ein(endpoints);
  const nlohmann::json ends = nlohmann::json::parse(ein);
  for (const auto& v : ends.at("sources")) big.sources.push_back(v.get<NodeId>());
  for (const auto& v : ends.at("sinks")) big.sinks.push_back(v.get<NodeId>());
  const Network bignet = grid_from_altitude(big, -30, Rational(2, 5), Rational(9, 10));
  const MetricsLog biglog = run(bignet, SimConfig{});
  ck.expect(biglog.rest_reached, "50x50 run did not certify rest");
  std::vector<std::int64_t> got;
  for (const NodeId s : bignet.sources()) got.push_back(biglog.final_state.at(s));
  std::sort(got.begin(), got.end());
  const std::vector<std::int64_t> want{383, 529, 597, 608, 635, 1058};
  ck.expect(got == want, "50x50 rest values at sources do not match the published set");
}

// ---------------------------------------------------------------------------
// 11. A lone hill on a flat grid yields negative thresholds downhill;
//     settling the zero state drives the hilltop negative while restoring
//     admissibility, and the full run still lands on oracle distances.
void criterion_11(Checker& ck) {
  AltitudeMap map;
  map.width = map.height = 12;
  map.h.assign(static_cast<std::size_t>(map.pixels()), 0);
  const NodeId hill = 5 * 12 + 5;
  map.h[static_cast<std::size_t>(hill)] = 50;
  map.sources = {0};
  map.sinks = {143};
  const Network net = grid_from_altitude(map, -30, Rational(2, 5), Rational(9, 10));

  bool has_negative = false;
  for (const Arc& a : net.arcs()) has_negative = has_negative || a.gamma < 0;
  ck.expect(has_negative, "no negative thresholds in the hill grid");
  ck.expect(validate_assumptions(net).passed(), "hill grid failed validation");

  NetworkState st(net);
  ChoicePicker picker{ChoiceModel{}};
  settle(net, st, picker);
  ck.expect(is_admissible(net, st).admissible, "settled state inadmissible");
  ck.expect(st.get(hill) < 0, "hilltop state " + std::to_string(st.get(hill)) +
                                  " did not go negative");

  const DistanceMap dm = shortest_to_sinks(net);
  const MetricsLog log = run(net, SimConfig{});
  ck.expect(log.rest_reached, "run did not certify rest");
  if (!log.segments.empty()) {
    const auto dist = dm.dist_of(0);
    ck.expect(dist && log.segments.back().per_source.at(0).length == *dist,
              "post-rest walk length != oracle distance");
    ck.expect(dist && log.final_state.at(0) == *dist, "x_source != oracle distance");
  }
}

struct Criterion {
  int id;
  const char* label;
  double budget_s;  // 0: no wall-clock budget
  std::function<void(Checker&)> fn;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "reference network, unconstrained exact run", 1, criterion_1},
      {2, "reference network, budget-2 exact run", 1, criterion_2},
      {3, "post-rest walks equal oracle distances", 60, criterion_3},
      {4, "injections to rest respect the volume bound", 60, criterion_4},
      {5, "bucketed engine tracks the expanded network", 60, criterion_5},
      {6, "settling restores admissibility, V non-increasing", 30, criterion_6},
      {7, "expansion acyclic iff no zero-sigma circuit", 0, criterion_7},
      {8, "re-convergence after structural changes", 60, criterion_8},
      {9, "enhanced policy: same optimum, no losses, no slower", 300, criterion_9},
      {10, "altitude grid matches the oracle, budget 10", 120, criterion_10},
      {11, "negative thresholds hollow out the hilltop", 120, criterion_11},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    Checker ck;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.fn(ck);
    } catch (const std::exception& e) {
      ck.expect(false, std::string("exception: ") + e.what());
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0 && elapsed > c.budget_s)
      ck.problems.push_back("over budget: " + std::to_string(elapsed) + "s > " +
                            std::to_string(c.budget_s) + "s");

    const bool pass = ck.problems.empty();
    failures += pass ? 0 : 1;
    char line[256];
    std::snprintf(line, sizeof line, "criterion %02d %s %7.2fs  %s", c.id,
                  pass ? "PASS" : "FAIL", elapsed, c.label);
    std::cout << line << "\n";
    for (const std::string& note : ck.notes) std::cout << "    note: " << note << "\n";
    for (std::size_t i = 0; i < ck.problems.size() && i < 6; ++i)
      std::cout << "    - " << ck.problems[i] << "\n";
    if (ck.problems.size() > 6)
      std::cout << "    - (" << ck.problems.size() - 6 << " more)\n";
  }

  std::cout << (11 - failures) << " of 11 criteria passed\n";
  return failures;
}
