#pragma once

#include <cstdint>
#include <istream>
#include <set>
#include <string>
#include <vector>

#include "errors.hpp"
#include "graph.hpp"
#include "rational.hpp"
#include "rng.hpp"

namespace threshpath {

// The five-node reference network: one source (1), one sink (5), a short
// expensive detour competing with a long cheap chain. Unconstrained shortest
// path is 1-2-3-4-5 (length 3, budget 3); with budget 2 the best feasible
// path is 1-2-4-5 (length 4, budget 2).
inline Network fig2_network() {
  return Network({1, 2, 3, 4, 5},
                 {
                     Arc{1, 2, 1, 1},
                     Arc{2, 3, 1, 1},
                     Arc{2, 4, 3, 1},
                     Arc{3, 4, 1, 1},
                     Arc{4, 5, 0, 0},
                 },
                 {1}, {5});
}

// Integer altitude raster. Pixel (row, col) becomes node id row*width+col
// unless marked as an obstacle. Sources and sinks are pixel node ids.
struct AltitudeMap {
  std::int64_t width = 0;
  std::int64_t height = 0;
  std::vector<std::int64_t> h;      // row-major altitudes
  std::vector<char> obstacle;       // same layout; empty means none
  std::vector<NodeId> sources;
  std::vector<NodeId> sinks;

  std::int64_t pixels() const { return width * height; }
  bool blocked(std::int64_t p) const {
    return !obstacle.empty() && obstacle[static_cast<std::size_t>(p)] != 0;
  }
};

// Altitude-differential cost rule. For an arc with altitude gain
// dh = h_head - h_tail the primary cost is
//   ceil(m_minus * (dh - h0))  when dh <= h0   (steep descent, cheap or negative)
//   ceil(m_plus  * (dh - h0))  otherwise       (flat or climbing, expensive)
// with h0 < 0 and 0 < m_minus < m_plus; the asymmetry keeps every circuit at
// positive total cost. Ceilings are exact rational arithmetic. Every arc
// carries secondary cost 1, so budgets count traversed arcs.
inline Network grid_from_altitude(const AltitudeMap& map, std::int64_t h0,
                                  const Rational& m_minus, const Rational& m_plus) {
  if (map.width <= 0 || map.height <= 0) throw InputError("empty altitude map");
  if (static_cast<std::int64_t>(map.h.size()) != map.pixels())
    throw InputError("altitude raster size does not match its dimensions");
  if (!map.obstacle.empty() &&
      static_cast<std::int64_t>(map.obstacle.size()) != map.pixels())
    throw InputError("obstacle mask size does not match the raster");
  if (h0 >= 0) throw InputError("h0 must be negative");
  const Rational zero(0, 1);
  if (!(zero < m_minus) || !(m_minus < m_plus))
    throw InputError("cost slopes must satisfy 0 < m_minus < m_plus");
  if (map.sources.empty() || map.sinks.empty())
    throw InputError("altitude map declares no sources or no sinks");

  std::vector<NodeId> nodes;
  for (std::int64_t p = 0; p < map.pixels(); ++p) {
    if (!map.blocked(p)) nodes.push_back(p);
  }
  for (const NodeId s : map.sources) {
    if (s < 0 || s >= map.pixels() || map.blocked(s))
      throw InputError("source pixel " + std::to_string(s) + " is missing or blocked");
  }
  for (const NodeId t : map.sinks) {
    if (t < 0 || t >= map.pixels() || map.blocked(t))
      throw InputError("sink pixel " + std::to_string(t) + " is missing or blocked");
  }

  std::vector<Arc> arcs;
  for (std::int64_t r = 0; r < map.height; ++r) {
    for (std::int64_t c = 0; c < map.width; ++c) {
      const std::int64_t p = r * map.width + c;
      if (map.blocked(p)) continue;
      for (std::int64_t dr = -1; dr <= 1; ++dr) {
        for (std::int64_t dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          const std::int64_t nr = r + dr;
          const std::int64_t nc = c + dc;
          if (nr < 0 || nr >= map.height || nc < 0 || nc >= map.width) continue;
          const std::int64_t q = nr * map.width + nc;
          if (map.blocked(q)) continue;
          const std::int64_t dh = map.h[static_cast<std::size_t>(q)] -
                                  map.h[static_cast<std::size_t>(p)];
          const Rational& slope = dh <= h0 ? m_minus : m_plus;
          arcs.push_back(Arc{p, q, ceil_scaled(slope, dh - h0), 1});
        }
      }
    }
  }
  return Network(std::move(nodes), std::move(arcs), map.sources, map.sinks);
}

// Plain-text "P2" grayscale raster: width, height, maxval, then
// width*height sample values; '#' starts a comment. Returned as altitudes.
inline AltitudeMap read_pgm(std::istream& in) {
  auto next_token = [&in]() -> std::string {
    std::string tok;
    while (in >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      return tok;
    }
    throw InputError("truncated PGM raster");
  };
  auto next_int = [&](const char* what) -> std::int64_t {
    const std::string tok = next_token();
    try {
      std::size_t used = 0;
      const std::int64_t v = std::stoll(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      throw InputError(std::string("bad PGM ") + what + ": " + tok);
    }
  };

  const std::string magic = next_token();
  if (magic != "P2") throw InputError("only plain (P2) PGM rasters are supported");
  AltitudeMap map;
  map.width = next_int("width");
  map.height = next_int("height");
  if (map.width <= 0 || map.height <= 0) throw InputError("PGM with empty dimensions");
  const std::int64_t maxval = next_int("maxval");
  if (maxval <= 0) throw InputError("PGM maxval must be positive");
  map.h.reserve(static_cast<std::size_t>(map.pixels()));
  for (std::int64_t i = 0; i < map.pixels(); ++i) {
    const std::int64_t v = next_int("sample");
    if (v < 0 || v > maxval) throw InputError("PGM sample out of range");
    map.h.push_back(v);
  }
  return map;
}

struct SmallWorldParams {
  std::int64_t n = 0;            // nodes, ids 0..n-1
  std::int64_t delta = 4;        // even ring degree; delta/2 forward neighbours
  double beta = 0.15;            // rewiring probability
  Cost gamma_max = 50;           // gamma drawn uniformly from 1..gamma_max
  Cost sigma_max = 10;           // sigma drawn uniformly from 1..sigma_max
  std::uint64_t seed = 1;
};

// Watts-Strogatz style directed network. Stream order is pinned for
// reproducibility: source node, sink node, one rewiring decision per forward
// lattice arc (plus target draws), then costs over the final arc list in
// canonical order. Every arc gets a reverse companion, so the network is
// symmetric as a graph and weak connectivity implies strong connectivity;
// costs of the two directions are drawn independently.
inline Network small_world(const SmallWorldParams& p) {
  if (p.n < 2) throw InputError("small world needs at least two nodes");
  if (p.delta < 2 || p.delta % 2 != 0) throw InputError("delta must be even and >= 2");
  if (p.delta >= p.n) throw InputError("delta must be smaller than n");
  if (p.beta < 0.0 || p.beta > 1.0) throw InputError("beta must lie in [0, 1]");
  if (p.gamma_max < 1 || p.sigma_max < 1)
    throw InputError("cost ranges must allow at least the value 1");

  SplitMix64 rng(p.seed);
  const NodeId source = static_cast<NodeId>(rng.next_below(static_cast<std::uint64_t>(p.n)));
  NodeId sink = source;
  while (sink == source)
    sink = static_cast<NodeId>(rng.next_below(static_cast<std::uint64_t>(p.n)));

  std::set<std::pair<NodeId, NodeId>> forward;
  for (NodeId i = 0; i < p.n; ++i) {
    for (std::int64_t s = 1; s <= p.delta / 2; ++s) {
      NodeId head = (i + s) % p.n;
      if (rng.next_unit() < p.beta) {
        int attempts = 0;
        do {
          head = static_cast<NodeId>(rng.next_below(static_cast<std::uint64_t>(p.n)));
          if (++attempts > 1000)
            throw InternalError("rewiring could not find a free target");
        } while (head == i || forward.count({i, head}) != 0);
      } else if (forward.count({i, head}) != 0) {
        continue;  // an earlier rewire already claimed this slot
      }
      forward.insert({i, head});
    }
  }

  std::set<std::pair<NodeId, NodeId>> directed = forward;
  for (const auto& [t, h] : forward) directed.insert({h, t});

  std::vector<NodeId> nodes(static_cast<std::size_t>(p.n));
  for (NodeId i = 0; i < p.n; ++i) nodes[static_cast<std::size_t>(i)] = i;
  std::vector<Arc> arcs;
  arcs.reserve(directed.size());
  for (const auto& [t, h] : directed) {  // std::set iterates in canonical order
    Arc a;
    a.tail = t;
    a.head = h;
    a.gamma = 1 + static_cast<Cost>(rng.next_below(static_cast<std::uint64_t>(p.gamma_max)));
    a.sigma = 1 + static_cast<Cost>(rng.next_below(static_cast<std::uint64_t>(p.sigma_max)));
    arcs.push_back(a);
  }
  return Network(std::move(nodes), std::move(arcs), {source}, {sink});
}

}  // namespace threshpath
