#include "pcf/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "pcf/errors.hpp"
#include "pcf/rng.hpp"

namespace pcf {

ClockSet sample_clocks(const GraphTopology& g, double alpha, std::uint64_t seed,
                       std::uint64_t stream_id) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ValidationError("sample_clocks: alpha must be positive and finite");
  }
  ClockSet c;
  c.alpha = alpha;
  c.seed = seed;
  c.stream_id = stream_id;
  const std::uint32_t nv = g.vertex_count;
  const std::uint32_t ne = g.edge_count();
  CounterRng rng(seed, stream_id);
  c.vertex_clock.resize(nv);
  for (std::uint32_t v = 0; v < nv; ++v) c.vertex_clock[v] = rng.exponential(v, alpha);
  c.edge_clock.resize(ne);
  for (std::uint32_t e = 0; e < ne; ++e) c.edge_clock[e] = rng.exponential(nv + std::uint64_t(e), 1.0);
  return c;
}

EventSchedule make_event_schedule(const GraphTopology& g, const ClockSet& clocks) {
  const std::uint32_t nv = g.vertex_count;
  const std::uint32_t ne = g.edge_count();
  if (clocks.vertex_clock.size() != nv || clocks.edge_clock.size() != ne) {
    throw ContractError("make_event_schedule: clock set does not match topology");
  }
  EventSchedule s;
  s.edge_count = ne;
  s.order.resize(std::size_t(nv) + ne);
  for (std::size_t i = 0; i < s.order.size(); ++i) s.order[i] = std::uint32_t(i);
  const double* ec = clocks.edge_clock.data();
  const double* vc = clocks.vertex_clock.data();
  auto time_of = [ec, vc, ne](std::uint32_t id) {
    return id < ne ? ec[id] : vc[id - ne];
  };
  std::sort(s.order.begin(), s.order.end(), [&](std::uint32_t a, std::uint32_t b) {
    const double ta = time_of(a), tb = time_of(b);
    if (ta != tb) return ta < tb;
    return a < b;  // ties: edges (lower ids) before vertices, then by index
  });
  return s;
}

ClusterForest::ClusterForest(std::uint32_t n, const std::vector<std::uint32_t>& rank,
                             const std::vector<std::uint8_t>& boundary_flags)
    : parent_(n), size_(n, 1), min_rank_vertex_(n), frozen_(n, 0),
      touches_boundary_(boundary_flags), rank_(rank.data()) {
  if (rank.size() != n || boundary_flags.size() != n) {
    throw ContractError("ClusterForest: rank/boundary vectors must match vertex count");
  }
  for (std::uint32_t v = 0; v < n; ++v) {
    parent_[v] = v;
    min_rank_vertex_[v] = v;
  }
}

std::uint32_t ClusterForest::find(std::uint32_t v) {
  while (parent_[v] != v) {
    parent_[v] = parent_[parent_[v]];  // path halving
    v = parent_[v];
  }
  return v;
}

std::uint32_t ClusterForest::unite(std::uint32_t ra, std::uint32_t rb) {
  if (ra == rb) return ra;
  if (size_[ra] < size_[rb]) std::swap(ra, rb);
  parent_[rb] = ra;
  size_[ra] += size_[rb];
  if (rank_[min_rank_vertex_[rb]] < rank_[min_rank_vertex_[ra]]) {
    min_rank_vertex_[ra] = min_rank_vertex_[rb];
  }
  touches_boundary_[ra] |= touches_boundary_[rb];
  return ra;
}

namespace {

std::vector<std::uint8_t> effective_boundary(const GraphTopology& g, const Subgraph& sub,
                                             Variant variant) {
  // The flags feed two things: touched-boundary reporting (both variants) and
  // the freeze-suppression rule (warm only, checked at event time).
  std::vector<std::uint8_t> eff(g.vertex_count, 0);
  for (std::uint32_t v = 0; v < g.vertex_count; ++v) {
    eff[v] = sub.vertex_in[v] && g.is_boundary[v];
  }
  if (variant != Variant::warm) return eff;
  const std::uint32_t ne = g.edge_count();
  for (std::uint32_t e = 0; e < ne; ++e) {
    if (sub.edge_in[e]) continue;
    // A subgraph vertex next to a missing edge faces the rest of g there.
    for (std::uint32_t w : g.edges[e]) {
      if (sub.vertex_in[w]) eff[w] = 1;
    }
  }
  return eff;
}

}  // namespace

Subgraph full_subgraph(const GraphTopology& g) {
  Subgraph s;
  s.vertex_in.assign(g.vertex_count, 1);
  s.edge_in.assign(g.edge_count(), 1);
  return s;
}

Subgraph induced_subgraph(const GraphTopology& g, const std::vector<std::uint8_t>& vertex_mask) {
  if (vertex_mask.size() != g.vertex_count) {
    throw ValidationError("induced_subgraph: mask size does not match vertex count");
  }
  Subgraph s;
  s.vertex_in = vertex_mask;
  const std::uint32_t ne = g.edge_count();
  s.edge_in.resize(ne);
  for (std::uint32_t e = 0; e < ne; ++e) {
    s.edge_in[e] = vertex_mask[g.edges[e][0]] && vertex_mask[g.edges[e][1]];
  }
  return s;
}

PcfRunner::PcfRunner(const GraphTopology& g, const PriorityOrder& priorities,
                     const ClockSet& clocks, Variant variant)
    : PcfRunner(g, priorities, clocks, variant, full_subgraph(g)) {}

PcfRunner::PcfRunner(const GraphTopology& g, const PriorityOrder& priorities,
                     const ClockSet& clocks, Variant variant, Subgraph subgraph)
    : g_(g),
      clocks_(clocks),
      variant_(variant),
      sub_(std::move(subgraph)),
      effective_boundary_(effective_boundary(g, sub_, variant)),
      forest_(g.vertex_count, priorities.rank, effective_boundary_),
      edge_open_(g.edge_count(), 0) {
  if (sub_.vertex_in.size() != g.vertex_count || sub_.edge_in.size() != g.edge_count()) {
    throw ContractError("PcfRunner: subgraph masks do not match topology");
  }
  const std::uint32_t ne = g.edge_count();
  for (std::uint32_t e = 0; e < ne; ++e) {
    if (sub_.edge_in[e] && (!sub_.vertex_in[g.edges[e][0]] || !sub_.vertex_in[g.edges[e][1]])) {
      throw ValidationError("PcfRunner: subgraph contains an edge with a missing endpoint");
    }
  }
}

bool PcfRunner::apply(std::uint32_t event_id) {
  const std::uint32_t ne = g_.edge_count();
  if (event_id < ne) {
    const std::uint32_t e = event_id;
    if (!sub_.edge_in[e]) return false;
    const std::uint32_t ru = forest_.find(g_.edges[e][0]);
    const std::uint32_t rv = forest_.find(g_.edges[e][1]);
    if (forest_.frozen(ru) || forest_.frozen(rv)) return false;
    edge_open_[e] = 1;  // opens even inside a single cluster
    if (ru != rv) forest_.unite(ru, rv);
    ++event_count_;
    return true;
  }
  const std::uint32_t v = event_id - ne;
  if (v >= g_.vertex_count) throw ContractError("PcfRunner::apply: event id out of range");
  if (!sub_.vertex_in[v]) return false;
  const std::uint32_t r = forest_.find(v);
  if (forest_.frozen(r)) return false;
  if (forest_.min_rank_vertex(r) != v) return false;  // only the label's clock freezes
  if (variant_ == Variant::warm && forest_.touches_boundary(r)) return false;
  forest_.freeze(r);
  ++event_count_;
  return true;
}

bool PcfRunner::edge_open(std::uint32_t e) const {
  if (!sub_.edge_in[e]) return variant_ == Variant::warm;
  return edge_open_[e] != 0;
}

bool PcfRunner::vertex_warm(std::uint32_t v) {
  if (!sub_.vertex_in[v]) return variant_ == Variant::warm;
  return !forest_.frozen(forest_.find(v));
}

RunResult PcfRunner::result(double final_time) {
  RunResult res;
  const std::uint32_t nv = g_.vertex_count;
  const std::uint32_t ne = g_.edge_count();
  // The configuration is reported in extended form: entries outside the
  // subgraph take the variant's filler state (warm/open vs frozen/closed).
  res.final.edge_open.resize(ne);
  for (std::uint32_t e = 0; e < ne; ++e) res.final.edge_open[e] = edge_open(e) ? 1 : 0;
  res.final.vertex_frozen.resize(nv);
  for (std::uint32_t v = 0; v < nv; ++v) res.final.vertex_frozen[v] = vertex_warm(v) ? 0 : 1;
  res.final.time = final_time;
  for (std::uint32_t v = 0; v < nv; ++v) {
    if (sub_.vertex_in[v] && forest_.find(v) == v) {
      res.cluster_sizes.push_back(forest_.size(v));
    }
  }
  std::sort(res.cluster_sizes.begin(), res.cluster_sizes.end());
  if (nv > 0 && sub_.vertex_in[0]) {
    const std::uint32_t r0 = forest_.find(0);
    res.root_cluster_size = forest_.size(r0);
    res.root_touched_boundary = forest_.touches_boundary(r0);
  }
  res.event_count = event_count_;
  return res;
}

namespace {

RunResult run_variant(const GraphTopology& g, const PriorityOrder& priorities,
                      const ClockSet& clocks, Variant variant, double t_max) {
  const auto t0 = std::chrono::steady_clock::now();
  PcfRunner runner(g, priorities, clocks, variant);
  const EventSchedule sched = make_event_schedule(g, clocks);
  double last = 0.0;
  for (const std::uint32_t id : sched.order) {
    const double t = sched.time_of(id, clocks);
    if (t > t_max) break;
    last = t;
    runner.apply(id);
  }
  const double final_time = std::isfinite(t_max) ? t_max : last;
  RunResult res = runner.result(final_time);
  res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace

RunResult run_pcf(const GraphTopology& g, const PriorityOrder& priorities, const ClockSet& clocks,
                  double t_max) {
  return run_variant(g, priorities, clocks, Variant::pcf, t_max);
}

RunResult run_warm_pcf(const GraphTopology& g, const PriorityOrder& priorities,
                       const ClockSet& clocks, double t_max) {
  return run_variant(g, priorities, clocks, Variant::warm, t_max);
}

Configuration run_percolation(const GraphTopology& g, const ClockSet& clocks, double t) {
  const std::uint32_t ne = g.edge_count();
  Configuration c;
  c.edge_open.resize(ne);
  for (std::uint32_t e = 0; e < ne; ++e) c.edge_open[e] = clocks.edge_clock[e] <= t ? 1 : 0;
  c.vertex_frozen.assign(g.vertex_count, 0);
  c.time = t;
  return c;
}

std::vector<RunResult> run_coupled(const GraphTopology& g, const std::vector<Subgraph>& subgraphs,
                                   const PriorityOrder& priorities, const ClockSet& clocks,
                                   Variant variant) {
  const EventSchedule sched = make_event_schedule(g, clocks);
  double last = 0.0;
  if (!sched.order.empty()) last = sched.time_of(sched.order.back(), clocks);
  std::vector<RunResult> out;
  out.reserve(subgraphs.size());
  for (const Subgraph& sub : subgraphs) {
    const auto t0 = std::chrono::steady_clock::now();
    PcfRunner runner(g, priorities, clocks, variant, sub);
    for (const std::uint32_t id : sched.order) runner.apply(id);
    RunResult res = runner.result(last);
    res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(std::move(res));
  }
  return out;
}

void dump_trajectory(std::ostream& out, const GraphTopology& g, const PriorityOrder& priorities,
                     const ClockSet& clocks, Variant variant, double t_max) {
  PcfRunner runner(g, priorities, clocks, variant);
  const EventSchedule sched = make_event_schedule(g, clocks);
  const std::uint32_t ne = g.edge_count();
  out << std::setprecision(17);
  for (const std::uint32_t id : sched.order) {
    const double t = sched.time_of(id, clocks);
    if (t > t_max) break;
    if (!runner.apply(id)) continue;
    const bool edge = id < ne;
    const std::uint32_t idx = edge ? id : id - ne;
    const std::uint32_t probe = edge ? g.edges[id][0] : idx;
    const std::uint32_t label = runner.forest().min_rank_vertex(runner.forest().find(probe));
    out << t << ' ' << (edge ? 'e' : 'v') << ' ' << idx << ' ' << label << '\n';
  }
}

TreeRootClusterSample sample_tree_root_cluster(std::uint32_t d, std::uint32_t depth, double alpha,
                                               std::uint64_t seed, std::uint64_t stream_id) {
  if (d < 1) throw ValidationError("sample_tree_root_cluster: branching degree must be >= 1");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ValidationError("sample_tree_root_cluster: alpha must be positive and finite");
  }
  CounterRng rng(seed, stream_id);
  TreeRootClusterSample s;
  s.freeze_time = rng.next_exponential(alpha);
  const double p = -std::expm1(-(1.0 + alpha) * s.freeze_time) / (1.0 + alpha);
  s.size = 1;
  if (depth == 0) {  // the root itself is the bottom level
    s.touched_boundary = true;
    return s;
  }
  std::uint64_t level = 1;
  for (std::uint32_t j = 0; j < depth && level > 0; ++j) {
    if (level > (std::uint64_t(1) << 56) / d) {
      throw CapacityError("sample_tree_root_cluster: cluster level exceeds sampler capacity");
    }
    const std::uint64_t trials = std::uint64_t(d) * level;
    std::uint64_t next = 0;
    for (std::uint64_t i = 0; i < trials; ++i) {
      if (rng.next_uniform() < p) ++next;
    }
    level = next;
    s.size += level;
  }
  s.touched_boundary = level > 0;
  return s;
}

}  // namespace pcf
