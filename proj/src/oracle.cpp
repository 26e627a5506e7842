#include "pcf/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "pcf/errors.hpp"

namespace pcf {

namespace {

std::uint32_t pack_bits(const Configuration& c, std::uint32_t edge_count) {
  std::uint32_t key = 0;
  for (std::uint32_t e = 0; e < edge_count; ++e) {
    if (c.edge_open[e]) key |= 1u << e;
  }
  for (std::uint32_t v = 0; v < std::uint32_t(c.vertex_frozen.size()); ++v) {
    if (c.vertex_frozen[v]) key |= 1u << (edge_count + v);
  }
  return key;
}

// Per-state transition targets, regenerated on demand (state spaces are tiny;
// clarity beats caching).  Rates: every eligible edge contributes 1, every
// unfrozen cluster contributes alpha.
struct Transitions {
  std::vector<std::uint32_t> edge_targets;    // packed keys, one per eligible edge
  std::vector<std::uint32_t> freeze_targets;  // packed keys, one per unfrozen cluster
};

Transitions transitions_of(std::uint32_t nv, const std::vector<std::array<std::uint32_t, 2>>& edges,
                           const Configuration& c) {
  const std::uint32_t ne = std::uint32_t(edges.size());
  // Clusters = components of the open subgraph (singletons included).
  std::vector<std::uint32_t> comp(nv);
  for (std::uint32_t v = 0; v < nv; ++v) comp[v] = v;
  auto find = [&comp](std::uint32_t v) {
    while (comp[v] != v) {
      comp[v] = comp[comp[v]];
      v = comp[v];
    }
    return v;
  };
  for (std::uint32_t e = 0; e < ne; ++e) {
    if (!c.edge_open[e]) continue;
    const std::uint32_t a = find(edges[e][0]), b = find(edges[e][1]);
    if (a != b) comp[a] = b;
  }
  Transitions t;
  for (std::uint32_t e = 0; e < ne; ++e) {
    if (c.edge_open[e]) continue;
    if (c.vertex_frozen[edges[e][0]] || c.vertex_frozen[edges[e][1]]) continue;
    Configuration next = c;
    next.edge_open[e] = 1;
    t.edge_targets.push_back(pack_bits(next, ne));
  }
  std::vector<std::uint8_t> seen(nv, 0);
  for (std::uint32_t v = 0; v < nv; ++v) {
    const std::uint32_t r = find(v);
    if (seen[r]) continue;
    seen[r] = 1;
    if (c.vertex_frozen[v]) continue;  // frozen clusters are frozen as a whole
    Configuration next = c;
    for (std::uint32_t w = 0; w < nv; ++w) {
      if (find(w) == r) next.vertex_frozen[w] = 1;
    }
    t.freeze_targets.push_back(pack_bits(next, ne));
  }
  return t;
}

Configuration unpack_bits(std::uint32_t key, std::uint32_t nv, std::uint32_t ne) {
  Configuration c;
  c.edge_open.assign(ne, 0);
  c.vertex_frozen.assign(nv, 0);
  for (std::uint32_t e = 0; e < ne; ++e) c.edge_open[e] = (key >> e) & 1u;
  for (std::uint32_t v = 0; v < nv; ++v) c.vertex_frozen[v] = (key >> (ne + v)) & 1u;
  return c;
}

}  // namespace

std::uint32_t StateSpace::pack(const Configuration& c) const {
  if (c.edge_open.size() != edges.size() || c.vertex_frozen.size() != vertex_count) {
    throw ValidationError("StateSpace: configuration does not match the graph shape");
  }
  return pack_bits(c, edge_count());
}

std::uint32_t StateSpace::ordinal_of(const Configuration& c) const {
  const auto it = index.find(pack(c));
  if (it == index.end()) throw ValidationError("StateSpace: configuration is not reachable");
  return it->second;
}

bool StateSpace::is_absorbing(std::uint32_t ordinal) const {
  return std::binary_search(absorbing.begin(), absorbing.end(), ordinal);
}

StateSpace enumerate_states(const GraphTopology& g) {
  const std::uint32_t nv = g.vertex_count;
  const std::uint32_t ne = g.edge_count();
  if (nv + ne > 16) {
    throw CapacityError("enumerate_states: vertex_count + edge_count must be <= 16");
  }
  StateSpace space;
  space.vertex_count = nv;
  space.edges = g.edges;

  Configuration initial = unpack_bits(0, nv, ne);
  space.states.push_back(initial);
  space.index.emplace(0u, 0u);

  for (std::uint32_t head = 0; head < std::uint32_t(space.states.size()); ++head) {
    const Configuration current = space.states[head];  // copy: the vector grows
    const Transitions t = transitions_of(nv, space.edges, current);
    if (t.edge_targets.empty() && t.freeze_targets.empty()) {
      space.absorbing.push_back(head);
      continue;
    }
    auto visit = [&space, nv, ne](std::uint32_t key) {
      if (space.index.count(key)) return;
      space.index.emplace(key, std::uint32_t(space.states.size()));
      space.states.push_back(unpack_bits(key, nv, ne));
    };
    for (const std::uint32_t key : t.edge_targets) visit(key);
    for (const std::uint32_t key : t.freeze_targets) visit(key);
  }
  std::sort(space.absorbing.begin(), space.absorbing.end());
  return space;
}

FinalDistribution final_distribution(const StateSpace& space, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ValidationError("final_distribution: alpha must be positive and finite");
  }
  if (space.states.empty()) throw ValidationError("final_distribution: empty state space");
  const std::uint32_t nv = space.vertex_count;
  const std::uint32_t ne = space.edge_count();
  // Probability flow through the acyclic jump chain.  Every transition
  // strictly increases the number of filled bits (open edges + frozen
  // vertices; a freeze may add several at once), so sweeping states in
  // increasing bit count settles every state in one pass.  Breadth-first
  // discovery order is *not* sufficient here: a state found late can carry
  // fewer bits than one found earlier.
  const std::size_t n = space.states.size();
  std::vector<std::uint32_t> sweep(n);
  std::vector<int> bits(n);
  for (std::uint32_t s = 0; s < n; ++s) {
    sweep[s] = s;
    bits[s] = std::popcount(space.pack(space.states[s]));
  }
  std::stable_sort(sweep.begin(), sweep.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return bits[a] < bits[b]; });

  std::vector<double> mass(n, 0.0);
  mass[0] = 1.0;
  FinalDistribution out;
  out.probability.assign(space.absorbing.size(), 0.0);
  for (const std::uint32_t s : sweep) {
    const Transitions t = transitions_of(nv, space.edges, space.states[s]);
    const double total_rate =
        double(t.edge_targets.size()) + alpha * double(t.freeze_targets.size());
    if (t.edge_targets.empty() && t.freeze_targets.empty()) {
      const auto it = std::lower_bound(space.absorbing.begin(), space.absorbing.end(), s);
      out.probability[std::size_t(it - space.absorbing.begin())] = mass[s];
      continue;
    }
    for (const std::uint32_t key : t.edge_targets) {
      mass[space.index.at(key)] += mass[s] * (1.0 / total_rate);
    }
    for (const std::uint32_t key : t.freeze_targets) {
      mass[space.index.at(key)] += mass[s] * (alpha / total_rate);
    }
  }
  return out;
}

double marginal(const FinalDistribution& dist, const StateSpace& space,
                const std::function<bool(const Configuration&)>& predicate) {
  if (dist.probability.size() != space.absorbing.size()) {
    throw ValidationError("marginal: distribution does not match the state space");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < space.absorbing.size(); ++i) {
    if (predicate(space.states[space.absorbing[i]])) total += dist.probability[i];
  }
  return total;
}

}  // namespace pcf
