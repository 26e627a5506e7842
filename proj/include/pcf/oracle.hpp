// Exact final-distribution solver for the freezing dynamics on tiny graphs.
//
// The full continuous-time chain on states (frozen vertices, open edges) is
// enumerated breadth-first and its embedded jump chain solved exactly; this
// is the ground truth the simulation engine is tested against.
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "pcf/engine.hpp"
#include "pcf/graph.hpp"

namespace pcf {

struct StateSpace {
  std::uint32_t vertex_count = 0;
  std::vector<std::array<std::uint32_t, 2>> edges;  // copied from the source graph
  std::vector<Configuration> states;                // breadth-first (hence topological) order
  std::vector<std::uint32_t> absorbing;             // ordinals with no outgoing transition
  std::unordered_map<std::uint32_t, std::uint32_t> index;  // packed key -> ordinal

  std::uint32_t edge_count() const { return std::uint32_t(edges.size()); }
  // Packed (open bits, frozen bits) key of a configuration.
  std::uint32_t pack(const Configuration& c) const;
  // Ordinal lookup; throws ValidationError for unreachable configurations.
  std::uint32_t ordinal_of(const Configuration& c) const;
  bool is_absorbing(std::uint32_t ordinal) const;
};

struct FinalDistribution {
  // probability[i] pairs with space.absorbing[i]; sums to 1 within 1e-12.
  std::vector<double> probability;
};

// Breadth-first closure from the all-warm all-closed state under the two
// transition families: a closed edge with both endpoint clusters unfrozen
// opens (rate 1), and an unfrozen cluster freezes (rate alpha).  Requires
// vertex_count + edge_count <= 16.
StateSpace enumerate_states(const GraphTopology& g);

// Absorption law of the all-warm all-closed initial state, computed by one
// probability-flow sweep of the embedded jump chain in topological order
// (every transition strictly grows frozen vertices or open edges, so the
// chain is acyclic and one pass suffices).
FinalDistribution final_distribution(const StateSpace& space, double alpha);

// Total probability of the absorbing states satisfying the predicate.
double marginal(const FinalDistribution& dist, const StateSpace& space,
                const std::function<bool(const Configuration&)>& predicate);

}  // namespace pcf
