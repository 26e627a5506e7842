// Finite graph topologies: square grids, rooted d-ary trees, generic edge lists.
//
// Topologies are immutable after construction and safe to share across
// threads.  Vertex indexing is deterministic (row-major for grids,
// breadth-first for trees) so that seeded runs are reproducible bit-for-bit.
#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace pcf {

enum class GraphKind : std::uint8_t { grid, rooted_tree, generic };

struct GraphTopology {
  GraphKind kind = GraphKind::generic;
  std::uint32_t vertex_count = 0;
  std::vector<std::array<std::uint32_t, 2>> edges;  // endpoint pairs, u < v
  std::vector<std::uint8_t> is_boundary;            // per vertex
  std::vector<std::uint32_t> boundary;              // sorted boundary indices

  // grid metadata (kind == grid)
  std::uint32_t grid_width = 0;
  std::uint32_t grid_height = 0;
  // tree metadata (kind == rooted_tree)
  std::uint32_t tree_degree = 0;
  std::uint32_t tree_depth = 0;

  std::uint32_t edge_count() const { return static_cast<std::uint32_t>(edges.size()); }

  std::uint32_t grid_index(std::uint32_t x, std::uint32_t y) const {
    return y * grid_width + x;  // row-major
  }
};

// Priority ranks driving the freeze labels: the component label is the vertex
// minimizing rank[v].  Defaults to the identity permutation.
struct PriorityOrder {
  std::vector<std::uint32_t> rank;  // rank[v] = priority of vertex v

  static PriorityOrder identity(std::uint32_t vertex_count);
};

// width x height grid, 4-neighbour edges, boundary = perimeter vertices.
GraphTopology build_grid(std::uint32_t width, std::uint32_t height);

// Complete d-ary tree of the given depth; breadth-first indexing with the
// root at index 0; boundary = leaves at the bottom level.
GraphTopology build_rooted_tree(std::uint32_t d, std::uint32_t depth);

// Arbitrary simple graph with a caller-specified boundary set (may be empty,
// in which case warm PCF coincides with PCF).
GraphTopology build_generic(std::uint32_t vertex_count,
                            const std::vector<std::array<std::uint32_t, 2>>& edges,
                            const std::vector<std::uint32_t>& boundary);

// Plain-text edge list: first line "V E B", then E lines "u v", then B
// boundary vertex indices, whitespace separated, ASCII decimal.
GraphTopology load_edge_list(std::istream& in);
GraphTopology load_edge_list_file(const std::string& path);
void write_edge_list(std::ostream& out, const GraphTopology& g);

}  // namespace pcf
