#include "pcf/graph.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "pcf/errors.hpp"

namespace pcf {

namespace {

void finalize_boundary(GraphTopology& g, const std::vector<std::uint32_t>& boundary) {
  g.is_boundary.assign(g.vertex_count, 0);
  for (std::uint32_t v : boundary) {
    if (v >= g.vertex_count) {
      throw ValidationError("boundary vertex " + std::to_string(v) + " out of range");
    }
    g.is_boundary[v] = 1;
  }
  g.boundary.clear();
  for (std::uint32_t v = 0; v < g.vertex_count; ++v) {
    if (g.is_boundary[v]) g.boundary.push_back(v);
  }
}

}  // namespace

PriorityOrder PriorityOrder::identity(std::uint32_t vertex_count) {
  PriorityOrder p;
  p.rank.resize(vertex_count);
  for (std::uint32_t v = 0; v < vertex_count; ++v) p.rank[v] = v;
  return p;
}

GraphTopology build_grid(std::uint32_t width, std::uint32_t height) {
  if (width < 1 || height < 1) {
    throw ValidationError("grid dimensions must be >= 1");
  }
  const std::uint64_t nv = static_cast<std::uint64_t>(width) * height;
  if (nv > (std::uint64_t(1) << 31)) {
    throw CapacityError("grid size exceeds the 2^31-vertex cap");
  }

  GraphTopology g;
  g.kind = GraphKind::grid;
  g.grid_width = width;
  g.grid_height = height;
  g.vertex_count = static_cast<std::uint32_t>(nv);

  // horizontal edges first (row-major), then vertical; endpoints ordered u < v
  const std::uint64_t ne = static_cast<std::uint64_t>(width) * (height - 1) +
                           static_cast<std::uint64_t>(height) * (width - 1);
  g.edges.reserve(ne);
  for (std::uint32_t y = 0; y < height; ++y) {
    for (std::uint32_t x = 0; x + 1 < width; ++x) {
      g.edges.push_back({g.grid_index(x, y), g.grid_index(x + 1, y)});
    }
  }
  for (std::uint32_t y = 0; y + 1 < height; ++y) {
    for (std::uint32_t x = 0; x < width; ++x) {
      g.edges.push_back({g.grid_index(x, y), g.grid_index(x, y + 1)});
    }
  }

  std::vector<std::uint32_t> boundary;
  for (std::uint32_t y = 0; y < height; ++y) {
    for (std::uint32_t x = 0; x < width; ++x) {
      if (x == 0 || y == 0 || x + 1 == width || y + 1 == height) {
        boundary.push_back(g.grid_index(x, y));
      }
    }
  }
  finalize_boundary(g, boundary);
  return g;
}

GraphTopology build_rooted_tree(std::uint32_t d, std::uint32_t depth) {
  if (d < 2) throw ValidationError("tree branching factor must be >= 2");
  // vertex count = (d^{depth+1} - 1) / (d - 1), guarded against overflow
  std::uint64_t nv = 1, level = 1;
  for (std::uint32_t j = 0; j < depth; ++j) {
    if (level > (std::uint64_t(1) << 40) / d) {
      throw CapacityError("tree exceeds the vertex cap");
    }
    level *= d;
    nv += level;
    if (nv > (std::uint64_t(1) << 31)) {
      throw CapacityError("tree exceeds the 2^31-vertex cap");
    }
  }

  GraphTopology g;
  g.kind = GraphKind::rooted_tree;
  g.tree_degree = d;
  g.tree_depth = depth;
  g.vertex_count = static_cast<std::uint32_t>(nv);

  // BFS indexing: children of i are d*i+1 .. d*i+d, so parent index < child
  // index and every root path has strictly increasing indices.
  g.edges.reserve(nv - 1);
  for (std::uint32_t v = 1; v < g.vertex_count; ++v) {
    const std::uint32_t parent = (v - 1) / d;
    g.edges.push_back({parent, v});
  }

  std::vector<std::uint32_t> boundary;
  if (depth > 0) {
    const std::uint32_t first_leaf = static_cast<std::uint32_t>(nv - level);
    for (std::uint32_t v = first_leaf; v < g.vertex_count; ++v) boundary.push_back(v);
  }
  finalize_boundary(g, boundary);
  return g;
}

GraphTopology build_generic(std::uint32_t vertex_count,
                            const std::vector<std::array<std::uint32_t, 2>>& edges,
                            const std::vector<std::uint32_t>& boundary) {
  if (vertex_count < 1) throw ValidationError("vertex count must be >= 1");

  GraphTopology g;
  g.kind = GraphKind::generic;
  g.vertex_count = vertex_count;
  g.edges.reserve(edges.size());

  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  for (const auto& e : edges) {
    std::uint32_t u = e[0], v = e[1];
    if (u >= vertex_count || v >= vertex_count) {
      throw ValidationError("edge endpoint out of range");
    }
    if (u == v) throw ValidationError("self-loops are not allowed");
    if (u > v) std::swap(u, v);
    if (!seen.insert({u, v}).second) {
      throw ValidationError("duplicate edge (" + std::to_string(u) + "," + std::to_string(v) + ")");
    }
    g.edges.push_back({u, v});
  }
  finalize_boundary(g, boundary);
  return g;
}

GraphTopology load_edge_list(std::istream& in) {
  std::uint64_t nv = 0, ne = 0, nb = 0;
  if (!(in >> nv >> ne >> nb)) throw IoError("edge list: failed to read header \"V E B\"");
  if (nv == 0 || nv > (std::uint64_t(1) << 31)) {
    throw ValidationError("edge list: vertex count out of range");
  }
  std::vector<std::array<std::uint32_t, 2>> edges;
  edges.reserve(ne);
  for (std::uint64_t i = 0; i < ne; ++i) {
    std::uint32_t u, v;
    if (!(in >> u >> v)) throw IoError("edge list: truncated edge section");
    edges.push_back({u, v});
  }
  std::vector<std::uint32_t> boundary;
  boundary.reserve(nb);
  for (std::uint64_t i = 0; i < nb; ++i) {
    std::uint32_t b;
    if (!(in >> b)) throw IoError("edge list: truncated boundary section");
    boundary.push_back(b);
  }
  return build_generic(static_cast<std::uint32_t>(nv), edges, boundary);
}

GraphTopology load_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open graph file: " + path);
  return load_edge_list(in);
}

void write_edge_list(std::ostream& out, const GraphTopology& g) {
  out << g.vertex_count << ' ' << g.edge_count() << ' ' << g.boundary.size() << '\n';
  for (const auto& e : g.edges) out << e[0] << ' ' << e[1] << '\n';
  for (std::size_t i = 0; i < g.boundary.size(); ++i) {
    out << g.boundary[i] << (i + 1 == g.boundary.size() ? '\n' : ' ');
  }
}

}  // namespace pcf
