#pragma once

// Rotated square lattice L = {(x, y) : x + y even} with diagonal edges, its
// dual L* = L + (1, 0), finite domains on either, and the even/odd Z^2
// domains obtained by gluing a domain to its dual.

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "atrc/union_find.hpp"

namespace atrc {

enum class Sublattice { primal, dual };

inline const char* to_string(Sublattice s) { return s == Sublattice::primal ? "primal" : "dual"; }

struct LatticePoint {
  int x = 0;
  int y = 0;

  Sublattice parity() const { return ((x + y) & 1) == 0 ? Sublattice::primal : Sublattice::dual; }

  friend auto operator<=>(const LatticePoint&, const LatticePoint&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const LatticePoint& p) {
  return os << '(' << p.x << ',' << p.y << ')';
}

inline std::array<LatticePoint, 4> lattice_neighbors(LatticePoint p) {
  return {{{p.x - 1, p.y - 1}, {p.x - 1, p.y + 1}, {p.x + 1, p.y - 1}, {p.x + 1, p.y + 1}}};
}

inline bool lattice_adjacent(LatticePoint a, LatticePoint b) {
  return std::abs(a.x - b.x) == 1 && std::abs(a.y - b.y) == 1;
}

// The unique edge of the other sublattice crossing the edge ab.
inline std::array<LatticePoint, 2> crossing_edge(LatticePoint a, LatticePoint b) {
  const int dx = b.x - a.x;
  const int dy = b.y - a.y;
  LatticePoint p{(a.x + b.x - dy) / 2, (a.y + b.y + dx) / 2};
  LatticePoint q{(a.x + b.x + dy) / 2, (a.y + b.y - dx) / 2};
  if (q < p) std::swap(p, q);
  return {p, q};
}

struct Edge {
  int u = 0;  // u < v in vertex order
  int v = 0;
};

struct Incidence {
  int neighbor;
  int edge;
};

// Percolation configuration on the edges of a domain, one byte per edge.
class EdgeConfig {
 public:
  EdgeConfig() = default;
  explicit EdgeConfig(std::size_t n, bool open = false) : bits_(n, open ? 1 : 0) {}

  static EdgeConfig from_mask(std::uint64_t mask, std::size_t n) {
    EdgeConfig c(n);
    for (std::size_t i = 0; i < n; ++i) c.bits_[i] = static_cast<std::uint8_t>((mask >> i) & 1u);
    return c;
  }

  static EdgeConfig from_key(const std::string& key) {
    EdgeConfig c(key.size());
    for (std::size_t i = 0; i < key.size(); ++i) {
      if (key[i] != '0' && key[i] != '1') throw std::invalid_argument("EdgeConfig: bad key character");
      c.bits_[i] = key[i] == '1';
    }
    return c;
  }

  std::size_t size() const { return bits_.size(); }
  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  void set(std::size_t i, bool open) { bits_[i] = open ? 1 : 0; }

  std::size_t count() const {
    std::size_t n = 0;
    for (auto b : bits_) n += b;
    return n;
  }

  std::uint64_t to_mask() const {
    if (bits_.size() > 64) throw std::length_error("EdgeConfig::to_mask: more than 64 edges");
    std::uint64_t m = 0;
    for (std::size_t i = 0; i < bits_.size(); ++i)
      if (bits_[i]) m |= std::uint64_t{1} << i;
    return m;
  }

  // Canonical bit-string in edge index order.
  std::string key() const {
    std::string s(bits_.size(), '0');
    for (std::size_t i = 0; i < bits_.size(); ++i)
      if (bits_[i]) s[i] = '1';
    return s;
  }

  bool is_subset_of(const EdgeConfig& other) const {
    for (std::size_t i = 0; i < bits_.size(); ++i)
      if (bits_[i] && !other.bits_[i]) return false;
    return true;
  }

  EdgeConfig complement() const {
    EdgeConfig c(bits_.size());
    for (std::size_t i = 0; i < bits_.size(); ++i) c.bits_[i] = bits_[i] ? 0 : 1;
    return c;
  }

  friend bool operator==(const EdgeConfig&, const EdgeConfig&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

// Partition of a boundary vertex set (vertex indices of some domain).
struct BoundaryPartition {
  std::vector<std::vector<int>> blocks;

  static BoundaryPartition free_on(std::span<const int> vertices) {
    BoundaryPartition p;
    for (int v : vertices) p.blocks.push_back({v});
    return p;
  }

  static BoundaryPartition wired_on(std::span<const int> vertices) {
    BoundaryPartition p;
    if (!vertices.empty()) p.blocks.emplace_back(vertices.begin(), vertices.end());
    return p;
  }

  // Block id per vertex, -1 for vertices outside the boundary set.
  std::vector<int> block_of(int num_vertices) const {
    std::vector<int> id(static_cast<std::size_t>(num_vertices), -1);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      for (int v : blocks[b]) {
        if (v < 0 || v >= num_vertices) throw std::out_of_range("BoundaryPartition: vertex out of range");
        if (id[v] != -1) throw std::invalid_argument("BoundaryPartition: blocks are not disjoint");
        id[v] = static_cast<int>(b);
      }
    }
    return id;
  }

  // Checks that the blocks are disjoint and cover exactly `set`.
  bool covers_exactly(std::span<const int> set, int num_vertices) const {
    std::vector<int> id;
    try {
      id = block_of(num_vertices);
    } catch (const std::exception&) {
      return false;
    }
    std::size_t members = 0;
    for (auto& b : blocks) members += b.size();
    if (members != set.size()) return false;
    for (int v : set)
      if (id[v] == -1) return false;
    return true;
  }
};

enum class DomainKind { box, cycle, subgraph };

inline const char* to_string(DomainKind k) {
  switch (k) {
    case DomainKind::box: return "box";
    case DomainKind::cycle: return "cycle";
    case DomainKind::subgraph: return "subgraph";
  }
  return "?";
}

// Finite subgraph of L or L*. Immutable once built; derived sets are computed eagerly.
class Domain {
 public:
  Domain() = default;

  DomainKind kind() const { return kind_; }
  Sublattice sublattice() const { return sublattice_; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  std::span<const LatticePoint> vertices() const { return vertices_; }
  const LatticePoint& vertex(int i) const { return vertices_[static_cast<std::size_t>(i)]; }
  std::span<const Edge> edges() const { return edges_; }
  const Edge& edge(int e) const { return edges_[static_cast<std::size_t>(e)]; }
  std::span<const Incidence> incident(int v) const { return adjacency_[static_cast<std::size_t>(v)]; }

  int index_of(LatticePoint p) const {
    auto it = index_.find(pack(p));
    return it == index_.end() ? -1 : it->second;
  }
  bool contains(LatticePoint p) const { return index_of(p) >= 0; }

  // Edge index between vertex indices a and b, or -1.
  int edge_between(int a, int b) const {
    for (const auto& inc : incident(a))
      if (inc.neighbor == b) return inc.edge;
    return -1;
  }

  // Vertices adjacent (in the lattice) to some vertex outside the domain.
  std::span<const int> boundary() const { return boundary_; }
  bool is_boundary(int v) const { return is_boundary_[static_cast<std::size_t>(v)] != 0; }

  bool has_cycle() const { return !cycle_.empty(); }
  // Surrounding cycle (domain-boundary) in traversal order; empty unless a cycle-domain.
  std::span<const int> domain_boundary() const { return cycle_; }
  std::span<const int> domain_boundary_sorted() const { return cycle_sorted_; }
  bool on_domain_boundary(int v) const { return !on_cycle_.empty() && on_cycle_[static_cast<std::size_t>(v)] != 0; }
  bool on_edge_boundary(int e) const { return !edge_on_cycle_.empty() && edge_on_cycle_[static_cast<std::size_t>(e)] != 0; }

  BoundaryPartition free_bc() const { return BoundaryPartition::free_on(boundary_); }
  BoundaryPartition wired_bc() const { return BoundaryPartition::wired_on(boundary_); }
  // Wired on the domain-boundary cycle.
  BoundaryPartition wired_cycle_bc() const {
    if (!has_cycle()) throw std::logic_error("wired_cycle_bc: not a cycle-domain");
    return BoundaryPartition::wired_on(cycle_sorted_);
  }

  // Builds a domain from a vertex set and an edge list given by endpoints.
  // Edges are re-indexed lexicographically by (min endpoint, max endpoint).
  static Domain from_parts(DomainKind kind, std::vector<LatticePoint> points,
                           const std::vector<std::array<LatticePoint, 2>>& edge_points,
                           const std::vector<LatticePoint>& cycle = {}) {
    Domain d;
    d.kind_ = kind;
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    if (!points.empty()) {
      d.sublattice_ = points.front().parity();
      for (const auto& p : points)
        if (p.parity() != d.sublattice_) throw std::invalid_argument("Domain: vertices of mixed parity");
    }
    d.vertices_ = std::move(points);
    for (std::size_t i = 0; i < d.vertices_.size(); ++i) d.index_.emplace(pack(d.vertices_[i]), static_cast<int>(i));

    std::vector<std::pair<int, int>> es;
    es.reserve(edge_points.size());
    for (const auto& [a, b] : edge_points) {
      if (!lattice_adjacent(a, b)) throw std::invalid_argument("Domain: edge endpoints are not lattice neighbours");
      int ia = d.index_of(a);
      int ib = d.index_of(b);
      if (ia < 0 || ib < 0) throw std::invalid_argument("Domain: edge endpoint outside the vertex set");
      if (ia > ib) std::swap(ia, ib);
      es.emplace_back(ia, ib);
    }
    std::sort(es.begin(), es.end());
    es.erase(std::unique(es.begin(), es.end()), es.end());
    d.edges_.reserve(es.size());
    for (auto [a, b] : es) d.edges_.push_back({a, b});

    d.adjacency_.assign(d.vertices_.size(), {});
    for (std::size_t e = 0; e < d.edges_.size(); ++e) {
      d.adjacency_[d.edges_[e].u].push_back({d.edges_[e].v, static_cast<int>(e)});
      d.adjacency_[d.edges_[e].v].push_back({d.edges_[e].u, static_cast<int>(e)});
    }

    d.is_boundary_.assign(d.vertices_.size(), 0);
    for (std::size_t i = 0; i < d.vertices_.size(); ++i) {
      for (const auto& q : lattice_neighbors(d.vertices_[i])) {
        if (!d.contains(q)) {
          d.is_boundary_[i] = 1;
          break;
        }
      }
      if (d.is_boundary_[i]) d.boundary_.push_back(static_cast<int>(i));
    }

    if (!cycle.empty()) {
      d.on_cycle_.assign(d.vertices_.size(), 0);
      d.edge_on_cycle_.assign(d.edges_.size(), 0);
      for (std::size_t k = 0; k < cycle.size(); ++k) {
        int a = d.index_of(cycle[k]);
        int b = d.index_of(cycle[(k + 1) % cycle.size()]);
        if (a < 0 || b < 0) throw std::invalid_argument("Domain: cycle vertex outside the domain");
        int e = d.edge_between(a, b);
        if (e < 0) throw std::invalid_argument("Domain: cycle edge outside the domain");
        d.cycle_.push_back(a);
        d.on_cycle_[a] = 1;
        d.edge_on_cycle_[e] = 1;
      }
      d.cycle_sorted_ = d.cycle_;
      std::sort(d.cycle_sorted_.begin(), d.cycle_sorted_.end());
    }
    return d;
  }

  // Text serialization used by golden tests.
  void write(std::ostream& os) const {
    os << "# atrc-domain v1\n";
    os << "kind " << to_string(kind_) << "\n";
    os << "sublattice " << to_string(sublattice_) << "\n";
    os << "vertices " << vertices_.size() << "\n";
    for (std::size_t i = 0; i < vertices_.size(); ++i)
      os << "v " << i << ' ' << vertices_[i].x << ' ' << vertices_[i].y << ' ' << int(is_boundary_[i]) << "\n";
    os << "edges " << edges_.size() << "\n";
    for (std::size_t e = 0; e < edges_.size(); ++e)
      os << "e " << e << ' ' << edges_[e].u << ' ' << edges_[e].v << ' ' << int(on_edge_boundary(static_cast<int>(e)))
         << "\n";
    os << "cycle " << cycle_.size();
    for (int v : cycle_) os << ' ' << v;
    os << "\n";
  }

  std::string to_text() const {
    std::ostringstream os;
    write(os);
    return os.str();
  }

 private:
  static std::uint64_t pack(LatticePoint p) {
    return (std::uint64_t(std::uint32_t(p.x)) << 32) | std::uint64_t(std::uint32_t(p.y));
  }

  DomainKind kind_ = DomainKind::subgraph;
  Sublattice sublattice_ = Sublattice::primal;
  std::vector<LatticePoint> vertices_;
  std::unordered_map<std::uint64_t, int> index_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Incidence>> adjacency_;
  std::vector<std::uint8_t> is_boundary_;
  std::vector<int> boundary_;
  std::vector<int> cycle_;
  std::vector<int> cycle_sorted_;
  std::vector<std::uint8_t> on_cycle_;
  std::vector<std::uint8_t> edge_on_cycle_;
};

namespace detail {

inline std::vector<std::array<LatticePoint, 2>> induced_edges(const std::vector<LatticePoint>& pts) {
  std::vector<LatticePoint> sorted = pts;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::array<LatticePoint, 2>> out;
  for (const auto& p : sorted) {
    for (const auto& q : lattice_neighbors(p)) {
      if (p < q && std::binary_search(sorted.begin(), sorted.end(), q)) out.push_back({p, q});
    }
  }
  return out;
}

// Even-odd rule for a lattice point against a closed polygon with lattice vertices.
inline bool strictly_inside(LatticePoint p, const std::vector<LatticePoint>& poly) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      // x-coordinate of the crossing, compared without division
      const long long num = static_cast<long long>(b.x - a.x) * (p.y - a.y);
      const long long den = b.y - a.y;
      const long long lhs = static_cast<long long>(p.x - a.x) * den;
      if (den > 0 ? lhs < num : lhs > num) inside = !inside;
    }
  }
  return inside;
}

}  // namespace detail

// Lambda_n = {u in L : |u|_1 <= 2n}. For n >= 1 this is also a cycle-domain whose
// surrounding cycle is the ring |u|_1 = 2n.
inline Domain build_lambda(int n) {
  if (n < 0) throw std::invalid_argument("build_lambda: n must be nonnegative");
  std::vector<LatticePoint> pts;
  for (int a = -n; a <= n; ++a)
    for (int b = -n; b <= n; ++b) pts.push_back({a + b, a - b});
  std::vector<LatticePoint> cycle;
  if (n >= 1) {
    // walk the boundary of [-n, n]^2 in rotated coordinates (a, b)
    auto push = [&](int a, int b) { cycle.push_back({a + b, a - b}); };
    for (int b = -n; b < n; ++b) push(n, b);
    for (int a = n; a > -n; --a) push(a, n);
    for (int b = n; b > -n; --b) push(-n, b);
    for (int a = -n; a < n; ++a) push(a, -n);
  }
  return Domain::from_parts(DomainKind::box, pts, detail::induced_edges(pts), cycle);
}

// Domain induced by the vertices on and inside a simple lattice cycle.
inline Domain cycle_domain(const std::vector<LatticePoint>& cycle) {
  if (cycle.size() < 4) throw std::invalid_argument("cycle_domain: cycle needs at least 4 vertices");
  const Sublattice s = cycle.front().parity();
  std::vector<LatticePoint> sorted = cycle;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("cycle_domain: cycle is not simple");
  for (std::size_t k = 0; k < cycle.size(); ++k) {
    if (cycle[k].parity() != s) throw std::invalid_argument("cycle_domain: mixed parity");
    if (!lattice_adjacent(cycle[k], cycle[(k + 1) % cycle.size()]))
      throw std::invalid_argument("cycle_domain: consecutive cycle vertices are not adjacent");
  }
  int x0 = sorted.front().x, x1 = x0, y0 = sorted.front().y, y1 = y0;
  for (const auto& p : cycle) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  std::vector<LatticePoint> pts = cycle;
  for (int x = x0; x <= x1; ++x)
    for (int y = y0; y <= y1; ++y) {
      LatticePoint p{x, y};
      if (p.parity() != s || std::binary_search(sorted.begin(), sorted.end(), p)) continue;
      if (detail::strictly_inside(p, cycle)) pts.push_back(p);
    }
  return Domain::from_parts(DomainKind::cycle, pts, detail::induced_edges(pts), cycle);
}

// Cycle-domain bounded by the rectangle [a0, a1] x [b0, b1] in rotated
// coordinates a = (x + y) / 2, b = (x - y) / 2, shifted by `offset` (use
// offset (1, 0) for a domain on L*).
inline Domain rect_domain(int a0, int a1, int b0, int b1, LatticePoint offset = {0, 0}) {
  if (a1 <= a0 || b1 <= b0) throw std::invalid_argument("rect_domain: empty rectangle");
  std::vector<LatticePoint> cycle;
  auto push = [&](int a, int b) { cycle.push_back({a + b + offset.x, a - b + offset.y}); };
  for (int b = b0; b < b1; ++b) push(a1, b);
  for (int a = a1; a > a0; --a) push(a, b1);
  for (int b = b1; b > b0; --b) push(a0, b);
  for (int a = a0; a < a1; ++a) push(a, b0);
  return cycle_domain(cycle);
}

// The 4-cycle through (0,0), (1,1), (2,0), (1,-1), shifted by `offset`.
inline Domain diamond_domain(LatticePoint offset = {0, 0}) {
  return cycle_domain({{offset.x, offset.y},
                       {offset.x + 1, offset.y + 1},
                       {offset.x + 2, offset.y},
                       {offset.x + 1, offset.y - 1}});
}

inline Domain induced_domain(std::vector<LatticePoint> points) {
  auto edges = detail::induced_edges(points);
  return Domain::from_parts(DomainKind::subgraph, std::move(points), edges);
}

// Subgraph given by an explicit edge list; the vertex set is the set of endpoints.
inline Domain subgraph_domain(const std::vector<std::array<LatticePoint, 2>>& edges,
                              std::vector<LatticePoint> extra_vertices = {}) {
  for (const auto& [a, b] : edges) {
    extra_vertices.push_back(a);
    extra_vertices.push_back(b);
  }
  return Domain::from_parts(DomainKind::subgraph, std::move(extra_vertices), edges);
}

struct DualDomain {
  Domain domain;                 // Omega*, formed by the edges dual to the edges of Omega
  std::vector<int> edge_to_dual;  // edge index in Omega -> edge index in Omega*
};

inline DualDomain dual_domain(const Domain& d) {
  std::vector<std::array<LatticePoint, 2>> dual_edges;
  dual_edges.reserve(d.edges().size());
  for (const auto& e : d.edges()) dual_edges.push_back(crossing_edge(d.vertex(e.u), d.vertex(e.v)));
  DualDomain out{subgraph_domain(dual_edges), {}};
  out.edge_to_dual.reserve(dual_edges.size());
  for (const auto& [a, b] : dual_edges)
    out.edge_to_dual.push_back(out.domain.edge_between(out.domain.index_of(a), out.domain.index_of(b)));
  return out;
}

// Number of clusters of `cfg` after identifying the vertices of each boundary block.
inline int count_clusters(const Domain& d, const EdgeConfig& cfg, const BoundaryPartition& bp) {
  if (cfg.size() != static_cast<std::size_t>(d.num_edges()))
    throw std::invalid_argument("count_clusters: configuration size mismatch");
  UnionFind uf(d.num_vertices());
  for (const auto& block : bp.blocks)
    for (std::size_t i = 1; i < block.size(); ++i) uf.unite(block[0], block[i]);
  for (int e = 0; e < d.num_edges(); ++e)
    if (cfg[static_cast<std::size_t>(e)]) uf.unite(d.edge(e).u, d.edge(e).v);
  return uf.num_sets();
}

// Even (odd) domain of Z^2: the subgraph induced by V(Omega) and V(Omega*) for a
// cycle-domain Omega on L (on L*). Heights and six-vertex spins live on its points.
class Z2Domain {
 public:
  struct Square {
    int u, v;    // point indices of the primal edge endpoints
    int a, b;    // point indices of the dual edge endpoints
    int dual_edge;
  };

  const Domain& primal() const { return primal_; }
  const Domain& dual() const { return dual_.domain; }
  std::span<const int> edge_to_dual() const { return dual_.edge_to_dual; }
  Sublattice parity() const { return primal_.sublattice(); }
  bool is_even() const { return parity() == Sublattice::primal; }

  int num_points() const { return static_cast<int>(points_.size()); }
  std::span<const LatticePoint> points() const { return points_; }
  const LatticePoint& point(int i) const { return points_[static_cast<std::size_t>(i)]; }
  int index_of(LatticePoint p) const {
    auto it = std::lower_bound(points_.begin(), points_.end(), p);
    return (it != points_.end() && *it == p) ? static_cast<int>(it - points_.begin()) : -1;
  }
  // True for points on the domain's own sublattice (where Omega lives).
  bool is_primal_point(int i) const { return point(i).parity() == parity(); }

  int primal_point(int v) const { return primal_to_point_[static_cast<std::size_t>(v)]; }
  int dual_point(int v) const { return dual_to_point_[static_cast<std::size_t>(v)]; }

  std::span<const std::array<int, 2>> z2_edges() const { return z2_edges_; }
  std::span<const int> z2_neighbors(int i) const { return z2_neighbors_[static_cast<std::size_t>(i)]; }

  std::span<const int> boundary() const { return boundary_; }
  bool on_boundary(int i) const { return on_boundary_[static_cast<std::size_t>(i)] != 0; }

  // Dual vertices strictly inside the surrounding cycle.
  bool is_inner_dual(int dual_vertex) const { return inner_dual_[static_cast<std::size_t>(dual_vertex)] != 0; }

  const Square& square(int primal_edge) const { return squares_[static_cast<std::size_t>(primal_edge)]; }

  int z2_edge_index(int i, int j) const {
    const std::array<int, 2> key{std::min(i, j), std::max(i, j)};
    auto it = std::lower_bound(z2_edges_.begin(), z2_edges_.end(), key);
    return (it != z2_edges_.end() && *it == key) ? static_cast<int>(it - z2_edges_.begin()) : -1;
  }

  // The part of D on L (spins sigma_bullet) and the part on L* (sigma_circ).
  const Domain& bullet() const { return is_even() ? primal() : dual(); }
  const Domain& circ() const { return is_even() ? dual() : primal(); }
  int bullet_point(int v) const { return is_even() ? primal_point(v) : dual_point(v); }
  int circ_point(int v) const { return is_even() ? dual_point(v) : primal_point(v); }
  // Edge of circ() crossing a given edge of bullet().
  int bullet_to_circ_edge(int e) const {
    return is_even() ? dual_.edge_to_dual[static_cast<std::size_t>(e)] : dual_to_edge_[static_cast<std::size_t>(e)];
  }

  friend Z2Domain even_domain(const Domain& d);

 private:
  Domain primal_;
  DualDomain dual_;
  std::vector<LatticePoint> points_;
  std::vector<int> primal_to_point_;
  std::vector<int> dual_to_point_;
  std::vector<std::array<int, 2>> z2_edges_;
  std::vector<std::vector<int>> z2_neighbors_;
  std::vector<int> boundary_;
  std::vector<std::uint8_t> on_boundary_;
  std::vector<std::uint8_t> inner_dual_;
  std::vector<Square> squares_;
  std::vector<int> dual_to_edge_;
};

// D_Omega for a cycle-domain Omega. The boundary is the surrounding cycle of Omega
// together with the generic boundary of Omega*. Domains whose dual boundary does
// not coincide with the dual vertices outside the cycle are rejected.
inline Z2Domain even_domain(const Domain& d) {
  if (!d.has_cycle()) throw std::invalid_argument("even_domain: not a cycle-domain (domain-boundary undefined)");
  Z2Domain z;
  z.primal_ = d;
  z.dual_ = dual_domain(d);
  const Domain& ds = z.dual_.domain;

  std::vector<LatticePoint> poly;
  for (int v : d.domain_boundary()) poly.push_back(d.vertex(v));
  z.inner_dual_.assign(static_cast<std::size_t>(ds.num_vertices()), 0);
  for (int j = 0; j < ds.num_vertices(); ++j) {
    const bool inner = detail::strictly_inside(ds.vertex(j), poly);
    z.inner_dual_[j] = inner ? 1 : 0;
    if (inner == ds.is_boundary(j))
      throw std::invalid_argument("even_domain: dual boundary does not match the surrounding cycle");
  }

  z.points_.assign(d.vertices().begin(), d.vertices().end());
  z.points_.insert(z.points_.end(), ds.vertices().begin(), ds.vertices().end());
  std::sort(z.points_.begin(), z.points_.end());
  for (int v = 0; v < d.num_vertices(); ++v) z.primal_to_point_.push_back(z.index_of(d.vertex(v)));
  for (int v = 0; v < ds.num_vertices(); ++v) z.dual_to_point_.push_back(z.index_of(ds.vertex(v)));

  z.z2_neighbors_.assign(z.points_.size(), {});
  for (int i = 0; i < z.num_points(); ++i) {
    const auto p = z.point(i);
    for (LatticePoint q : {LatticePoint{p.x + 1, p.y}, LatticePoint{p.x, p.y + 1}}) {
      const int j = z.index_of(q);
      if (j < 0) continue;
      z.z2_edges_.push_back({std::min(i, j), std::max(i, j)});
      z.z2_neighbors_[i].push_back(j);
      z.z2_neighbors_[j].push_back(i);
    }
  }
  std::sort(z.z2_edges_.begin(), z.z2_edges_.end());

  z.on_boundary_.assign(z.points_.size(), 0);
  for (int v : d.domain_boundary()) z.on_boundary_[z.primal_point(v)] = 1;
  for (int v : ds.boundary()) z.on_boundary_[z.dual_point(v)] = 1;
  for (int i = 0; i < z.num_points(); ++i)
    if (z.on_boundary_[i]) z.boundary_.push_back(i);

  for (int e = 0; e < d.num_edges(); ++e) {
    const int de = z.dual_.edge_to_dual[e];
    z.squares_.push_back({z.primal_point(d.edge(e).u), z.primal_point(d.edge(e).v), z.dual_point(ds.edge(de).u),
                          z.dual_point(ds.edge(de).v), de});
  }
  z.dual_to_edge_.assign(static_cast<std::size_t>(ds.num_edges()), -1);
  for (int e = 0; e < d.num_edges(); ++e) z.dual_to_edge_[z.dual_.edge_to_dual[e]] = e;
  return z;
}

}  // namespace atrc
