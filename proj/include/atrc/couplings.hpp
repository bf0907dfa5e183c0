#pragma once

// Spin/edge couplings between the self-dual AT random-cluster model and the
// six-vertex model, the BKW loop construction and the ATRC duality map.
// Randomized routines take any Source from random.hpp.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "atrc/lattice.hpp"
#include "atrc/measures.hpp"
#include "atrc/union_find.hpp"

namespace atrc {

enum class CouplingVariant { even_00_11, odd_11 };

// Joint weight of (sigma, omega) on D: (1/(c-1))^{|omega| + |E_bullet|} times the
// compatibility indicators and the boundary constraints of the variant. omega
// lives on the edges of z.bullet().
inline double joint_density(const SixVSpins& s, const EdgeConfig& omega, double c, CouplingVariant variant,
                            const Z2Domain& z) {
  if ((variant == CouplingVariant::even_00_11) != z.is_even())
    throw std::invalid_argument("joint_density: variant does not match the domain parity");
  const Domain& B = z.bullet();
  const Domain& C = z.circ();
  if (omega.size() != static_cast<std::size_t>(B.num_edges()) || s.bullet.size() != static_cast<std::size_t>(B.num_vertices()) ||
      s.circ.size() != static_cast<std::size_t>(C.num_vertices()))
    throw std::invalid_argument("joint_density: sizes do not match the domain");
  if (variant == CouplingVariant::even_00_11) {
    for (int v : B.domain_boundary())
      if (s.bullet[v] != 1) return 0.0;
    for (int v : C.boundary())
      if (s.circ[v] != 1) return 0.0;
  } else {
    for (int v : B.boundary())
      if (s.bullet[v] != 1) return 0.0;
  }
  int exponent = 0;
  for (int e = 0; e < B.num_edges(); ++e) {
    const bool disagree = s.bullet[B.edge(e).u] != s.bullet[B.edge(e).v];
    const auto& de = C.edge(z.bullet_to_circ_edge(e));
    const bool circ_disagree = s.circ[de.u] != s.circ[de.v];
    if (omega[e]) {
      if (disagree) return 0.0;
      ++exponent;
    } else if (circ_disagree) {
      return 0.0;
    }
    if (disagree) ++exponent;
  }
  return std::pow(1.0 / (c - 1.0), exponent);
}

namespace detail {

// Uniform +-1 on clusters of `uf` not flagged as pinned, +1 on pinned ones.
// Clusters are visited in order of their smallest vertex.
template <class Source>
std::vector<int> cluster_signs(UnionFind& uf, const std::vector<char>& pinned_root, Source& src) {
  const int n = uf.size();
  std::vector<int> sign_of_root(static_cast<std::size_t>(n), 0);
  std::vector<int> out(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    const int r = uf.find(v);
    if (sign_of_root[r] == 0) sign_of_root[r] = pinned_root[r] ? 1 : src.sign(0.5);
    out[v] = sign_of_root[r];
  }
  return out;
}

}  // namespace detail

// sigma_circ given omega_tau (even domains): +1 on clusters of omega_tau* meeting
// the boundary of Omega*, independent fair signs elsewhere.
template <class Source>
std::vector<int> assign_spins_to_dual_clusters(const EdgeConfig& omega_tau, const Z2Domain& z, Source& src) {
  if (!z.is_even()) throw std::invalid_argument("assign_spins_to_dual_clusters: even domain expected");
  const Domain& D = z.dual();
  UnionFind uf(D.num_vertices());
  for (int e = 0; e < z.primal().num_edges(); ++e)
    if (!omega_tau[e]) {
      const auto& de = D.edge(z.edge_to_dual()[e]);
      uf.unite(de.u, de.v);
    }
  std::vector<char> pinned(static_cast<std::size_t>(D.num_vertices()), 0);
  for (int v : D.boundary()) pinned[uf.find(v)] = 1;
  return detail::cluster_signs(uf, pinned, src);
}

// sigma_bullet given an ATRC pair (J<U) on a cycle-domain: constant on clusters of
// omega_tautau', +1 on those meeting the domain-boundary, fair signs elsewhere.
template <class Source>
std::vector<int> sigma_from_atrc_pair(const EdgePair& pair, const Domain& d, Source& src) {
  if (pair.kind != LayerKind::tau_tautau) throw std::invalid_argument("sigma_from_atrc_pair: J<U pair expected");
  if (!d.has_cycle()) throw std::invalid_argument("sigma_from_atrc_pair: cycle-domain expected");
  UnionFind uf(d.num_vertices());
  for (int e = 0; e < d.num_edges(); ++e)
    if (pair.omega_second[e]) uf.unite(d.edge(e).u, d.edge(e).v);
  std::vector<char> pinned(static_cast<std::size_t>(d.num_vertices()), 0);
  for (int v : d.domain_boundary()) pinned[uf.find(v)] = 1;
  return detail::cluster_signs(uf, pinned, src);
}

// Edges from spins: forced open where sigma_circ disagrees across e*, forced closed
// where sigma_bullet disagrees across e, otherwise open with probability 1/c, or
// boundary_prob on the edge-boundary when it is given.
template <class Source>
EdgeConfig sample_edges_from_spins(const SixVSpins& s, double c, std::optional<double> boundary_prob,
                                   const Z2Domain& z, Source& src) {
  const Domain& B = z.bullet();
  const Domain& C = z.circ();
  EdgeConfig omega(static_cast<std::size_t>(B.num_edges()));
  for (int e = 0; e < B.num_edges(); ++e) {
    const bool bullet_disagree = s.bullet[B.edge(e).u] != s.bullet[B.edge(e).v];
    const auto& de = C.edge(z.bullet_to_circ_edge(e));
    const bool circ_disagree = s.circ[de.u] != s.circ[de.v];
    if (bullet_disagree && circ_disagree) {
      std::ostringstream os;
      os << "sample_edges_from_spins: spins disagree across both edge " << e << " and its dual";
      throw std::invalid_argument(os.str());
    }
    if (circ_disagree) {
      omega.set(e, true);
    } else if (!bullet_disagree) {
      const double p = (boundary_prob && B.on_edge_boundary(e)) ? *boundary_prob : 1.0 / c;
      omega.set(e, src.bernoulli(p));
    }
  }
  return omega;
}

// (omega_tau, omega_tautau') -> (omega_tautau'*, omega_tau*) for J<U and
// (omega_tau, omega_tau') -> (omega_tau*, omega_tau'*) for J>=U, as
// configurations on the dual domain.
inline EdgePair dual_atrc_config(const EdgePair& pair, std::span<const int> edge_to_dual) {
  const std::size_t m = pair.omega_tau.size();
  if (edge_to_dual.size() != m) throw std::invalid_argument("dual_atrc_config: edge map size mismatch");
  auto star = [&](const EdgeConfig& w) {
    EdgeConfig out(m);
    for (std::size_t e = 0; e < m; ++e) out.set(static_cast<std::size_t>(edge_to_dual[e]), !w[e]);
    return out;
  };
  if (pair.kind == LayerKind::tau_tautau) return {star(pair.omega_second), star(pair.omega_tau), pair.kind};
  return {star(pair.omega_tau), star(pair.omega_second), pair.kind};
}

// k^1(omega_tau*) on Omega* (wired on its boundary) minus k(omega_tau) minus |omega_tau|.
inline int euler_defect(const EdgeConfig& omega_tau, const Z2Domain& z) {
  const Domain& D = z.dual();
  EdgeConfig star(static_cast<std::size_t>(D.num_edges()));
  for (int e = 0; e < z.primal().num_edges(); ++e) star.set(z.edge_to_dual()[e], !omega_tau[e]);
  return count_clusters(D, star, D.wired_bc()) - count_clusters(z.primal(), omega_tau, z.primal().free_bc()) -
         static_cast<int>(omega_tau.count());
}

// ---------------------------------------------------------------------------
// Loops of an FK configuration on a cycle-domain.

struct LoopSet {
  // Each loop is a cyclic sequence of medial points, stored as Z2 edge indices.
  std::vector<std::vector<int>> loops;
  // Cluster ids on either side of each loop.
  std::vector<int> primal_side, dual_side;
  // Nesting forest: enclosing loop (-1 when outermost) and depth (0 outermost).
  std::vector<int> parent;
  std::vector<int> depth;

  // Cluster structure: primal clusters of the modified configuration are ids
  // [0, num_primal), inner dual clusters are [num_primal, num_primal + num_dual).
  int num_primal = 0;
  int num_dual = 0;
  int root = 0;                        // cluster of the domain-boundary
  std::vector<int> cluster_of_point;   // per Z2 point, -1 for outer dual points
  std::vector<int> cluster_parent;     // parent cluster in the tree, -1 for the root
  std::vector<int> loop_into;          // per cluster: the loop crossed to enter it, -1 for the root
  std::vector<int> bfs_order;          // clusters in breadth-first order from the root

  std::size_t size() const { return loops.size(); }

  // Number of loops enclosing a point.
  int crossings(int point) const {
    const int c = cluster_of_point[static_cast<std::size_t>(point)];
    if (c < 0) return 0;
    const int l = loop_into[static_cast<std::size_t>(c)];
    return l < 0 ? 0 : depth[static_cast<std::size_t>(l)] + 1;
  }

  std::string dump() const {
    std::ostringstream os;
    int max_depth = -1;
    for (int d : depth) max_depth = std::max(max_depth, d);
    os << "loops " << loops.size() << "\n";
    os << "primal_clusters " << num_primal << "\n";
    os << "dual_clusters " << num_dual << "\n";
    os << "max_depth " << max_depth << "\n";
    for (std::size_t i = 0; i < loops.size(); ++i)
      os << "loop " << i << " length " << loops[i].size() << " depth " << depth[i] << " parent " << parent[i] << "\n";
    return os.str();
  }
};

// Forces the edge-boundary open.
inline EdgeConfig open_edge_boundary(const EdgeConfig& eta, const Domain& d) {
  EdgeConfig out = eta;
  for (int e = 0; e < d.num_edges(); ++e)
    if (d.on_edge_boundary(e)) out.set(e, true);
  return out;
}

inline LoopSet trace_loops(const EdgeConfig& eta_in, const Z2Domain& z) {
  const Domain& O = z.primal();
  const Domain& D = z.dual();
  if (!O.has_cycle()) throw std::invalid_argument("trace_loops: cycle-domain expected");
  if (eta_in.size() != static_cast<std::size_t>(O.num_edges())) throw std::invalid_argument("trace_loops: size mismatch");
  const EdgeConfig eta = open_edge_boundary(eta_in, O);

  LoopSet ls;
  // clusters
  UnionFind up(O.num_vertices());
  for (int e = 0; e < O.num_edges(); ++e)
    if (eta[e]) up.unite(O.edge(e).u, O.edge(e).v);
  UnionFind ud(D.num_vertices());
  for (int e = 0; e < O.num_edges(); ++e) {
    const auto& de = D.edge(z.edge_to_dual()[e]);
    if (!eta[e] && z.is_inner_dual(de.u) && z.is_inner_dual(de.v)) ud.unite(de.u, de.v);
  }
  ls.cluster_of_point.assign(static_cast<std::size_t>(z.num_points()), -1);
  {
    std::map<int, int> id;
    for (int v = 0; v < O.num_vertices(); ++v) {
      auto [it, fresh] = id.emplace(up.find(v), static_cast<int>(id.size()));
      ls.cluster_of_point[z.primal_point(v)] = it->second;
    }
    ls.num_primal = static_cast<int>(id.size());
    std::map<int, int> did;
    for (int v = 0; v < D.num_vertices(); ++v) {
      if (!z.is_inner_dual(v)) continue;
      auto [it, fresh] = did.emplace(ud.find(v), ls.num_primal + static_cast<int>(did.size()));
      ls.cluster_of_point[z.dual_point(v)] = it->second;
    }
    ls.num_dual = static_cast<int>(did.size());
  }
  ls.root = ls.cluster_of_point[z.primal_point(O.domain_boundary().front())];

  // medial graph: each usable Z2 edge (no outer dual endpoint) is a medial point of degree 2
  const auto& ze = z.z2_edges();
  auto usable = [&](int p) { return ls.cluster_of_point[p] >= 0; };
  std::vector<std::array<int, 2>> nb(ze.size(), {-1, -1});
  auto link = [&](int p, int q, int r, int s) {
    const int a = z.z2_edge_index(p, q), b = z.z2_edge_index(r, s);
    if (a < 0 || b < 0) throw std::logic_error("trace_loops: missing medial point");
    for (auto [x, y] : {std::pair{a, b}, std::pair{b, a}}) {
      if (nb[x][0] < 0)
        nb[x][0] = y;
      else if (nb[x][1] < 0)
        nb[x][1] = y;
      else
        throw std::logic_error("trace_loops: medial point of degree > 2");
    }
  };
  for (int e = 0; e < O.num_edges(); ++e) {
    const auto& sq = z.square(e);
    if (eta[e]) {
      if (usable(sq.a)) link(sq.u, sq.a, sq.a, sq.v);
      if (usable(sq.b)) link(sq.v, sq.b, sq.b, sq.u);
    } else {
      if (!usable(sq.a) || !usable(sq.b))
        throw std::invalid_argument("trace_loops: closed edge next to the outside (unsupported domain shape)");
      link(sq.b, sq.u, sq.u, sq.a);
      link(sq.a, sq.v, sq.v, sq.b);
    }
  }
  std::vector<char> seen(ze.size(), 0);
  for (std::size_t start = 0; start < ze.size(); ++start) {
    const bool in_use = usable(ze[start][0]) && usable(ze[start][1]);
    if (!in_use || seen[start]) continue;
    if (nb[start][1] < 0) throw std::logic_error("trace_loops: open medial path");
    std::vector<int> loop;
    int prev = -1, cur = static_cast<int>(start);
    while (!seen[cur]) {
      seen[cur] = 1;
      loop.push_back(cur);
      const int nxt = nb[cur][0] != prev ? nb[cur][0] : nb[cur][1];
      prev = cur;
      cur = nxt;
    }
    if (cur != static_cast<int>(start)) throw std::logic_error("trace_loops: medial walk did not close");
    const int p = ze[start][0], q = ze[start][1];
    const int pp = z.is_primal_point(p) ? p : q;
    const int dp = pp == p ? q : p;
    ls.loops.push_back(std::move(loop));
    ls.primal_side.push_back(ls.cluster_of_point[pp]);
    ls.dual_side.push_back(ls.cluster_of_point[dp]);
  }

  // cluster tree: nodes are clusters, edges are loops
  const int nc = ls.num_primal + ls.num_dual;
  std::vector<std::vector<std::pair<int, int>>> adj(static_cast<std::size_t>(nc));
  for (std::size_t l = 0; l < ls.loops.size(); ++l) {
    adj[ls.primal_side[l]].push_back({ls.dual_side[l], static_cast<int>(l)});
    adj[ls.dual_side[l]].push_back({ls.primal_side[l], static_cast<int>(l)});
  }
  ls.cluster_parent.assign(static_cast<std::size_t>(nc), -2);
  ls.loop_into.assign(static_cast<std::size_t>(nc), -1);
  ls.parent.assign(ls.loops.size(), -1);
  ls.depth.assign(ls.loops.size(), 0);
  ls.cluster_parent[ls.root] = -1;
  ls.bfs_order.push_back(ls.root);
  for (std::size_t i = 0; i < ls.bfs_order.size(); ++i) {
    const int c = ls.bfs_order[i];
    for (auto [nbr, l] : adj[c]) {
      if (ls.cluster_parent[nbr] != -2) {
        if (nbr != ls.cluster_parent[c] || l != ls.loop_into[c]) throw std::logic_error("trace_loops: cluster graph is not a tree");
        continue;
      }
      ls.cluster_parent[nbr] = c;
      ls.loop_into[nbr] = l;
      const int up_loop = ls.loop_into[c];
      ls.parent[l] = up_loop;
      ls.depth[l] = up_loop < 0 ? 0 : ls.depth[up_loop] + 1;
      ls.bfs_order.push_back(nbr);
    }
  }
  if (static_cast<int>(ls.bfs_order.size()) != nc) throw std::logic_error("trace_loops: cluster graph is disconnected");
  return ls;
}

// BKW heights: boundary values (0 on L, 1 on L*), then one coin per loop, crossed
// inward; a loop raises the height with probability e^lambda / sqrt(q) on even
// domains and lowers it with that probability on odd domains.
template <class Source>
HeightFn bkw_heights(const EdgeConfig& eta, const SixVParams& sv, const Z2Domain& z, Source& src) {
  if (!(sv.lambda > 0.0)) throw std::invalid_argument("bkw_heights: needs q > 4");
  const LoopSet ls = trace_loops(eta, z);
  const double p_up = std::exp(sv.lambda) / (std::exp(sv.lambda) + std::exp(-sv.lambda));
  const int base = z.is_even() ? 0 : 1;   // height of the boundary cluster
  const int outer = z.is_even() ? 1 : 0;  // height on the boundary of Omega*
  const int dir = z.is_even() ? 1 : -1;
  std::vector<int> coin(ls.size());
  for (std::size_t l = 0; l < ls.size(); ++l) coin[l] = src.sign(p_up);
  std::vector<int> ch(static_cast<std::size_t>(ls.num_primal + ls.num_dual), 0);
  for (int c : ls.bfs_order) ch[c] = c == ls.root ? base : ch[ls.cluster_parent[c]] + dir * coin[ls.loop_into[c]];
  HeightFn h{std::vector<int>(static_cast<std::size_t>(z.num_points()), outer)};
  for (int i = 0; i < z.num_points(); ++i)
    if (ls.cluster_of_point[i] >= 0) h.h[i] = ch[ls.cluster_of_point[i]];
  return h;
}

}  // namespace atrc
