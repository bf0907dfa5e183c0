#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "atrc/lattice.hpp"

using namespace atrc;

namespace {

// independent adjacency scan: all pairs at diagonal distance one
int brute_edge_count(const std::vector<LatticePoint>& pts) {
  int n = 0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if (std::abs(pts[i].x - pts[j].x) == 1 && std::abs(pts[i].y - pts[j].y) == 1) ++n;
  return n;
}

std::vector<LatticePoint> l1_ball(int r) {
  std::vector<LatticePoint> out;
  for (int x = -r; x <= r; ++x)
    for (int y = -r; y <= r; ++y)
      if (std::abs(x) + std::abs(y) <= r && (x + y) % 2 == 0) out.push_back({x, y});
  return out;
}

}  // namespace

TEST(BuildLambda, DegenerateBox) {
  const auto d = build_lambda(0);
  EXPECT_EQ(d.num_vertices(), 1);
  EXPECT_EQ(d.num_edges(), 0);
  EXPECT_TRUE(d.contains({0, 0}));
}

TEST(BuildLambda, LambdaOneByHand) {
  const auto d = build_lambda(1);
  EXPECT_EQ(d.num_vertices(), 9);
  EXPECT_EQ(d.num_edges(), 12);
  // Lambda_1 is the L-points with |x| + |y| <= 2
  const auto ball = l1_ball(2);
  EXPECT_EQ(ball.size(), 9u);
  for (const auto& p : ball) EXPECT_TRUE(d.contains(p)) << p;
  EXPECT_EQ(d.boundary().size(), 8u);
  EXPECT_FALSE(d.is_boundary(d.index_of({0, 0})));
}

TEST(BuildLambda, LambdaTwoAgainstAdjacencyScan) {
  const auto d = build_lambda(2);
  EXPECT_EQ(d.num_vertices(), 25);
  std::vector<LatticePoint> pts(d.vertices().begin(), d.vertices().end());
  EXPECT_EQ(d.num_edges(), brute_edge_count(pts));
  EXPECT_EQ(d.num_edges(), 40);
  EXPECT_EQ(d.domain_boundary().size(), 16u);
}

TEST(BuildLambda, EdgeOrderIsLexicographic) {
  const auto d = build_lambda(2);
  for (int e = 1; e < d.num_edges(); ++e) {
    const auto a = std::pair(d.vertex(d.edge(e - 1).u), d.vertex(d.edge(e - 1).v));
    const auto b = std::pair(d.vertex(d.edge(e).u), d.vertex(d.edge(e).v));
    EXPECT_LT(a, b);
  }
  EXPECT_EQ(build_lambda(2).to_text(), d.to_text());
}

TEST(CrossingEdge, SingleEdge) {
  const auto c = crossing_edge({0, 0}, {1, 1});
  std::set<LatticePoint> got(c.begin(), c.end());
  EXPECT_EQ(got, (std::set<LatticePoint>{{1, 0}, {0, 1}}));
  const auto back = crossing_edge(c[0], c[1]);
  std::set<LatticePoint> orig(back.begin(), back.end());
  EXPECT_EQ(orig, (std::set<LatticePoint>{{0, 0}, {1, 1}}));
}

TEST(DualDomain, SingleEdge) {
  const auto d = subgraph_domain({{LatticePoint{0, 0}, LatticePoint{1, 1}}});
  const auto dd = dual_domain(d);
  ASSERT_EQ(dd.domain.num_edges(), 1);
  EXPECT_TRUE(dd.domain.contains({1, 0}));
  EXPECT_TRUE(dd.domain.contains({0, 1}));
  EXPECT_EQ(dd.domain.sublattice(), Sublattice::dual);
}

TEST(DualDomain, LambdaOneInvolution) {
  const auto d = build_lambda(1);
  const auto dd = dual_domain(d);
  ASSERT_EQ(dd.domain.num_edges(), 12);
  const auto ddd = dual_domain(dd.domain);
  for (int e = 0; e < d.num_edges(); ++e) {
    const int f = ddd.edge_to_dual[dd.edge_to_dual[e]];
    ASSERT_TRUE(ddd.domain.contains(d.vertex(d.edge(e).u)));
    EXPECT_EQ(ddd.domain.vertex(ddd.domain.edge(f).u), d.vertex(d.edge(e).u));
    EXPECT_EQ(ddd.domain.vertex(ddd.domain.edge(f).v), d.vertex(d.edge(e).v));
  }
}

TEST(DualDomain, DiamondDualEdgesMeetTheCenter) {
  const auto d = diamond_domain();
  const auto dd = dual_domain(d);
  const int c = dd.domain.index_of({1, 0});
  ASSERT_GE(c, 0);
  for (int e = 0; e < dd.domain.num_edges(); ++e) {
    const auto& ed = dd.domain.edge(e);
    EXPECT_TRUE(ed.u == c || ed.v == c);
  }
  EXPECT_EQ(dd.domain.num_vertices(), 5);
}

TEST(DualDomain, SameEdgeCount) {
  for (const auto& d : {build_lambda(1), build_lambda(2), diamond_domain(), rect_domain(0, 3, 0, 2)})
    EXPECT_EQ(dual_domain(d).domain.num_edges(), d.num_edges());
}

TEST(EvenDomain, Diamond) {
  const auto z = even_domain(diamond_domain());
  EXPECT_TRUE(z.is_even());
  EXPECT_EQ(z.primal().num_vertices(), 4);
  EXPECT_EQ(z.dual().num_vertices(), 5);
  EXPECT_EQ(z.num_points(), 9);
  // boundary: the 4 cycle vertices and the 4 outer dual vertices
  EXPECT_EQ(z.boundary().size(), 8u);
}

TEST(EvenDomain, LambdaOneBoundary) {
  const auto d = build_lambda(1);
  const auto z = even_domain(d);
  // dD = cycle of Lambda_1 together with the boundary of Lambda_1*
  std::set<LatticePoint> expect;
  for (int v : d.domain_boundary()) expect.insert(d.vertex(v));
  for (int v : z.dual().boundary()) expect.insert(z.dual().vertex(v));
  std::set<LatticePoint> got;
  for (int i : z.boundary()) got.insert(z.point(i));
  EXPECT_EQ(got, expect);
  EXPECT_EQ(z.num_points(), 9 + 12);
  // Delta_2: the Z^2 points with |x| + |y| <= 2 together with the outer dual ring
  for (int x = -2; x <= 2; ++x)
    for (int y = -2; y <= 2; ++y)
      if (std::abs(x) + std::abs(y) <= 2) EXPECT_GE(z.index_of({x, y}), 0) << x << "," << y;
}

TEST(EvenDomain, ParityFlag) {
  EXPECT_TRUE(even_domain(diamond_domain()).is_even());
  const auto odd = even_domain(diamond_domain({1, 0}));
  EXPECT_FALSE(odd.is_even());
  EXPECT_EQ(odd.bullet().sublattice(), Sublattice::primal);
  EXPECT_EQ(odd.circ().sublattice(), Sublattice::dual);
}

TEST(EvenDomain, RejectsNonCycleDomain) {
  EXPECT_THROW(even_domain(subgraph_domain({{LatticePoint{0, 0}, LatticePoint{1, 1}}})), std::exception);
}

TEST(CycleDomain, EdgeBoundaryLiesOnTheCycle) {
  for (const auto& d : {build_lambda(1), build_lambda(2), rect_domain(0, 2, 0, 1), diamond_domain()}) {
    int on = 0;
    for (int e = 0; e < d.num_edges(); ++e) {
      if (!d.on_edge_boundary(e)) continue;
      ++on;
      EXPECT_TRUE(d.on_domain_boundary(d.edge(e).u));
      EXPECT_TRUE(d.on_domain_boundary(d.edge(e).v));
    }
    EXPECT_EQ(on, static_cast<int>(d.domain_boundary().size()));
    for (int v : d.domain_boundary()) EXPECT_TRUE(d.is_boundary(v));
  }
}

TEST(CycleDomain, RectInteriorByRayCasting) {
  const auto d = rect_domain(0, 2, 0, 2);
  EXPECT_EQ(d.num_vertices(), 9);
  EXPECT_EQ(d.domain_boundary().size(), 8u);
  EXPECT_FALSE(d.on_domain_boundary(d.index_of({2, 0})));
}

TEST(CountClusters, LambdaOne) {
  const auto d = build_lambda(1);
  EdgeConfig empty(static_cast<std::size_t>(d.num_edges()));
  EXPECT_EQ(count_clusters(d, empty, d.free_bc()), 9);
  EXPECT_EQ(count_clusters(d, empty, d.wired_bc()), 2);
  EdgeConfig full(static_cast<std::size_t>(d.num_edges()), true);
  EXPECT_EQ(count_clusters(d, full, d.free_bc()), 1);
  EXPECT_EQ(count_clusters(d, full, d.wired_bc()), 1);
}

TEST(CountClusters, MonotoneUnderOpening) {
  const auto d = build_lambda(1);
  const std::size_t m = static_cast<std::size_t>(d.num_edges());
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    const auto cfg = EdgeConfig::from_mask(mask, m);
    const int k = count_clusters(d, cfg, d.wired_bc());
    for (std::size_t e = 0; e < m; ++e) {
      if (cfg[e]) continue;
      auto up = cfg;
      up.set(e, true);
      ASSERT_LE(count_clusters(d, up, d.wired_bc()), k);
    }
  }
}

TEST(BoundaryPartition, RejectsOverlap) {
  BoundaryPartition bp{{{0, 1}, {1, 2}}};
  EXPECT_THROW(bp.block_of(3), std::invalid_argument);
}

TEST(DomainText, RoundTripFields) {
  const auto d = diamond_domain();
  const auto t = d.to_text();
  EXPECT_NE(t.find("# atrc-domain v1"), std::string::npos);
  EXPECT_NE(t.find("vertices 4"), std::string::npos);
  EXPECT_NE(t.find("edges 4"), std::string::npos);
}
