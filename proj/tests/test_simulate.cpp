#include <gtest/gtest.h>

#include <cmath>

#include "atrc/certificates.hpp"
#include "atrc/oracle.hpp"
#include "atrc/simulate.hpp"

using namespace atrc;

namespace {

Domain single_edge() { return subgraph_domain({{LatticePoint{0, 0}, LatticePoint{1, 1}}}); }

}  // namespace

TEST(AtHeatbath, ZeroCouplingIsUniform) {
  const auto d = build_lambda(1);
  AtChain ch(d, ATParams::isotropic(0.0, 0.0, 1.0), SpinBC::free);
  for (double p : ch.conditional(d.index_of({0, 0}))) EXPECT_DOUBLE_EQ(p, 0.25);
}

TEST(AtHeatbath, LargeBetaAlignsWithNeighbours) {
  const auto d = build_lambda(1);
  AtChain ch(d, ATParams::isotropic(0.3, 0.2, 20.0), SpinBC::plus);
  EXPECT_GT(ch.conditional(d.index_of({0, 0}))[0], 1 - 1e-12);
}

TEST(AtHeatbath, FrozenBoundaryIsSkipped) {
  const auto d = build_lambda(1);
  AtChain ch(d, ATParams::isotropic(0.3, 0.2, 1.0), SpinBC::plus);
  RandomSource rng(1);
  const int b = d.boundary().front();
  EXPECT_TRUE(ch.frozen(b));
  EXPECT_FALSE(ch.site_heatbath(b, rng));
  for (int t = 0; t < 50; ++t) ch.sweep(rng);
  for (int v : d.boundary()) {
    EXPECT_EQ(ch.state().tau[v], 1);
    EXPECT_EQ(ch.state().tau_prime[v], 1);
  }
}

TEST(FkHeatbath, OpenProbability) {
  const auto d = single_edge();
  FkChain free(d, 0.6, 2.0, d.free_bc());
  EXPECT_NEAR(free.open_probability(0), 0.6 / (0.6 + 0.4 * 2.0), 1e-15);
  FkChain wired(d, 0.6, 2.0, d.wired_bc());
  EXPECT_NEAR(wired.open_probability(0), 0.6, 1e-15);
  EXPECT_THROW(FkChain(d, 1.5, 2.0, d.free_bc()), std::invalid_argument);
}

TEST(FkHeatbath, CycleClosesThroughOtherEdges) {
  const auto d = diamond_domain();
  FkChain ch(d, 0.5, 3.0, d.free_bc());
  for (int e = 1; e < 4; ++e) ch.mutable_state().set(e, true);
  EXPECT_NEAR(ch.open_probability(0), 0.5, 1e-15);
  ch.mutable_state().set(1, false);
  EXPECT_NEAR(ch.open_probability(0), 0.5 / (0.5 + 0.5 * 3.0), 1e-15);
}

TEST(AtrcHeatbath, IsolatedEdgeMatchesOracle) {
  const auto d = single_edge();
  for (double U : {0.6, 0.1}) {
    const auto w = make_atrc_weights(ATParams::isotropic(0.3, U, 1.0));
    for (bool wired : {false, true}) {
      const auto bp = wired ? d.wired_bc() : d.free_bc();
      AtrcChain ch(d, w, bp, bp);
      const auto pr = ch.conditional(0);
      const auto t = AtrcEnumerator(d, w, bp, bp).table();
      EXPECT_NEAR(pr[0], t.prob_of("00"), 1e-14);
      EXPECT_NEAR(pr[1], t.prob_of("01"), 1e-14);
      if (w.regime == Regime::J_lt_U) {
        EXPECT_NEAR(pr[2], t.prob_of("11"), 1e-14);
        EXPECT_EQ(pr[3], 0.0);
      } else {
        EXPECT_NEAR(pr[2], t.prob_of("10"), 1e-14);
        EXPECT_NEAR(pr[3], t.prob_of("11"), 1e-14);
      }
    }
  }
}

TEST(AtrcHeatbath, SweepKeepsContainment) {
  const auto d = build_lambda(2);
  AtrcChain ch(d, make_atrc_weights(ATParams::isotropic(0.2, 0.5, 1.0)), d.wired_bc(), d.wired_bc());
  RandomSource rng(5);
  for (int t = 0; t < 200; ++t) {
    ch.sweep(rng);
    ASSERT_TRUE(ch.state().valid());
  }
  EXPECT_EQ(ch.sweeps(), 200u);
}

TEST(Summarize, EmptyAndConstant) {
  EXPECT_EQ(summarize("x", {}).error, "no recorded samples");
  const auto c = summarize("c", std::vector<double>(160, 0.5));
  EXPECT_TRUE(c.error.empty());
  EXPECT_DOUBLE_EQ(c.mean, 0.5);
  EXPECT_EQ(c.se(), 0.0);
  EXPECT_EQ(c.batch_means.size(), 16u);
}

TEST(Summarize, IidBatchError) {
  RandomSource rng(11);
  std::vector<double> v;
  for (int i = 0; i < 16000; ++i) v.push_back(rng.bernoulli(0.3) ? 1.0 : 0.0);
  const auto s = summarize("iid", v);
  EXPECT_NEAR(s.mean, 0.3, 0.02);
  // the iid standard error is sqrt(0.21 / 16000) = 0.0036
  EXPECT_GT(s.se(), 0.0036 / 3);
  EXPECT_LT(s.se(), 0.0036 * 3);
  EXPECT_TRUE(s.converged);
}

TEST(RunChain, BurnInLongerThanRunThrows) {
  const auto d = single_edge();
  FkChain ch(d, 0.5, 1.0, d.free_bc());
  RandomSource rng(1);
  EXPECT_THROW(run_chain<FkChain>(ch, 10, 11, rng, {}), std::invalid_argument);
  const auto s = run_chain<FkChain>(ch, 10, 10, rng, {{"e", [](const FkChain& c) { return double(c.state()[0]); }}});
  EXPECT_EQ(s.front().error, "no recorded samples");
}

TEST(RunChain, DeterministicForSeed) {
  const auto d = build_lambda(2);
  auto run = [&](std::uint64_t seed) {
    AtrcChain ch(d, make_atrc_weights(ATParams::isotropic(0.2, 0.5, 1.0)), d.wired_bc(), d.wired_bc());
    RandomSource rng(seed, "test");
    return estimate_connection(ch, d.index_of({0, 0}), {d.boundary().begin(), d.boundary().end()}, Layer::tau, 400, 40, rng)
        .values;
  };
  EXPECT_EQ(run(9), run(9));
}

TEST(RunChain, TwoSeedsAgree) {
  const auto d = build_lambda(2);
  auto run = [&](std::uint64_t seed) {
    AtrcChain ch(d, make_atrc_weights(ATParams::isotropic(0.2, 0.5, 1.0)), d.wired_bc(), d.wired_bc());
    RandomSource rng(seed, "calibration");
    return estimate_connection(ch, d.index_of({0, 0}), {d.boundary().begin(), d.boundary().end()}, Layer::tau, 20000, 1000, rng);
  };
  const auto a = run(1), b = run(2);
  EXPECT_LT(std::abs(a.mean - b.mean), 4 * std::hypot(a.se(), b.se()));
}

TEST(Estimators, TargetContainingX) {
  const auto d = build_lambda(2);
  AtrcChain ch(d, make_atrc_weights(ATParams::isotropic(0.2, 0.5, 1.0)), d.free_bc(), d.free_bc());
  RandomSource rng(3);
  const int x = d.index_of({0, 0});
  EXPECT_EQ(estimate_connection(ch, x, {x}, Layer::tau, 100, 0, rng).mean, 1.0);
  EXPECT_THROW(estimate_connection(ch, -1, {x}, Layer::tau, 100, 0, rng), std::invalid_argument);
}

TEST(Estimators, CrossingOnFixedConfigurations) {
  const auto d = crossing_box_domain(3);
  EXPECT_TRUE(crosses_horizontally(d, EdgeConfig(static_cast<std::size_t>(d.num_edges()), true), 3));
  EXPECT_FALSE(crosses_horizontally(d, EdgeConfig(static_cast<std::size_t>(d.num_edges())), 3));
  EXPECT_NO_THROW(require_box(d, 3));
  EXPECT_THROW(require_box(d, 4), std::invalid_argument);
}

TEST(Estimators, CrossingAtLargeAndSmallBeta) {
  const auto d = crossing_box_domain(3);
  RandomSource rng(4);
  AtrcChain hot(d, make_atrc_weights(ATParams::isotropic(0.3, 0.1, 0.01)), d.free_bc(), d.free_bc());
  EXPECT_LT(estimate_crossing(hot, 3, Layer::tau, 400, 50, rng).mean, 0.05);
  AtrcChain cold(d, make_atrc_weights(ATParams::isotropic(0.3, 0.1, 5.0)), d.wired_bc(), d.wired_bc());
  EXPECT_GT(estimate_crossing(cold, 3, Layer::tau, 400, 50, rng).mean, 0.95);
}

TEST(Phi, SingletonAndLimits) {
  const auto s0 = build_lambda(0);
  EXPECT_EQ(estimate_phi(0.2, 0.5, 1.0, s0, 0, PhiMethod::exact).value, 1.0);
  const auto s1 = build_lambda(1);
  const int x = s1.index_of({0, 0});
  EXPECT_LT(estimate_phi(0.2, 0.5, 1e-4, s1, x, PhiMethod::exact).value, 1e-3);
  double prev = 0;
  for (double beta : {0.2, 0.5, 1.0, 2.0}) {
    const double v = estimate_phi(0.2, 0.5, beta, s1, x, PhiMethod::exact).value;
    EXPECT_GT(v, prev);
    prev = v;
  }
  EXPECT_GT(prev, 6.0);
}

TEST(Phi, McmcMatchesExact) {
  const auto s = build_lambda(1);
  const int x = s.index_of({0, 0});
  const auto ex = estimate_phi(0.2, 0.5, 0.6, s, x, PhiMethod::exact);
  const auto mc = estimate_phi(0.2, 0.5, 0.6, s, x, PhiMethod::mcmc, 40000, 1000, 17);
  EXPECT_LT(std::abs(ex.value - mc.value), 4 * mc.stderr_ + 1e-12);
}

TEST(FitDecay, ExactExponential) {
  std::vector<double> ns{4, 8, 12, 16}, ps;
  for (double n : ns) ps.push_back(std::exp(-0.5 * n));
  const auto f = fit_decay_rate(ns, ps);
  EXPECT_NEAR(f.rate, 0.5, 1e-12);
  EXPECT_NEAR(f.intercept, 0.0, 1e-12);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
}

TEST(FitDecay, ConstantAndErrors) {
  const auto f = fit_decay_rate({1, 2, 3}, {0.4, 0.4, 0.4});
  EXPECT_NEAR(f.rate, 0.0, 1e-15);
  EXPECT_EQ(f.r_squared, 1.0);
  EXPECT_THROW(fit_decay_rate({1, 2}, {0.5, 0.4}), std::invalid_argument);
  EXPECT_THROW(fit_decay_rate({1, 1, 2}, {0.5, 0.4, 0.3}), std::invalid_argument);
  EXPECT_THROW(fit_decay_rate({1, 2, 3}, {0.5, 0.0, 0.3}), std::invalid_argument);
}

TEST(FitDecay, NoisyRate) {
  RandomSource rng(21);
  std::vector<double> ns, ps;
  for (int n = 2; n <= 20; n += 2) {
    ns.push_back(n);
    ps.push_back(std::exp(-0.3 * n + 0.1 * (rng.uniform() - 0.5)));
  }
  const auto f = fit_decay_rate(ns, ps);
  EXPECT_GT(f.rate, 0.25);
  EXPECT_LT(f.rate, 0.35);
  EXPECT_GT(f.r_squared, 0.9);
}

TEST(Derivative, SureEventHasZeroDerivative) {
  const auto d = path_domain(2);
  const auto r = derivative_covariance_check(0.2, 0.5, 1.0, d, [](std::uint64_t, std::uint64_t) { return true; });
  EXPECT_NEAR(r.derivative, 0.0, 1e-9);
  EXPECT_NEAR(r.cov_tau, 0.0, 1e-12);
  EXPECT_NEAR(r.cov_second, 0.0, 1e-12);
}

TEST(Derivative, IdentityAndBound) {
  const auto d = build_lambda(1);
  const int x = d.index_of({0, 0});
  const auto conn = connection_table(d, x, d.boundary());
  for (double U : {0.5, 0.1}) {
    const auto r = derivative_covariance_check(0.3, U, 0.8, d, [&](std::uint64_t mt, std::uint64_t) { return conn[mt] != 0; });
    EXPECT_LT(r.identity_residual, 1e-6);
    EXPECT_GT(r.c, 0.0);
    EXPECT_GE(r.margin, -1e-6);
  }
}

TEST(Derivative, WeightDerivativesByFiniteDifference) {
  // J<U: log w_tau and log w_tautau'
  const double J = 0.2, U = 0.5, b = 0.9, h = 1e-6;
  auto lwt = [&](double x) { return std::log(std::exp(2 * x * U) * 2 * std::sinh(2 * x * J)); };
  auto lwtt = [&](double x) { return std::log(std::expm1(2 * x * (U - J))); };
  const auto d = weight_log_derivatives(J, U, b);
  EXPECT_NEAR(d.tau, (lwt(b + h) - lwt(b - h)) / (2 * h), 1e-6);
  EXPECT_NEAR(d.second, (lwtt(b + h) - lwtt(b - h)) / (2 * h), 1e-6);
  EXPECT_THROW(weight_log_derivatives(0.3, 0.3, 1.0), std::invalid_argument);
}

TEST(Holley, NoViolations) {
  for (const auto& d : {diamond_domain(), path_domain(3), star_domain()}) {
    const auto r = holley_monotonicity(d, 1.0, 2.5, 0.7);
    EXPECT_GT(r.checks, 0u);
    EXPECT_EQ(r.violations, 0u);
  }
  EXPECT_THROW(holley_monotonicity(build_lambda(1), 1.0, 2.0, 0.5), CapExceeded);
}

TEST(Stationarity, AtrcEdgeMarginal) {
  const auto d = diamond_domain();
  const auto w = make_atrc_weights(ATParams::isotropic(0.25, 0.5, 1.0));
  const auto t = AtrcEnumerator(d, w, d.wired_bc(), d.wired_bc()).table();
  const double exact = expectation(t, [](const std::string& k) { return k[0] == '1' ? 1.0 : 0.0; });
  AtrcChain ch(d, w, d.wired_bc(), d.wired_bc());
  RandomSource rng(2024, "stationarity");
  const auto s = run_chain<AtrcChain>(ch, 1000000, 1000, rng,
                                      {{"e0", [](const AtrcChain& c) { return double(c.state().omega_tau[0]); }}});
  EXPECT_LT(std::abs(s.front().mean - exact), 3 * s.front().se()) << s.front().mean << " vs " << exact;
}
