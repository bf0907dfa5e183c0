// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "atrc/certificates.hpp"
#include "atrc/experiments.hpp"
#include "atrc/oracle.hpp"
#include "atrc/parallel.hpp"
#include "atrc/simulate.hpp"

using namespace atrc;

namespace {

constexpr std::uint64_t seed = 20261015;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

// residual <= tol over a list of certificates
Outcome all_below(const std::vector<CheckResult>& rs) {
  bool ok = true;
  std::string s;
  for (const auto& r : rs) {
    ok = ok && r.pass();
    if (!s.empty()) s += "; ";
    s += r.name + " " + fmt(r.residual) + (r.pass() ? " <= " : " > ") + fmt(r.tolerance);
    if (r.skipped) s += " (skipped: " + r.note + ")";
  }
  return {ok, s};
}

CheckResult named(std::string name, double tol, const std::function<CheckResult()>& body) {
  return guarded(std::move(name), tol, body);
}

Outcome ac1() {
  return all_below({named("lambda1", 1e-10, [] { return cert_coupling(build_lambda(1)); }),
                    named("diamond", 1e-10, [] { return cert_coupling(diamond_domain()); })});
}

Outcome ac2() {
  return all_below({named("nu_omega_diamond", 1e-10, [] { return cert_nu_omega(diamond_domain()); })});
}

Outcome ac3() {
  return all_below({named("bkw_q5_q9_diamond", 1e-10, [] { return cert_bkw(diamond_domain(), {5.0, 9.0}); })});
}

Outcome ac4() {
  return all_below({named("involution", 1e-9, [] { return cert_dual_involution(); }),
                    named("sd_fixed_points", 1e-10, [] { return cert_sd_fixed_points(); }),
                    named("fk_self_duality", 1e-10, [] { return cert_fk_self_duality(diamond_domain(), {2.0, 5.0, 9.0}); })});
}

Outcome ac5() {
  return all_below({named("gks", 1e-12, [] { return cert_gks(diamond_domain()); }),
                    named("cbc", 1e-12, [] { return cert_cbc(diamond_domain()); }),
                    named("mon", 1e-12, [] { return cert_mon(diamond_domain()); }),
                    named("holley_violations", 0.0, [] {
                      return cert_holley({path_domain(1), path_domain(3), diamond_domain(), star_domain(),
                                          diamond_tail_domain(), path_domain(5)});
                    })});
}

Outcome ac6() {
  auto r = named("derivative_margin", 1e-6, [] { return cert_derivative(path_domain(3)); });
  auto out = all_below({r});
  out.detail += " (" + r.note + ")";
  return out;
}

// AC7: each sampler against exact singleton probabilities.
struct Event {
  std::string name;
  double exact;
  EstimateSeries est;
};

template <class Chain>
void sample(Chain& chain, const std::vector<std::pair<std::string, std::function<double(const Chain&)>>>& obs,
            const std::vector<double>& exact, const std::string& stream, std::vector<Event>& out) {
  RandomSource rng(seed, stream);
  auto s = run_chain<Chain>(chain, 101000, 1000, rng, obs);
  for (std::size_t i = 0; i < obs.size(); ++i) out.push_back({stream + ":" + obs[i].first, exact[i], std::move(s[i])});
}

Outcome ac7() {
  std::vector<Event> ev;
  {
    // AT spins, plus boundary on Lambda_1 and free on the diamond
    const auto p = ATParams::isotropic(0.3, 0.2, 1.0);
    for (int bc = 0; bc < 2; ++bc) {
      const Domain d = bc ? build_lambda(1) : diamond_domain();
      const SpinBC sbc = bc ? SpinBC::plus : SpinBC::free;
      const auto t = enumerate_at(d, p, sbc);
      const std::size_t n = static_cast<std::size_t>(d.num_vertices());
      std::vector<std::pair<std::string, std::function<double(const AtChain&)>>> obs;
      std::vector<double> exact;
      AtChain chain(d, p, sbc);
      for (int v = 0; v < d.num_vertices(); ++v) {
        if (chain.frozen(v)) continue;
        const std::size_t i = static_cast<std::size_t>(v);
        obs.push_back({"tau" + std::to_string(v), [v](const AtChain& c) { return c.state().tau[v] > 0 ? 1.0 : 0.0; }});
        exact.push_back(expectation(t, [i](const std::string& k) { return k[i] == '+' ? 1.0 : 0.0; }));
        obs.push_back({"taup" + std::to_string(v),
                       [v](const AtChain& c) { return c.state().tau_prime[v] > 0 ? 1.0 : 0.0; }});
        exact.push_back(expectation(t, [i, n](const std::string& k) { return k[n + i] == '+' ? 1.0 : 0.0; }));
      }
      sample(chain, obs, exact, bc ? "at_plus" : "at_free", ev);
    }
  }
  {
    // ATRC in both regimes
    const Domain d = diamond_domain();
    const std::size_t m = 4;
    for (const auto& [J, U, wired] : std::vector<std::tuple<double, double, bool>>{{0.2, sd_U(0.2), true}, {0.3, 0.1, false}}) {
      const auto w = make_atrc_weights(ATParams::isotropic(J, U, 1.0));
      const auto bp = wired ? d.wired_bc() : d.free_bc();
      const auto t = AtrcEnumerator(d, w, bp, bp).table();
      std::vector<std::pair<std::string, std::function<double(const AtrcChain&)>>> obs;
      std::vector<double> exact;
      for (int e = 0; e < 4; ++e) {
        const std::size_t i = static_cast<std::size_t>(e);
        obs.push_back({"tau" + std::to_string(e), [e](const AtrcChain& c) { return double(c.state().omega_tau[e]); }});
        exact.push_back(expectation(t, [i](const std::string& k) { return k[i] == '1' ? 1.0 : 0.0; }));
        obs.push_back({"second" + std::to_string(e), [e](const AtrcChain& c) { return double(c.state().omega_second[e]); }});
        exact.push_back(expectation(t, [i, m](const std::string& k) { return k[m + i] == '1' ? 1.0 : 0.0; }));
      }
      AtrcChain chain(d, w, bp, bp);
      sample(chain, obs, exact, w.regime == Regime::J_lt_U ? "atrc_11_JltU" : "atrc_00_JgeU", ev);
    }
  }
  {
    const Domain d = diamond_domain();
    const double p = 0.55, q = 2.5;
    const auto t = enumerate_fk(d, p, q, d.free_bc());
    std::vector<std::pair<std::string, std::function<double(const FkChain&)>>> obs;
    std::vector<double> exact;
    for (int e = 0; e < 4; ++e) {
      const std::size_t i = static_cast<std::size_t>(e);
      obs.push_back({"edge" + std::to_string(e), [e](const FkChain& c) { return double(c.state()[e]); }});
      exact.push_back(expectation(t, [i](const std::string& k) { return k[i] == '1' ? 1.0 : 0.0; }));
    }
    FkChain chain(d, p, q, d.free_bc());
    sample(chain, obs, exact, "fk_free", ev);
  }
  bool ok = true;
  double worst = 0.0;
  std::string worst_name;
  for (const auto& e : ev) {
    const double z = std::abs(e.est.mean - e.exact) / std::max(e.est.se(), 1e-300);
    const bool hit = std::abs(e.est.mean - e.exact) <= 4 * e.est.se();
    ok = ok && hit;
    if (z > worst) {
      worst = z;
      worst_name = e.name;
    }
  }
  return {ok, std::to_string(ev.size()) + " singleton events, 1e5 recorded sweeps each, worst |z| = " + fmt(worst) + " (" +
                  worst_name + ")"};
}

Outcome ac8() {
  const double J = 0.2, U = sd_U(J);
  const std::vector<int> ns{4, 8, 12, 16, 24};
  std::vector<std::vector<EstimateSeries>> res(ns.size());
  parallel_for(ns.size(), [&](std::size_t i) { res[i] = connection_run(J, U, 1.0, ns[i], 4400, 400, seed, "ac8", i); });
  bool ok = true;
  std::string s = "tautau:";
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] % 8 != 0) continue;
    const auto& e = res[i][1];
    ok = ok && e.mean >= 0.3;
    s += " n=" + std::to_string(ns[i]) + " " + fmt(e.mean) + "+-" + fmt(e.se());
  }
  std::vector<double> xs, ps;
  s += "; tau:";
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] > 16) continue;
    xs.push_back(ns[i]);
    ps.push_back(res[i][0].mean);
    s += " n=" + std::to_string(ns[i]) + " " + fmt(res[i][0].mean) + "+-" + fmt(res[i][0].se());
  }
  bool fit_ok = false;
  try {
    const auto f = fit_decay_rate(xs, ps);
    fit_ok = f.rate > 0 && f.r_squared > 0.9;
    s += "; rate " + fmt(f.rate) + " R^2 " + fmt(f.r_squared);
  } catch (const std::invalid_argument& e) {
    fit_ok = false;
    s += std::string("; fit failed: ") + e.what();
  }
  return {ok && fit_ok, s};
}

Outcome ac9() {
  const double J = 0.3, U = 0.1, beta = sd_beta(J, U);
  const int n = 8;
  const Domain d = crossing_box_domain(n);
  const auto w = make_atrc_weights(ATParams::isotropic(J, U, beta));
  std::vector<EstimateSeries> est(2);
  parallel_for(2, [&](std::size_t i) {
    const auto bp = i ? d.wired_bc() : d.free_bc();
    AtrcChain chain(d, w, bp, bp);
    RandomSource rng(seed, "ac9", i);
    est[i] = estimate_crossing(chain, n, Layer::tau, 22000, 2000, rng);
  });
  const bool lo = est[0].mean <= 0.5 + 3 * est[0].se();
  const bool hi = est[1].mean >= 0.5 - 3 * est[1].se();
  return {lo && hi, "ATRC00(H) = " + fmt(est[0].mean) + "+-" + fmt(est[0].se()) + ", ATRC11(H) = " + fmt(est[1].mean) +
                        "+-" + fmt(est[1].se()) + " at beta_sd = " + fmt(beta)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"AC1 coupling identity", ac1},         {"AC2 nu_Omega marginal", ac2},   {"AC3 BKW heights", ac3},
      {"AC4 duality", ac4},                   {"AC5 inequality suites", ac5},   {"AC6 derivative bound", ac6},
      {"AC7 MCMC stationarity", ac7},         {"AC8 desk-scale decay", ac8},    {"AC9 self-dual crossing", ac9},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
