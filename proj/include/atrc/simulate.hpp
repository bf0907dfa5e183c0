#pragma once

// Single-site and single-edge heat-bath chains for the AT, ATRC and FK measures,
// batch-means estimators, and exact checks driven by the oracle.

#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "atrc/lattice.hpp"
#include "atrc/measures.hpp"
#include "atrc/numeric.hpp"
#include "atrc/oracle.hpp"
#include "atrc/random.hpp"

namespace atrc {

// Answers "are u and v joined without edge e?" for a configuration on a domain
// whose boundary blocks are identified. Each block is a virtual node, and two
// breadth-first searches grow alternately from u and v until they meet or one
// of them runs out.
class Connectivity {
 public:
  Connectivity(const Domain& d, const BoundaryPartition& bp)
      : d_(d), nv_(d.num_vertices()), block_(bp.block_of(d.num_vertices())), members_(bp.blocks) {
    mark_.assign(static_cast<std::size_t>(nv_ + static_cast<int>(members_.size())), 0);
    qa_.reserve(mark_.size());
    qb_.reserve(mark_.size());
  }

  template <class Open>
  bool connected_without(int u, int v, int skip_edge, Open&& open) {
    if (u == v) return true;
    if (stamp_ > std::numeric_limits<std::uint32_t>::max() - 4) {
      std::fill(mark_.begin(), mark_.end(), 0);
      stamp_ = 0;
    }
    const std::uint32_t sa = stamp_ + 1, sb = stamp_ + 2;
    stamp_ += 2;
    qa_.clear();
    qb_.clear();
    qa_.push_back(u);
    qb_.push_back(v);
    mark_[u] = sa;
    mark_[v] = sb;
    std::size_t ha = 0, hb = 0;
    while (ha < qa_.size() && hb < qb_.size()) {
      if (expand(qa_, ha, sa, sb, skip_edge, open)) return true;
      if (expand(qb_, hb, sb, sa, skip_edge, open)) return true;
    }
    return false;
  }

 private:
  template <class Open>
  bool expand(std::vector<int>& q, std::size_t& head, std::uint32_t mine, std::uint32_t other, int skip_edge,
              Open& open) {
    const int x = q[head++];
    auto visit = [&](int y) {
      if (mark_[y] == other) return true;
      if (mark_[y] != mine) {
        mark_[y] = mine;
        q.push_back(y);
      }
      return false;
    };
    if (x < nv_) {
      for (const auto& inc : d_.incident(x))
        if (inc.edge != skip_edge && open(inc.edge) && visit(inc.neighbor)) return true;
      const int b = block_[x];
      if (b >= 0 && visit(nv_ + b)) return true;
    } else {
      for (int y : members_[x - nv_])
        if (visit(y)) return true;
    }
    return false;
  }

  const Domain& d_;
  int nv_;
  std::vector<int> block_;
  std::vector<std::vector<int>> members_;
  std::vector<std::uint32_t> mark_;
  std::uint32_t stamp_ = 0;
  std::vector<int> qa_, qb_;
};

// ---------------------------------------------------------------------------
// AT spins.

class AtChain {
 public:
  AtChain(const Domain& d, ATParams p, SpinBC bc)
      : d_(d), p_(p), bc_(bc),
        s_{std::vector<int>(static_cast<std::size_t>(d.num_vertices()), 1),
           std::vector<int>(static_cast<std::size_t>(d.num_vertices()), 1)} {}

  const Domain& domain() const { return d_; }
  const SpinState& state() const { return s_; }
  SpinState& mutable_state() { return s_; }
  std::uint64_t sweeps() const { return sweeps_; }

  bool frozen(int v) const { return bc_ == SpinBC::plus && d_.is_boundary(v); }

  // Exact conditional law of (tau_v, tau'_v) given the neighbours, in the order
  // (+,+), (-,+), (+,-), (-,-).
  std::array<double, 4> conditional(int v) const {
    std::array<double, 4> lw{};
    for (int c = 0; c < 4; ++c) {
      const int t = (c & 1) ? -1 : 1, tp = (c & 2) ? -1 : 1;
      double e = 0.0;
      for (const auto& inc : d_.incident(v)) {
        const int a = t * s_.tau[inc.neighbor], b = tp * s_.tau_prime[inc.neighbor];
        e += p_.J_tau * a + p_.J_tau_prime * b + p_.U * a * b;
      }
      lw[c] = p_.beta * e;
    }
    const double mx = std::max(std::max(lw[0], lw[1]), std::max(lw[2], lw[3]));
    std::array<double, 4> pr{};
    double z = 0.0;
    for (int c = 0; c < 4; ++c) z += (pr[c] = std::exp(lw[c] - mx));
    for (auto& x : pr) x /= z;
    return pr;
  }

  template <class Source>
  bool site_heatbath(int v, Source& src) {
    if (frozen(v)) {
      if (!warned_) {
        std::clog << "at_site_heatbath: boundary vertex is frozen under plus boundary conditions\n";
        warned_ = true;
      }
      return false;
    }
    const auto pr = conditional(v);
    const int c = src.choose(pr);
    s_.tau[v] = (c & 1) ? -1 : 1;
    s_.tau_prime[v] = (c & 2) ? -1 : 1;
    return true;
  }

  template <class Source>
  void sweep(Source& src) {
    for (int v = 0; v < d_.num_vertices(); ++v)
      if (!frozen(v)) site_heatbath(v, src);
    ++sweeps_;
  }

 private:
  const Domain& d_;
  ATParams p_;
  SpinBC bc_;
  SpinState s_;
  std::uint64_t sweeps_ = 0;
  bool warned_ = false;
};

// ---------------------------------------------------------------------------
// FK edges.

class FkChain {
 public:
  FkChain(const Domain& d, double p, double q, const BoundaryPartition& bp)
      : d_(d), p_(p), q_(q), conn_(d, bp), cfg_(static_cast<std::size_t>(d.num_edges())) {
    if (!(p >= 0.0 && p <= 1.0) || !(q > 0.0)) throw std::invalid_argument("FkChain: need 0 <= p <= 1, q > 0");
  }

  const Domain& domain() const { return d_; }
  const EdgeConfig& state() const { return cfg_; }
  EdgeConfig& mutable_state() { return cfg_; }
  std::uint64_t sweeps() const { return sweeps_; }

  double open_probability(int e) {
    const auto& ed = d_.edge(e);
    const bool joined = conn_.connected_without(ed.u, ed.v, e, [&](int f) { return cfg_[f]; });
    const double qk = joined ? 1.0 : q_;
    return p_ / (p_ + (1.0 - p_) * qk);
  }

  template <class Source>
  void edge_heatbath(int e, Source& src) {
    cfg_.set(e, src.bernoulli(open_probability(e)));
  }

  template <class Source>
  void sweep(Source& src) {
    for (int e = 0; e < d_.num_edges(); ++e) edge_heatbath(e, src);
    ++sweeps_;
  }

 private:
  const Domain& d_;
  double p_, q_;
  Connectivity conn_;
  EdgeConfig cfg_;
  std::uint64_t sweeps_ = 0;
};

// ---------------------------------------------------------------------------
// ATRC edges.

// Unnormalized conditional weights of the states of one edge. For J<U the
// states are (0,0), (0,1), (1,1); for J>=U they are (0,0), (0,1), (1,0), (1,1).
// split_tau / split_second say whether the endpoints are disconnected in that
// layer once the edge is removed.
inline std::array<double, 4> atrc_edge_weights(const ATRCWeights& w, int e, bool split_tau, bool split_second) {
  const double dt = split_tau ? 2.0 : 1.0, ds = split_second ? 2.0 : 1.0;
  if (w.regime == Regime::J_lt_U) return {dt * ds, w.w_tautau * dt, w.wt(e), 0.0};
  return {w.a00 * dt * ds, w.a01 * dt, w.a10 * ds, w.a11};
}

class AtrcChain {
 public:
  AtrcChain(const Domain& d, ATRCWeights w, const BoundaryPartition& bp_tau, const BoundaryPartition& bp_second)
      : d_(d), w_(std::move(w)), conn_tau_(d, bp_tau), conn_second_(d, bp_second),
        pair_{EdgeConfig(static_cast<std::size_t>(d.num_edges())), EdgeConfig(static_cast<std::size_t>(d.num_edges())),
              layer_kind(w_.regime)} {}

  const Domain& domain() const { return d_; }
  const EdgePair& state() const { return pair_; }
  EdgePair& mutable_state() { return pair_; }
  const ATRCWeights& weights() const { return w_; }
  std::uint64_t sweeps() const { return sweeps_; }

  std::array<double, 4> conditional(int e) {
    const auto& ed = d_.edge(e);
    const bool jt = conn_tau_.connected_without(ed.u, ed.v, e, [&](int f) { return pair_.omega_tau[f]; });
    const bool js = conn_second_.connected_without(ed.u, ed.v, e, [&](int f) { return pair_.omega_second[f]; });
    auto wts = atrc_edge_weights(w_, e, !jt, !js);
    double z = wts[0] + wts[1] + wts[2] + wts[3];
    for (auto& x : wts) x /= z;
    return wts;
  }

  template <class Source>
  void edge_heatbath(int e, Source& src) {
    const auto pr = conditional(e);
    const int c = src.choose(std::span<const double>(pr.data(), w_.regime == Regime::J_lt_U ? 3 : 4));
    if (w_.regime == Regime::J_lt_U) {
      pair_.omega_tau.set(e, c == 2);
      pair_.omega_second.set(e, c >= 1);
    } else {
      pair_.omega_tau.set(e, c >= 2);
      pair_.omega_second.set(e, c == 1 || c == 3);
    }
  }

  template <class Source>
  void sweep(Source& src) {
    for (int e = 0; e < d_.num_edges(); ++e) edge_heatbath(e, src);
    assert(pair_.valid());
    ++sweeps_;
  }

 private:
  const Domain& d_;
  ATRCWeights w_;
  Connectivity conn_tau_, conn_second_;
  EdgePair pair_;
  std::uint64_t sweeps_ = 0;
};

// ---------------------------------------------------------------------------
// Estimates.

inline constexpr int num_batches = 16;
inline constexpr double min_ess = 100.0;

struct EstimateSeries {
  std::string name;
  std::vector<double> values;
  std::vector<double> batch_means;
  double mean = 0.0;
  double stderr_ = 0.0;
  double ess = 0.0;
  bool converged = false;
  std::string error;  // nonempty when the series could not be summarized

  double se() const { return stderr_; }
};

// Batch means with 16 batches; a leading remainder of values is dropped.
inline EstimateSeries summarize(std::string name, std::vector<double> values) {
  EstimateSeries s;
  s.name = std::move(name);
  s.values = std::move(values);
  const std::size_t n = s.values.size();
  if (n == 0) {
    s.error = "no recorded samples";
    return s;
  }
  if (n < num_batches) {
    s.error = "fewer samples than batches";
    KahanSum k;
    for (double v : s.values) k.add(v);
    s.mean = k.value() / double(n);
    return s;
  }
  const std::size_t b = n / num_batches;
  const std::size_t skip = n - b * num_batches;
  KahanSum tot;
  for (std::size_t i = skip; i < n; ++i) tot.add(s.values[i]);
  const double N = double(b * num_batches);
  s.mean = tot.value() / N;
  for (int j = 0; j < num_batches; ++j) {
    KahanSum k;
    for (std::size_t i = 0; i < b; ++i) k.add(s.values[skip + j * b + i]);
    s.batch_means.push_back(k.value() / double(b));
  }
  double var_b = 0.0, var = 0.0;
  for (double m : s.batch_means) var_b += (m - s.mean) * (m - s.mean);
  var_b /= (num_batches - 1);
  for (std::size_t i = skip; i < n; ++i) var += (s.values[i] - s.mean) * (s.values[i] - s.mean);
  var /= (N - 1.0);
  s.stderr_ = std::sqrt(var_b / num_batches);
  s.ess = var_b > 0.0 ? std::min(N, num_batches * var / var_b) : N;
  s.converged = s.ess >= min_ess;
  return s;
}

template <class Chain>
using ChainObservable = std::pair<std::string, std::function<double(const Chain&)>>;

// Runs `sweeps` systematic sweeps and records the observables after each of the
// last sweeps - burn_in of them.
template <class Chain>
std::vector<EstimateSeries> run_chain(Chain& chain, std::uint64_t sweeps, std::uint64_t burn_in, RandomSource& src,
                                      const std::vector<ChainObservable<Chain>>& observables) {
  if (burn_in > sweeps) throw std::invalid_argument("run_chain: burn-in exceeds the number of sweeps");
  std::vector<std::vector<double>> rec(observables.size());
  for (auto& r : rec) r.reserve(static_cast<std::size_t>(sweeps - burn_in));
  for (std::uint64_t t = 0; t < sweeps; ++t) {
    chain.sweep(src);
    if (t < burn_in) continue;
    for (std::size_t i = 0; i < observables.size(); ++i) rec[i].push_back(observables[i].second(chain));
  }
  std::vector<EstimateSeries> out;
  for (std::size_t i = 0; i < observables.size(); ++i) out.push_back(summarize(observables[i].first, std::move(rec[i])));
  return out;
}

enum class Layer { tau, second };

inline const EdgeConfig& layer_of(const EdgePair& p, Layer l) { return l == Layer::tau ? p.omega_tau : p.omega_second; }

// Observable: x joined to `targets` by open edges of a layer.
inline std::function<double(const AtrcChain&)> connection_observable(int x, std::vector<int> targets, Layer layer) {
  return [x, targets = std::move(targets), layer](const AtrcChain& c) {
    return connected_to(c.domain(), layer_of(c.state(), layer), x, targets) ? 1.0 : 0.0;
  };
}

inline EstimateSeries estimate_connection(AtrcChain& chain, int x, const std::vector<int>& targets, Layer layer,
                                          std::uint64_t sweeps, std::uint64_t burn_in, RandomSource& src) {
  if (x < 0 || x >= chain.domain().num_vertices()) throw std::invalid_argument("estimate_connection: vertex outside domain");
  auto s = run_chain<AtrcChain>(chain, sweeps, burn_in, src, {{"connection", connection_observable(x, targets, layer)}});
  return s.front();
}

// Horizontal crossing of the box [0, 2n-1]^2 (plane coordinates) by open edges
// with both endpoints in the box.
inline bool crosses_horizontally(const Domain& d, const EdgeConfig& cfg, int n) {
  const int hi = 2 * n - 1;
  auto in_box = [&](const LatticePoint& p) { return p.x >= 0 && p.x <= hi && p.y >= 0 && p.y <= hi; };
  std::vector<char> seen(static_cast<std::size_t>(d.num_vertices()), 0);
  std::vector<int> stack;
  for (int v = 0; v < d.num_vertices(); ++v)
    if (in_box(d.vertex(v)) && d.vertex(v).x == 0) {
      seen[v] = 1;
      stack.push_back(v);
    }
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    if (d.vertex(v).x == hi) return true;
    for (const auto& inc : d.incident(v))
      if (cfg[inc.edge] && !seen[inc.neighbor] && in_box(d.vertex(inc.neighbor))) {
        seen[inc.neighbor] = 1;
        stack.push_back(inc.neighbor);
      }
  }
  return false;
}

inline void require_box(const Domain& d, int n) {
  if (n < 1) throw std::invalid_argument("crossing box: n must be positive");
  for (int x = 0; x <= 2 * n - 1; ++x)
    for (int y = 0; y <= 2 * n - 1; ++y) {
      const LatticePoint p{x, y};
      if (p.parity() == d.sublattice() && !d.contains(p)) throw std::invalid_argument("crossing box: box too large for the domain");
    }
}

// Domain induced by the L-points of [0, 2n-1]^2.
inline Domain crossing_box_domain(int n) {
  std::vector<LatticePoint> pts;
  for (int x = 0; x <= 2 * n - 1; ++x)
    for (int y = 0; y <= 2 * n - 1; ++y)
      if ((x + y) % 2 == 0) pts.push_back({x, y});
  return induced_domain(pts);
}

inline EstimateSeries estimate_crossing(AtrcChain& chain, int n, Layer layer, std::uint64_t sweeps,
                                        std::uint64_t burn_in, RandomSource& src) {
  require_box(chain.domain(), n);
  auto s = run_chain<AtrcChain>(chain, sweeps, burn_in, src,
                                {{"crossing", [n, layer](const AtrcChain& c) {
                                    return crosses_horizontally(c.domain(), layer_of(c.state(), layer), n) ? 1.0 : 0.0;
                                  }}});
  return s.front();
}

enum class PhiMethod { exact, mcmc };

struct PhiEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  bool converged = true;
};

// phi_beta(S) = |dS| ATRC^{1,1}_S(x <-> dS in omega_tau).
inline PhiEstimate estimate_phi(double J, double U, double beta, const Domain& S, int x, PhiMethod method,
                                std::uint64_t sweeps = 0, std::uint64_t burn_in = 0, std::uint64_t seed = 0,
                                std::uint64_t cap = default_cap) {
  if (x < 0 || x >= S.num_vertices()) throw std::invalid_argument("estimate_phi: vertex outside domain");
  if (method == PhiMethod::exact || S.num_edges() == 0) return {phi_exact(J, U, beta, S, x, cap), 0.0, true};
  AtrcChain chain(S, make_atrc_weights(ATParams::isotropic(J, U, beta)), S.wired_bc(), S.wired_bc());
  RandomSource src(seed, "phi");
  const auto b = std::vector<int>(S.boundary().begin(), S.boundary().end());
  const auto e = estimate_connection(chain, x, b, Layer::tau, sweeps, burn_in, src);
  const double m = double(S.boundary().size());
  return {m * e.mean, m * e.se(), e.converged};
}

struct DecayFit {
  double rate = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Least squares of -log(p) against n.
inline DecayFit fit_decay_rate(const std::vector<double>& ns, const std::vector<double>& probs) {
  if (ns.size() != probs.size() || ns.size() < 3) throw std::invalid_argument("fit_decay_rate: need >= 3 points");
  for (std::size_t i = 1; i < ns.size(); ++i)
    if (!(ns[i] > ns[i - 1])) throw std::invalid_argument("fit_decay_rate: ns must be strictly increasing");
  std::vector<double> y;
  for (double p : probs) {
    if (!(p > 0.0)) throw std::invalid_argument("fit_decay_rate: nonpositive probability");
    y.push_back(-std::log(p));
  }
  const double k = double(ns.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    mx += ns[i];
    my += y[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    sxx += (ns[i] - mx) * (ns[i] - mx);
    sxy += (ns[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  DecayFit f;
  f.rate = sxy / sxx;
  f.intercept = my - f.rate * mx;
  double ssr = 0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const double r = y[i] - (f.intercept + f.rate * ns[i]);
    ssr += r * r;
  }
  f.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  return f;
}

// ---------------------------------------------------------------------------
// d/dbeta ATRC^{1,1}[A] against the edge covariances.

using MaskEvent = std::function<bool(std::uint64_t, std::uint64_t)>;

struct DerivativeCheck {
  double derivative = 0.0;      // central finite difference
  double exact_derivative = 0.0;  // covariance identity
  double cov_tau = 0.0;         // sum_e Cov[1_A, omega_tau(e)]
  double cov_second = 0.0;      // sum_e Cov[1_A, omega_second(e)]
  double c = 0.0;
  double margin = 0.0;          // derivative - c (cov_tau + cov_second)
  double identity_residual = 0.0;
};

// Log-derivatives in beta of the per-edge weights.
struct WeightLogDerivatives {
  double tau = 0.0, second = 0.0;  // J<U: w_tau'/w_tau and w_tautau'/w_tautau
  double r = 0.0, s = 0.0;         // J>=U: r'/r and s'/s
};

inline WeightLogDerivatives weight_log_derivatives(double J, double U, double beta) {
  WeightLogDerivatives d;
  if (J < U) {
    d.tau = 2 * U + 2 * J / std::tanh(2 * beta * J);
    d.second = 2 * (U - J) / (-std::expm1(-2 * beta * (U - J)));
  } else {
    if (!(J > U)) throw std::invalid_argument("weight_log_derivatives: r vanishes at J = U");
    const double e4 = std::exp(-4 * beta * J), e2 = std::exp(-2 * beta * (J + U));
    const double a00 = e4, a10 = e2 - e4, a11 = 1 - 2 * e2 + e4;
    const double d00 = -4 * J * e4, d10 = -2 * (J + U) * e2 + 4 * J * e4, d11 = 4 * (J + U) * e2 - 4 * J * e4;
    d.r = d10 / a10 - d00 / a00;
    d.s = d00 / a00 + d11 / a11 - 2 * d10 / a10;
  }
  return d;
}

inline DerivativeCheck derivative_covariance_check(double J, double U, double beta, const Domain& d,
                                                   const MaskEvent& A, double step = 1e-5,
                                                   std::uint64_t cap = default_cap) {
  auto prob_at = [&](double b) {
    AtrcEnumerator en(d, make_atrc_weights(ATParams::isotropic(J, U, b)), d.wired_bc(), d.wired_bc(), cap);
    return en.expectations({[&](std::uint64_t mt, std::uint64_t ms) { return A(mt, ms) ? 1.0 : 0.0; }})[0];
  };
  DerivativeCheck r;
  r.derivative = (prob_at(beta + step) - prob_at(beta - step)) / (2 * step);

  AtrcEnumerator en(d, make_atrc_weights(ATParams::isotropic(J, U, beta)), d.wired_bc(), d.wired_bc(), cap);
  auto ind = [&](std::uint64_t mt, std::uint64_t ms) { return A(mt, ms) ? 1.0 : 0.0; };
  const auto e = en.expectations({
      ind,
      [](std::uint64_t mt, std::uint64_t) { return double(std::popcount(mt)); },
      [](std::uint64_t, std::uint64_t ms) { return double(std::popcount(ms)); },
      [](std::uint64_t mt, std::uint64_t ms) { return double(std::popcount(mt & ms)); },
      [&](std::uint64_t mt, std::uint64_t ms) { return ind(mt, ms) * std::popcount(mt); },
      [&](std::uint64_t mt, std::uint64_t ms) { return ind(mt, ms) * std::popcount(ms); },
      [&](std::uint64_t mt, std::uint64_t ms) { return ind(mt, ms) * std::popcount(mt & ms); },
  });
  r.cov_tau = e[4] - e[0] * e[1];
  r.cov_second = e[5] - e[0] * e[2];
  const double cov_both = e[6] - e[0] * e[3];
  const auto ld = weight_log_derivatives(J, U, beta);
  if (J < U) {
    r.exact_derivative = (ld.tau - ld.second) * r.cov_tau + ld.second * r.cov_second;
    r.c = std::min(ld.tau - ld.second, ld.second);
  } else {
    r.exact_derivative = ld.r * (r.cov_tau + r.cov_second) + ld.s * cov_both;
    r.c = std::min(ld.r, ld.r + ld.s);
  }
  r.margin = r.derivative - r.c * (r.cov_tau + r.cov_second);
  r.identity_residual = std::abs(r.derivative - r.exact_derivative);
  return r;
}

// ---------------------------------------------------------------------------
// Holley monotonicity of the J<U edge conditionals.
//
// f_e = P(omega_tau(e) = 1 | rest), g_e = P(omega_second(e) = 1 | rest) under
// ATRC^{0,1} (tau free, second layer wired) with the chain's own conditional.
// Checked on every cover step of the rest, and between two values of w_tau.

struct HolleyReport {
  std::uint64_t checks = 0;
  std::uint64_t violations = 0;
  double worst = 0.0;  // largest decrease seen
};

inline HolleyReport holley_monotonicity(const Domain& d, double w_tau_lo, double w_tau_hi, double w_tautau,
                                        double tol = 1e-12) {
  const int m = d.num_edges();
  if (m > 8) throw CapExceeded("holley_monotonicity edges", static_cast<std::uint64_t>(m), 8);
  if (!(w_tau_lo <= w_tau_hi)) throw std::invalid_argument("holley_monotonicity: need w_tau_lo <= w_tau_hi");
  auto make = [&](double wt) {
    ATRCWeights w;
    w.regime = Regime::J_lt_U;
    w.a00 = 1.0;
    w.w_tau = wt;
    w.w_tautau = w_tautau;
    w.a01 = w_tautau;
    w.a11 = wt;
    return w;
  };
  AtrcChain lo(d, make(w_tau_lo), d.free_bc(), d.wired_bc());
  AtrcChain hi(d, make(w_tau_hi), d.free_bc(), d.wired_bc());
  const std::uint64_t n = count_pow(3, m - 1);
  HolleyReport rep;
  std::vector<int> z(static_cast<std::size_t>(m), 0);
  auto load = [&](AtrcChain& c, const std::vector<int>& st) {
    auto& p = c.mutable_state();
    for (int f = 0; f < m; ++f) {
      p.omega_tau.set(f, st[f] == 2);
      p.omega_second.set(f, st[f] >= 1);
    }
  };
  auto fg = [&](AtrcChain& c, const std::vector<int>& st, int e) {
    load(c, st);
    const auto pr = c.conditional(e);
    return std::pair<double, double>{pr[2], pr[1] + pr[2]};
  };
  auto note = [&](double before, double after) {
    ++rep.checks;
    if (after < before - tol) {
      ++rep.violations;
      rep.worst = std::max(rep.worst, before - after);
    }
  };
  for (int e = 0; e < m; ++e) {
    for (std::uint64_t code = 0; code < n; ++code) {
      std::uint64_t c = code;
      for (int f = 0; f < m; ++f) {
        if (f == e) {
          z[f] = 0;
          continue;
        }
        z[f] = static_cast<int>(c % 3);
        c /= 3;
      }
      const auto base = fg(lo, z, e);
      const auto base_hi = fg(hi, z, e);
      note(base.first, base_hi.first);
      note(base.second, base_hi.second);
      for (int f = 0; f < m; ++f) {
        if (f == e || z[f] == 2) continue;
        auto up = z;
        ++up[f];
        const auto v = fg(lo, up, e);
        note(base.first, v.first);
        note(base.second, v.second);
      }
    }
  }
  return rep;
}

}  // namespace atrc
