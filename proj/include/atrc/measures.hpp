#pragma once

// Gibbs weights of the Ashkin-Teller model, its random-cluster representation
// (both regimes), FK-percolation and the six-vertex height function measure,
// together with the parameter maps between them.

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "atrc/lattice.hpp"
#include "atrc/numeric.hpp"

namespace atrc {

struct ATParams {
  double J_tau = 0.0;
  double J_tau_prime = 0.0;
  double U = 0.0;
  double beta = 1.0;

  static ATParams isotropic(double J, double U, double beta = 1.0) { return {J, J, U, beta}; }
  double J() const { return J_tau; }
  bool is_isotropic() const { return J_tau == J_tau_prime; }

  std::string to_kv() const {
    std::ostringstream os;
    os << "J_tau=" << format_double(J_tau) << "\nJ_tau_prime=" << format_double(J_tau_prime)
       << "\nU=" << format_double(U) << "\nbeta=" << format_double(beta) << "\n";
    return os.str();
  }
};

// AT spins (tau, tau') indexed by the vertices of a domain.
struct SpinState {
  std::vector<int> tau;
  std::vector<int> tau_prime;
};

inline double at_log_weight(const SpinState& s, const ATParams& p, const Domain& d) {
  if (s.tau.size() != static_cast<std::size_t>(d.num_vertices()) || s.tau_prime.size() != s.tau.size())
    throw std::invalid_argument("at_weight: spin state does not cover the domain");
  for (std::size_t i = 0; i < s.tau.size(); ++i)
    if ((s.tau[i] != 1 && s.tau[i] != -1) || (s.tau_prime[i] != 1 && s.tau_prime[i] != -1))
      throw std::invalid_argument("at_weight: spin values must be +-1");
  double h = 0.0;
  for (const auto& e : d.edges()) {
    const int t = s.tau[e.u] * s.tau[e.v];
    const int tp = s.tau_prime[e.u] * s.tau_prime[e.v];
    h += p.J_tau * t + p.J_tau_prime * tp + p.U * t * tp;
  }
  return p.beta * h;
}

inline double at_weight(const SpinState& s, const ATParams& p, const Domain& d) {
  return std::exp(at_log_weight(s, p, d));
}

enum class Regime { J_lt_U, J_ge_U };

inline const char* to_string(Regime r) { return r == Regime::J_lt_U ? "J<U" : "J>=U"; }

// Local ATRC weights a(i, j) indexed by (omega_tau(e), omega_second(e)). The second
// layer is omega_tautau' when J<U and omega_tau' when J>=U.
struct ATRCWeights {
  Regime regime = Regime::J_lt_U;
  double a00 = 1.0, a01 = 0.0, a10 = 0.0, a11 = 0.0;
  double w_tau = 0.0;      // J<U: a11 / a00
  double w_tautau = 0.0;   // J<U: a01 / a00
  double r = 0.0;          // J>=U: a10 / a00
  double s = 0.0;          // J>=U: a00 a11 / a10^2
  std::vector<double> w_tau_edge;  // optional per-edge w_tau (J<U only)

  double a(int e, int i, int j) const {
    if (i == 0 && j == 0) return a00;
    if (i == 0 && j == 1) return a01;
    if (i == 1 && j == 0) return a10;
    if (!w_tau_edge.empty()) return w_tau_edge[static_cast<std::size_t>(e)] * a00;
    return a11;
  }

  double wt(int e) const { return w_tau_edge.empty() ? w_tau : w_tau_edge[static_cast<std::size_t>(e)]; }

  ATRCWeights with_edge_overrides(std::vector<double> w) const {
    if (regime != Regime::J_lt_U) throw std::invalid_argument("ATRCWeights: per-edge w_tau requires J<U");
    ATRCWeights out = *this;
    out.w_tau_edge = std::move(w);
    return out;
  }
};

inline ATRCWeights make_atrc_weights(const ATParams& p) {
  if (!p.is_isotropic()) throw std::invalid_argument("ATRC weights need J_tau = J_tau'");
  const double J = p.J(), U = p.U, b = p.beta;
  if (!(J > 0.0) || !(U > 0.0) || !(b > 0.0)) throw std::invalid_argument("ATRC weights need J, U, beta > 0");
  ATRCWeights w;
  if (J < U) {
    w.regime = Regime::J_lt_U;
    w.a00 = std::exp(-2 * b * (J + U));
    w.a10 = 0.0;
    w.a01 = std::exp(-4 * b * J) - w.a00;
    w.a11 = -std::expm1(-4 * b * J);
    w.w_tau = std::exp(2 * b * U) * 2 * std::sinh(2 * b * J);
    w.w_tautau = std::expm1(2 * b * (U - J));
  } else {
    w.regime = Regime::J_ge_U;
    w.a00 = std::exp(-4 * b * J);
    w.a10 = w.a01 = std::exp(-2 * b * (J + U)) - w.a00;
    w.a11 = 1.0 - 2 * std::exp(-2 * b * (J + U)) + w.a00;
    w.r = w.a10 / w.a00;
    w.s = w.a10 > 0.0 ? w.a00 * w.a11 / (w.a10 * w.a10) : 0.0;
  }
  return w;
}

enum class LayerKind { tau_tautau, tau_tauprime };

inline LayerKind layer_kind(Regime r) { return r == Regime::J_lt_U ? LayerKind::tau_tautau : LayerKind::tau_tauprime; }

struct EdgePair {
  EdgeConfig omega_tau;
  EdgeConfig omega_second;
  LayerKind kind = LayerKind::tau_tautau;

  bool valid() const {
    if (omega_tau.size() != omega_second.size()) return false;
    return kind == LayerKind::tau_tauprime || omega_tau.is_subset_of(omega_second);
  }
  std::string key() const { return omega_tau.key() + omega_second.key(); }

  static EdgePair from_key(const std::string& k, LayerKind kind) {
    if (k.size() % 2 != 0) throw std::invalid_argument("EdgePair::from_key: odd key length");
    const std::size_t n = k.size() / 2;
    return {EdgeConfig::from_key(k.substr(0, n)), EdgeConfig::from_key(k.substr(n)), kind};
  }
};

inline double atrc_log_weight(const EdgePair& pair, const ATRCWeights& w, const BoundaryPartition& bp_tau,
                              const BoundaryPartition& bp_second, const Domain& d) {
  const std::size_t m = static_cast<std::size_t>(d.num_edges());
  if (pair.omega_tau.size() != m || pair.omega_second.size() != m)
    throw std::invalid_argument("atrc_weight: configuration size mismatch");
  double lw = 0.0;
  for (std::size_t e = 0; e < m; ++e) {
    const double a = w.a(static_cast<int>(e), pair.omega_tau[e], pair.omega_second[e]);
    if (a <= 0.0) return -INFINITY;
    lw += std::log(a);
  }
  const int k = count_clusters(d, pair.omega_tau, bp_tau) + count_clusters(d, pair.omega_second, bp_second);
  return lw + k * std::log(2.0);
}

// Weight 2^{k(omega_tau) + k(omega_second)} prod_e a(omega_tau(e), omega_second(e)).
// Evaluated as a direct product on small domains, in log space beyond 32 edges.
inline double atrc_weight(const EdgePair& pair, const ATRCWeights& w, const BoundaryPartition& bp_tau,
                          const BoundaryPartition& bp_second, const Domain& d) {
  if (d.num_edges() > 32) return std::exp(atrc_log_weight(pair, w, bp_tau, bp_second, d));
  const std::size_t m = static_cast<std::size_t>(d.num_edges());
  if (pair.omega_tau.size() != m || pair.omega_second.size() != m)
    throw std::invalid_argument("atrc_weight: configuration size mismatch");
  double prod = 1.0;
  for (std::size_t e = 0; e < m; ++e) prod *= w.a(static_cast<int>(e), pair.omega_tau[e], pair.omega_second[e]);
  if (prod == 0.0) return 0.0;
  const int k = count_clusters(d, pair.omega_tau, bp_tau) + count_clusters(d, pair.omega_second, bp_second);
  return std::ldexp(prod, k);
}

// The J<U representation 2^{k+k} w_tau^{|omega_tau|} w_tautau^{|omega_tautau \ omega_tau|} 1{omega_tau in omega_tautau}.
// Differs from atrc_weight by the constant a00^{|E|}.
inline double atrc_weight_wform(const EdgePair& pair, const ATRCWeights& w, const BoundaryPartition& bp_tau,
                                const BoundaryPartition& bp_second, const Domain& d) {
  if (w.regime != Regime::J_lt_U) throw std::invalid_argument("atrc_weight_wform: J<U only");
  if (!pair.omega_tau.is_subset_of(pair.omega_second)) return 0.0;
  double prod = 1.0;
  for (int e = 0; e < d.num_edges(); ++e) {
    if (pair.omega_tau[e])
      prod *= w.wt(e);
    else if (pair.omega_second[e])
      prod *= w.w_tautau;
  }
  const int k = count_clusters(d, pair.omega_tau, bp_tau) + count_clusters(d, pair.omega_second, bp_second);
  return std::ldexp(prod, k);
}

inline double fk_weight(const EdgeConfig& cfg, double p, double q, const BoundaryPartition& bp, const Domain& d) {
  if (!(p >= 0.0 && p <= 1.0) || !(q > 0.0)) throw std::invalid_argument("fk_weight: need 0 <= p <= 1, q > 0");
  const std::size_t open = cfg.count();
  const std::size_t closed = cfg.size() - open;
  return std::pow(p, double(open)) * std::pow(1.0 - p, double(closed)) * std::pow(q, count_clusters(d, cfg, bp));
}

struct SixVParams {
  double c = 2.0;
  double c_b = 2.0;
  double lambda = 0.0;
  double q = 4.0;
  double p_sd = 2.0 / 3.0;

  std::string to_kv() const {
    std::ostringstream os;
    os << "c=" << format_double(c) << "\nc_b=" << format_double(c_b) << "\nlambda=" << format_double(lambda)
       << "\nq=" << format_double(q) << "\np_sd=" << format_double(p_sd) << "\n";
    return os.str();
  }
};

inline double p_sd_of(double q) {
  if (!(q > 0.0)) throw std::invalid_argument("p_sd: q must be positive");
  return std::sqrt(q) / (std::sqrt(q) + 1.0);
}

// From c >= 2: lambda = 2 arccosh(c / 2), sqrt(q) = e^lambda + e^-lambda. c_b defaults to c.
inline SixVParams sixv_params_from_c(double c) {
  if (!(c >= 2.0 - 1e-12)) throw std::invalid_argument("sixv_params: c < 2 has no real lambda");
  SixVParams sv;
  sv.c = c;
  sv.c_b = c;
  sv.lambda = c <= 2.0 ? 0.0 : 2.0 * std::acosh(c / 2.0);
  const double sq = 2.0 * std::cosh(sv.lambda);
  sv.q = sq * sq;
  sv.p_sd = sq / (sq + 1.0);
  return sv;
}

inline SixVParams sixv_params_from_q(double q) {
  if (!(q >= 4.0)) throw std::invalid_argument("sixv_params_from_q: need q >= 4");
  SixVParams sv;
  sv.q = q;
  sv.lambda = std::acosh(std::sqrt(q) / 2.0);
  sv.c = 2.0 * std::cosh(sv.lambda / 2.0);
  sv.c_b = sv.c;
  sv.p_sd = p_sd_of(q);
  return sv;
}

inline double sd_residual(double J, double U, double beta = 1.0) {
  return std::sinh(2 * beta * J) * std::exp(2 * beta * U) - 1.0;
}

// Six-vertex parameters attached to a self-dual AT point (J, U), J <= U: c = coth 2J.
inline SixVParams sixv_params_from_at(double J, double U) {
  if (!(J > 0.0) || !(U > 0.0)) throw std::invalid_argument("sixv_params_from_at: J, U must be positive");
  if (std::abs(sd_residual(J, U)) > 1e-8) throw std::invalid_argument("sixv_params_from_at: (J, U) not self-dual");
  const double c = 1.0 / std::tanh(2 * J);
  if (c < 2.0 - 1e-9) throw std::invalid_argument("sixv_params_from_at: c < 2 (J > U on the self-dual line)");
  return sixv_params_from_c(std::max(c, 2.0));
}

// Unique beta with sinh(2 beta J) e^{2 beta U} = 1.
inline double sd_beta(double J, double U) {
  if (!(J > 0.0) || !(U > 0.0)) throw std::invalid_argument("sd_beta: J, U must be positive");
  auto f = [&](double b) { return sd_residual(J, U, b); };
  double hi = 1.0;
  while (f(hi) <= 0.0) hi *= 2.0;
  double lo = hi / 2.0;
  while (f(lo) >= 0.0) lo /= 2.0;
  return bisect_increasing(f, lo, hi);
}

// U on the self-dual line for a given J (beta = 1).
inline double sd_U(double J) {
  if (!(J > 0.0)) throw std::invalid_argument("sd_U: J must be positive");
  return -0.5 * std::log(std::sinh(2 * J));
}

struct DualPair {
  double J;
  double U;
};

// (J*, U*) solving (e^{2U-2J} - 1) / (e^{2U*-2J*} - 1) = e^{2U} sinh 2J = 1 / (e^{2U*} sinh 2J*).
inline DualPair dual_params(double J, double U) {
  if (!(J > 0.0) || !(U > 0.0)) throw std::invalid_argument("dual_params: J, U must be positive");
  const double k = std::exp(2 * U) * std::sinh(2 * J);
  const double A = 1.0 / k;
  const double B = 1.0 + std::expm1(2 * U - 2 * J) / k;
  if (!(B > 0.0)) throw std::invalid_argument("dual_params: outside the ferromagnetic range (B <= 0)");
  const double J4 = std::log1p(2 * A / B);  // 4 J*
  const double Js = J4 / 4.0;
  const double Us = 0.5 * (std::log(B) + 2 * Js);
  return {Js, Us};
}

// Six-vertex height functions, indexed by Z2Domain points.
struct HeightFn {
  std::vector<int> h;
};

inline int floor_mod4(int h) { return ((h % 4) + 4) % 4; }

inline int spin_of_height(int h) { return floor_mod4(h) <= 1 ? 1 : -1; }

// Throws with the offending edge if h breaks the ice rule on z.
inline void validate_heights(const HeightFn& hf, const Z2Domain& z) {
  if (hf.h.size() != static_cast<std::size_t>(z.num_points()))
    throw std::invalid_argument("height function does not cover the domain");
  for (int i = 0; i < z.num_points(); ++i) {
    const bool even_site = z.point(i).parity() == Sublattice::primal;
    if ((floor_mod4(hf.h[i]) % 2 == 0) != even_site) {
      std::ostringstream os;
      os << "ice rule: wrong parity of h at " << z.point(i);
      throw std::invalid_argument(os.str());
    }
  }
  for (const auto& [a, b] : z.z2_edges()) {
    if (std::abs(hf.h[a] - hf.h[b]) != 1) {
      std::ostringstream os;
      os << "ice rule violated on edge " << z.point(a) << "-" << z.point(b);
      throw std::invalid_argument(os.str());
    }
  }
}

struct TypeCounts {
  int interior = 0;
  int boundary = 0;
};

// Edges of Omega on which h is constant along both e and e*.
inline TypeCounts count_type56(const HeightFn& hf, const Z2Domain& z) {
  TypeCounts t;
  for (int e = 0; e < z.primal().num_edges(); ++e) {
    const auto& s = z.square(e);
    if (hf.h[s.u] == hf.h[s.v] && hf.h[s.a] == hf.h[s.b]) {
      if (z.primal().on_edge_boundary(e))
        ++t.boundary;
      else
        ++t.interior;
    }
  }
  return t;
}

inline double hf_weight(const HeightFn& hf, const SixVParams& sv, const Z2Domain& z) {
  validate_heights(hf, z);
  const auto t = count_type56(hf, z);
  return std::pow(sv.c, t.interior) * std::pow(sv.c_b, t.boundary);
}

// Six-vertex spins: sigma_bullet on the L-part of D, sigma_circ on the L*-part,
// indexed by the vertices of z.bullet() and z.circ().
struct SixVSpins {
  std::vector<int> bullet;
  std::vector<int> circ;
};

inline SixVSpins spin_from_height(const HeightFn& hf, const Z2Domain& z) {
  SixVSpins s;
  s.bullet.resize(static_cast<std::size_t>(z.bullet().num_vertices()));
  s.circ.resize(static_cast<std::size_t>(z.circ().num_vertices()));
  for (int v = 0; v < z.bullet().num_vertices(); ++v) s.bullet[v] = spin_of_height(hf.h[z.bullet_point(v)]);
  for (int v = 0; v < z.circ().num_vertices(); ++v) s.circ[v] = spin_of_height(hf.h[z.circ_point(v)]);
  return s;
}

}  // namespace atrc
