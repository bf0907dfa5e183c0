#pragma once

// Exact enumeration of the finite measures on tiny domains.

#include <algorithm>
#include <bit>
#include <tuple>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "atrc/flow.hpp"
#include "atrc/lattice.hpp"
#include "atrc/measures.hpp"
#include "atrc/numeric.hpp"
#include "atrc/parallel.hpp"

namespace atrc {

inline constexpr std::uint64_t default_cap = std::uint64_t{1} << 24;

class CapExceeded : public std::length_error {
 public:
  CapExceeded(const std::string& what, std::uint64_t required, std::uint64_t cap)
      : std::length_error(what + ": needs " + std::to_string(required) + " weight evaluations, cap is " +
                          std::to_string(cap)),
        required_(required) {}
  std::uint64_t required() const { return required_; }

 private:
  std::uint64_t required_;
};

// Saturating power, for state counts.
inline std::uint64_t count_pow(std::uint64_t base, int exp) {
  std::uint64_t r = 1;
  for (int i = 0; i < exp; ++i) {
    if (r > (std::uint64_t{1} << 62) / base) return std::uint64_t{1} << 62;
    r *= base;
  }
  return r;
}

// Exact finite distribution: sorted distinct keys with probabilities.
class DistTable {
 public:
  DistTable() = default;

  // Normalizes log-weights; log_Z includes the shift.
  static DistTable from_log_weights(std::vector<std::pair<std::string, double>> entries) {
    std::sort(entries.begin(), entries.end());
    for (std::size_t i = 1; i < entries.size(); ++i)
      if (entries[i].first == entries[i - 1].first) throw std::invalid_argument("DistTable: duplicate state");
    double mx = -INFINITY;
    for (auto& [k, lw] : entries) mx = std::max(mx, lw);
    if (!std::isfinite(mx)) throw std::invalid_argument("DistTable: all weights are zero");
    KahanSum z;
    for (auto& [k, lw] : entries) z.add(std::exp(lw - mx));
    DistTable t;
    t.log_Z_ = mx + std::log(z.value());
    for (auto& [k, lw] : entries) {
      const double p = std::exp(lw - mx) / z.value();
      if (p <= 0.0) continue;
      t.keys_.push_back(std::move(k));
      t.probs_.push_back(p);
    }
    return t;
  }

  static DistTable from_weights(std::vector<std::pair<std::string, double>> entries, double log_scale = 0.0) {
    std::sort(entries.begin(), entries.end());
    for (std::size_t i = 1; i < entries.size(); ++i)
      if (entries[i].first == entries[i - 1].first) throw std::invalid_argument("DistTable: duplicate state");
    KahanSum z;
    for (auto& [k, w] : entries) {
      if (w < 0.0) throw std::invalid_argument("DistTable: negative weight");
      z.add(w);
    }
    if (!(z.value() > 0.0)) throw std::invalid_argument("DistTable: all weights are zero");
    DistTable t;
    t.log_Z_ = std::log(z.value()) + log_scale;
    for (auto& [k, w] : entries) {
      if (w <= 0.0) continue;
      t.keys_.push_back(std::move(k));
      t.probs_.push_back(w / z.value());
    }
    return t;
  }

  std::size_t size() const { return keys_.size(); }
  const std::string& key(std::size_t i) const { return keys_[i]; }
  double prob(std::size_t i) const { return probs_[i]; }
  const std::vector<std::string>& keys() const { return keys_; }
  const std::vector<double>& probs() const { return probs_; }
  double log_Z() const { return log_Z_; }

  double prob_of(std::string_view k) const {
    auto it = std::lower_bound(keys_.begin(), keys_.end(), k);
    return (it != keys_.end() && *it == k) ? probs_[static_cast<std::size_t>(it - keys_.begin())] : 0.0;
  }

  // Common key length, or throws if the keys have different lengths.
  std::size_t key_length() const {
    if (keys_.empty()) return 0;
    for (const auto& k : keys_)
      if (k.size() != keys_.front().size()) throw std::invalid_argument("DistTable: keys of different lengths");
    return keys_.front().size();
  }

  double total() const {
    KahanSum s;
    for (double p : probs_) s.add(p);
    return s.value();
  }

  void write_csv(std::ostream& os) const {
    os << "state,probability\n";
    for (std::size_t i = 0; i < keys_.size(); ++i) os << keys_[i] << ',' << format_double(probs_[i]) << '\n';
  }

 private:
  std::vector<std::string> keys_;
  std::vector<double> probs_;
  double log_Z_ = 0.0;
};

using Observable = std::function<double(const std::string&)>;

inline double expectation(const DistTable& t, const Observable& f) {
  KahanSum s;
  for (std::size_t i = 0; i < t.size(); ++i) s.add(f(t.key(i)) * t.prob(i));
  return s.value();
}

inline DistTable pushforward(const DistTable& t, const std::function<std::string(const std::string&)>& map) {
  std::map<std::string, KahanSum> acc;
  for (std::size_t i = 0; i < t.size(); ++i) acc[map(t.key(i))].add(t.prob(i));
  std::vector<std::pair<std::string, double>> entries;
  for (auto& [k, s] : acc) entries.emplace_back(k, s.value());
  return DistTable::from_weights(std::move(entries));
}

// Half the L1 distance; keys absent from one table count as probability zero.
inline double tv_distance(const DistTable& a, const DistTable& b) {
  if (a.size() && b.size() && a.key_length() != b.key_length())
    throw std::invalid_argument("tv_distance: tables live on different state spaces");
  KahanSum s;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a.key(i) < b.key(j))) {
      s.add(a.prob(i++));
    } else if (i == a.size() || b.key(j) < a.key(i)) {
      s.add(b.prob(j++));
    } else {
      s.add(std::abs(a.prob(i++) - b.prob(j++)));
    }
  }
  return 0.5 * s.value();
}

inline std::string mask_key(std::uint64_t mask, int n) {
  std::string s(static_cast<std::size_t>(n), '0');
  for (int i = 0; i < n; ++i)
    if ((mask >> i) & 1u) s[static_cast<std::size_t>(i)] = '1';
  return s;
}

inline std::uint64_t key_mask(std::string_view key) {
  std::uint64_t m = 0;
  for (std::size_t i = 0; i < key.size(); ++i)
    if (key[i] == '1') m |= std::uint64_t{1} << i;
  return m;
}

// ---------------------------------------------------------------------------
// Per-mask tables over all edge configurations of a small domain.

inline void check_mask_domain(const Domain& d, int max_edges = 24) {
  if (d.num_edges() > max_edges)
    throw CapExceeded("mask tables", std::uint64_t{1} << std::min(d.num_edges(), 62), std::uint64_t{1} << max_edges);
}

inline std::vector<int> cluster_count_table(const Domain& d, const BoundaryPartition& bp) {
  check_mask_domain(d);
  const std::uint64_t n = std::uint64_t{1} << d.num_edges();
  std::vector<int> k(n);
  for (std::uint64_t m = 0; m < n; ++m) k[m] = count_clusters(d, EdgeConfig::from_mask(m, d.num_edges()), bp);
  return k;
}

// Whether vertex x is joined to some vertex of `targets` by open edges.
inline bool connected_to(const Domain& d, const EdgeConfig& cfg, int x, std::span<const int> targets) {
  std::vector<char> is_target(static_cast<std::size_t>(d.num_vertices()), 0);
  for (int t : targets) is_target[t] = 1;
  if (is_target[x]) return true;
  std::vector<char> seen(static_cast<std::size_t>(d.num_vertices()), 0);
  std::vector<int> stack{x};
  seen[x] = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (const auto& inc : d.incident(v)) {
      if (!cfg[static_cast<std::size_t>(inc.edge)] || seen[inc.neighbor]) continue;
      if (is_target[inc.neighbor]) return true;
      seen[inc.neighbor] = 1;
      stack.push_back(inc.neighbor);
    }
  }
  return false;
}

inline std::vector<char> connection_table(const Domain& d, int x, std::span<const int> targets) {
  check_mask_domain(d);
  const std::uint64_t n = std::uint64_t{1} << d.num_edges();
  std::vector<char> t(n);
  for (std::uint64_t m = 0; m < n; ++m) t[m] = connected_to(d, EdgeConfig::from_mask(m, d.num_edges()), x, targets);
  return t;
}

// ---------------------------------------------------------------------------
// ATRC enumeration. States are mask pairs (omega_tau, omega_second); in the
// J<U regime only pairs with omega_tau inside omega_second are visited.

class AtrcEnumerator {
 public:
  using MaskObservable = std::function<double(std::uint64_t, std::uint64_t)>;

  AtrcEnumerator(const Domain& d, ATRCWeights w, BoundaryPartition bp_tau, BoundaryPartition bp_second,
                 std::uint64_t cap = default_cap)
      : d_(d), w_(std::move(w)), m_(d.num_edges()) {
    required_ = count_pow(w_.regime == Regime::J_lt_U ? 3 : 4, m_);
    if (required_ > cap) throw CapExceeded("ATRC enumeration", required_, cap);
    k_tau_ = cluster_count_table(d, bp_tau);
    k_second_ = cluster_count_table(d, bp_second);
    pw_.assign(4, std::vector<double>(static_cast<std::size_t>(m_ + 1), 1.0));
    const double base[4] = {w_.a00, w_.a01, w_.a10, w_.a11};
    for (int t = 0; t < 4; ++t)
      for (int i = 1; i <= m_; ++i) pw_[t][i] = pw_[t][i - 1] * base[t];
    // normalize by a00^m to keep weights near 1 for large domains
    log_scale_ = m_ * std::log(w_.a00);
    for (int t = 0; t < 4; ++t)
      for (int i = 0; i <= m_; ++i) pw_[t][i] /= std::pow(w_.a00, i);
  }

  std::uint64_t num_states() const { return required_; }
  int num_edges() const { return m_; }
  Regime regime() const { return w_.regime; }
  LayerKind kind() const { return layer_kind(w_.regime); }

  // Weight divided by a00^{|E|}.
  double scaled_weight(std::uint64_t mt, std::uint64_t ms) const {
    const int n11 = std::popcount(mt & ms);
    const int n10 = std::popcount(mt & ~ms);
    const int n01 = std::popcount(ms & ~mt);
    const int n00 = m_ - n11 - n10 - n01;
    double prod;
    if (w_.w_tau_edge.empty()) {
      prod = pw_[0][n00] * pw_[1][n01] * pw_[2][n10] * pw_[3][n11];
    } else {
      prod = pw_[0][n00] * pw_[1][n01] * pw_[2][n10];
      for (int e = 0; e < m_; ++e)
        if ((mt & ms) >> e & 1u) prod *= w_.wt(e);
    }
    if (prod == 0.0) return 0.0;
    return std::ldexp(prod, k_tau_[mt] + k_second_[ms]);
  }

  double log_scale() const { return log_scale_; }

  // Calls f(mt, ms, scaled weight) for every state of positive weight in a fixed order.
  template <class F>
  void for_each_in_chunk(std::size_t chunk, std::size_t num_chunks, F&& f) const {
    const std::uint64_t n = std::uint64_t{1} << m_;
    const std::uint64_t lo = n * chunk / num_chunks, hi = n * (chunk + 1) / num_chunks;
    for (std::uint64_t outer = lo; outer < hi; ++outer) {
      if (w_.regime == Regime::J_lt_U) {
        const std::uint64_t ms = outer;
        for (std::uint64_t mt = ms;; mt = (mt - 1) & ms) {
          const double wgt = scaled_weight(mt, ms);
          if (wgt > 0.0) f(mt, ms, wgt);
          if (mt == 0) break;
        }
      } else {
        const std::uint64_t mt = outer;
        for (std::uint64_t ms = 0; ms < n; ++ms) {
          const double wgt = scaled_weight(mt, ms);
          if (wgt > 0.0) f(mt, ms, wgt);
        }
      }
    }
  }

  std::size_t num_chunks() const { return static_cast<std::size_t>(std::min<std::uint64_t>(64, std::uint64_t{1} << m_)); }

  template <class F>
  void for_each(F&& f) const {
    for (std::size_t c = 0; c < num_chunks(); ++c) for_each_in_chunk(c, num_chunks(), f);
  }

  // Exact expectations of several observables; results do not depend on the worker count.
  std::vector<double> expectations(const std::vector<MaskObservable>& fs) const {
    const std::size_t nc = num_chunks();
    struct Acc {
      KahanSum z;
      std::vector<KahanSum> f;
    };
    std::vector<Acc> acc(nc, Acc{KahanSum{}, std::vector<KahanSum>(fs.size())});
    parallel_for(nc, [&](std::size_t c) {
      for_each_in_chunk(c, nc, [&](std::uint64_t mt, std::uint64_t ms, double wgt) {
        acc[c].z.add(wgt);
        for (std::size_t i = 0; i < fs.size(); ++i) acc[c].f[i].add(wgt * fs[i](mt, ms));
      });
    });
    Acc total = pairwise_reduce(acc, [](Acc a, const Acc& b) {
      a.z.merge(b.z);
      for (std::size_t i = 0; i < a.f.size(); ++i) a.f[i].merge(b.f[i]);
      return a;
    });
    std::vector<double> out(fs.size());
    for (std::size_t i = 0; i < fs.size(); ++i) out[i] = total.f[i].value() / total.z.value();
    return out;
  }

  double log_Z() const {
    const std::size_t nc = num_chunks();
    std::vector<KahanSum> acc(nc);
    parallel_for(nc, [&](std::size_t c) {
      for_each_in_chunk(c, nc, [&](std::uint64_t, std::uint64_t, double wgt) { acc[c].add(wgt); });
    });
    const auto z = pairwise_reduce(acc, [](KahanSum a, const KahanSum& b) {
      a.merge(b);
      return a;
    });
    return std::log(z.value()) + log_scale_;
  }

  // Full table keyed by omega_tau bits followed by omega_second bits.
  DistTable table(std::uint64_t max_states = std::uint64_t{1} << 21) const {
    if (required_ > max_states) throw CapExceeded("ATRC table", required_, max_states);
    std::vector<std::pair<std::string, double>> entries;
    for_each([&](std::uint64_t mt, std::uint64_t ms, double wgt) {
      entries.emplace_back(mask_key(mt, m_) + mask_key(ms, m_), wgt);
    });
    return DistTable::from_weights(std::move(entries), log_scale_);
  }

 private:
  const Domain& d_;
  ATRCWeights w_;
  int m_;
  std::uint64_t required_ = 0;
  std::vector<int> k_tau_, k_second_;
  std::vector<std::vector<double>> pw_;
  double log_scale_ = 0.0;
};

// ---------------------------------------------------------------------------
// FK, AT and height-function enumeration.

inline DistTable enumerate_fk(const Domain& d, double p, double q, const BoundaryPartition& bp,
                              std::uint64_t cap = default_cap) {
  const std::uint64_t n = count_pow(2, d.num_edges());
  if (n > cap) throw CapExceeded("FK enumeration", n, cap);
  const auto k = cluster_count_table(d, bp);
  std::vector<std::pair<std::string, double>> entries;
  for (std::uint64_t m = 0; m < n; ++m) {
    const int open = std::popcount(m);
    const double lw = (open ? open * std::log(p) : 0.0) +
                      (d.num_edges() - open ? (d.num_edges() - open) * std::log1p(-p) : 0.0) + k[m] * std::log(q);
    entries.emplace_back(mask_key(m, d.num_edges()), lw);
  }
  return DistTable::from_log_weights(std::move(entries));
}

enum class SpinBC { free, plus };

// AT states keyed by tau signs followed by tau' signs ('+' / '-').
inline std::string at_key(const SpinState& s) {
  std::string k;
  for (int t : s.tau) k += t > 0 ? '+' : '-';
  for (int t : s.tau_prime) k += t > 0 ? '+' : '-';
  return k;
}

inline SpinState at_state_from_key(const std::string& k) {
  const std::size_t n = k.size() / 2;
  SpinState s;
  for (std::size_t i = 0; i < n; ++i) s.tau.push_back(k[i] == '+' ? 1 : -1);
  for (std::size_t i = 0; i < n; ++i) s.tau_prime.push_back(k[n + i] == '+' ? 1 : -1);
  return s;
}

inline DistTable enumerate_at(const Domain& d, const ATParams& p, SpinBC bc, std::uint64_t cap = default_cap) {
  std::vector<int> free_vertices;
  for (int v = 0; v < d.num_vertices(); ++v)
    if (bc == SpinBC::free || !d.is_boundary(v)) free_vertices.push_back(v);
  const std::uint64_t n = count_pow(4, static_cast<int>(free_vertices.size()));
  if (n > cap) throw CapExceeded("AT enumeration", n, cap);
  SpinState s{std::vector<int>(static_cast<std::size_t>(d.num_vertices()), 1),
              std::vector<int>(static_cast<std::size_t>(d.num_vertices()), 1)};
  std::vector<std::pair<std::string, double>> entries;
  for (std::uint64_t code = 0; code < n; ++code) {
    for (std::size_t i = 0; i < free_vertices.size(); ++i) {
      const auto c = (code >> (2 * i)) & 3u;
      s.tau[free_vertices[i]] = (c & 1u) ? -1 : 1;
      s.tau_prime[free_vertices[i]] = (c & 2u) ? -1 : 1;
    }
    entries.emplace_back(at_key(s), at_log_weight(s, p, d));
  }
  return DistTable::from_log_weights(std::move(entries));
}

// Height boundary values per Z2Domain point; nullopt marks a free point.
using HeightBC = std::vector<std::optional<int>>;

// The (0, 1) boundary condition: 0 on boundary points of L, 1 on boundary points of L*.
inline HeightBC height_bc_01(const Z2Domain& z) {
  HeightBC bc(static_cast<std::size_t>(z.num_points()));
  for (int i : z.boundary()) bc[i] = z.point(i).parity() == Sublattice::primal ? 0 : 1;
  return bc;
}

inline constexpr char height_key_zero = 'm';

inline std::string height_key(const HeightFn& h) {
  std::string k;
  for (int x : h.h) {
    if (std::abs(x) > 40) throw std::out_of_range("height_key: height out of encodable range");
    k += static_cast<char>(height_key_zero + x);
  }
  return k;
}

inline HeightFn height_from_key(const std::string& k) {
  HeightFn h;
  for (char ch : k) h.h.push_back(ch - height_key_zero);
  return h;
}

// Visits every height function on z agreeing with bc, in a fixed order.
template <class F>
std::uint64_t for_each_height(const Z2Domain& z, const HeightBC& bc, F&& f, std::uint64_t cap = default_cap) {
  const int n = z.num_points();
  HeightFn h{std::vector<int>(static_cast<std::size_t>(n), 0)};
  std::vector<char> assigned(static_cast<std::size_t>(n), 0);
  std::vector<int> order;
  for (int i = 0; i < n; ++i)
    if (bc[i]) {
      h.h[i] = *bc[i];
      assigned[i] = 1;
    }
  // breadth-first order from the fixed points
  {
    std::vector<char> queued = assigned;
    std::vector<int> frontier;
    for (int i = 0; i < n; ++i)
      if (assigned[i]) frontier.push_back(i);
    if (frontier.empty() && n > 0) {
      throw std::invalid_argument("for_each_height: no fixed boundary values");
    }
    for (std::size_t qi = 0; qi < frontier.size(); ++qi)
      for (int j : z.z2_neighbors(frontier[qi]))
        if (!queued[j]) {
          queued[j] = 1;
          frontier.push_back(j);
          order.push_back(j);
        }
    if (static_cast<int>(frontier.size()) != n) throw std::invalid_argument("for_each_height: disconnected domain");
  }
  for (int i = 0; i < n; ++i)
    if (assigned[i])
      for (int j : z.z2_neighbors(i))
        if (assigned[j] && std::abs(h.h[i] - h.h[j]) != 1) return 0;

  std::uint64_t visited = 0;
  auto rec = [&](auto&& self, std::size_t pos) -> void {
    if (pos == order.size()) {
      if (++visited > cap) throw CapExceeded("height enumeration", visited, cap);
      f(static_cast<const HeightFn&>(h));
      return;
    }
    const int i = order[pos];
    int ref = 0;
    for (int j : z.z2_neighbors(i))
      if (assigned[j]) {
        ref = h.h[j];
        break;
      }
    for (int cand : {ref - 1, ref + 1}) {
      bool ok = true;
      for (int j : z.z2_neighbors(i))
        if (assigned[j] && std::abs(h.h[j] - cand) != 1) {
          ok = false;
          break;
        }
      if (!ok) continue;
      h.h[i] = cand;
      assigned[i] = 1;
      self(self, pos + 1);
      assigned[i] = 0;
    }
  };
  rec(rec, 0);
  return visited;
}

inline DistTable enumerate_hf(const Z2Domain& z, const SixVParams& sv, const HeightBC& bc,
                              std::uint64_t cap = default_cap) {
  std::vector<std::pair<std::string, double>> entries;
  for_each_height(
      z, bc, [&](const HeightFn& h) { entries.emplace_back(height_key(h), hf_weight(h, sv, z)); }, cap);
  return DistTable::from_weights(std::move(entries));
}

// Spin keys on Z2 points: '+' / '-'.
inline std::string z2_spin_key(const HeightFn& h) {
  std::string k;
  for (int x : h.h) k += spin_of_height(x) > 0 ? '+' : '-';
  return k;
}

inline DistTable enumerate_spin(const Z2Domain& z, const SixVParams& sv, const HeightBC& bc,
                                std::uint64_t cap = default_cap) {
  return pushforward(enumerate_hf(z, sv, bc, cap),
                     [](const std::string& k) { return z2_spin_key(height_from_key(k)); });
}

// ---------------------------------------------------------------------------
// Generic entry point.

enum class Family { AT, ATRC, FK, HF, SPIN };

struct MeasureSpec {
  Family family = Family::FK;
  const Domain* domain = nullptr;
  const Z2Domain* z2 = nullptr;
  ATParams at;
  SpinBC spin_bc = SpinBC::free;
  ATRCWeights atrc;
  BoundaryPartition bp1, bp2;
  double p = 0.5, q = 1.0;
  SixVParams sixv;
  HeightBC height_bc;
  std::uint64_t cap = default_cap;
};

inline DistTable enumerate(const MeasureSpec& s) {
  switch (s.family) {
    case Family::AT:
      return enumerate_at(*s.domain, s.at, s.spin_bc, s.cap);
    case Family::ATRC:
      return AtrcEnumerator(*s.domain, s.atrc, s.bp1, s.bp2, s.cap).table(s.cap);
    case Family::FK:
      return enumerate_fk(*s.domain, s.p, s.q, s.bp1, s.cap);
    case Family::HF:
      return enumerate_hf(*s.z2, s.sixv, s.height_bc, s.cap);
    case Family::SPIN:
      return enumerate_spin(*s.z2, s.sixv, s.height_bc, s.cap);
  }
  throw std::logic_error("enumerate: unknown family");
}

// ---------------------------------------------------------------------------
// Stochastic domination.

struct DominationResult {
  bool dominated = false;
  double flow = 0.0;
  // monotone coupling (mu state, nu state, mass) when dominated
  std::vector<std::tuple<std::string, std::string, double>> coupling;
  // increasing event with mu(witness) > nu(witness) otherwise
  std::vector<std::string> witness;
  double mu_mass = 0.0;
  double nu_mass = 0.0;
};

inline constexpr std::uint64_t domination_state_cap = 10000;

// Decides mu <=_st nu for the coordinatewise order on keys, where each key
// character is ranked by its position in `alphabet`. Strassen's theorem turns
// this into a max-flow problem on the product lattice: mass mu(x) enters at x,
// may move up along covering relations, and must leave at y with capacity nu(y).
inline DominationResult check_domination(const DistTable& mu, const DistTable& nu, std::string_view alphabet = "01") {
  const std::size_t d = mu.size() ? mu.key_length() : nu.key_length();
  if (nu.size() && nu.key_length() != d) throw std::invalid_argument("check_domination: different state spaces");
  const std::size_t r = alphabet.size();
  std::uint64_t lattice = 1;
  for (std::size_t i = 0; i < d; ++i) {
    lattice *= r;
    if (lattice > domination_state_cap)
      throw CapExceeded("check_domination", count_pow(r, static_cast<int>(d)), domination_state_cap);
  }
  auto encode = [&](const std::string& k) {
    std::uint64_t code = 0, mult = 1;
    for (std::size_t i = 0; i < d; ++i) {
      const auto pos = alphabet.find(k[i]);
      if (pos == std::string_view::npos) throw std::invalid_argument("check_domination: key outside alphabet");
      code += pos * mult;
      mult *= r;
    }
    return code;
  };
  auto decode = [&](std::uint64_t code) {
    std::string k(d, alphabet[0]);
    for (std::size_t i = 0; i < d; ++i) {
      k[i] = alphabet[code % r];
      code /= r;
    }
    return k;
  };
  const int n = static_cast<int>(lattice);
  const int s = n, t = n + 1;
  MaxFlow g(n + 2);
  struct Arc {
    int from, to, id;
  };
  std::vector<Arc> arcs;
  std::vector<std::vector<int>> out(static_cast<std::size_t>(n + 2));
  auto add = [&](int a, int b, double cap) {
    const int id = g.add_edge(a, b, cap);
    out[a].push_back(static_cast<int>(arcs.size()));
    arcs.push_back({a, b, id});
  };
  for (std::size_t i = 0; i < mu.size(); ++i) add(s, static_cast<int>(encode(mu.key(i))), mu.prob(i));
  for (std::size_t i = 0; i < nu.size(); ++i) add(static_cast<int>(encode(nu.key(i))), t, nu.prob(i));
  for (int v = 0; v < n; ++v) {
    std::uint64_t code = static_cast<std::uint64_t>(v), mult = 1;
    for (std::size_t i = 0; i < d; ++i) {
      if ((code / mult) % r + 1 < r) add(v, static_cast<int>(code + mult), MaxFlow::inf);
      mult *= r;
    }
  }
  DominationResult res;
  res.flow = g.run(s, t);
  res.dominated = res.flow >= 1.0 - 1e-9;
  if (res.dominated) {
    std::vector<double> f(arcs.size());
    for (std::size_t i = 0; i < arcs.size(); ++i) f[i] = g.flow_on(arcs[i].id);
    std::map<std::pair<int, int>, double> pairs;
    for (int a : out[s]) {
      while (f[a] > 1e-15) {
        std::vector<int> path{a};
        int v = arcs[a].to;
        while (v != t) {
          int next = -1;
          for (int b : out[v])
            if (f[b] > 1e-15) {
              next = b;
              break;
            }
          if (next < 0) break;
          path.push_back(next);
          v = arcs[next].to;
        }
        if (v != t) break;
        double m = INFINITY;
        for (int b : path) m = std::min(m, f[b]);
        for (int b : path) f[b] -= m;
        pairs[{arcs[a].to, arcs[path.back()].from}] += m;
      }
    }
    for (auto& [xy, m] : pairs) res.coupling.emplace_back(decode(xy.first), decode(xy.second), m);
  } else {
    const auto side = g.source_side(s);
    KahanSum mm, nm;
    for (int v = 0; v < n; ++v)
      if (side[v]) res.witness.push_back(decode(static_cast<std::uint64_t>(v)));
    for (std::size_t i = 0; i < mu.size(); ++i)
      if (side[encode(mu.key(i))]) mm.add(mu.prob(i));
    for (std::size_t i = 0; i < nu.size(); ++i)
      if (side[encode(nu.key(i))]) nm.add(nu.prob(i));
    res.mu_mass = mm.value();
    res.nu_mass = nm.value();
  }
  return res;
}

// Exhaustive check over all up-sets of {0,1}^d, d <= 6. Returns the minimum of
// nu(U) - mu(U) over increasing events U (nonnegative iff mu <=_st nu).
inline double min_upset_margin_slow(const DistTable& mu, const DistTable& nu) {
  const std::size_t d = mu.size() ? mu.key_length() : nu.key_length();
  if (d > 6) throw std::invalid_argument("min_upset_margin_slow: at most 6 coordinates");
  const int n = 1 << d;
  std::vector<double> diff(static_cast<std::size_t>(n), 0.0);
  for (std::size_t i = 0; i < mu.size(); ++i) diff[key_mask(mu.key(i))] -= mu.prob(i);
  for (std::size_t i = 0; i < nu.size(); ++i) diff[key_mask(nu.key(i))] += nu.prob(i);
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [](int a, int b) { return std::popcount(unsigned(a)) > std::popcount(unsigned(b)); });
  std::vector<char> in(static_cast<std::size_t>(n), 0);
  double best = 0.0;  // empty up-set
  auto rec = [&](auto&& self, int pos, double acc) -> void {
    if (pos == n) {
      best = std::min(best, acc);
      return;
    }
    const int x = order[pos];
    self(self, pos + 1, acc);
    for (std::size_t i = 0; i < d; ++i)
      if (!((x >> i) & 1) && !in[x | (1 << i)]) return;
    in[x] = 1;
    self(self, pos + 1, acc + diff[x]);
    in[x] = 0;
  };
  rec(rec, 0, 0.0);
  return best;
}

// ---------------------------------------------------------------------------
// Correlation inequalities and the AT/ATRC coupling identity.

// LHS - RHS of <tau_A tau'_B tau_C tau'_D> >= <tau_A tau'_B><tau_C tau'_D>.
inline double check_gks(const DistTable& at, const std::vector<int>& A, const std::vector<int>& B,
                        const std::vector<int>& C, const std::vector<int>& D) {
  auto corr = [&](std::vector<int> X, std::vector<int> Y) {
    return expectation(at, [&](const std::string& k) {
      const std::size_t n = k.size() / 2;
      int v = 1;
      for (int x : X) v *= k[static_cast<std::size_t>(x)] == '+' ? 1 : -1;
      for (int y : Y) v *= k[n + static_cast<std::size_t>(y)] == '+' ? 1 : -1;
      return double(v);
    });
  };
  std::vector<int> AC = A, BD = B;
  AC.insert(AC.end(), C.begin(), C.end());
  BD.insert(BD.end(), D.begin(), D.end());
  return corr(AC, BD) - corr(A, B) * corr(C, D);
}

// Minimum GKS margin over all quadruples of vertex subsets (domains with <= 6 vertices).
inline double gks_min_margin(const DistTable& at) {
  const std::size_t n = at.size() ? at.key_length() / 2 : 0;
  if (n > 6) throw std::invalid_argument("gks_min_margin: at most 6 vertices");
  const int S = 1 << n;
  std::vector<double> M(static_cast<std::size_t>(S * S));
  for (int X = 0; X < S; ++X)
    for (int Y = 0; Y < S; ++Y)
      M[X * S + Y] = expectation(at, [&](const std::string& k) {
        int v = 1;
        for (std::size_t i = 0; i < n; ++i) {
          if ((X >> i) & 1) v *= k[i] == '+' ? 1 : -1;
          if ((Y >> i) & 1) v *= k[n + i] == '+' ? 1 : -1;
        }
        return double(v);
      });
  double best = INFINITY;
  for (int A = 0; A < S; ++A)
    for (int B = 0; B < S; ++B)
      for (int C = 0; C < S; ++C)
        for (int D = 0; D < S; ++D)
          best = std::min(best, M[(A ^ C) * S + (B ^ D)] - M[A * S + B] * M[C * S + D]);
  return best;
}

struct CouplingResidual {
  double tau = 0.0;
  double tautau = 0.0;
  double at_tau = 0.0, at_tautau = 0.0;
  double rc_tau = 0.0, rc_tautau = 0.0;
};

// |<tau_x>^{++} - P(x <-> dOmega in omega_tau)| and the tau tau' analogue
// (omega_tautau' when J<U, both layers when J>=U), under ATRC^{1,1}.
inline CouplingResidual coupling_identity_residual(double J, double U, double beta, const Domain& d, int x,
                                                   std::uint64_t cap = default_cap) {
  if (x < 0 || x >= d.num_vertices()) throw std::invalid_argument("coupling_identity_residual: vertex outside domain");
  const ATParams p = ATParams::isotropic(J, U, beta);
  const auto at = enumerate_at(d, p, SpinBC::plus, cap);
  CouplingResidual r;
  r.at_tau = expectation(at, [&](const std::string& k) { return k[static_cast<std::size_t>(x)] == '+' ? 1.0 : -1.0; });
  r.at_tautau = expectation(at, [&](const std::string& k) {
    const std::size_t n = k.size() / 2;
    return (k[static_cast<std::size_t>(x)] == k[n + static_cast<std::size_t>(x)]) ? 1.0 : -1.0;
  });
  const auto w = make_atrc_weights(p);
  AtrcEnumerator en(d, w, d.wired_bc(), d.wired_bc(), cap);
  const auto conn = connection_table(d, x, d.boundary());
  std::vector<AtrcEnumerator::MaskObservable> fs;
  fs.push_back([&](std::uint64_t mt, std::uint64_t) { return double(conn[mt]); });
  if (w.regime == Regime::J_lt_U)
    fs.push_back([&](std::uint64_t, std::uint64_t ms) { return double(conn[ms]); });
  else
    fs.push_back([&](std::uint64_t mt, std::uint64_t ms) { return double(conn[mt] && conn[ms]); });
  const auto e = en.expectations(fs);
  r.rc_tau = e[0];
  r.rc_tautau = e[1];
  r.tau = std::abs(r.at_tau - r.rc_tau);
  r.tautau = std::abs(r.at_tautau - r.rc_tautau);
  return r;
}

// |dS| ATRC^{1,1}_S(x <-> dS in omega_tau), exactly.
inline double phi_exact(double J, double U, double beta, const Domain& S, int x, std::uint64_t cap = default_cap) {
  if (x < 0 || x >= S.num_vertices()) throw std::invalid_argument("phi_exact: vertex outside domain");
  if (S.num_edges() == 0) return S.is_boundary(x) ? double(S.boundary().size()) : 0.0;
  const auto w = make_atrc_weights(ATParams::isotropic(J, U, beta));
  AtrcEnumerator en(S, w, S.wired_bc(), S.wired_bc(), cap);
  const auto conn = connection_table(S, x, S.boundary());
  const auto e = en.expectations({[&](std::uint64_t mt, std::uint64_t) { return double(conn[mt]); }});
  return double(S.boundary().size()) * e[0];
}

}  // namespace atrc
