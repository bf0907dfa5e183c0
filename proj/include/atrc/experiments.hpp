#pragma once

// Config-driven commands behind atrc-lab: verify, phase-scan, decay, phi.
// Every command is a function of (config, seed) and writes CSV plus a short
// plain-text report into the output directory.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "atrc/certificates.hpp"
#include "atrc/lattice.hpp"
#include "atrc/measures.hpp"
#include "atrc/numeric.hpp"
#include "atrc/oracle.hpp"
#include "atrc/parallel.hpp"
#include "atrc/random.hpp"
#include "atrc/simulate.hpp"

namespace atrc {

using json = nlohmann::json;

enum ExitCode { exit_pass = 0, exit_fail = 1, exit_config = 2 };

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string command;
  json params;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = ".";
};

inline json default_config(const std::string& command) {
  if (command == "verify")
    return {{"cap", default_cap}, {"tolerance", nullptr}, {"bkw_q", {5.0, 9.0}}, {"fk_q", {2.0, 5.0, 9.0}}};
  if (command == "phase-scan")
    return {{"J", {0.2, 0.3}},          {"U", nullptr},    {"beta", nullptr}, {"beta_factors", {0.8, 1.0, 1.25}},
            {"n", {4, 8}},              {"sweeps", 2000},  {"burn_in", 200}};
  if (command == "decay")
    return {{"J", 0.2}, {"U", nullptr}, {"beta", nullptr}, {"n", {4, 8, 12, 16}}, {"sweeps", 4000}, {"burn_in", 400}};
  if (command == "phi")
    return {{"J", 0.2},        {"U", nullptr},     {"beta", {0.2, 0.4, 0.6, 0.8, 1.0}}, {"k", {0, 1, 2}},
            {"method", "auto"}, {"cap", default_cap}, {"sweeps", 4000},                  {"burn_in", 400}};
  throw ConfigError("unknown command: " + command);
}

// Defaults overlaid with the user's file. Unknown keys are rejected.
inline json merge_config(const std::string& command, const json& user) {
  json cfg = default_config(command);
  if (user.is_null()) return cfg;
  if (!user.is_object()) throw ConfigError("config must be a JSON object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    if (!cfg.contains(it.key())) throw ConfigError("unknown config key for " + command + ": " + it.key());
    cfg[it.key()] = it.value();
  }
  return cfg;
}

namespace detail {

inline double positive(const json& j, const std::string& what) {
  if (!j.is_number()) throw ConfigError(what + " must be a number");
  const double v = j.get<double>();
  if (!(v > 0.0)) throw ConfigError(what + " must be positive");
  return v;
}

inline std::vector<double> positive_list(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ConfigError(what + " must be a non-empty list");
  std::vector<double> out;
  for (const auto& x : j) out.push_back(positive(x, what));
  return out;
}

inline std::vector<int> int_list(const json& j, const std::string& what, int min_value) {
  if (!j.is_array() || j.empty()) throw ConfigError(what + " must be a non-empty list");
  std::vector<int> out;
  for (const auto& x : j) {
    if (!x.is_number_integer() || x.get<long long>() < min_value || x.get<long long>() > 1000)
      throw ConfigError(what + " entries must be integers >= " + std::to_string(min_value));
    out.push_back(x.get<int>());
  }
  return out;
}

inline std::uint64_t count(const json& j, const std::string& what, bool allow_zero) {
  if (!j.is_number_integer() || j.get<long long>() < (allow_zero ? 0 : 1))
    throw ConfigError(what + (allow_zero ? " must be a nonnegative integer" : " must be a positive integer"));
  return j.get<std::uint64_t>();
}

inline std::uint64_t require_seed(const ExperimentConfig& c) {
  if (!c.seed) throw ConfigError(c.command + " needs --seed");
  return *c.seed;
}

// U from the config, or the self-dual value for J.
inline double U_for(const json& U, double J) {
  if (U.is_null()) return sd_U(J);
  if (!U.is_number()) throw ConfigError("U must be a number or null");
  const double v = U.get<double>();
  if (!(v > 0.0)) throw ConfigError("U must be positive");
  return v;
}

inline std::ofstream open_out(const ExperimentConfig& c, const std::string& name) {
  std::filesystem::create_directories(c.out);
  std::ofstream os(c.out / name, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + (c.out / name).string());
  return os;
}

inline std::string fmt(double x) { return format_double(x); }

}  // namespace detail

// ---------------------------------------------------------------------------
// verify

struct VerifyCheck {
  std::string name;
  double tolerance;
  std::uint64_t required;  // states or evaluations; compared against the cap
  std::function<CheckResult(std::uint64_t cap)> run;
};

inline std::vector<VerifyCheck> verify_checks(const json& cfg) {
  const auto bkw_q = detail::positive_list(cfg.at("bkw_q"), "bkw_q");
  const auto fk_q = detail::positive_list(cfg.at("fk_q"), "fk_q");
  for (double q : bkw_q)
    if (!(q > 4.0)) throw ConfigError("bkw_q entries must exceed 4");
  std::vector<VerifyCheck> out;
  out.push_back({"coupling_lambda1", 1e-10, count_pow(4, 12),
                 [](std::uint64_t cap) { return cert_coupling(build_lambda(1), cap); }});
  out.push_back({"coupling_diamond", 1e-10, count_pow(4, 4),
                 [](std::uint64_t cap) { return cert_coupling(diamond_domain(), cap); }});
  out.push_back({"nu_omega_diamond", 1e-10, count_pow(3, 4),
                 [](std::uint64_t cap) { return cert_nu_omega(diamond_domain(), cap); }});
  out.push_back({"nu_omega_rect", 1e-10, count_pow(3, 7),
                 [](std::uint64_t cap) { return cert_nu_omega(rect_domain(0, 2, 0, 1), cap); }});
  out.push_back({"bkw_diamond", 1e-10, count_pow(2, 4),
                 [bkw_q](std::uint64_t cap) { return cert_bkw(diamond_domain(), bkw_q, cap); }});
  out.push_back({"bkw_rect", 1e-10, count_pow(2, 7),
                 [bkw_q](std::uint64_t cap) { return cert_bkw(rect_domain(0, 2, 0, 1), bkw_q, cap); }});
  out.push_back({"dual_involution", 1e-9, 100, [](std::uint64_t) { return cert_dual_involution(); }});
  out.push_back({"sd_fixed_points", 1e-10, 100, [](std::uint64_t) { return cert_sd_fixed_points(); }});
  out.push_back({"fk_self_duality", 1e-10, count_pow(2, 12),
                 [fk_q](std::uint64_t cap) { return cert_fk_self_duality(build_lambda(1), fk_q, cap); }});
  out.push_back({"atrc_duality", 1e-10, count_pow(4, 4), [](std::uint64_t cap) {
                   CheckResult r;
                   for (const auto& [J, U] : std::vector<std::pair<double, double>>{{0.2, 0.5}, {0.2, sd_U(0.2)}, {0.4, 0.1}})
                     r.residual = std::max(r.residual, cert_atrc_duality(diamond_domain(), J, U, cap).residual);
                   return r;
                 }});
  out.push_back({"gks", 1e-12, count_pow(4, 4), [](std::uint64_t cap) { return cert_gks(diamond_domain(), cap); }});
  out.push_back({"cbc", 1e-12, count_pow(4, 4), [](std::uint64_t cap) { return cert_cbc(diamond_domain(), cap); }});
  out.push_back({"mon", 1e-12, count_pow(4, 4), [](std::uint64_t cap) { return cert_mon(diamond_domain(), cap); }});
  out.push_back({"holley", 0.0, 5 * count_pow(3, 4), [](std::uint64_t) {
                   return cert_holley({path_domain(1), path_domain(3), diamond_domain(), star_domain(),
                                       diamond_tail_domain(), path_domain(5)});
                 }});
  out.push_back({"derivative", 1e-6, count_pow(4, 4), [](std::uint64_t cap) {
                   auto r = cert_derivative(path_domain(3), cap);
                   const auto s = cert_derivative(diamond_domain(), cap);
                   if (s.residual > r.residual) r = s;
                   return r;
                 }});
  return out;
}

inline int cmd_verify(const ExperimentConfig& c, std::ostream& log = std::cout) {
  const json& cfg = c.params;
  const std::uint64_t cap = detail::count(cfg.at("cap"), "cap", false);
  std::optional<double> tol;
  if (!cfg.at("tolerance").is_null()) {
    if (!cfg.at("tolerance").is_number() || cfg.at("tolerance").get<double>() < 0.0)
      throw ConfigError("tolerance must be a nonnegative number or null");
    tol = cfg.at("tolerance").get<double>();
  }
  const auto checks = verify_checks(cfg);
  std::vector<CheckResult> results;
  for (const auto& ch : checks) {
    const double t = tol ? *tol : ch.tolerance;
    results.push_back(guarded(ch.name, t, [&] {
      if (ch.required > cap) throw CapExceeded(ch.name, ch.required, cap);
      return ch.run(cap);
    }));
  }
  auto csv = detail::open_out(c, "verify.csv");
  auto rep = detail::open_out(c, "verify_report.txt");
  csv << "check,residual,tolerance,status\n";
  int passed = 0, failed = 0, skipped = 0;
  for (const auto& r : results) {
    const char* st = r.skipped ? "SKIP" : r.pass() ? "PASS" : "FAIL";
    (r.skipped ? skipped : r.pass() ? passed : failed)++;
    csv << r.name << ',' << detail::fmt(r.residual) << ',' << detail::fmt(r.tolerance) << ',' << st << '\n';
    std::ostringstream line;
    line << st << ' ' << r.name << " residual=" << detail::fmt(r.residual) << " tolerance=" << detail::fmt(r.tolerance);
    if (!r.note.empty()) line << " (" << r.note << ')';
    rep << line.str() << '\n';
    log << line.str() << '\n';
  }
  std::ostringstream tail;
  tail << passed << " passed, " << failed << " failed, " << skipped << " skipped";
  rep << tail.str() << '\n';
  log << tail.str() << '\n';
  if (failed) return exit_fail;
  if (passed == 0) return exit_config;
  return exit_pass;
}

// ---------------------------------------------------------------------------
// phase-scan

struct ScanPoint {
  double J, U, beta;
  int n;
};

inline std::vector<ScanPoint> scan_grid(const json& cfg) {
  const auto Js = detail::positive_list(cfg.at("J"), "J");
  std::vector<std::pair<double, double>> pairs;
  if (cfg.at("U").is_null()) {
    for (double J : Js) {
      if (!(std::sinh(2 * J) < 1.0)) throw ConfigError("no positive self-dual U for J = " + detail::fmt(J));
      pairs.emplace_back(J, sd_U(J));
    }
  } else {
    for (double J : Js)
      for (double U : detail::positive_list(cfg.at("U"), "U")) pairs.emplace_back(J, U);
  }
  const auto ns = detail::int_list(cfg.at("n"), "n", 1);
  std::vector<ScanPoint> out;
  for (const auto& [J, U] : pairs) {
    std::vector<double> betas;
    if (!cfg.at("beta").is_null()) {
      betas = detail::positive_list(cfg.at("beta"), "beta");
    } else {
      const double b = sd_beta(J, U);
      for (double f : detail::positive_list(cfg.at("beta_factors"), "beta_factors")) betas.push_back(f * b);
    }
    for (double beta : betas)
      for (int n : ns) out.push_back({J, U, beta, n});
  }
  return out;
}

// Runs wired ATRC on Lambda_n and records the two connection indicators of the
// origin.
inline std::vector<EstimateSeries> connection_run(double J, double U, double beta, int n, std::uint64_t sweeps,
                                                  std::uint64_t burn_in, std::uint64_t seed, std::string_view stream,
                                                  std::uint64_t index) {
  const Domain d = build_lambda(n);
  AtrcChain chain(d, make_atrc_weights(ATParams::isotropic(J, U, beta)), d.wired_bc(), d.wired_bc());
  RandomSource src(seed, stream, index);
  const int x = d.index_of({0, 0});
  const std::vector<int> b(d.boundary().begin(), d.boundary().end());
  return run_chain<AtrcChain>(chain, sweeps, burn_in, src,
                              {{"tau", connection_observable(x, b, Layer::tau)},
                               {"second", connection_observable(x, b, Layer::second)}});
}

inline int cmd_phase_scan(const ExperimentConfig& c, std::ostream& log = std::cout) {
  const json& cfg = c.params;
  const std::uint64_t seed = detail::require_seed(c);
  const auto grid = scan_grid(cfg);
  const std::uint64_t sweeps = detail::count(cfg.at("sweeps"), "sweeps", false);
  const std::uint64_t burn = detail::count(cfg.at("burn_in"), "burn_in", true);
  if (burn >= sweeps) throw ConfigError("burn_in must be smaller than sweeps");
  std::vector<std::vector<EstimateSeries>> res(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const auto& g = grid[i];
    res[i] = connection_run(g.J, g.U, g.beta, g.n, sweeps, burn, seed, "phase-scan", i);
  });
  auto csv = detail::open_out(c, "phase_scan.csv");
  csv << "J,U,beta,n,layer,estimate,stderr,ess,converged,sweeps,seed\n";
  int flagged = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& g = grid[i];
    const char* second = g.J < g.U ? "tautau" : "tauprime";
    for (const auto& s : res[i]) {
      csv << detail::fmt(g.J) << ',' << detail::fmt(g.U) << ',' << detail::fmt(g.beta) << ',' << g.n << ','
          << (s.name == "tau" ? "tau" : second) << ',' << detail::fmt(s.mean) << ',' << detail::fmt(s.se()) << ','
          << detail::fmt(s.ess) << ',' << (s.converged ? 1 : 0) << ',' << sweeps - burn << ',' << seed << '\n';
      if (!s.converged) ++flagged;
    }
  }
  log << grid.size() << " grid points, " << flagged << " rows with ESS < " << min_ess << '\n';
  return exit_pass;
}

// ---------------------------------------------------------------------------
// decay

struct DecayRow {
  int n;
  EstimateSeries tau, second;
  double used = 0.0;  // value passed to the fit
  bool bound = false;  // zero estimate replaced by a one-sided bound
};

inline int cmd_decay(const ExperimentConfig& c, std::ostream& log = std::cout) {
  const json& cfg = c.params;
  const std::uint64_t seed = detail::require_seed(c);
  const double J = detail::positive(cfg.at("J"), "J");
  const double U = detail::U_for(cfg.at("U"), J);
  if (J > U) throw ConfigError("decay needs J <= U");
  const double beta = cfg.at("beta").is_null() ? sd_beta(J, U) : detail::positive(cfg.at("beta"), "beta");
  const auto ns = detail::int_list(cfg.at("n"), "n", 1);
  const std::uint64_t sweeps = detail::count(cfg.at("sweeps"), "sweeps", false);
  const std::uint64_t burn = detail::count(cfg.at("burn_in"), "burn_in", true);
  if (burn >= sweeps) throw ConfigError("burn_in must be smaller than sweeps");
  if (ns.size() < 3) throw ConfigError("decay needs at least three values of n");
  std::vector<DecayRow> rows(ns.size());
  parallel_for(ns.size(), [&](std::size_t i) {
    auto s = connection_run(J, U, beta, ns[i], sweeps, burn, seed, "decay", i);
    rows[i].n = ns[i];
    rows[i].tau = std::move(s[0]);
    rows[i].second = std::move(s[1]);
  });
  const double recorded = double(sweeps - burn);
  std::vector<double> xs, ps;
  for (auto& r : rows) {
    r.used = r.tau.mean;
    if (!(r.used > 0.0)) {
      r.used = 3.0 / recorded;
      r.bound = true;
    }
    xs.push_back(r.n);
    ps.push_back(r.used);
  }
  const auto fit = fit_decay_rate(xs, ps);
  auto csv = detail::open_out(c, "decay.csv");
  csv << "observable,n,mean,stderr,ess,converged,upper_bound,sweeps,seed\n";
  for (const auto& r : rows) {
    for (const auto* s : {&r.tau, &r.second}) {
      const bool is_tau = s == &r.tau;
      csv << (is_tau ? "tau" : (J < U ? "tautau" : "tauprime")) << ',' << r.n << ','
          << detail::fmt(is_tau ? r.used : s->mean) << ',' << detail::fmt(s->se()) << ',' << detail::fmt(s->ess)
          << ',' << (s->converged ? 1 : 0) << ',' << (is_tau && r.bound ? 1 : 0) << ',' << sweeps - burn << ','
          << seed << '\n';
    }
  }
  auto fcsv = detail::open_out(c, "decay_fit.csv");
  fcsv << "J,U,beta,rate,intercept,r_squared\n"
       << detail::fmt(J) << ',' << detail::fmt(U) << ',' << detail::fmt(beta) << ',' << detail::fmt(fit.rate) << ','
       << detail::fmt(fit.intercept) << ',' << detail::fmt(fit.r_squared) << '\n';
  log << "rate=" << detail::fmt(fit.rate) << " r_squared=" << detail::fmt(fit.r_squared) << '\n';
  if (J == U) return exit_pass;  // reported only
  return fit.rate > 0.0 && fit.r_squared > 0.9 ? exit_pass : exit_fail;
}

// ---------------------------------------------------------------------------
// phi

inline int cmd_phi(const ExperimentConfig& c, std::ostream& log = std::cout) {
  const json& cfg = c.params;
  const double J = detail::positive(cfg.at("J"), "J");
  const double U = detail::U_for(cfg.at("U"), J);
  const auto betas = detail::positive_list(cfg.at("beta"), "beta");
  const auto ks = detail::int_list(cfg.at("k"), "k", 0);
  const std::string method = cfg.at("method").is_string() ? cfg.at("method").get<std::string>() : "";
  if (method != "auto" && method != "exact" && method != "mcmc") throw ConfigError("method must be auto, exact or mcmc");
  const std::uint64_t cap = detail::count(cfg.at("cap"), "cap", false);
  const std::uint64_t sweeps = detail::count(cfg.at("sweeps"), "sweeps", false);
  const std::uint64_t burn = detail::count(cfg.at("burn_in"), "burn_in", true);
  if (burn >= sweeps) throw ConfigError("burn_in must be smaller than sweeps");
  const int base = J < U ? 3 : 4;
  auto exact_ok = [&](int k) {
    const Domain d = build_lambda(k);
    return d.num_edges() <= 24 && count_pow(base, d.num_edges()) <= cap;
  };
  std::optional<std::uint64_t> seed = c.seed;
  for (int k : ks) {
    if (method == "exact" && !exact_ok(k)) throw ConfigError("Lambda_" + std::to_string(k) + " exceeds the enumeration cap");
    const bool mc = method == "mcmc" || (method == "auto" && !exact_ok(k));
    if (mc && !seed) throw ConfigError("phi with MCMC points needs --seed");
  }
  struct Cell {
    int k;
    double beta;
    bool mc;
    PhiEstimate est;
  };
  std::vector<Cell> cells;
  for (int k : ks)
    for (double b : betas) cells.push_back({k, b, method == "mcmc" || (method == "auto" && !exact_ok(k)), {}});
  parallel_for(cells.size(), [&](std::size_t i) {
    auto& cl = cells[i];
    const Domain S = build_lambda(cl.k);
    const int x = S.index_of({0, 0});
    cl.est = estimate_phi(J, U, cl.beta, S, x, cl.mc ? PhiMethod::mcmc : PhiMethod::exact, sweeps, burn,
                          cl.mc ? substream_seed(*seed, "phi", i) : 0, cap);
  });
  auto csv = detail::open_out(c, "phi.csv");
  csv << "k,beta,phi,stderr,method,converged,below_one\n";
  std::optional<std::size_t> first;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& cl = cells[i];
    const bool below = cl.est.value < 1.0;
    if (below && !first) first = i;
    csv << cl.k << ',' << detail::fmt(cl.beta) << ',' << detail::fmt(cl.est.value) << ',' << detail::fmt(cl.est.stderr_)
        << ',' << (cl.mc ? "mcmc" : "exact") << ',' << (cl.est.converged ? 1 : 0) << ',' << (below ? 1 : 0) << '\n';
  }
  auto rep = detail::open_out(c, "phi_report.txt");
  std::ostringstream line;
  if (first)
    line << "first phi < 1 at k=" << cells[*first].k << " beta=" << detail::fmt(cells[*first].beta)
         << " phi=" << detail::fmt(cells[*first].est.value);
  else
    line << "no grid point with phi < 1";
  rep << line.str() << '\n';
  log << line.str() << '\n';
  return exit_pass;
}

inline int run_command(const ExperimentConfig& c, std::ostream& log = std::cout) {
  if (c.command == "verify") return cmd_verify(c, log);
  if (c.command == "phase-scan") return cmd_phase_scan(c, log);
  if (c.command == "decay") return cmd_decay(c, log);
  if (c.command == "phi") return cmd_phi(c, log);
  throw ConfigError("unknown command: " + c.command);
}

}  // namespace atrc
