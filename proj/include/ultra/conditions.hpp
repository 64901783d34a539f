#pragma once

// The integral and discrete conditions on pairs of weight functions:
// non-quasianalyticity, sigma_r / kappa integrals, the r-strong integral
// condition, the discrete condition  w(K^j t) <= C H^j sigma(t),  the tau_r sups and
// their interlacing with sigma_r, the growth index, and the exponential
// integral E_alpha.
//
// All verdicts are grid statements. Improper integrals are evaluated in
// doubling chunks after u = exp(v); an integral whose chunk contributions
// keep growing up to the representable-argument cap is flagged divergent,
// one whose chunks decay but whose tail cannot be resolved below the cap is
// reported as a truncated (prefix) value.

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "ultra/numeric.hpp"
#include "ultra/weight.hpp"

namespace ultra {

struct PairVerdict {
  std::string condition;
  Verdict verdict = Verdict::Inconclusive;
  std::optional<double> C, K, H, t0, r;
  // witnesses: (t, index, value); index is j for discrete conditions and a
  // chunk counter for divergent integrals (partial sums, monotone).
  std::vector<std::tuple<double, double, double>> witnesses;
  GeometricGrid grid;
  std::map<std::string, double> data;  // named extras (value, ramp_part, beta, ...)
};

struct SigmaR {
  ImproperIntegral::Status status = ImproperIntegral::Status::Error;
  double value = std::numeric_limits<double>::quiet_NaN();
  double ramp_part = 0.0;  // contribution of arguments below t_min
  double beta = std::numeric_limits<double>::quiet_NaN();  // log2 of the grid C2
  bool tail_bound_missing = false;
  std::vector<std::pair<double, double>> partials;
  std::string note;

  bool converged() const {
    return status == ImproperIntegral::Status::Converged ||
           status == ImproperIntegral::Status::Truncated;
  }
  bool divergent() const { return status == ImproperIntegral::Status::Divergent; }
};

// sigma_r(t) = int_1^inf w(t u) u^{-(1+r)} du, as int_0^inf w(t e^v) e^{-rv} dv.
template <class W>
SigmaR sigma_r(const W& w, double r, double t, double tol = 1e-8,
               std::optional<double> c2_hint = std::nullopt) {
  if (!(t > 0.0)) throw std::invalid_argument("sigma_r: t must be positive");
  SigmaR out;
  double t_min = 1.0;
  if constexpr (requires { w.t_min(); }) t_min = w.t_min();
  std::optional<double> c2 = c2_hint;
  // the grid for the tail exponent must sit above the ramp region, whose
  // linear continuation has ratio exactly 2
  if (!c2) c2 = moderate_growth_constant(w, {std::max(10.0, 4.0 * t_min), 1e12, 200});
  if (c2) out.beta = std::log2(*c2);
  else out.tail_bound_missing = true;

  const double log_t = std::log(t);
  ImproperOptions opt;
  opt.tol = tol;
  opt.v_cap = std::log(kArgCap) - log_t;
  opt.first_chunk = std::max(8.0, log_t);
  if (t < t_min) opt.split_at = std::log(t_min / t);
  opt.presume_divergent = c2 && out.beta >= r;

  const auto g = [&](double v) { return w(t * std::exp(v)) * std::exp(-r * v); };
  ImproperIntegral res = integrate_improper(g, opt);
  out.status = res.status;
  out.value = res.value;
  out.ramp_part = res.head;
  out.partials = std::move(res.partials);
  out.note = std::move(res.note);
  return out;
}

// kappa(t) = int_1^inf w(t y) / y^2 dy = sigma_1(t).
template <class W>
SigmaR kappa(const W& w, double t, double tol = 1e-8) {
  return sigma_r(w, 1.0, t, tol);
}

template <class W>
PairVerdict check_nonquasianalytic(const W& w, double tol = 1e-8) {
  SigmaR s = sigma_r(w, 1.0, 1.0, tol);
  PairVerdict v;
  v.condition = "non_quasianalytic";
  v.r = 1.0;
  if (s.status == ImproperIntegral::Status::Error) {
    v.verdict = Verdict::Inconclusive;
    v.data["partial"] = s.value;
    return v;
  }
  if (s.divergent()) {
    v.verdict = Verdict::Fails;
    double idx = 0.0;
    for (const auto& [vv, partial] : s.partials) v.witnesses.emplace_back(1.0, idx++, partial);
    return v;
  }
  v.verdict = Verdict::Holds;
  v.C = s.value;
  v.data["value"] = s.value;
  v.data["ramp_part"] = s.ramp_part;
  return v;
}

inline GeometricGrid default_pair_grid() { return {10.0, 1e12, 96}; }

// r-strong:  sigma_r(t) <= C sigma(t) + C  on the grid; M(t) = sigma_r(t)/(sigma(t)+1)
// must be bounded without a divergence trend, and C is its grid maximum.
template <class W, class S>
PairVerdict check_r_strong(const W& w, const S& sigma, double r,
                           const GeometricGrid& grid = default_pair_grid(),
                           double tol = 1e-8) {
  PairVerdict v;
  v.condition = "r_strong_integral";
  v.r = r;
  v.grid = grid;
  double w_tmin = 1.0;
  if constexpr (requires { w.t_min(); }) w_tmin = w.t_min();
  const std::optional<double> c2 =
      moderate_growth_constant(w, {std::max(10.0, 4.0 * w_tmin), 1e12, 200});
  if (c2) v.data["beta"] = std::log2(*c2);

  std::vector<double> mt, m;
  bool any_error = false;
  for (double t : grid.points()) {
    SigmaR s = sigma_r(w, r, t, tol, c2 ? c2 : std::optional<double>{});
    if (s.divergent()) {
      v.verdict = Verdict::Fails;
      double idx = 0.0;
      for (const auto& [vv, partial] : s.partials) v.witnesses.emplace_back(t, idx++, partial);
      v.data["divergent_at_t"] = t;
      return v;
    }
    if (!s.converged()) {
      any_error = true;
      continue;
    }
    double st;
    try {
      st = sigma(t);
    } catch (const std::exception&) {
      any_error = true;
      continue;
    }
    mt.push_back(t);
    m.push_back(s.value / (st + 1.0));
  }
  if (m.size() < 8) {
    v.verdict = Verdict::Inconclusive;
    return v;
  }
  const double c_max = *std::max_element(m.begin(), m.end());
  // explicit failure: M monotone over the tail and grown past the early
  // values by >= 10x (catches slow, e.g. logarithmic, divergence)
  bool tail_monotone = true;
  for (std::size_t i = m.size() / 2; i + 1 < m.size(); ++i)
    if (m[i + 1] < m[i] - midpoint_slack(m[i])) {
      tail_monotone = false;
      break;
    }
  if (tail_monotone && m.front() > 0.0 && m.back() >= 10.0 * m.front()) {
    v.verdict = Verdict::Fails;
    for (std::size_t i = m.size() >= 5 ? m.size() - 5 : 0; i < m.size(); ++i)
      v.witnesses.emplace_back(mt[i], 0.0, m[i]);
    return v;
  }
  // bounded: last-decade max within 2x the overall median
  const double med = median_of(m);
  double last_max = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (mt[i] >= grid.hi / 10.0) last_max = std::max(last_max, m[i]);
  if (!any_error && last_max <= 2.0 * med) {
    v.verdict = Verdict::Holds;
    v.C = c_max;
    return v;
  }
  v.verdict = Verdict::Inconclusive;
  v.C = c_max;
  return v;
}

struct TauR {
  double value = 0.0;
  int attained_j = 0;
  bool divergent = false;  // still strictly increasing at j_max
  int j_used = 0;
};

// tau_r(t) = sup_j w(K^j t) / K^{r j}, truncated at j_max.
template <class W>
TauR tau_r(const W& w, double K, double r, double t, int j_max, double tol = 1e-3) {
  if (!(K > 1.0)) throw std::invalid_argument("tau_r: K must exceed 1");
  TauR out;
  const double log_k = std::log(K);
  const int j_cap = static_cast<int>((std::log(kArgCap) - std::log(std::max(t, 1e-300))) / log_k);
  out.j_used = std::min(j_max, j_cap);
  double prev = -1.0, prev2 = -1.0;
  for (int j = 0; j <= out.j_used; ++j) {
    const double term = w(std::exp(j * log_k) * t) / std::exp(r * j * log_k);
    if (term > out.value) {
      out.value = term;
      out.attained_j = j;
    }
    if (j == out.j_used && prev > 0.0 && prev2 > 0.0 && term > prev * (1.0 + tol) &&
        prev > prev2 * (1.0 + tol))
      out.divergent = true;
    prev2 = prev;
    prev = term;
  }
  return out;
}

struct DiscreteSearch {
  std::vector<double> K_grid{2.0, 2.718281828459045, 4.0, 8.0};
  std::vector<double> H_exponents;  // defaults to linspace(0.1, 0.95, 10)
  std::vector<double> t0_grid{1.0, 10.0, 100.0};
  int j_max = 20;
  double t_hi = 0.0;  // 0: auto, max(1e12, K^{j_max} * t0 * 100)
  int t_count = 160;

  DiscreteSearch() {
    for (int i = 0; i < 10; ++i) H_exponents.push_back(0.1 + 0.85 * i / 9.0);
  }
};

struct DiscreteCandidate {
  double K = 0.0, H = 0.0, t0 = 0.0;
  double C = std::numeric_limits<double>::quiet_NaN();
  double arg_t = 0.0;
  int arg_j = 0;
  double rho_inf = std::numeric_limits<double>::quiet_NaN();  // extrapolated per-j sup ratio
  bool stable = false;
  std::vector<double> sup_per_j;  // S(j) = sup_t ratio, j = 1..j_max
};

// Sup of w(K^j t) / (H^j sigma(t)) over a t-grid and j <= j_max, with a
// divergence-trend estimate: the per-j sups S(j) have ratios rho(j) =
// S(j+1)/S(j); a linear fit of rho against 1/j extrapolates their limit.
// Stable means the limit stays below 1, so the constant C is meaningful.
template <class W, class S>
DiscreteCandidate evaluate_discrete_candidate(const W& w, const S& sigma, double K,
                                              double H, double t0, int j_max,
                                              double t_hi = 0.0, int t_count = 160) {
  DiscreteCandidate cand;
  cand.K = K;
  cand.H = H;
  cand.t0 = t0;
  if (t_hi <= 0.0)
    t_hi = std::max(1e12, std::pow(K, j_max) * std::max(t0, 1.0) * 100.0);
  GeometricGrid grid{t0, t_hi, t_count};
  const std::vector<double> ts = grid.points();
  const double log_k = std::log(K), log_h = std::log(H);

  cand.sup_per_j.assign(static_cast<std::size_t>(j_max), 0.0);
  double best = -1.0;
  bool finite = true;
  for (double t : ts) {
    double st;
    try {
      st = sigma(t);
    } catch (const std::exception&) {
      finite = false;
      break;
    }
    for (int j = 1; j <= j_max; ++j) {
      double wt;
      try {
        wt = w(std::exp(j * log_k) * t);
      } catch (const std::exception&) {
        finite = false;
        break;
      }
      if (wt <= 0.0) continue;
      if (!(st > 0.0)) {  // sigma vanishes while w does not: no finite C
        finite = false;
        break;
      }
      const double ratio = wt / (std::exp(j * log_h) * st);
      if (!std::isfinite(ratio)) {
        finite = false;
        break;
      }
      auto& s = cand.sup_per_j[static_cast<std::size_t>(j - 1)];
      s = std::max(s, ratio);
      if (ratio > best) {
        best = ratio;
        cand.arg_t = t;
        cand.arg_j = j;
      }
    }
    if (!finite) break;
  }
  if (!finite || best <= 0.0) {
    cand.stable = false;
    return cand;
  }
  cand.C = best;

  // quick rejection of visible blow-up in j
  double early_max = 0.0;
  for (int j = 1; j <= j_max / 2; ++j)
    early_max = std::max(early_max, cand.sup_per_j[static_cast<std::size_t>(j - 1)]);
  if (cand.sup_per_j.back() > 10.0 * early_max) {
    cand.stable = false;
    cand.rho_inf = std::numeric_limits<double>::infinity();
    return cand;
  }

  // least-squares fit rho(j) = a + b/j over the upper half of the j-range
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (int j = j_max / 2; j < j_max; ++j) {
    const double s0 = cand.sup_per_j[static_cast<std::size_t>(j - 1)];
    const double s1 = cand.sup_per_j[static_cast<std::size_t>(j)];
    if (!(s0 > 0.0) || !(s1 > 0.0)) {
      cand.stable = false;
      return cand;
    }
    const double xi = 1.0 / j, yi = s1 / s0;
    sx += xi;
    sy += yi;
    sxx += xi * xi;
    sxy += xi * yi;
    ++n;
  }
  const double denom = n * sxx - sx * sx;
  cand.rho_inf = denom != 0.0 ? (sy * sxx - sx * sxy) / denom : 1.0;
  // rho_inf == 1 with bounded sups is fine (e.g. w(K^j t) = H^j sigma(t)
  // exactly); anything clearly above 1 diverges in j.
  cand.stable = cand.rho_inf < 1.0 + 1e-3;
  return cand;
}

// Exhaustive first-in-grid-order search for (C, K, H, t0) realizing the
// discrete condition; H < K is enforced by construction (H = K^theta).
template <class W, class S>
PairVerdict check_discrete_condition(const W& w, const S& sigma,
                                     const DiscreteSearch& search = {}) {
  if (search.K_grid.empty() || search.H_exponents.empty() || search.t0_grid.empty())
    throw std::invalid_argument("check_discrete_condition: empty search grid");
  PairVerdict v;
  v.condition = "discrete_growth";
  for (double K : search.K_grid) {
    for (double theta : search.H_exponents) {
      const double H = std::pow(K, theta);
      if (!(H < K) || !(H > 1.0)) continue;
      for (double t0 : search.t0_grid) {
        DiscreteCandidate cand = evaluate_discrete_candidate(
            w, sigma, K, H, t0, search.j_max, search.t_hi, search.t_count);
        if (cand.stable) {
          v.verdict = Verdict::Holds;
          v.C = cand.C;
          v.K = K;
          v.H = H;
          v.t0 = t0;
          v.data["rho_inf"] = cand.rho_inf;
          return v;
        }
        if (std::isfinite(cand.C)) v.witnesses.emplace_back(cand.arg_t, cand.arg_j, cand.C);
      }
    }
  }
  v.verdict = Verdict::Fails;
  return v;
}

struct InterlacingReport {
  std::optional<double> c4;  // tau_r <= C4 sigma_r on the grid
  std::optional<double> c5;  // sigma_r <= C5 tau_s on the grid
  bool sigma_divergent = false;
  bool tau_divergent = false;
  AsymptoticVerdict tau_order;  // tau_s = O(tau_r), truncated sups
  Verdict constants_verdict = Verdict::Inconclusive;
};

// Interlacing tau_r <= C4 sigma_r <= C4 C5 tau_s and the separation check
// tau_s = O(tau_r). The tau sups are truncated at j_max; the order verdict is
// computed on those truncated values even when a divergence flag is raised,
// while the constants are reported only if everything converged.
template <class W>
InterlacingReport verify_interlacing(const W& w, double K, double r, double s,
                                     const GeometricGrid& grid = {10.0, 1e9, 100},
                                     int j_max = 40, double tol = 1e-8) {
  if (!(s > 0.0) || !(s <= r) || !(r <= 1.0))
    throw std::invalid_argument("verify_interlacing: need 0 < s <= r <= 1");
  InterlacingReport rep;
  double w_tmin = 1.0;
  if constexpr (requires { w.t_min(); }) w_tmin = w.t_min();
  const std::optional<double> c2 =
      moderate_growth_constant(w, {std::max(10.0, 4.0 * w_tmin), 1e12, 200});
  const std::vector<double> ts = grid.points();
  std::vector<double> ratio_ts, ratio_vals;
  double c4 = 0.0, c5 = 0.0;
  bool constants_ok = true;
  for (double t : ts) {
    TauR tr = tau_r(w, K, r, t, j_max);
    TauR tsup = tau_r(w, K, s, t, j_max);
    if (tr.divergent || tsup.divergent) rep.tau_divergent = true;
    if (tr.value > 0.0) {
      ratio_ts.push_back(t);
      ratio_vals.push_back(tsup.value / tr.value);
    }
    SigmaR sr = sigma_r(w, r, t, tol, c2 ? c2 : std::optional<double>{});
    if (!sr.converged()) {
      if (sr.divergent()) rep.sigma_divergent = true;
      constants_ok = false;
      continue;
    }
    if (sr.value > 0.0) c4 = std::max(c4, tr.value / sr.value);
    if (tsup.value > 0.0) c5 = std::max(c5, sr.value / tsup.value);
  }
  if (constants_ok && !rep.tau_divergent) {
    rep.c4 = c4;
    rep.c5 = c5;
    rep.constants_verdict = Verdict::Holds;
  }
  // O-relation on the truncated sups
  detail::RatioSweep sweep;
  sweep.t = std::move(ratio_ts);
  sweep.r = std::move(ratio_vals);
  rep.tau_order = detail::verdict_big_o(sweep, grid);
  return rep;
}

struct GrowthIndex {
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double r_star = std::numeric_limits<double>::quiet_NaN();
  double r_lo = 0.0, r_hi = 1.0;  // final bracket
  bool not_strong = false;        // not even 1-strong
  bool capped = false;            // still r-strong at the probing floor
  std::vector<std::pair<double, Verdict>> probes;
};

// gamma(sigma, w) = sup{ s > 0 : (w, sigma) is 1/s-strong }, by bisection on
// r over check_r_strong verdicts. The probing floor r = 0.01 caps gamma at 100.
template <class W, class S>
GrowthIndex growth_index(const S& sigma, const W& w, double tol = 0.01,
                         const GeometricGrid& grid = default_pair_grid()) {
  if (!(tol > 0.0) || tol > 0.1)
    throw std::invalid_argument("growth_index: tol must lie in (0, 0.1]");
  constexpr double r_floor = 0.01;
  GrowthIndex out;
  const auto probe = [&](double r) {
    Verdict verdict = check_r_strong(w, sigma, r, grid).verdict;
    out.probes.emplace_back(r, verdict);
    return verdict == Verdict::Holds;
  };
  if (!probe(1.0)) {
    out.not_strong = true;
    return out;
  }
  const double ladder[] = {0.99, 0.9, 0.75, 0.5, 0.375, 0.25, 0.18, 0.125,
                           0.09, 0.0625, 0.045, 0.03, 0.02, 0.014, 0.01};
  double r_hold = 1.0;
  double r_fail = 0.0;
  for (double r : ladder) {
    if (probe(r)) {
      r_hold = r;
    } else {
      r_fail = r;
      break;
    }
  }
  if (r_fail == 0.0) {
    out.capped = true;
    out.r_star = r_floor;
    out.r_lo = 0.0;
    out.r_hi = r_floor;
    out.gamma = 1.0 / r_floor;
    return out;
  }
  while (r_hold - r_fail > tol) {
    const double mid = 0.5 * (r_hold + r_fail);
    (probe(mid) ? r_hold : r_fail) = mid;
  }
  out.r_lo = r_fail;
  out.r_hi = r_hold;
  out.r_star = 0.5 * (r_fail + r_hold);
  out.gamma = 1.0 / out.r_star;
  return out;
}

struct ExpIntegral {
  double value = std::numeric_limits<double>::quiet_NaN();
  bool divergent = false;
};

// E_alpha(x) = int_1^inf y^{-alpha} e^{-x y} dy.
inline ExpIntegral exp_integral(double alpha, double x, double tol = 1e-8) {
  ExpIntegral out;
  if (x < 0.0 || (x == 0.0 && alpha <= 1.0)) {
    out.divergent = true;
    return out;
  }
  const auto g = [&](double v) {
    const double y = std::exp(v);
    const double e = (1.0 - alpha) * v - x * y;
    return e < -700.0 ? 0.0 : std::exp(e);
  };
  ImproperOptions opt;
  opt.tol = tol;
  opt.v_cap = 690.0;
  ImproperIntegral res = integrate_improper(g, opt);
  if (res.status == ImproperIntegral::Status::Divergent ||
      res.status == ImproperIntegral::Status::Error) {
    out.divergent = true;
    return out;
  }
  out.value = res.value;
  return out;
}

// Finite-truncation variant, int_1^{y_max}; valid for any sign of x.
inline double exp_integral_truncated(double alpha, double x, double y_max,
                                     double tol = 1e-10) {
  const auto g = [&](double v) { return std::exp((1.0 - alpha) * v - x * std::exp(v)); };
  return integrate_finite(g, 0.0, std::log(y_max), tol);
}

}  // namespace ultra
