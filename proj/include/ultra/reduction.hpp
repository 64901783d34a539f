#pragma once

// Executable form of the reduction construction: from a concave weight w,
// a weight sigma with sigma(t) = o(t), a majorant f with sigma = o(f), and
// discrete-condition constants (C, K, H, t0), build the sequences x_n, y_n,
// z_n and the piecewise weights w~ and sigma~ with
//
//   (n-2) w(t) <= w~(t) <= n w(t)   and   (n-2) sigma(t) <= sigma~(t)
//                <= n sigma(t)      on [x_n, x_{n+1}),
//
// sigma~ <= f/n and <= t/n beyond x_n, and the discrete condition
// transferred to (w~, sigma~) with some H~ in (H, K). The construction is
// finite (n <= n_max) and every claim is validated on grids.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ultra/conditions.hpp"
#include "ultra/numeric.hpp"
#include "ultra/weight.hpp"

namespace ultra {

class ReductionError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class RangeError : public std::out_of_range {
  using std::out_of_range::out_of_range;
};

struct DiscreteConstants {
  double C = 1.0, K = 2.0, H = 1.5, t0 = 1.0;
};

struct ReductionOptions {
  int n_max = 8;
  bool enforce_nq = false;
  double margin = 1.05;       // strictness headroom on every lower bound
  double bisect_tol = 1e-12;  // relative, for the y_n and z_n equations
  double quad_tol = 1e-9;     // non-quasianalytic tail integrals
};

struct ReductionInput {
  WeightHandle omega;
  std::function<double(double)> omega_deriv;  // analytic or central differences
  WeightHandle sigma;
  WeightHandle majorant;  // f
  DiscreteConstants constants;
  ReductionOptions opt;
};

inline ReductionInput make_reduction_input(const WeightFunction& omega,
                                           const WeightFunction& sigma,
                                           WeightHandle majorant,
                                           DiscreteConstants constants,
                                           ReductionOptions opt = {}) {
  ReductionInput in{WeightHandle(omega),
                    [omega](double t) { return omega.derivative(t); },
                    WeightHandle(sigma), std::move(majorant), constants, opt};
  return in;
}

// tail integral  int_x^inf sigma(t)/(1+t^2) dt  (t = x e^v)
template <class S>
ImproperIntegral nq_tail(const S& sigma, double x, double tol = 1e-9) {
  const auto g = [&](double v) {
    const double t = x * std::exp(v);
    return sigma(t) * t / (1.0 + t * t);
  };
  ImproperOptions opt;
  opt.tol = tol;
  opt.v_cap = std::log(kArgCap) - std::log(x);
  return integrate_improper(g, opt);
}

struct ReductionResult {
  // 1-based sequences; x[1] = y[1] = z[1] = 0
  std::vector<double> x, y, z;
  std::vector<bool> z_degenerate;  // affine stretch: z_n pinned to y_n
  std::vector<double> w_x, slope_x;   // w(x_n), w'(x_n)
  std::vector<double> corr_affine;    // sum_{i=1}^{n-2} w(z_{i+1})
  std::vector<double> corr_curved;    // sum_{i=1}^{n-1} w(z_{i+1})
  std::vector<double> sigma_acc;      // sum_{i=1}^{n} sigma(x_i)
  std::vector<double> nq_tail_value;  // int_{x_n}^inf sigma/(1+t^2), if enforce_nq

  ReductionInput input;
  int n_max = 0;

  double range_lo() const { return x[2]; }
  double range_hi() const { return x[static_cast<std::size_t>(n_max)]; }

  // segment index n with t in [x_n, x_{n+1}); t below x_2 falls to n = 1
  int segment_of(double t) const {
    int n = 1;
    while (n + 1 <= n_max && t >= x[static_cast<std::size_t>(n + 1)]) ++n;
    return std::min(n, n_max - 1);
  }

  // defined on [0, x_{n_max}]; w~ = w on [0, x_2)
  double omega_tilde_unchecked(double t) const {
    const int n = segment_of(t);
    if (n == 1) return input.omega(t);
    const std::size_t i = static_cast<std::size_t>(n);
    if (t < y[i])
      return (n - 1) * (w_x[i] + (t - x[i]) * slope_x[i]) - corr_affine[i];
    return n * input.omega(t) - corr_curved[i];
  }

  double sigma_tilde_unchecked(double t) const {
    const int n = segment_of(t);
    const std::size_t i = static_cast<std::size_t>(n);
    return n * input.sigma(t) - sigma_acc[i];
  }
};

enum class TildeKind { Omega, Sigma };

inline double eval_tilde(const ReductionResult& r, TildeKind which, double t) {
  if (!(t >= r.range_lo()) || !(t <= r.range_hi()))
    throw RangeError("eval_tilde: t outside constructed range [" +
                     std::to_string(r.range_lo()) + ", " +
                     std::to_string(r.range_hi()) + "]");
  return which == TildeKind::Omega ? r.omega_tilde_unchecked(t)
                                   : r.sigma_tilde_unchecked(t);
}

namespace detail {

// first T such that pred holds at T and on a local grid beyond it
template <class Pred>
double threshold_with_lookahead(const Pred& pred, double lo, double cap,
                                const char* what) {
  const auto stable = [&](double T) {
    if (!pred(T)) return false;
    for (int i = 1; i <= 24; ++i)
      if (!pred(T * std::pow(1024.0, i / 24.0))) return false;
    return true;
  };
  const double T = threshold_search(stable, lo, cap, 1e-6);
  if (std::isnan(T)) throw ReductionError(std::string(what) + " below the argument cap");
  return T;
}

}  // namespace detail

template <class F>
double solve_decreasing_derivative(const F& deriv, double target, double from,
                                   double rel_tol) {
  // deriv is nonincreasing, deriv(from) > target, deriv -> 0
  double lo = from, hi = from;
  double d_prev = deriv(from);
  if (!(d_prev > target))
    throw ReductionError("derivative already at or below target at the bracket start");
  for (;;) {
    hi = hi * 2.0;
    if (hi > kArgCap)
      throw ReductionError("derivative does not drop to the target below the cap");
    const double d = deriv(hi);
    if (d > d_prev * (1.0 + 1e-9))
      throw ReductionError("omega' is not decreasing on the bracket "
                           "(omega insufficiently concave numerically)");
    d_prev = d;
    if (d <= target) break;
  }
  lo = hi * 0.5;
  for (int i = 0; i < 200 && (hi - lo) > rel_tol * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (deriv(mid) <= target ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

inline ReductionResult build_reduction(const ReductionInput& input) {
  const auto& w = input.omega;
  const auto& sg = input.sigma;
  const auto& f = input.majorant;
  const auto& dw = input.omega_deriv;
  const int n_max = input.opt.n_max;
  if (n_max < 3) throw std::invalid_argument("build_reduction: n_max must be >= 3");
  if (!(input.constants.K > input.constants.H) || !(input.constants.H > 1.0))
    throw std::invalid_argument("build_reduction: need K > H > 1");

  ReductionResult r;
  r.input = input;
  r.n_max = n_max;
  const std::size_t sz = static_cast<std::size_t>(n_max) + 1;
  r.x.assign(sz, 0.0);
  r.y.assign(sz, 0.0);
  r.z.assign(sz, 0.0);
  r.z_degenerate.assign(sz, false);
  r.w_x.assign(sz, 0.0);
  r.slope_x.assign(sz, 0.0);
  r.corr_affine.assign(sz, 0.0);
  r.corr_curved.assign(sz, 0.0);
  r.sigma_acc.assign(sz, 0.0);
  r.nq_tail_value.assign(sz, 0.0);

  const double big_k = std::max(2.0, input.constants.K);
  double corr = 0.0;  // sum of w(z_{i+1}) over completed i
  double sig_acc = 0.0;

  for (int n = 2; n <= n_max; ++n) {
    const std::size_t i = static_cast<std::size_t>(n);
    double lb = big_k * r.y[i - 1] + n;
    lb = std::max(lb, 1.001 * w.t_min());  // derivative needs t above the ramp

    // majorant domination: min{t, f(t)} >= n^2 sigma(t) beyond x_n
    const double nn = static_cast<double>(n) * n;
    const double t44 = detail::threshold_with_lookahead(
        [&](double t) { return std::min(t, f(t)) >= nn * sg(t); }, lb, kArgCap,
        "sigma = o(min(t, f)) fails empirically: no threshold");
    lb = std::max(lb, t44);

    // growth staging for w: w(x_n) >= 2^{n-i} w(z_i)
    double need_w = 0.0;
    for (int ii = 2; ii <= n - 1; ++ii)
      need_w = std::max(need_w,
                        std::pow(2.0, n - ii) * w(r.z[static_cast<std::size_t>(ii)]));
    if (need_w > w(lb))
      lb = std::max(lb, solve_increasing([&](double t) { return w(t); }, need_w, lb));

    // growth staging for sigma: sigma(x_n) >= 2^{n-i} sigma(x_i)
    double need_s = 0.0;
    for (int ii = 2; ii <= n - 1; ++ii)
      need_s = std::max(need_s,
                        std::pow(2.0, n - ii) * sg(r.x[static_cast<std::size_t>(ii)]));
    if (need_s > sg(lb))
      lb = std::max(lb, solve_increasing([&](double t) { return sg(t); }, need_s, lb));

    if (input.opt.enforce_nq) {
      const double budget = 1.0 / (static_cast<double>(n) * n * n);
      const auto small_tail = [&](double t) {
        ImproperIntegral tail = nq_tail(sg, t, input.opt.quad_tol);
        return tail.converged() && tail.value <= budget;
      };
      const double t_nq = threshold_search(small_tail, lb, kArgCap, 1e-6);
      if (std::isnan(t_nq))
        throw ReductionError("non-quasianalytic threshold for sigma not found");
      lb = std::max(lb, t_nq);
    }

    const double xn = input.opt.margin * lb;
    r.x[i] = xn;
    r.w_x[i] = w(xn);
    r.slope_x[i] = dw(xn);
    if (!(r.slope_x[i] > 0.0))
      throw ReductionError("omega' vanished at x_n; construction needs w strictly increasing");

    // slope equation: w'(y_n) = ((n-1)/n) w'(x_n)
    const double target = (static_cast<double>(n) - 1.0) / n * r.slope_x[i];
    r.y[i] = solve_decreasing_derivative(dw, target, xn, input.opt.bisect_tol);

    // level equation: w(z_n) = n w(y_n) - (n-1)(w(x_n) + (y_n - x_n) w'(x_n))
    const double wy = w(r.y[i]);
    const double tangent = r.w_x[i] + (r.y[i] - xn) * r.slope_x[i];
    const double rhs = n * wy - (static_cast<double>(n) - 1.0) * tangent;
    if (rhs >= wy * (1.0 - 1e-12)) {
      r.z[i] = r.y[i];  // affine stretch: the bisection target is constant
      r.z_degenerate[i] = true;
    } else if (rhs <= r.w_x[i]) {
      r.z[i] = xn;
    } else {
      double lo = xn, hi = r.y[i];
      for (int it = 0; it < 200 && (hi - lo) > input.opt.bisect_tol * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (w(mid) >= rhs ? hi : lo) = mid;
      }
      r.z[i] = 0.5 * (lo + hi);
    }

    if (input.opt.enforce_nq) {
      ImproperIntegral tail = nq_tail(sg, xn, input.opt.quad_tol);
      r.nq_tail_value[i] = tail.value;
    }

    // offsets for the segment evaluators
    r.corr_affine[i] = corr;          // sum_{i=1}^{n-2} w(z_{i+1})
    corr += w(r.z[i]);                // now includes z_n
    r.corr_curved[i] = corr;          // sum_{i=1}^{n-1} w(z_{i+1})
    sig_acc += sg(xn);
    r.sigma_acc[i] = sig_acc;         // sum_{i=1}^{n} sigma(x_i); sigma(0) = 0
  }
  return r;
}

struct ClaimCheck {
  std::string name;
  double min_margin = std::numeric_limits<double>::infinity();  // relative slack
  double worst_t = 0.0;
  bool pass = true;
};

struct RecertResult {
  bool found = false;
  double H_tilde = std::numeric_limits<double>::quiet_NaN();
  double D_tilde = std::numeric_limits<double>::quiet_NaN();  // empirical sup
  double N_tilde = 0.0;  // j H^j <= N_tilde H_tilde^j for all j
};

struct ValidationReport {
  std::vector<ClaimCheck> claims;
  double max_continuity_err = 0.0;
  bool continuity_pass = true;
  bool omega_tilde_concave = true;
  bool omega_tilde_log_convex = true;  // t -> w~(e^t) convex
  bool sigma_tilde_log_convex = true;
  double transfer_D = 0.0;  // sup w~(K^j y) / (j H^j sigma~(y))
  RecertResult recert;
  bool nq_partial_sums_pass = true;  // summability budget, when enforce_nq
  double nq_partial_sum = 0.0, nq_budget = 0.0;

  bool all_pass() const {
    for (const auto& c : claims)
      if (!c.pass) return false;
    return continuity_pass && omega_tilde_concave && omega_tilde_log_convex &&
           sigma_tilde_log_convex && recert.found && nq_partial_sums_pass;
  }
};

inline ValidationReport validate_reduction(const ReductionResult& r,
                                           int grid_per_segment = 48) {
  ValidationReport rep;
  const auto& w = r.input.omega;
  const auto& sg = r.input.sigma;
  const auto& f = r.input.majorant;
  const double K = r.input.constants.K;
  const double H = r.input.constants.H;

  ClaimCheck c49{"lower sandwich: w~ >= (n-2) w"}, c410{"upper sandwich: w~ <= n w"};
  ClaimCheck c411{"lower sandwich: sigma~ >= (n-2) sigma"}, c412{"upper sandwich: sigma~ <= n sigma"};
  ClaimCheck cf{"sigma~ <= f/n"}, ct{"sigma~ <= t/n"};

  const auto update = [](ClaimCheck& c, double margin, double scale, double t) {
    const double rel = margin / (1.0 + std::abs(scale));
    if (rel < c.min_margin) {
      c.min_margin = rel;
      c.worst_t = t;
    }
    if (rel < -1e-9) c.pass = false;
  };

  for (int n = 2; n + 1 <= r.n_max; ++n) {
    const std::size_t i = static_cast<std::size_t>(n);
    const double lo = r.x[i], hi = r.x[i + 1];
    for (int k = 0; k < grid_per_segment; ++k) {
      const double t =
          lo * std::pow(hi / lo, (k + 0.5) / grid_per_segment);
      const double wt = w(t), st = sg(t);
      const double wtil = r.omega_tilde_unchecked(t);
      const double stil = r.sigma_tilde_unchecked(t);
      update(c49, wtil - (n - 2) * wt, wtil, t);
      update(c410, n * wt - wtil, wtil, t);
      update(c411, stil - (n - 2) * st, stil, t);
      update(c412, n * st - stil, stil, t);
      update(cf, f(t) / n - stil, f(t) / n, t);
      update(ct, t / n - stil, t / n, t);
    }
  }
  rep.claims = {c49, c410, c411, c412, cf, ct};

  // continuity across segment boundaries (w~ is also C^1 at y_n, forced by
  // the slope equation)
  for (int n = 2; n + 1 <= r.n_max; ++n) {
    const std::size_t i = static_cast<std::size_t>(n);
    const auto rel_err = [](double a, double b) {
      return std::abs(a - b) / (1.0 + std::max(std::abs(a), std::abs(b)));
    };
    const double at_y_affine =
        (n - 1) * (r.w_x[i] + (r.y[i] - r.x[i]) * r.slope_x[i]) - r.corr_affine[i];
    const double at_y_curved = n * w(r.y[i]) - r.corr_curved[i];
    rep.max_continuity_err = std::max(rep.max_continuity_err, rel_err(at_y_affine, at_y_curved));

    const double at_x_curved = n * w(r.x[i + 1]) - r.corr_curved[i];
    const double at_x_affine = n * (r.w_x[i + 1] + 0.0) - r.corr_affine[i + 1];
    rep.max_continuity_err = std::max(rep.max_continuity_err, rel_err(at_x_curved, at_x_affine));

    const double s_left = n * sg(r.x[i + 1]) - r.sigma_acc[i];
    const double s_right = (n + 1) * sg(r.x[i + 1]) - r.sigma_acc[i + 1];
    rep.max_continuity_err = std::max(rep.max_continuity_err, rel_err(s_left, s_right));
  }
  rep.continuity_pass = rep.max_continuity_err <= 1e-9;

  // shape: w~ midpoint-concave, w~(e^s) and sigma~(e^s) midpoint-convex
  {
    std::vector<double> ts =
        GeometricGrid{r.range_lo() * 1.000001, r.range_hi() * 0.999999, 512}.points();
    rep.omega_tilde_concave =
        detail::midpoint_test([&](double t) { return r.omega_tilde_unchecked(t); }, ts, -1) ==
        Verdict::Holds;
    std::vector<double> ss;
    for (double t : ts) ss.push_back(std::log(t));
    rep.omega_tilde_log_convex =
        detail::midpoint_test(
            [&](double s) { return r.omega_tilde_unchecked(std::exp(s)); }, ss, +1) ==
        Verdict::Holds;
    rep.sigma_tilde_log_convex =
        detail::midpoint_test(
            [&](double s) { return r.sigma_tilde_unchecked(std::exp(s)); }, ss, +1) ==
        Verdict::Holds;
  }

  // r-strongness transfer: w~(K^j y) <= D j H^j sigma~(y) on in-range pairs
  {
    const double y_lo = std::max(r.range_lo(), r.input.constants.t0);
    double d = 0.0;
    for (int k = 0; k < 64; ++k) {
      const double y = y_lo * std::pow(r.range_hi() / (K * y_lo), k / 63.0);
      const double sy = r.sigma_tilde_unchecked(y);
      if (!(sy > 0.0)) continue;
      for (int j = 1; std::pow(K, j) * y <= r.range_hi(); ++j)
        d = std::max(d, r.omega_tilde_unchecked(std::pow(K, j) * y) /
                            (j * std::pow(H, j) * sy));
    }
    rep.transfer_D = d;
  }

  // re-certification of the discrete condition for (w~, sigma~), H~ in (H, K)
  {
    const double y_lo = std::max(r.range_lo(), r.input.constants.t0);
    const double lk = std::log(K), lh = std::log(H);
    for (double lambda : {0.5, 0.25, 0.75, 0.375, 0.625}) {
      const double h_tilde = std::exp(lh + lambda * (lk - lh));
      const int j_range =
          static_cast<int>(std::log(r.range_hi() / y_lo) / lk);
      if (j_range < 4) break;
      std::vector<double> sup_j(static_cast<std::size_t>(j_range), 0.0);
      double dmax = 0.0;
      for (int k = 0; k < 48; ++k) {
        const double t = y_lo * std::pow(r.range_hi() / (K * y_lo), k / 47.0);
        const double st = r.sigma_tilde_unchecked(t);
        if (!(st > 0.0)) continue;
        for (int j = 1; j <= j_range && std::pow(K, j) * t <= r.range_hi(); ++j) {
          const double ratio = r.omega_tilde_unchecked(std::pow(K, j) * t) /
                               (std::pow(h_tilde, j) * st);
          sup_j[static_cast<std::size_t>(j - 1)] = std::max(sup_j[static_cast<std::size_t>(j - 1)], ratio);
          dmax = std::max(dmax, ratio);
        }
      }
      int argmax = 0;
      for (int j = 0; j < j_range; ++j)
        if (sup_j[static_cast<std::size_t>(j)] > sup_j[static_cast<std::size_t>(argmax)]) argmax = j;
      if (argmax < (2 * j_range) / 3 && dmax > 0.0) {
        rep.recert.found = true;
        rep.recert.H_tilde = h_tilde;
        rep.recert.D_tilde = dmax;
        const double delta = std::log(h_tilde) - lh;
        double n_tilde = 1.0;
        if (delta < std::log(3.0) / 3.0) {
          int j = 3;
          while (std::log(j) / j > delta && j < (1 << 26)) ++j;
          n_tilde = j;
        }
        rep.recert.N_tilde = n_tilde;
        break;
      }
    }
  }

  // summability budget: sum_n n int_{x_n}^{x_{n+1}} sigma/(1+t^2) <= sum 1/n^2
  if (r.input.opt.enforce_nq) {
    double total = 0.0, budget = 0.0;
    for (int n = 2; n + 1 <= r.n_max; ++n) {
      const std::size_t i = static_cast<std::size_t>(n);
      total += n * (r.nq_tail_value[i] - r.nq_tail_value[i + 1]);
      budget += 1.0 / (static_cast<double>(n) * n);
    }
    rep.nq_partial_sum = total;
    rep.nq_budget = budget;
    rep.nq_partial_sums_pass = total <= budget * (1.0 + 1e-6);
  }
  return rep;
}

}  // namespace ultra
