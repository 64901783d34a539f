#pragma once

// Shared numeric kernels: geometric grids, adaptive Simpson quadrature,
// a chunked integrator for improper integrals on [0, inf) after a log
// substitution, bracketing and bisection for monotone equations, and
// golden-section maximization.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ultra {

// Largest argument we ever feed to a weight evaluator inside integrals.
inline constexpr double kArgCap = 1e300;

struct GeometricGrid {
  double lo = 10.0;
  double hi = 1e12;
  int count = 200;

  std::vector<double> points() const {
    std::vector<double> p(static_cast<std::size_t>(count));
    if (count == 1) {
      p[0] = lo;
      return p;
    }
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < count; ++i)
      p[static_cast<std::size_t>(i)] =
          std::exp(llo + (lhi - llo) * static_cast<double>(i) / (count - 1));
    p.front() = lo;
    p.back() = hi;
    return p;
  }
};

inline double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

namespace detail {

template <class F>
double simpson_rec(const F& f, double a, double m, double b, double fa, double fm,
                   double fb, double whole, double eps, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * eps)
    return left + right + delta / 15.0;
  return simpson_rec(f, a, lm, m, fa, flm, fm, left, eps * 0.5, depth - 1) +
         simpson_rec(f, m, rm, b, fm, frm, fb, right, eps * 0.5, depth - 1);
}

}  // namespace detail

// Adaptive Simpson on [a, b] with an absolute tolerance.
template <class F>
double integrate_finite_abs(const F& f, double a, double b, double eps_abs,
                            int max_depth = 26) {
  if (!(b > a)) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_rec(f, a, m, b, fa, fm, fb, whole,
                             std::max(eps_abs, 1e-300), max_depth);
}

// Adaptive Simpson with a relative tolerance; a composite rough pass fixes
// the scale so the absolute tolerance stays above the fp-noise floor.
template <class F>
double integrate_finite(const F& f, double a, double b, double rel_tol,
                        double scale_hint = 0.0) {
  if (!(b > a)) return 0.0;
  double rough = 0.0;
  const int n = 16;
  const double h = (b - a) / n;
  for (int i = 0; i < n; ++i) {
    const double x0 = a + i * h;
    rough += h / 6.0 * (f(x0) + 4.0 * f(x0 + 0.5 * h) + f(x0 + h));
  }
  const double scale = std::max({std::abs(rough), std::abs(scale_hint), 1e-280});
  if (!std::isfinite(scale)) return rough;
  return integrate_finite_abs(f, a, b, rel_tol * scale);
}

// Result of a chunked improper integral of g over v in [0, inf).
struct ImproperIntegral {
  enum class Status { Converged, Truncated, Divergent, Error };
  Status status = Status::Error;
  double value = 0.0;          // integral over [0, v_stop]
  double head = 0.0;           // contribution of [0, split_at)
  double tail_estimate = 0.0;  // geometric extrapolation at the stopping point
  double v_stop = 0.0;
  std::vector<std::pair<double, double>> partials;  // (v, running integral)
  std::string note;

  bool converged() const { return status == Status::Converged || status == Status::Truncated; }
};

struct ImproperOptions {
  double tol = 1e-8;        // relative tolerance on the tail
  double v_cap = 690.0;     // hard stop (argument overflow guard)
  double first_chunk = 8.0; // end of the first chunk
  double split_at = 0.0;    // if > 0, report the integral over [0, split_at) separately
  bool presume_divergent = false;  // known-divergent: collect a short witness then flag
};

// Integrates g(v) >= 0 over [0, inf) in doubling chunks. Converged: the
// geometric tail estimate drops below tol * value. Divergent: the running
// value blows up, or chunk contributions are still not decaying when the
// argument cap is reached. Truncated: the cap is reached on a decaying
// trend; value holds the computed prefix.
template <class F>
ImproperIntegral integrate_improper(const F& g, const ImproperOptions& opt) {
  ImproperIntegral out;
  double total = 0.0;
  double prev_chunk = -1.0;
  double last_q = -1.0;
  double v = 0.0;
  const double first = std::max(1e-3, opt.first_chunk);
  bool capped = false;

  if (opt.split_at > 0.0 && opt.split_at < opt.v_cap) {
    out.head = integrate_finite(g, 0.0, opt.split_at, opt.tol * 0.1);
    total = out.head;
    v = opt.split_at;
    out.partials.emplace_back(v, total);
  }

  for (int k = 0; k < 80; ++k) {
    double v_next = v < first ? first : v * 2.0;
    bool clipped = false;
    if (v_next >= opt.v_cap) {
      v_next = opt.v_cap;
      clipped = capped = true;
    }
    if (!(v_next > v)) {
      capped = true;
      break;
    }
    const double chunk = integrate_finite(g, v, v_next, opt.tol * 0.125, total);
    if (!std::isfinite(chunk)) {
      out.status = ImproperIntegral::Status::Error;
      out.value = total;
      out.v_stop = v;
      out.note = "non-finite integrand contribution";
      return out;
    }
    total += chunk;
    v = v_next;
    out.partials.emplace_back(v, total);

    if (total > 1e280) {
      out.status = ImproperIntegral::Status::Divergent;
      out.value = total;
      out.v_stop = v;
      out.note = "running value blew up";
      return out;
    }
    if (clipped) break;  // partial chunk: not comparable for trend decisions
    if (!opt.presume_divergent && prev_chunk >= 0.0 && chunk == 0.0 && total > 0.0) {
      // nonnegative integrand has died out entirely
      out.status = ImproperIntegral::Status::Converged;
      out.value = total;
      out.v_stop = v;
      return out;
    }
    if (prev_chunk > 0.0 && chunk > 0.0) {
      last_q = chunk / prev_chunk;
      if (!opt.presume_divergent && last_q < 0.95) {
        const double tail = chunk * last_q / (1.0 - last_q);
        if (tail <= opt.tol * std::abs(total)) {
          out.status = ImproperIntegral::Status::Converged;
          out.value = total;
          out.tail_estimate = tail;
          out.v_stop = v;
          return out;
        }
      }
    }
    prev_chunk = chunk;
    if (opt.presume_divergent && out.partials.size() >= 5) break;
  }

  out.value = total;
  out.v_stop = v;
  if (opt.presume_divergent) {
    out.status = ImproperIntegral::Status::Divergent;
    out.note = "moderate-growth tail exponent at or above kernel exponent";
    return out;
  }
  const bool decaying = last_q >= 0.0 && last_q < 0.98;
  if (capped && decaying) {
    out.status = ImproperIntegral::Status::Truncated;
    if (last_q < 1.0 && prev_chunk > 0.0)
      out.tail_estimate = prev_chunk * last_q / (1.0 - last_q);
    out.note = "truncated at representable argument range";
  } else {
    out.status = ImproperIntegral::Status::Divergent;
    out.note = "chunk contributions not decaying at the argument cap";
  }
  return out;
}

// First x >= lo with pred(x) true, assuming pred is eventually monotone true.
// Doubles to bracket, then bisects to rel_tol. Returns NaN if not found
// below cap.
template <class Pred>
double threshold_search(const Pred& pred, double lo, double cap, double rel_tol = 1e-9) {
  double a = std::max(lo, 1e-12);
  if (pred(a)) return a;
  double b = a;
  for (;;) {
    b *= 2.0;
    if (b > cap) return std::numeric_limits<double>::quiet_NaN();
    if (pred(b)) break;
  }
  double fail = b * 0.5, pass = b;
  while ((pass - fail) > rel_tol * pass) {
    const double mid = 0.5 * (fail + pass);
    (pred(mid) ? pass : fail) = mid;
  }
  return pass;
}

// Solves f(x) = target for increasing f by doubling from lo, then bisection.
template <class F>
double solve_increasing(const F& f, double target, double lo, double cap = kArgCap,
                        double rel_tol = 1e-12) {
  double a = std::max(lo, 1e-300);
  if (f(a) >= target) return a;
  double b = a;
  for (;;) {
    b = std::max(b * 2.0, 1.0);
    if (b > cap)
      throw std::runtime_error("solve_increasing: target not reached below cap");
    if (f(b) >= target) break;
  }
  a = b * 0.5;
  for (int i = 0; i < 200 && (b - a) > rel_tol * b; ++i) {
    const double mid = 0.5 * (a + b);
    (f(mid) >= target ? b : a) = mid;
  }
  return 0.5 * (a + b);
}

// Golden-section maximization of f on [a, b]; returns (argmax, max).
template <class F>
std::pair<double, double> golden_max(const F& f, double a, double b,
                                     double x_tol = 1e-10) {
  constexpr double inv_phi = 0.6180339887498949;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while ((b - a) > x_tol * (1.0 + std::abs(a) + std::abs(b))) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double x = fc >= fd ? c : d;
  return {x, std::max(fc, fd)};
}

inline double midpoint_slack(double value) { return 1e-9 * (1.0 + std::abs(value)); }

}  // namespace ultra
