#pragma once

// Young (Legendre-Fenchel) conjugation on the nonnegative half-line:
//   phi*(y) = sup_{s>=0} (s y - phi(s)).
// Values are computed per point by a coarse scan plus golden-section polish
// near the argmax; the search interval doubles until the maximizer is
// interior. Also: the weight-matrix sequences W^x_k = exp(phi*(k x)/x) and
// the moderate-growth relation a^k W^x_k <= C W^{Hx}_k.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ultra/numeric.hpp"
#include "ultra/weight.hpp"

namespace ultra {

class ArgmaxBoundaryError : public std::runtime_error {
 public:
  ArgmaxBoundaryError(double y, double s_max)
      : std::runtime_error("conjugate argmax at s_max=" + std::to_string(s_max) +
                           " for y=" + std::to_string(y) +
                           "; integrand still rising, enlarge s_max"),
        y_(y),
        s_max_(s_max) {}
  double y() const { return y_; }
  double s_max() const { return s_max_; }

 private:
  double y_, s_max_;
};

struct ConjugatePoint {
  double value = 0.0;
  double arg = 0.0;  // maximizing s; also the derivative of phi* at y
  bool at_boundary = false;
};

namespace detail {

template <class Phi>
ConjugatePoint conjugate_scan(const Phi& phi, double y, double s_max, int n_coarse,
                              double x_tol) {
  const auto m = [&](double s) {
    const double p = phi(s);
    return std::isfinite(p) ? s * y - p : -std::numeric_limits<double>::infinity();
  };
  int best = 0;
  double best_v = m(0.0);
  const double step = s_max / n_coarse;
  double edge = best_v, inner = best_v;
  for (int i = 1; i <= n_coarse; ++i) {
    const double v = m(i * step);
    if (v > best_v) {
      best_v = v;
      best = i;
    }
    if (i == n_coarse - 2) inner = v;
    if (i == n_coarse) edge = v;
  }
  ConjugatePoint out;
  // a rising right edge means the supremum may live beyond s_max, even when
  // the interior maximum still dominates at this range
  if (std::isfinite(edge) && edge > inner + 1e-12 * (1.0 + std::abs(edge))) {
    out.at_boundary = true;
    out.value = std::max(best_v, edge);
    out.arg = s_max;
    return out;
  }
  const double lo = std::max(0.0, (best - 1) * step);
  const double hi = std::min(s_max, (best + 1) * step);
  auto [arg, val] = golden_max(m, lo, hi, x_tol);
  if (best_v > val) {
    val = best_v;
    arg = best * step;
  }
  out.value = val;
  out.arg = arg;
  return out;
}

}  // namespace detail

struct ConjugateOptions {
  double s_max = 64.0;   // initial search interval
  double s_cap = 4096.0; // doubling stops here
  int n_coarse = 512;
  double x_tol = 1e-10;
  bool allow_boundary = false;  // report instead of throwing
};

// phi*(y) with the search interval doubled until the argmax is interior.
template <class Phi>
ConjugatePoint conjugate_value(const Phi& phi, double y, ConjugateOptions opt = {}) {
  double s_max = opt.s_max;
  for (;;) {
    ConjugatePoint p = detail::conjugate_scan(phi, y, s_max, opt.n_coarse, opt.x_tol);
    if (!p.at_boundary) return p;
    if (s_max >= opt.s_cap) {
      if (opt.allow_boundary) return p;
      throw ArgmaxBoundaryError(y, s_max);
    }
    s_max *= 2.0;
  }
}

// Sampled conjugate on a monotone grid, piecewise-linear interpolation.
struct ConjugateTable {
  std::vector<double> y_grid;
  std::vector<double> values;
  std::vector<double> s_star;  // maximizing s per sample
  double s_max = 0.0;

  double operator()(double y) const {
    if (y_grid.empty()) throw std::logic_error("empty conjugate table");
    if (y <= y_grid.front()) return values.front();
    if (y >= y_grid.back()) {
      // continue with the last chord slope
      const std::size_t n = y_grid.size();
      if (n == 1) return values.back();
      const double sl =
          (values[n - 1] - values[n - 2]) / (y_grid[n - 1] - y_grid[n - 2]);
      return values.back() + sl * (y - y_grid.back());
    }
    std::size_t lo = 0, hi = y_grid.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      (y_grid[mid] <= y ? lo : hi) = mid;
    }
    const double w = (y - y_grid[lo]) / (y_grid[hi] - y_grid[lo]);
    return values[lo] + w * (values[hi] - values[lo]);
  }
};

// Fixed search interval; throws when the maximizer for some sample hits it.
template <class Phi>
ConjugateTable young_conjugate(const Phi& phi, const std::vector<double>& y_grid,
                               double s_max) {
  ConjugateTable table;
  table.y_grid = y_grid;
  table.s_max = s_max;
  for (double y : y_grid) {
    ConjugatePoint p = detail::conjugate_scan(phi, y, s_max, 512, 1e-10);
    if (p.at_boundary) throw ArgmaxBoundaryError(y, s_max);
    table.values.push_back(p.value);
    table.s_star.push_back(p.arg);
  }
  return table;
}

template <class Phi>
ConjugateTable young_conjugate_auto(const Phi& phi, const std::vector<double>& y_grid,
                                    ConjugateOptions opt = {}) {
  ConjugateTable table;
  table.y_grid = y_grid;
  for (double y : y_grid) {
    ConjugatePoint p = conjugate_value(phi, y, opt);
    table.values.push_back(p.value);
    table.s_star.push_back(p.arg);
    table.s_max = std::max(table.s_max, p.arg);
  }
  return table;
}

// phi**(s) sampled on s_grid; the inner conjugate values are recomputed on
// demand so interpolation error does not enter the involution check. Inner
// values that diverge (phi with sublinear growth beyond some slope) act as
// +inf and simply drop out of the outer supremum.
template <class Phi>
ConjugateTable double_conjugate(const Phi& phi, const std::vector<double>& s_grid,
                                ConjugateOptions opt = {}) {
  const auto phi_star = [&](double y) {
    try {
      return conjugate_value(phi, y, opt).value;
    } catch (const ArgmaxBoundaryError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  ConjugateTable table;
  table.y_grid = s_grid;
  for (double s : s_grid) {
    ConjugatePoint p = conjugate_value(phi_star, s, opt);
    table.values.push_back(p.value);
    table.s_star.push_back(p.arg);
    table.s_max = std::max(table.s_max, p.arg);
  }
  return table;
}

// Equivalent normalization vanishing on [0,1]: w(t) -> max(0, w(t) - w(1)).
// Keeps continuity, monotonicity, and convexity of w(exp .), so phi(0) = 0.
inline WeightHandle normalized(const WeightHandle& w) {
  const double base = w(1.0);
  return WeightHandle(
      [w, base](double t) { return std::max(0.0, w(t) - base); },
      w.name() + "|norm", w.t_min());
}

// Hard-truncation alternative: w(t) -> 0 on [0, t0], unchanged beyond. Also
// yields phi(0) = 0 but gives up continuity (and hence convexity of
// w(exp .)) at t0 unless w(t0) = 0 already.
inline WeightHandle truncated(const WeightHandle& w, double t0 = 1.0) {
  return WeightHandle([w, t0](double t) { return t <= t0 ? 0.0 : w(t); },
                      w.name() + "|trunc", w.t_min());
}

// phi = w(exp .) for a normalized weight.
inline std::function<double(double)> phi_of(const WeightHandle& w_normalized) {
  return [w = w_normalized](double s) {
    if (s > 690.0) return std::numeric_limits<double>::infinity();
    return w(std::exp(s));
  };
}

struct WeightMatrix {
  double x = 1.0;
  std::vector<double> log_values;  // log W^x_k = phi*(k x)/x
  std::vector<double> values;      // exp(log) where representable
  std::vector<bool> overflow;      // true: value unrepresentable, log only
};

// W^x_k = exp(phi*(k x)/x), k = 0..k_max, computed in the log domain.
inline WeightMatrix weight_matrix(const WeightHandle& w, double x, int k_max,
                                  ConjugateOptions opt = {}) {
  if (!(x > 0.0)) throw std::invalid_argument("weight_matrix: x must be positive");
  const auto phi = phi_of(normalized(w));
  WeightMatrix m;
  m.x = x;
  for (int k = 0; k <= k_max; ++k) {
    const double lw = conjugate_value(phi, k * x, opt).value / x;
    m.log_values.push_back(lw);
    const bool over = lw > 700.0;
    m.overflow.push_back(over);
    m.values.push_back(over ? std::numeric_limits<double>::infinity() : std::exp(lw));
  }
  return m;
}

struct MatrixGrowthProfile {
  double H = 1.0;
  double C = std::numeric_limits<double>::quiet_NaN();  // exp of the sup log-ratio
  bool stable = false;          // sup not driven by the tail of the k-range
  int argmax_k = 0;
  std::vector<double> log_ratio;  // log(a^k W^x_k / W^{Hx}_k), k = 0..k_max
};

// Ratio profile for one forced H.
inline MatrixGrowthProfile matrix_growth_at(const WeightHandle& w, double a, double x,
                                            double H, int k_max) {
  const auto phi = phi_of(normalized(w));
  const double log_a = std::log(a);
  MatrixGrowthProfile p;
  p.H = H;
  p.log_ratio.resize(static_cast<std::size_t>(k_max) + 1);
  int argmax = 0;
  for (int k = 0; k <= k_max; ++k) {
    const double lhs = conjugate_value(phi, k * x).value / x;
    const double rhs = conjugate_value(phi, k * H * x).value / (H * x);
    p.log_ratio[static_cast<std::size_t>(k)] = k * log_a + lhs - rhs;
    if (p.log_ratio[static_cast<std::size_t>(k)] > p.log_ratio[static_cast<std::size_t>(argmax)])
      argmax = k;
  }
  const int cut = (2 * k_max) / 3;
  double tail_max = -std::numeric_limits<double>::infinity();
  double tail_min = std::numeric_limits<double>::infinity();
  for (int k = cut; k <= k_max; ++k) {
    tail_max = std::max(tail_max, p.log_ratio[static_cast<std::size_t>(k)]);
    tail_min = std::min(tail_min, p.log_ratio[static_cast<std::size_t>(k)]);
  }
  const bool flat_tail = tail_max - tail_min <= 1e-9 * (1.0 + std::abs(tail_max));
  p.argmax_k = argmax;
  p.stable = argmax < cut || flat_tail;
  p.C = std::exp(p.log_ratio[static_cast<std::size_t>(argmax)]);
  return p;
}

struct MatrixGrowth {
  bool found = false;
  double a = 1.0, x = 1.0;
  double H = std::numeric_limits<double>::quiet_NaN();
  double C = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> log_ratio;  // profile for the reported H (or the last tried)
  int k_max = 0;
};

// Smallest H on a geometric grid in [a, H_max] with
// sup_k a^k W^x_k / W^{Hx}_k trend-stable over k <= k_max; C is that sup.
inline MatrixGrowth check_matrix_growth(const WeightHandle& w, double a, double x,
                                        int k_max, double h_max = 0.0) {
  if (!(a >= 1.0)) throw std::invalid_argument("check_matrix_growth: need a >= 1");
  if (h_max <= 0.0) h_max = std::max(16.0 * a, 16.0);
  MatrixGrowth out;
  out.a = a;
  out.x = x;
  out.k_max = k_max;
  for (double H = a; H <= h_max * 1.0000001; H *= std::pow(2.0, 0.125)) {
    MatrixGrowthProfile p = matrix_growth_at(w, a, x, H, k_max);
    out.log_ratio = std::move(p.log_ratio);
    if (p.stable) {
      out.found = true;
      out.H = H;
      out.C = p.C;
      return out;
    }
  }
  return out;
}

}  // namespace ultra
