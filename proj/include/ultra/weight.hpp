#pragma once

// Weight functions: expression-backed evaluators with a linear ramp below
// t_min, derivatives, and grid-empirical checks of the defining axioms
// (moderate growth, log t = o(w), convexity of w(exp .)) plus concavity
// and pairwise asymptotic comparisons.
//
// Asymptotic verdicts are grid statements, never proofs; the Verdict enum
// and witness lists keep that explicit.

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ultra/expr.hpp"
#include "ultra/numeric.hpp"

namespace ultra {

class WeightEvalError : public std::runtime_error {
 public:
  WeightEvalError(const std::string& name, double t, const std::string& what)
      : std::runtime_error("weight '" + name + "' at t=" + std::to_string(t) + ": " + what),
        t_(t) {}
  double offending_t() const { return t_; }

 private:
  double t_;
};

class WeightFunction {
 public:
  WeightFunction(Expr expr, double t_min, std::string name = "",
                 std::optional<Expr> deriv = std::nullopt)
      : expr_(std::move(expr)),
        deriv_(std::move(deriv)),
        t_min_(t_min),
        name_(std::move(name)) {
    if (!(t_min_ > 0.0)) throw std::invalid_argument("t_min must be positive");
    w_tmin_ = ultra::eval(expr_, t_min_);
    if (!std::isfinite(w_tmin_) || w_tmin_ < 0.0)
      throw WeightEvalError(name_, t_min_, "expression not finite and nonnegative at t_min");
  }

  static WeightFunction parse(const std::string& text, double t_min = 1.0,
                              std::string name = "", const std::string& deriv_text = "") {
    std::optional<Expr> d;
    if (!deriv_text.empty()) d = parse_expression(deriv_text);
    if (name.empty()) name = text;
    return WeightFunction(parse_expression(text), t_min, std::move(name), std::move(d));
  }

  // Ramp continuation below t_min keeps w(0)=0, continuity and monotonicity.
  double operator()(double t) const {
    if (t < 0.0) throw WeightEvalError(name_, t, "negative argument");
    if (t == 0.0) return 0.0;
    if (t < t_min_) return w_tmin_ * (t / t_min_);
    const double v = ultra::eval(expr_, t);
    if (std::isnan(v)) throw WeightEvalError(name_, t, "domain violation in expression");
    return v;
  }

  bool has_derivative() const { return deriv_.has_value(); }

  // w'(t) for t > t_min: analytic if provided, else central differences with
  // one Richardson refinement.
  double derivative(double t) const {
    if (!(t > t_min_))
      throw WeightEvalError(name_, t, "derivative requested at or below t_min");
    if (deriv_) {
      const double v = ultra::eval(*deriv_, t);
      if (!std::isfinite(v)) throw WeightEvalError(name_, t, "derivative expression not finite");
      return v;
    }
    const double h = std::max(1e-6 * t, 1e-9);
    const auto central = [&](double step) {
      return ((*this)(t + step) - (*this)(t - step)) / (2.0 * step);
    };
    const double d1 = central(h), d2 = central(0.5 * h);
    const double d = (4.0 * d2 - d1) / 3.0;
    if (!std::isfinite(d))
      throw WeightEvalError(name_, t, "non-finite difference quotient (h=" + std::to_string(h) + ")");
    return d;
  }

  const Expr& expr() const { return expr_; }
  double t_min() const { return t_min_; }
  const std::string& name() const { return name_; }

 private:
  Expr expr_;
  std::optional<Expr> deriv_;
  double t_min_;
  std::string name_;
  double w_tmin_;
};

// Type-erased weight-like evaluator; also carries constructed curves
// (majorants, reduced weights) through the pair conditions.
class WeightHandle {
 public:
  WeightHandle() : fn_([](double) { return 0.0; }), t_min_(1.0), name_("<unset>") {}
  WeightHandle(const WeightFunction& w)  // NOLINT: implicit by design
      : fn_([w](double t) { return w(t); }), t_min_(w.t_min()), name_(w.name()) {}
  WeightHandle(std::function<double(double)> fn, std::string name, double t_min = 1.0)
      : fn_(std::move(fn)), t_min_(t_min), name_(std::move(name)) {}

  double operator()(double t) const { return fn_(t); }
  const std::string& name() const { return name_; }
  double t_min() const { return t_min_; }

 private:
  std::function<double(double)> fn_;
  double t_min_;
  std::string name_;
};

inline double eval_weight(const WeightFunction& w, double t) { return w(t); }
inline double weight_derivative(const WeightFunction& w, double t) { return w.derivative(t); }

enum class Verdict { Holds, Fails, Inconclusive };

inline const char* to_cstring(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds-empirically";
    case Verdict::Fails: return "fails";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct AsymptoticVerdict {
  Verdict verdict = Verdict::Inconclusive;
  std::vector<std::pair<double, double>> witnesses;  // (t, ratio)
  GeometricGrid grid;
};

enum class AsymptoticRelation { BigO, LittleO, Equivalent };

namespace detail {

struct RatioSweep {
  std::vector<double> t, r;
  bool any_nan = false;
  bool any_inf = false;
};

template <class F, class G>
RatioSweep sweep_ratios(const F& f, const G& g, const GeometricGrid& grid) {
  RatioSweep s;
  for (double t : grid.points()) {
    double num, den;
    try {
      num = f(t);
      den = g(t);
    } catch (const std::exception&) {
      s.any_nan = true;
      continue;
    }
    const double r = num / den;
    if (std::isnan(r)) {
      s.any_nan = true;
      continue;
    }
    if (std::isinf(r)) s.any_inf = true;
    s.t.push_back(t);
    s.r.push_back(r);
  }
  return s;
}

// Divergence-trend heuristic for O-relations: bounded on the grid means the
// last decade's maximum does not exceed twice the overall median.
inline AsymptoticVerdict verdict_big_o(const RatioSweep& s, const GeometricGrid& grid) {
  AsymptoticVerdict v;
  v.grid = grid;
  if (s.r.size() < 8) {
    v.verdict = Verdict::Inconclusive;
    return v;
  }
  const double med = median_of(s.r);
  const double t_cut = grid.hi / 10.0;
  double last_max = 0.0;
  std::size_t last_arg = 0;
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    if (s.t[i] >= t_cut && s.r[i] > last_max) {
      last_max = s.r[i];
      last_arg = i;
    }
  }
  if (s.any_inf) {
    for (std::size_t i = 0; i < s.t.size(); ++i)
      if (std::isinf(s.r[i])) {
        v.witnesses.emplace_back(s.t[i], s.r[i]);
        break;
      }
    v.verdict = Verdict::Fails;
    return v;
  }
  if (last_max <= 2.0 * med) {
    v.verdict = s.any_nan ? Verdict::Inconclusive : Verdict::Holds;
    return v;
  }
  v.verdict = Verdict::Fails;
  v.witnesses.emplace_back(s.t[last_arg], s.r[last_arg]);
  return v;
}

inline AsymptoticVerdict verdict_little_o(const RatioSweep& s, const GeometricGrid& grid) {
  AsymptoticVerdict v;
  v.grid = grid;
  if (s.r.size() < 8 || s.any_nan || s.any_inf) {
    if (s.any_inf) {
      v.verdict = Verdict::Fails;
      for (std::size_t i = 0; i < s.t.size(); ++i)
        if (std::isinf(s.r[i])) {
          v.witnesses.emplace_back(s.t[i], s.r[i]);
          break;
        }
    }
    return v;
  }
  const double first = s.r.front(), last = s.r.back();
  bool tail_nonincreasing = true;
  for (std::size_t i = s.r.size() / 2; i + 1 < s.r.size(); ++i) {
    if (s.r[i + 1] > s.r[i] + midpoint_slack(s.r[i])) {
      tail_nonincreasing = false;
      v.witnesses.emplace_back(s.t[i + 1], s.r[i + 1]);
      break;
    }
  }
  if (last <= 0.1 * first && tail_nonincreasing) {
    v.verdict = Verdict::Holds;
    return v;
  }
  if (last >= 0.5 * first || !tail_nonincreasing) {
    v.verdict = Verdict::Fails;
    if (v.witnesses.empty()) v.witnesses.emplace_back(s.t.back(), last);
    return v;
  }
  v.verdict = Verdict::Inconclusive;
  v.witnesses.emplace_back(s.t.back(), last);
  return v;
}

}  // namespace detail

template <class F, class G>
AsymptoticVerdict asymptotic_verdict(const F& f, const G& g, AsymptoticRelation rel,
                                     const GeometricGrid& grid = {}) {
  switch (rel) {
    case AsymptoticRelation::BigO:
      return detail::verdict_big_o(detail::sweep_ratios(f, g, grid), grid);
    case AsymptoticRelation::LittleO:
      return detail::verdict_little_o(detail::sweep_ratios(f, g, grid), grid);
    case AsymptoticRelation::Equivalent: {
      AsymptoticVerdict fw = detail::verdict_big_o(detail::sweep_ratios(f, g, grid), grid);
      AsymptoticVerdict bw = detail::verdict_big_o(detail::sweep_ratios(g, f, grid), grid);
      AsymptoticVerdict v;
      v.grid = grid;
      if (fw.verdict == Verdict::Holds && bw.verdict == Verdict::Holds)
        v.verdict = Verdict::Holds;
      else if (fw.verdict == Verdict::Fails || bw.verdict == Verdict::Fails) {
        v.verdict = Verdict::Fails;
        v.witnesses = fw.verdict == Verdict::Fails ? fw.witnesses : bw.witnesses;
      } else
        v.verdict = Verdict::Inconclusive;
      return v;
    }
  }
  return {};
}

struct AxiomReport {
  Verdict increasing = Verdict::Inconclusive;
  AsymptoticVerdict moderate_growth;  // w(2t) = O(w(t)), with grid constant C2
  double c2 = std::numeric_limits<double>::quiet_NaN();
  AsymptoticVerdict log_small;  // log t = o(w(t))
  Verdict phi_convex = Verdict::Inconclusive;
  Verdict concave = Verdict::Inconclusive;
  GeometricGrid grid;

  bool weight_axioms_hold() const {
    return increasing == Verdict::Holds && moderate_growth.verdict == Verdict::Holds &&
           log_small.verdict == Verdict::Holds && phi_convex == Verdict::Holds;
  }
};

namespace detail {

// Midpoint convexity on consecutive grid pairs; sign=+1 tests convexity,
// sign=-1 concavity. Non-finite samples make the verdict inconclusive.
template <class F>
Verdict midpoint_test(const F& f, const std::vector<double>& xs, int sign) {
  bool saw_nonfinite = false;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    double fa, fm, fb;
    try {
      fa = f(xs[i]);
      fb = f(xs[i + 1]);
      fm = f(0.5 * (xs[i] + xs[i + 1]));
    } catch (const std::exception&) {
      saw_nonfinite = true;
      continue;
    }
    if (!std::isfinite(fa) || !std::isfinite(fb) || !std::isfinite(fm)) {
      saw_nonfinite = true;
      continue;
    }
    const double chord = 0.5 * (fa + fb);
    if (sign > 0 ? fm > chord + midpoint_slack(chord) : fm < chord - midpoint_slack(chord))
      return Verdict::Fails;
  }
  return saw_nonfinite ? Verdict::Inconclusive : Verdict::Holds;
}

}  // namespace detail

template <class W>
AxiomReport check_weight_axioms(const W& w, const GeometricGrid& grid = {}) {
  if (grid.count < 16 || !(grid.hi > grid.lo) || !(grid.lo > 0.0))
    throw std::invalid_argument("check_weight_axioms: need >= 16 points, hi > lo > 0");
  AxiomReport rep;
  rep.grid = grid;
  const std::vector<double> ts = grid.points();

  // increasing
  rep.increasing = Verdict::Holds;
  {
    double prev = -1.0;
    for (double t : ts) {
      double v;
      try {
        v = w(t);
      } catch (const std::exception&) {
        rep.increasing = Verdict::Inconclusive;
        break;
      }
      if (std::isnan(v)) {
        rep.increasing = Verdict::Inconclusive;
        break;
      }
      if (v < prev - midpoint_slack(prev)) {
        rep.increasing = Verdict::Fails;
        break;
      }
      prev = v;
    }
  }

  // moderate growth w(2t) <= C2 w(t); C2 is the smallest grid constant
  {
    detail::RatioSweep s;
    for (double t : ts) {
      double num, den;
      try {
        num = w(2.0 * t);
        den = w(t);
      } catch (const std::exception&) {
        s.any_nan = true;
        continue;
      }
      const double r = num / den;
      if (std::isnan(r)) {
        s.any_nan = true;
        continue;
      }
      if (std::isinf(r)) s.any_inf = true;
      s.t.push_back(t);
      s.r.push_back(r);
    }
    rep.moderate_growth = detail::verdict_big_o(s, grid);
    double c2 = 0.0;
    for (double r : s.r) c2 = std::max(c2, r);
    rep.c2 = s.r.empty() ? std::numeric_limits<double>::quiet_NaN() : c2;
  }

  // log t = o(w(t))
  rep.log_small = asymptotic_verdict([](double t) { return std::log(t); }, w,
                                     AsymptoticRelation::LittleO, grid);

  // phi(s) = w(exp s) convex
  {
    std::vector<double> ss;
    ss.reserve(ts.size());
    for (double t : ts) ss.push_back(std::log(t));
    rep.phi_convex =
        detail::midpoint_test([&](double s) { return w(std::exp(s)); }, ss, +1);
  }

  // concavity of w itself (a hypothesis of the reduction construction,
  // not a weight axiom)
  rep.concave = detail::midpoint_test(w, ts, -1);
  return rep;
}

// Grid constant C2 with w(2t) <= C2 w(t), if the verdict holds.
template <class W>
std::optional<double> moderate_growth_constant(const W& w, const GeometricGrid& grid = {}) {
  double c2 = 0.0;
  bool any = false;
  for (double t : grid.points()) {
    double num, den;
    try {
      num = w(2.0 * t);
      den = w(t);
    } catch (const std::exception&) {
      return std::nullopt;
    }
    if (!(den > 0.0) || !std::isfinite(num)) return std::nullopt;
    c2 = std::max(c2, num / den);
    any = true;
  }
  if (!any || !std::isfinite(c2)) return std::nullopt;
  return c2;
}

}  // namespace ultra
