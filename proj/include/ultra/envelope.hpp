#pragma once

// The convex-envelope machinery behind the Beurling-to-Roumieu reduction:
// a cached Young-conjugate evaluator psi* with derivative (the maximizing
// argument), the scaled family psi_j(t) = j psi*(t/j), offset fitting
// g <= psi_j + C_j, the convex interpolant h threading between
// inf_j(psi_j + C_j) and inf_j(psi_j + D_j), and the majorant
// f(t) = h*(max{0, log t}).

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "ultra/conjugate.hpp"
#include "ultra/jet.hpp"
#include "ultra/numeric.hpp"

namespace ultra {

class HypothesisError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense-table conjugate evaluator. Values and maximizing arguments are
// sampled once on a geometric y-grid; evaluation interpolates linearly.
// The maximizing argument is the derivative of psi*, nondecreasing in y.
class ConjugateFn {
 public:
  template <class Phi>
  ConjugateFn(const Phi& phi, double y_max, int n = 4096) : y_max_(y_max) {
    ys_.reserve(static_cast<std::size_t>(n) + 1);
    ys_.push_back(0.0);
    const double y_lo = std::max(1e-6, y_max * 1e-7);
    for (int i = 0; i < n; ++i)
      ys_.push_back(y_lo * std::pow(y_max / y_lo, static_cast<double>(i) / (n - 1)));
    vals_.reserve(ys_.size());
    slopes_.reserve(ys_.size());
    ConjugateOptions opt;
    opt.allow_boundary = true;
    opt.s_cap = 1 << 22;
    for (double y : ys_) {
      ConjugatePoint p = conjugate_value(phi, y, opt);
      vals_.push_back(p.value);
      slopes_.push_back(p.arg);
      if (p.at_boundary) boundary_ = true;
    }
  }

  double value(double y) const { return interp(vals_, y); }
  double slope(double y) const { return interp(slopes_, y); }
  double y_max() const { return y_max_; }
  double max_slope() const { return slopes_.back(); }
  bool hit_boundary() const { return boundary_; }

  // y with slope(y) = s (clamped to the table range)
  double slope_inverse(double s) const {
    if (s <= slopes_.front()) return ys_.front();
    if (s >= slopes_.back()) return ys_.back();
    std::size_t lo = 0, hi = ys_.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      (slopes_[mid] <= s ? lo : hi) = mid;
    }
    const double ds = slopes_[hi] - slopes_[lo];
    if (ds <= 0.0) return ys_[lo];
    return ys_[lo] + (s - slopes_[lo]) / ds * (ys_[hi] - ys_[lo]);
  }

 private:
  double interp(const std::vector<double>& f, double y) const {
    if (y <= ys_.front()) return f.front();
    if (y >= ys_.back()) {
      // continue with the final chord slope
      const std::size_t n = ys_.size();
      const double sl = (f[n - 1] - f[n - 2]) / (ys_[n - 1] - ys_[n - 2]);
      return f.back() + sl * (y - ys_.back());
    }
    std::size_t lo = 0, hi = ys_.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      (ys_[mid] <= y ? lo : hi) = mid;
    }
    const double w = (y - ys_[lo]) / (ys_[hi] - ys_[lo]);
    return f[lo] + w * (f[hi] - f[lo]);
  }

  std::vector<double> ys_, vals_, slopes_;
  double y_max_;
  bool boundary_ = false;
};

// psi_j(t) = scale_j * psi*(t / scale_j); for the pipeline scale_j = j.
struct PsiFamily {
  std::shared_ptr<const ConjugateFn> psi_star;
  std::vector<double> scales;

  static PsiFamily indices(std::shared_ptr<const ConjugateFn> psi_star, int j_max) {
    PsiFamily fam;
    fam.psi_star = std::move(psi_star);
    for (int j = 1; j <= j_max; ++j) fam.scales.push_back(j);
    return fam;
  }

  std::size_t size() const { return scales.size(); }
  double value(std::size_t idx, double t) const {
    const double s = scales[idx];
    return s * psi_star->value(t / s);
  }
  double slope(std::size_t idx, double t) const {
    return psi_star->slope(t / scales[idx]);
  }
};

struct OffsetFit {
  std::vector<double> C;        // per index j = 1..j_max, floored at 1 + 1e-6
  std::vector<int> argmax_k;    // order attaining the fit
};

// C_j = max(1 + 1e-6, max_k (g(k) - j psi*(k/j))), so g <= psi_j + C_j on
// the sampled order range.
inline OffsetFit fit_offsets(const JetGrowthProfile& profile, const ConjugateFn& psi_star,
                             int j_max, int p_max = -1) {
  if (p_max < 0) p_max = profile.order();
  OffsetFit fit;
  for (int j = 1; j <= j_max; ++j) {
    double best = 1.0 + 1e-6;
    int arg = 0;
    for (int k = 0; k <= p_max; ++k) {
      const double v = profile.g(k) - j * psi_star.value(static_cast<double>(k) / j);
      if (v > best) {
        best = v;
        arg = k;
      }
    }
    fit.C.push_back(best);
    fit.argmax_k.push_back(arg);
  }
  return fit;
}

inline OffsetFit fit_offsets(const JetGrowthProfile& profile, const WeightFunction& sigma,
                             int j_max) {
  const auto psi = phi_of(normalized(WeightHandle(sigma)));
  ConjugateFn psi_star(psi, std::max(64.0, 4.0 * (profile.order() + 1)));
  return fit_offsets(profile, psi_star, j_max);
}

struct InterpolantPiece {
  double t_lo = 0.0;
  bool is_line = false;
  std::size_t idx = 0;     // curve: family index
  double offset = 0.0;     // curve: h = psi_idx + offset
  double line_slope = 0.0; // line: h = line_slope * t + line_icpt
  double line_icpt = 0.0;
};

// Piecewise convex h: curve segments from the family joined by tangent-line
// bridges whose slopes match on both ends. Evaluation extends beyond the
// last switch point along the final piece.
class ConvexInterpolant {
 public:
  ConvexInterpolant(PsiFamily family, std::vector<InterpolantPiece> pieces,
                    std::vector<double> C, std::vector<double> D, double t_max,
                    bool truncated, std::size_t indices_used)
      : family_(std::move(family)),
        pieces_(std::move(pieces)),
        C_(std::move(C)),
        D_(std::move(D)),
        t_max_(t_max),
        truncated_(truncated),
        indices_used_(indices_used) {}

  double operator()(double t) const {
    const InterpolantPiece& p = piece_at(t);
    if (p.is_line) return p.line_slope * t + p.line_icpt;
    return family_.value(p.idx, t) + p.offset;
  }

  double slope(double t) const {
    const InterpolantPiece& p = piece_at(t);
    if (p.is_line) return p.line_slope;
    return family_.slope(p.idx, t);
  }

  const std::vector<InterpolantPiece>& pieces() const { return pieces_; }
  const std::vector<double>& offsets_C() const { return C_; }
  const std::vector<double>& offsets_D() const { return D_; }
  const PsiFamily& family() const { return family_; }
  double t_max() const { return t_max_; }
  bool truncated() const { return truncated_; }
  std::size_t indices_used() const { return indices_used_; }

  double envelope_lower(double t) const {  // inf_j(psi_j + C_j)
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < family_.size(); ++i)
      m = std::min(m, family_.value(i, t) + C_[i]);
    return m;
  }

 private:
  const InterpolantPiece& piece_at(double t) const {
    std::size_t lo = 0;
    for (std::size_t i = pieces_.size(); i-- > 0;)
      if (t >= pieces_[i].t_lo) {
        lo = i;
        break;
      }
    return pieces_[lo];
  }

  PsiFamily family_;
  std::vector<InterpolantPiece> pieces_;
  std::vector<double> C_, D_;
  double t_max_;
  bool truncated_;
  std::size_t indices_used_;
};

namespace detail {

inline void validate_family(const PsiFamily& fam, double t_max) {
  const int n_grid = 256;
  if (fam.size() == 0) throw HypothesisError("empty family");
  for (std::size_t j = 0; j < fam.size(); ++j) {
    if (std::abs(fam.value(j, 0.0)) > 1e-9)
      throw HypothesisError("psi_j(0) != 0 (normalize the weight first)");
    double prev_slope = -1.0, prev_val = 0.0;
    for (int k = 1; k <= n_grid; ++k) {
      const double t = t_max * k / n_grid;
      const double sl = fam.slope(j, t);
      const double v = fam.value(j, t);
      if (sl < prev_slope - 1e-9 * (1.0 + std::abs(prev_slope)))
        throw HypothesisError("psi_j not convex on the working grid");
      if (v < prev_val - midpoint_slack(prev_val))
        throw HypothesisError("psi_j not increasing on the working grid");
      prev_slope = sl;
      prev_val = v;
    }
  }
  // Later family members can sit entirely in the flat region of psi* on a
  // short working range; the ordering hypotheses are only checkable where
  // some slope is actually visible.
  for (std::size_t j = 0; j + 1 < fam.size(); ++j) {
    bool strict_somewhere = false;
    bool any_positive = false;
    double gap_mid = 0.0, gap_end = 0.0;
    for (int k = 1; k <= n_grid; ++k) {
      const double t = t_max * k / n_grid;
      const double s0 = fam.slope(j, t), s1 = fam.slope(j + 1, t);
      if (s0 < s1 - 1e-9 * (1.0 + std::abs(s0)))
        throw HypothesisError("psi_j' >= psi_{j+1}' violated");
      if (s0 > s1 + 1e-9 * (1.0 + std::abs(s0))) strict_somewhere = true;
      if (std::max(s0, s1) > 1e-9) any_positive = true;
      if (k == n_grid / 2) gap_mid = fam.value(j, t) - fam.value(j + 1, t);
      if (k == n_grid) gap_end = fam.value(j, t) - fam.value(j + 1, t);
    }
    if (any_positive && !strict_somewhere)
      throw HypothesisError("psi_j' > psi_{j+1}' fails everywhere (duplicated family member?)");
    if (gap_end > 1e-9 && !(gap_end > gap_mid))
      throw HypothesisError("psi_j - psi_{j+1} not growing toward t_max");
  }
  for (std::size_t j = 0; j < fam.size(); ++j) {
    const double end = fam.slope(j, t_max);
    if (end > 1e-9 && !(end > fam.slope(j, t_max * 0.5)))
      throw HypothesisError("psi_j' not growing toward t_max");
  }
}

}  // namespace detail

// Switch schedule: ride psi_j + O_j until it clears psi_{j+1} + C_{j+1},
// bridge with the tangent line, land on psi_{j+1} where the slopes match.
// Slopes never decrease, every on-curve offset dominates its C, and the
// bridge stays above psi_{j+1} + C_{j+1}, so
//   inf_j(psi_j + C_j) <= h <= inf_j(psi_j + D_j)
// with D_j = sup_grid(h - psi_j) reported from the validation grid.
inline ConvexInterpolant build_convex_interpolant(const PsiFamily& family,
                                                  const std::vector<double>& offsets,
                                                  double t_max) {
  if (family.size() != offsets.size())
    throw std::invalid_argument("build_convex_interpolant: family/offset size mismatch");
  detail::validate_family(family, t_max);

  std::vector<InterpolantPiece> pieces;
  std::vector<double> O(offsets.size(), 0.0);
  O[0] = offsets[0];
  pieces.push_back({0.0, false, 0, O[0], 0.0, 0.0});
  bool truncated = false;
  std::size_t used = 1;
  double pos = 0.0, slope_floor = 0.0;

  const int n_scan = 2048;
  for (std::size_t j = 0; j + 1 < family.size(); ++j) {
    double T = std::numeric_limits<double>::quiet_NaN();
    for (int k = 0; k <= n_scan; ++k) {
      const double t = pos + (t_max - pos) * static_cast<double>(k) / n_scan;
      if (!(t > pos)) continue;
      if (family.slope(j, t) <= slope_floor + 1e-12 * (1.0 + slope_floor)) continue;
      if (family.value(j, t) + O[j] >= family.value(j + 1, t) + offsets[j + 1]) {
        T = t;
        break;
      }
    }
    if (std::isnan(T)) {
      truncated = true;
      break;
    }
    const double s = family.slope(j, T);
    const double hT = family.value(j, T) + O[j];
    // land where the next curve picks up the same slope
    const double U = family.scales[j + 1] * family.psi_star->slope_inverse(s);
    if (!(U >= T) || U > t_max * 1e6) {
      truncated = true;
      break;
    }
    const double line_icpt = hT - s * T;
    O[j + 1] = (s * U + line_icpt) - family.value(j + 1, U);
    if (U > T) pieces.push_back({T, true, 0, 0.0, s, line_icpt});
    pieces.push_back({U, false, j + 1, O[j + 1], 0.0, 0.0});
    pos = U;
    slope_floor = s;
    used = j + 2;
  }

  // D_j from the validation grid
  std::vector<double> D(offsets.size(), 0.0);
  {
    ConvexInterpolant h(family, pieces, std::vector<double>(offsets),
                        std::vector<double>(offsets.size(), 0.0), t_max, truncated, used);
    for (std::size_t j = 0; j < family.size(); ++j) {
      double d = -std::numeric_limits<double>::infinity();
      for (int k = 0; k <= 512; ++k) {
        const double t = t_max * k / 512.0;
        d = std::max(d, h(t) - family.value(j, t));
      }
      D[j] = d;
    }
  }
  return ConvexInterpolant(family, std::move(pieces), std::vector<double>(offsets),
                           std::move(D), t_max, truncated, used);
}

struct InterpolantChecks {
  bool convex = true;
  bool lower_sandwich = true;  // inf_j(psi_j + C_j) <= h
  bool upper_sandwich = true;  // h <= inf_j(psi_j + D_j)
  double min_lower_margin = std::numeric_limits<double>::infinity();
};

inline InterpolantChecks check_interpolant(const ConvexInterpolant& h, int n_grid = 512) {
  InterpolantChecks out;
  double prev_slope = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= n_grid; ++k) {
    const double t = h.t_max() * k / n_grid;
    const double sl = h.slope(t);
    if (sl < prev_slope - 1e-9 * (1.0 + std::abs(prev_slope))) out.convex = false;
    prev_slope = sl;
    const double lower = h.envelope_lower(t);
    const double margin = h(t) - lower;
    out.min_lower_margin = std::min(out.min_lower_margin, margin);
    if (margin < -1e-9 * (1.0 + std::abs(lower))) out.lower_sandwich = false;
    double upper = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < h.family().size(); ++j)
      upper = std::min(upper, h.family().value(j, t) + h.offsets_D()[j]);
    if (h(t) > upper + 1e-9 * (1.0 + std::abs(upper))) out.upper_sandwich = false;
  }
  return out;
}

// f(t) = h*(max{0, log t}) with h*(s) = sup_u (s u - h(u)). For slope-capped
// h the conjugate is +inf beyond the cap.
class Majorant {
 public:
  Majorant(std::function<double(double)> h_star, double slope_cap)
      : h_star_(std::move(h_star)), slope_cap_(slope_cap) {}

  double conjugate_at(double s) const {
    if (s > slope_cap_) return std::numeric_limits<double>::infinity();
    return h_star_(s);
  }
  double operator()(double t) const { return conjugate_at(std::max(0.0, std::log(t))); }
  double slope_cap() const { return slope_cap_; }

 private:
  std::function<double(double)> h_star_;
  double slope_cap_;
};

// Generic convex h given only by values: conjugate by secant doubling plus
// golden-section polish.
template <class H>
Majorant make_majorant(const H& h, double u_cap = 1e12) {
  // slope cap: limit of secants
  const double far = (h(u_cap) - h(u_cap * 0.5)) / (u_cap * 0.5);
  const double nearer = (h(u_cap * 0.5) - h(u_cap * 0.25)) / (u_cap * 0.25);
  const double cap = far > nearer + 1e-12 * (1.0 + std::abs(far))
                         ? std::numeric_limits<double>::infinity()
                         : far;
  const auto h_star = [h, u_cap](double s) {
    double hi = 1.0;
    while (hi < u_cap && (h(2.0 * hi) - h(hi)) / hi < s) hi *= 2.0;
    const auto m = [&](double u) { return s * u - h(u); };
    auto [arg, val] = golden_max(m, 0.0, std::min(2.0 * hi, u_cap), 1e-12);
    (void)arg;
    return std::max(val, m(0.0));
  };
  return Majorant(h_star, cap);
}

inline Majorant make_majorant(const ConvexInterpolant& h) {
  const double u_cap = std::max(h.t_max(), 1.0) * 1e9;
  const double cap = h.slope(u_cap);
  const auto h_star = [h, u_cap](double s) {
    // h' is nondecreasing: bisect for h'(u) >= s, then sup = s u* - h(u*)
    double lo = 0.0, hi = 1.0;
    while (hi < u_cap && h.slope(hi) < s) hi *= 2.0;
    for (int i = 0; i < 200 && (hi - lo) > 1e-13 * (1.0 + hi); ++i) {
      const double mid = 0.5 * (lo + hi);
      (h.slope(mid) >= s ? hi : lo) = mid;
    }
    const double u = 0.5 * (lo + hi);
    const auto m = [&](double uu) { return s * uu - h(uu); };
    // polish around the kink-free neighbourhood
    auto [arg, val] = golden_max(m, std::max(0.0, u * 0.5), std::min(u_cap, u * 1.5 + 1.0), 1e-12);
    (void)arg;
    return std::max({val, m(0.0), m(u)});
  };
  return Majorant(h_star, cap);
}

}  // namespace ultra
