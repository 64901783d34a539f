#pragma once

// Whitney jets on finite point sets: multi-index bookkeeping, Taylor
// remainders, the Beurling-type norm and seminorm, Roumieu membership
// against weight-matrix sequences, and the growth profile (a_k, b_k, g)
// feeding the Beurling-to-Roumieu pipeline.

#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ultra/conjugate.hpp"
#include "ultra/weight.hpp"

namespace ultra {

class JetError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

using MultiIndex = std::vector<int>;

inline int degree(const MultiIndex& a) {
  int d = 0;
  for (int v : a) d += v;
  return d;
}

inline std::string to_string(const MultiIndex& a) {
  std::string s = "(";
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(a[i]);
  }
  return s + ")";
}

// All multi-indices with |alpha| <= cap in dim variables, ordered by
// (degree, lexicographic).
struct AlphaTable {
  int dim = 1, cap = 0;
  std::vector<MultiIndex> alphas;
  std::map<MultiIndex, int> ranks;

  static AlphaTable build(int dim, int cap) {
    AlphaTable t;
    t.dim = dim;
    t.cap = cap;
    MultiIndex cur(static_cast<std::size_t>(dim), 0);
    for (int d = 0; d <= cap; ++d) {
      // lexicographically ascending among |alpha| = d
      const std::function<void(int, int)> rec = [&](int pos, int left) {
        if (pos == dim - 1) {
          cur[static_cast<std::size_t>(pos)] = left;
          t.ranks.emplace(cur, static_cast<int>(t.alphas.size()));
          t.alphas.push_back(cur);
          return;
        }
        for (int v = 0; v <= left; ++v) {
          cur[static_cast<std::size_t>(pos)] = v;
          rec(pos + 1, left - v);
        }
      };
      rec(0, d);
    }
    return t;
  }

  int rank(const MultiIndex& a) const {
    auto it = ranks.find(a);
    return it == ranks.end() ? -1 : it->second;
  }
  std::size_t size() const { return alphas.size(); }
};

class Jet {
 public:
  Jet(int dim, int p_cap)
      : dim_(dim), p_cap_(p_cap), table_(AlphaTable::build(dim, p_cap)) {
    if (dim < 1) throw JetError("jet dimension must be at least 1");
    if (p_cap < 0) throw JetError("jet order cap must be nonnegative");
    fact_.assign(static_cast<std::size_t>(p_cap) + 2, 1.0);
    for (std::size_t k = 1; k < fact_.size(); ++k) fact_[k] = fact_[k - 1] * static_cast<double>(k);
  }

  int add_point(std::vector<double> xs) {
    if (static_cast<int>(xs.size()) != dim_) throw JetError("point arity mismatch");
    for (const auto& p : points_)
      if (p == xs) throw JetError("duplicate point");
    points_.push_back(std::move(xs));
    values_.resize(points_.size() * table_.size(),
                   std::numeric_limits<double>::quiet_NaN());
    present_.resize(points_.size() * table_.size(), false);
    return static_cast<int>(points_.size()) - 1;
  }

  void set_value(int point, const MultiIndex& alpha, double v) {
    const std::size_t idx = slot(point, alpha);
    if (present_[idx])
      throw JetError("duplicate value entry for point " + std::to_string(point) +
                     ", alpha " + ultra::to_string(alpha));
    values_[idx] = v;
    present_[idx] = true;
  }

  double value(int point, const MultiIndex& alpha) const {
    const std::size_t idx = slot(point, alpha);
    if (!present_[idx])
      throw JetError("missing value entry for point " + std::to_string(point) +
                     ", alpha " + ultra::to_string(alpha));
    return values_[idx];
  }

  double value_by_rank(int point, int alpha_rank) const {
    const std::size_t idx =
        static_cast<std::size_t>(point) * table_.size() + static_cast<std::size_t>(alpha_rank);
    if (!present_[idx])
      throw JetError("missing value entry for point " + std::to_string(point) +
                     ", alpha " + ultra::to_string(table_.alphas[static_cast<std::size_t>(alpha_rank)]));
    return values_[idx];
  }

  void require_complete() const {
    for (std::size_t p = 0; p < points_.size(); ++p)
      for (std::size_t a = 0; a < table_.size(); ++a)
        if (!present_[p * table_.size() + a])
          throw JetError("incomplete jet: missing point " + std::to_string(p) +
                         ", alpha " + ultra::to_string(table_.alphas[a]));
  }

  int dim() const { return dim_; }
  int p_cap() const { return p_cap_; }
  int n_points() const { return static_cast<int>(points_.size()); }
  const std::vector<double>& point(int i) const { return points_[static_cast<std::size_t>(i)]; }
  const AlphaTable& alphas() const { return table_; }
  double factorial(int k) const { return fact_[static_cast<std::size_t>(k)]; }

  double distance(int i, int j) const {
    double s = 0.0;
    for (int d = 0; d < dim_; ++d) {
      const double dd = points_[static_cast<std::size_t>(j)][static_cast<std::size_t>(d)] -
                        points_[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)];
      s += dd * dd;
    }
    return std::sqrt(s);
  }

 private:
  std::size_t slot(int point, const MultiIndex& alpha) const {
    if (point < 0 || point >= n_points()) throw JetError("point index out of range");
    const int r = table_.rank(alpha);
    if (r < 0)
      throw JetError("alpha " + ultra::to_string(alpha) + " outside order cap " +
                     std::to_string(p_cap_));
    return static_cast<std::size_t>(point) * table_.size() + static_cast<std::size_t>(r);
  }

  int dim_, p_cap_;
  AlphaTable table_;
  std::vector<std::vector<double>> points_;
  std::vector<double> values_;
  std::vector<bool> present_;
  std::vector<double> fact_;
};

// (R^p_x F)^alpha(y) = F^alpha(y) - sum_{|beta| <= p-|alpha|} (y-x)^beta/beta! F^{alpha+beta}(x)
//
// A remainder below 32 eps times the accumulated term magnitude is
// indistinguishable from zero at binary64 resolution and is returned as an
// exact zero; the downstream quotients multiply by (p+1-|alpha|)!/|x-y|^{...}
// and would otherwise amplify pure cancellation noise at high orders.
inline double remainder(const Jet& jet, int x_idx, int y_idx, const MultiIndex& alpha,
                        int p) {
  const int da = degree(alpha);
  if (da > p || p > jet.p_cap())
    throw JetError("remainder: need |alpha| <= p <= p_cap");
  double sum = 0.0;
  double magnitude = std::abs(jet.value(y_idx, alpha));
  for (const MultiIndex& beta : jet.alphas().alphas) {
    if (degree(beta) > p - da) continue;
    double term = 1.0;
    for (int d = 0; d < jet.dim(); ++d) {
      const double dy = jet.point(y_idx)[static_cast<std::size_t>(d)] -
                        jet.point(x_idx)[static_cast<std::size_t>(d)];
      term *= std::pow(dy, beta[static_cast<std::size_t>(d)]) /
              jet.factorial(beta[static_cast<std::size_t>(d)]);
    }
    MultiIndex ab(alpha);
    for (int d = 0; d < jet.dim(); ++d) ab[static_cast<std::size_t>(d)] += beta[static_cast<std::size_t>(d)];
    term *= jet.value(x_idx, ab);
    sum += term;
    magnitude += std::abs(term);
  }
  const double r = jet.value(y_idx, alpha) - sum;
  if (std::abs(r) <= 32.0 * std::numeric_limits<double>::epsilon() * magnitude)
    return 0.0;
  return r;
}

struct SeminormMaximizer {
  int p = 0;
  int alpha_rank = 0;
  int x_idx = 0, y_idx = 0;
};

struct JetSeminorms {
  double norm = 0.0;      // sup |F^alpha(x)| exp(-m phi*(|alpha|/m))
  double seminorm = 0.0;  // weighted remainder sup
  SeminormMaximizer norm_arg, seminorm_arg;
};

// Beurling-type quantities at index m >= 1; the remainder supremum over all
// p is truncated at p_max.
inline JetSeminorms beurling_seminorms(const Jet& jet, const WeightFunction& w, int m,
                                       int p_max) {
  if (m < 1) throw std::invalid_argument("beurling_seminorms: m must be >= 1");
  if (p_max > jet.p_cap())
    throw std::invalid_argument("beurling_seminorms: p_max exceeds the jet order cap");
  const auto phi = phi_of(normalized(WeightHandle(w)));
  std::vector<double> phistar(static_cast<std::size_t>(p_max) + 2);
  for (int k = 0; k <= p_max + 1; ++k)
    phistar[static_cast<std::size_t>(k)] =
        conjugate_value(phi, static_cast<double>(k) / m).value;

  JetSeminorms out;
  const auto& alphas = jet.alphas().alphas;
  for (int x = 0; x < jet.n_points(); ++x)
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      const int k = degree(alphas[a]);
      if (k > p_max) continue;
      const double v = std::abs(jet.value_by_rank(x, static_cast<int>(a))) *
                       std::exp(-m * phistar[static_cast<std::size_t>(k)]);
      if (v > out.norm) {
        out.norm = v;
        out.norm_arg = {k, static_cast<int>(a), x, x};
      }
    }

  for (int p = 0; p <= p_max; ++p) {
    const double weight = std::exp(-m * phistar[static_cast<std::size_t>(p) + 1]);
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      const int da = degree(alphas[a]);
      if (da > p) continue;
      for (int x = 0; x < jet.n_points(); ++x)
        for (int y = 0; y < jet.n_points(); ++y) {
          if (x == y) continue;
          const double dist = jet.distance(x, y);
          const double r = remainder(jet, x, y, alphas[a], p);
          const double v = std::abs(r) * jet.factorial(p + 1 - da) /
                           std::pow(dist, p + 1 - da) * weight;
          if (v > out.seminorm) {
            out.seminorm = v;
            out.seminorm_arg = {p, static_cast<int>(a), x, y};
          }
        }
    }
  }
  return out;
}

struct JetGrowthProfile {
  std::vector<double> a;  // a_k, k = 0..p_max
  std::vector<double> b;  // b_k, k = 0..p_max+1, b_0 = 0

  double g(int k) const {
    const double top = std::max(
        {a[static_cast<std::size_t>(k)], b[static_cast<std::size_t>(k)], 1.0});
    return std::log(top);
  }
  int order() const { return static_cast<int>(a.size()) - 1; }
};

inline JetGrowthProfile jet_growth_profile(const Jet& jet, int p_max) {
  if (p_max > jet.p_cap())
    throw std::invalid_argument("jet_growth_profile: p_max exceeds the jet order cap");
  JetGrowthProfile prof;
  prof.a.assign(static_cast<std::size_t>(p_max) + 1, 0.0);
  prof.b.assign(static_cast<std::size_t>(p_max) + 2, 0.0);
  const auto& alphas = jet.alphas().alphas;
  for (int x = 0; x < jet.n_points(); ++x)
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      const int k = degree(alphas[a]);
      if (k > p_max) continue;
      prof.a[static_cast<std::size_t>(k)] =
          std::max(prof.a[static_cast<std::size_t>(k)],
                   std::abs(jet.value_by_rank(x, static_cast<int>(a))));
    }
  for (int k = 0; k <= p_max; ++k)
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      const int da = degree(alphas[a]);
      if (da > k) continue;
      for (int x = 0; x < jet.n_points(); ++x)
        for (int y = 0; y < jet.n_points(); ++y) {
          if (x == y) continue;
          const double r = remainder(jet, x, y, alphas[a], k);
          const double v = std::abs(r) * jet.factorial(k + 1 - da) /
                           std::pow(jet.distance(x, y), k + 1 - da);
          prof.b[static_cast<std::size_t>(k) + 1] =
              std::max(prof.b[static_cast<std::size_t>(k) + 1], v);
        }
    }
  return prof;
}

struct MembershipResult {
  std::optional<double> x;  // smallest stable x in the grid
  struct PerX {
    double x = 0.0;
    bool stable = false;
    double norm_sup = 0.0, semi_sup = 0.0;
    int norm_argmax = 0, semi_argmax = 0;
  };
  std::vector<PerX> table;
};

namespace detail {

// "attained at small p and nonincreasing over the last third". The slack is
// relative to the sequence maximum: high-order remainders of benign jets sit
// on an fp-cancellation floor amplified by (p+1)!/|x-y|^{p+1}, so tail
// wiggles far below the sup are noise, not growth.
inline bool stable_sequence(const std::vector<double>& s, int* argmax_out) {
  int argmax = 0;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s[i] > s[static_cast<std::size_t>(argmax)]) argmax = static_cast<int>(i);
  *argmax_out = argmax;
  const std::size_t n = s.size();
  if (static_cast<std::size_t>(argmax) > n / 3) return false;
  const double slack = 1e-5 * (1.0 + s[static_cast<std::size_t>(argmax)]);
  for (std::size_t i = (2 * n) / 3; i + 1 < n; ++i)
    if (s[i + 1] > s[i] + slack) return false;
  return true;
}

}  // namespace detail

// W^x-weighted sups over the finite data; membership evidence at x means
// both index sequences peak early and are nonincreasing over the last third
// of the order range. The norms carry the a^{|alpha|} (resp. a^{p+1})
// geometric factor of the matrix norm family; a = 1 is the default slice.
template <class W>
MembershipResult roumieu_membership(const Jet& jet, const W& w,
                                    std::vector<double> x_grid, int p_max,
                                    double a_factor = 1.0) {
  if (x_grid.empty()) x_grid = {1.0, 2.0, 4.0, 8.0};
  if (p_max > jet.p_cap())
    throw std::invalid_argument("roumieu_membership: p_max exceeds the jet order cap");
  if (!(a_factor > 0.0))
    throw std::invalid_argument("roumieu_membership: a must be positive");
  const double log_a = std::log(a_factor);
  MembershipResult out;
  const auto& alphas = jet.alphas().alphas;
  for (double x : x_grid) {
    WeightMatrix wm = weight_matrix(WeightHandle(w), x, p_max + 1);
    std::vector<double> s_norm(static_cast<std::size_t>(p_max) + 1, 0.0);
    std::vector<double> s_semi(static_cast<std::size_t>(p_max) + 1, 0.0);
    for (int pt = 0; pt < jet.n_points(); ++pt)
      for (std::size_t a = 0; a < alphas.size(); ++a) {
        const int k = degree(alphas[a]);
        if (k > p_max) continue;
        const double v = std::abs(jet.value_by_rank(pt, static_cast<int>(a))) *
                         std::exp(-k * log_a - wm.log_values[static_cast<std::size_t>(k)]);
        s_norm[static_cast<std::size_t>(k)] = std::max(s_norm[static_cast<std::size_t>(k)], v);
      }
    for (int p = 0; p <= p_max; ++p) {
      const double lw = (p + 1) * log_a + wm.log_values[static_cast<std::size_t>(p) + 1];
      for (std::size_t a = 0; a < alphas.size(); ++a) {
        const int da = degree(alphas[a]);
        if (da > p) continue;
        for (int xi = 0; xi < jet.n_points(); ++xi)
          for (int yi = 0; yi < jet.n_points(); ++yi) {
            if (xi == yi) continue;
            const double r = remainder(jet, xi, yi, alphas[a], p);
            const double v = std::abs(r) * jet.factorial(p + 1 - da) /
                             std::pow(jet.distance(xi, yi), p + 1 - da) * std::exp(-lw);
            s_semi[static_cast<std::size_t>(p)] = std::max(s_semi[static_cast<std::size_t>(p)], v);
          }
      }
    }
    MembershipResult::PerX row;
    row.x = x;
    int am_n = 0, am_s = 0;
    const bool ok_n = detail::stable_sequence(s_norm, &am_n);
    const bool ok_s = detail::stable_sequence(s_semi, &am_s);
    row.stable = ok_n && ok_s;
    row.norm_sup = *std::max_element(s_norm.begin(), s_norm.end());
    row.semi_sup = *std::max_element(s_semi.begin(), s_semi.end());
    row.norm_argmax = am_n;
    row.semi_argmax = am_s;
    out.table.push_back(row);
    if (row.stable && !out.x) out.x = x;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Jet file format (line-based text):
//   dim <n>
//   pcap <p>
//   point <x1> ... <xn>
//   val <point-index> <a1> ... <an> <value>
// Blank lines and '#' comments are ignored. Duplicate (point, alpha) entries
// and incomplete jets are errors.

inline Jet parse_jet(std::istream& in) {
  int dim = -1, pcap = -1;
  std::optional<Jet> jet;
  std::string line;
  int lineno = 0;
  const auto fail = [&](const std::string& msg) {
    throw JetError("jet file line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    if (tok == "dim") {
      if (dim >= 0) fail("repeated dim header");
      if (!(ls >> dim) || dim < 1) fail("bad dim");
    } else if (tok == "pcap") {
      if (pcap >= 0) fail("repeated pcap header");
      if (!(ls >> pcap) || pcap < 0) fail("bad pcap");
    } else if (tok == "point") {
      if (dim < 0 || pcap < 0) fail("point before dim/pcap headers");
      if (!jet) jet.emplace(dim, pcap);
      std::vector<double> xs(static_cast<std::size_t>(dim));
      for (double& v : xs)
        if (!(ls >> v)) fail("point needs " + std::to_string(dim) + " coordinates");
      try {
        jet->add_point(std::move(xs));
      } catch (const JetError& e) {
        fail(e.what());
      }
    } else if (tok == "val") {
      if (!jet) fail("val before any point");
      int idx = -1;
      if (!(ls >> idx) || idx < 0 || idx >= jet->n_points()) fail("bad point index");
      MultiIndex a(static_cast<std::size_t>(dim));
      for (int& v : a)
        if (!(ls >> v) || v < 0) fail("bad multi-index");
      double value;
      if (!(ls >> value)) fail("missing value");
      try {
        jet->set_value(idx, a, value);
      } catch (const JetError& e) {
        fail(e.what());
      }
    } else {
      fail("unknown directive '" + tok + "'");
    }
    std::string extra;
    if (ls >> extra) fail("trailing tokens");
  }
  if (!jet) throw JetError("jet file: no points");
  jet->require_complete();
  return *jet;
}

inline void write_jet(const Jet& jet, std::ostream& out) {
  out << "dim " << jet.dim() << "\n";
  out << "pcap " << jet.p_cap() << "\n";
  char buf[40];
  for (int p = 0; p < jet.n_points(); ++p) {
    out << "point";
    for (double c : jet.point(p)) {
      std::snprintf(buf, sizeof(buf), "%.17g", c);
      out << " " << buf;
    }
    out << "\n";
  }
  for (int p = 0; p < jet.n_points(); ++p)
    for (const MultiIndex& a : jet.alphas().alphas) {
      out << "val " << p;
      for (int v : a) out << " " << v;
      std::snprintf(buf, sizeof(buf), "%.17g", jet.value(p, a));
      out << " " << buf << "\n";
    }
}

}  // namespace ultra
