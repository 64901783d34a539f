#pragma once

// Independent brute-force oracle for 1-D jets on tiny point sets: plain
// nested loops re-deriving remainders, the growth sequences a_k/b_k, and
// the weighted Beurling sups straight from their definitions. Kept free of
// the library's jet code on purpose (only the conjugate values are shared).

#include <cmath>
#include <cstdlib>
#include <vector>

namespace jet_oracle {

struct Jet1D {
  std::vector<double> points;                // distinct
  std::vector<std::vector<double>> values;   // values[pt][k], k = 0..p_cap
  int p_cap = 0;
};

inline double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

inline double remainder(const Jet1D& jet, int x, int y, int a, int p) {
  double sum = 0.0;
  for (int b = 0; b <= p - a; ++b)
    sum += std::pow(jet.points[y] - jet.points[x], b) / factorial(b) *
           jet.values[x][a + b];
  return jet.values[y][a] - sum;
}

inline std::vector<double> a_seq(const Jet1D& jet, int p_max) {
  std::vector<double> a(p_max + 1, 0.0);
  for (int k = 0; k <= p_max; ++k)
    for (std::size_t pt = 0; pt < jet.points.size(); ++pt)
      a[k] = std::max(a[k], std::abs(jet.values[pt][k]));
  return a;
}

inline std::vector<double> b_seq(const Jet1D& jet, int p_max) {
  std::vector<double> b(p_max + 2, 0.0);
  for (int k = 0; k <= p_max; ++k)
    for (int a = 0; a <= k; ++a)
      for (std::size_t x = 0; x < jet.points.size(); ++x)
        for (std::size_t y = 0; y < jet.points.size(); ++y) {
          if (x == y) continue;
          const double dist = std::abs(jet.points[y] - jet.points[x]);
          const double v = std::abs(remainder(jet, static_cast<int>(x),
                                              static_cast<int>(y), a, k)) *
                           factorial(k + 1 - a) / std::pow(dist, k + 1 - a);
          b[k + 1] = std::max(b[k + 1], v);
        }
  return b;
}

// value norm: phistar[k] = phi*(k/m) precomputed by the caller
inline double norm_sup(const Jet1D& jet, int m, int p_max,
                       const std::vector<double>& phistar) {
  double best = 0.0;
  for (int k = 0; k <= p_max; ++k)
    for (std::size_t pt = 0; pt < jet.points.size(); ++pt)
      best = std::max(best, std::abs(jet.values[pt][k]) * std::exp(-m * phistar[k]));
  return best;
}

inline double seminorm_sup(const Jet1D& jet, int m, int p_max,
                           const std::vector<double>& phistar) {
  double best = 0.0;
  for (int p = 0; p <= p_max; ++p)
    for (int a = 0; a <= p; ++a)
      for (std::size_t x = 0; x < jet.points.size(); ++x)
        for (std::size_t y = 0; y < jet.points.size(); ++y) {
          if (x == y) continue;
          const double dist = std::abs(jet.points[y] - jet.points[x]);
          const double v = std::abs(remainder(jet, static_cast<int>(x),
                                              static_cast<int>(y), a, p)) *
                           factorial(p + 1 - a) / std::pow(dist, p + 1 - a) *
                           std::exp(-m * phistar[p + 1]);
          best = std::max(best, v);
        }
  return best;
}

}  // namespace jet_oracle
