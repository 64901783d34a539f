// Acceptance suite: quantitative identities and property batteries, one
// criterion per run line, each with its stated tolerance and time budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "catalog.hpp"
#include "jet_oracle.hpp"
#include "ultra/conditions.hpp"
#include "ultra/conjugate.hpp"
#include "ultra/envelope.hpp"
#include "ultra/jet.hpp"
#include "ultra/pipeline.hpp"
#include "ultra/reduction.hpp"

using namespace ultra;
using namespace ultra_test;

namespace {

struct Checker {
  std::vector<std::string> failures;

  void require(bool cond, const std::string& what) {
    if (!cond) failures.push_back(what);
  }
  void close(double got, double want, double tol, const std::string& what) {
    if (!(std::abs(got - want) <= tol))
      failures.push_back(what + ": got " + std::to_string(got) + ", want " +
                         std::to_string(want) + " +- " + std::to_string(tol));
  }
  void in_range(double got, double lo, double hi, const std::string& what) {
    if (!(got >= lo && got <= hi))
      failures.push_back(what + ": " + std::to_string(got) + " outside [" +
                         std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
};

int g_failed = 0;

void run_criterion(int idx, const std::string& name, double budget_s,
                   const std::function<void(Checker&)>& body) {
  Checker c;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.failures.push_back(std::string("exception: ") + e.what());
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (budget_s > 0.0 && elapsed > budget_s)
    c.failures.push_back("runtime " + std::to_string(elapsed) + "s exceeds " +
                         std::to_string(budget_s) + "s");
  if (c.failures.empty()) {
    std::printf("[PASS] %2d. %s (%.2fs)\n", idx, name.c_str(), elapsed);
  } else {
    ++g_failed;
    std::printf("[FAIL] %2d. %s (%.2fs)\n", idx, name.c_str(), elapsed);
    for (const auto& f : c.failures) std::printf("       - %s\n", f.c_str());
  }
  std::fflush(stdout);
}

Jet make_exp_jet(const std::vector<double>& xs, int p_cap) {
  Jet jet(1, p_cap);
  for (double x : xs) {
    const int idx = jet.add_point({x});
    for (int k = 0; k <= p_cap; ++k) jet.set_value(idx, {k}, std::exp(x));
  }
  return jet;
}

}  // namespace

int main() {
  std::printf("acceptance: ultradifferentiable weight calculus\n");

  // 1. kappa_alpha(t) = omega_{alpha-1}(t)/(alpha-1) for large t
  run_criterion(1, "kappa_alpha identity at t = e^30 (alpha = 2, 3; rel err <= 0.05)", 5.0,
                [](Checker& c) {
                  const double t = std::exp(30.0);
                  for (double alpha : {2.0, 3.0}) {
                    WeightFunction w = omega_alpha(alpha);
                    SigmaR k = kappa(w, t, 1e-8);
                    c.require(k.converged(), "kappa_alpha must converge");
                    const double omega_prev = t / std::pow(30.0, alpha - 1.0);
                    const double ratio = (alpha - 1.0) * k.value / omega_prev;
                    c.close(ratio, 1.0, 0.05,
                            "(alpha-1) kappa_alpha / omega_{alpha-1} at alpha=" +
                                std::to_string(alpha));
                  }
                });

  // 2. strong-but-not-r-strong dichotomy for (omega_2, omega_1)
  run_criterion(
      2, "dichotomy: (omega_2, omega_1) strong, not 0.9-strong, no discrete constants",
      60.0, [](Checker& c) {
        WeightFunction w2 = omega_alpha(2.0), w1 = omega_alpha(1.0);
        c.require(check_r_strong(w2, w1, 1.0).verdict == Verdict::Holds,
                  "r = 1 must hold");
        PairVerdict bad = check_r_strong(w2, w1, 0.9);
        c.require(bad.verdict == Verdict::Fails, "r = 0.9 must fail");
        c.require(bad.witnesses.size() >= 2, "failure must carry witnesses");
        for (std::size_t i = 0; i + 1 < bad.witnesses.size(); ++i)
          c.require(std::get<2>(bad.witnesses[i + 1]) > std::get<2>(bad.witnesses[i]),
                    "witness sequence must be monotone");
        c.require(check_discrete_condition(w2, w1).verdict == Verdict::Fails,
                  "discrete search must fail for the full default grid");
      });

  // 3. growth indices
  run_criterion(3, "growth indices: gamma(t^1/2) ~ 2, gamma(t^1/3) ~ 3, gamma(omega_1, omega_2) ~ 1",
                30.0, [](Checker& c) {
                  const auto timed = [&](const char* what, auto sigma, auto w, double lo,
                                         double hi) {
                    const auto t0 = std::chrono::steady_clock::now();
                    GrowthIndex g = growth_index(sigma, w);
                    const double dt = std::chrono::duration<double>(
                                          std::chrono::steady_clock::now() - t0)
                                          .count();
                    c.require(dt < 10.0, std::string(what) + " must finish under 10 s");
                    c.require(!g.not_strong, std::string(what) + " must be strong");
                    c.in_range(g.gamma, lo, hi, what);
                  };
                  WeightFunction ws = sqrt_weight(), wc = cbrt_weight();
                  timed("gamma(t^1/2, t^1/2)", ws, ws, 1.9, 2.1);
                  timed("gamma(t^1/3, t^1/3)", wc, wc, 2.85, 3.15);
                  timed("gamma(omega_1, omega_2)", omega_alpha(1.0), omega_alpha(2.0),
                        0.95, 1.05);
                });

  // 4. Young conjugation: involution and W^1_2 = 4/e
  run_criterion(4, "involution error <= 1e-6 (1 + max|phi|); W^1_2 = 4/e to 1e-6 relative",
                30.0, [](Checker& c) {
                  const auto quad = [](double s) { return 0.5 * s * s; };
                  const auto hinge = [](double s) { return std::max(0.0, 2.0 * (s - 1.0)); };
                  const auto wexp = phi_of(normalized(WeightHandle(shifted_linear())));
                  const auto check_involution = [&](const char* name, auto phi, double s_hi) {
                    std::vector<double> grid;
                    for (int i = 0; i <= 40; ++i) grid.push_back(s_hi * i / 40.0);
                    ConjugateTable back = double_conjugate(phi, grid);
                    double max_phi = 0.0;
                    for (double s : grid) max_phi = std::max(max_phi, std::abs(phi(s)));
                    double err = 0.0;
                    for (std::size_t i = 0; i < grid.size(); ++i)
                      err = std::max(err, std::abs(back.values[i] - phi(grid[i])));
                    c.require(err <= 1e-6 * (1.0 + max_phi),
                              std::string("involution sup-error for ") + name + ": " +
                                  std::to_string(err));
                  };
                  check_involution("s^2/2", quad, 8.0);
                  check_involution("max(0, 2(s-1))", hinge, 6.0);
                  check_involution("(max(0,t-1)) o exp", wexp, 4.0);

                  WeightMatrix m = weight_matrix(WeightHandle(shifted_linear()), 1.0, 2);
                  const double want = 4.0 / std::exp(1.0);
                  c.require(std::abs(m.values[2] - want) <= 1e-6 * want,
                            "W^1_2 = 4/e to 1e-6 relative, got " + std::to_string(m.values[2]));
                });

  // 5. reduction run for w = sigma = t^0.5, f = t^0.75, n_max = 8
  run_criterion(
      5, "reduction: y_n/x_n = (n/(n-1))^2, z_2/x_2 = 2.25 (1e-6 rel); full validation",
      10.0, [](Checker& c) {
        WeightFunction ws = sqrt_weight();
        WeightFunction f = WeightFunction::parse("t^0.75", 1.0);
        PairVerdict d = check_discrete_condition(ws, ws);
        c.require(d.verdict == Verdict::Holds, "discrete constants for (w, sigma)");
        if (d.verdict != Verdict::Holds) return;
        ReductionOptions opt;
        opt.n_max = 8;
        ReductionResult r = build_reduction(make_reduction_input(
            ws, ws, WeightHandle(f), {*d.C, *d.K, *d.H, *d.t0}, opt));
        for (int n = 2; n <= 8; ++n) {
          const double want = std::pow(n / (n - 1.0), 2.0);
          c.require(std::abs(r.y[static_cast<std::size_t>(n)] /
                                 r.x[static_cast<std::size_t>(n)] -
                             want) <= 1e-6 * want,
                    "y_n/x_n at n=" + std::to_string(n));
        }
        c.require(std::abs(r.z[2] / r.x[2] - 2.25) <= 1e-6 * 2.25, "z_2/x_2 = 2.25");

        ValidationReport val = validate_reduction(r);
        for (const auto& claim : val.claims)
          c.require(claim.pass, claim.name + " (min margin " +
                                    std::to_string(claim.min_margin) + ")");
        c.require(val.omega_tilde_concave, "w~ midpoint-concave");
        c.require(val.continuity_pass && val.max_continuity_err <= 1e-9,
                  "continuity at y_n within 1e-9 relative");
        c.require(val.recert.found, "discrete re-certification for (w~, sigma~)");
        if (val.recert.found) {
          c.require(val.recert.H_tilde > *d.H && val.recert.H_tilde < *d.K,
                    "H~ in (H, K)");
        }
      });

  // 6. non-quasianalytic variant: tails below 1/n^3
  run_criterion(6, "non-quasianalytic variant: int_{x_n}^inf sigma/(1+t^2) <= 1/n^3", 30.0,
                [](Checker& c) {
                  WeightFunction ws = sqrt_weight();
                  WeightFunction f = WeightFunction::parse("t^0.75", 1.0);
                  PairVerdict d = check_discrete_condition(ws, ws);
                  c.require(d.verdict == Verdict::Holds, "discrete constants");
                  if (d.verdict != Verdict::Holds) return;
                  ReductionOptions opt;
                  opt.n_max = 8;
                  opt.enforce_nq = true;
                  ReductionResult r = build_reduction(make_reduction_input(
                      ws, ws, WeightHandle(f), {*d.C, *d.K, *d.H, *d.t0}, opt));
                  for (int n = 2; n <= 8; ++n) {
                    ImproperIntegral tail =
                        nq_tail(r.input.sigma, r.x[static_cast<std::size_t>(n)], 1e-9);
                    c.require(tail.converged(), "tail integral converges");
                    const double budget = 1.0 / (static_cast<double>(n) * n * n);
                    c.require(tail.value <= budget * (1.0 + 1e-6),
                              "tail at n=" + std::to_string(n) + " is " +
                                  std::to_string(tail.value) + " > 1/n^3 = " +
                                  std::to_string(budget));
                  }
                });

  // 7. jet oracle equivalence
  run_criterion(
      7, "50 random 1-D jets: remainders bitwise, a/b exact, weighted sups to 1e-12",
      60.0, [](Checker& c) {
        std::mt19937 rng(20250808);
        std::uniform_real_distribution<double> coord(-2.0, 2.0);
        std::uniform_real_distribution<double> val(-10.0, 10.0);
        WeightFunction w = shifted_linear();
        for (int trial = 0; trial < 50; ++trial) {
          const int n_pts = 1 + static_cast<int>(rng() % 3);
          const int p_cap = static_cast<int>(rng() % 5);
          jet_oracle::Jet1D probe;
          probe.p_cap = p_cap;
          while (static_cast<int>(probe.points.size()) < n_pts) {
            const double x = coord(rng);
            bool dup = false;
            for (double p : probe.points) dup |= (p == x);
            if (!dup) probe.points.push_back(x);
          }
          for (int i = 0; i < n_pts; ++i) {
            probe.values.emplace_back();
            for (int k = 0; k <= p_cap; ++k) probe.values.back().push_back(val(rng));
          }
          Jet jet(1, p_cap);
          for (int i = 0; i < n_pts; ++i) jet.add_point({probe.points[i]});
          for (int i = 0; i < n_pts; ++i)
            for (int k = 0; k <= p_cap; ++k) jet.set_value(i, {k}, probe.values[i][k]);

          for (int x = 0; x < n_pts; ++x)
            for (int y = 0; y < n_pts; ++y)
              for (int p = 0; p <= p_cap; ++p)
                for (int a = 0; a <= p; ++a) {
                  const double lib = remainder(jet, x, y, {a}, p);
                  const double ora = jet_oracle::remainder(probe, x, y, a, p);
                  c.require(lib == ora, "remainder bitwise mismatch at trial " +
                                            std::to_string(trial));
                }
          JetGrowthProfile prof = jet_growth_profile(jet, p_cap);
          const auto oa = jet_oracle::a_seq(probe, p_cap);
          const auto ob = jet_oracle::b_seq(probe, p_cap);
          for (int k = 0; k <= p_cap; ++k)
            c.require(prof.a[static_cast<std::size_t>(k)] == oa[static_cast<std::size_t>(k)],
                      "a_k mismatch");
          for (int k = 0; k <= p_cap + 1; ++k)
            c.require(prof.b[static_cast<std::size_t>(k)] == ob[static_cast<std::size_t>(k)],
                      "b_k mismatch");

          const auto phi = phi_of(normalized(WeightHandle(w)));
          std::vector<double> phistar(static_cast<std::size_t>(p_cap) + 2);
          for (int k = 0; k <= p_cap + 1; ++k)
            phistar[static_cast<std::size_t>(k)] =
                conjugate_value(phi, static_cast<double>(k)).value;
          JetSeminorms sn = beurling_seminorms(jet, w, 1, p_cap);
          const double on = jet_oracle::norm_sup(probe, 1, p_cap, phistar);
          c.require(std::abs(sn.norm - on) <= 1e-12 * std::max(1.0, std::abs(on)),
                    "value-norm sup mismatch");
          if (n_pts >= 2) {
            const double os = jet_oracle::seminorm_sup(probe, 1, p_cap, phistar);
            c.require(std::abs(sn.seminorm - os) <= 1e-12 * std::max(1.0, std::abs(os)),
                      "remainder-seminorm sup mismatch");
          }
          if (!c.failures.empty()) return;
        }
      });

  // 8. polynomial exactness
  run_criterion(
      8, "polynomial jets: zero remainder and zero seminorm contribution for p >= d", 30.0,
      [](Checker& c) {
        std::mt19937 rng(99);
        const auto fall = [](double base, int power, int drop) {
          if (drop > power) return 0.0;
          double coeff = 1.0;
          for (int i = 0; i < drop; ++i) coeff *= (power - i);
          return coeff * std::pow(base, power - drop);
        };
        for (int dim : {1, 2}) {
          for (int deg = 0; deg <= 4; ++deg) {
            const int p_cap = 6;
            Jet jet(dim, p_cap);
            std::vector<std::vector<double>> pts =
                dim == 1 ? std::vector<std::vector<double>>{{0.0}, {0.5}, {2.0}}
                         : std::vector<std::vector<double>>{{0.0, 0.0}, {0.5, 1.0}, {1.0, 0.5}};
            for (const auto& p : pts) jet.add_point(p);
            std::vector<double> coeff;
            const int n_terms = dim == 1 ? deg + 1 : (deg + 1) * (deg + 2) / 2;
            for (int i = 0; i < n_terms; ++i)
              coeff.push_back(static_cast<double>(1 + rng() % 4));
            for (int pi = 0; pi < jet.n_points(); ++pi)
              for (const MultiIndex& a : jet.alphas().alphas) {
                double v = 0.0;
                int ci = 0;
                if (dim == 1) {
                  for (int i = 0; i <= deg; ++i)
                    v += coeff[static_cast<std::size_t>(ci++)] * fall(jet.point(pi)[0], i, a[0]);
                } else {
                  for (int i = 0; i <= deg; ++i)
                    for (int j = 0; i + j <= deg; ++j)
                      v += coeff[static_cast<std::size_t>(ci++)] *
                           fall(jet.point(pi)[0], i, a[0]) * fall(jet.point(pi)[1], j, a[1]);
                }
                jet.set_value(pi, a, v);
              }
            for (int p = deg; p <= p_cap; ++p)
              for (int x = 0; x < jet.n_points(); ++x)
                for (int y = 0; y < jet.n_points(); ++y)
                  for (const MultiIndex& a : jet.alphas().alphas) {
                    if (degree(a) > p) continue;
                    const double r = remainder(jet, x, y, a, p);
                    c.require(r == 0.0, "nonzero remainder, dim " + std::to_string(dim) +
                                            " deg " + std::to_string(deg) + " p " +
                                            std::to_string(p));
                    if (x != y) {
                      const double term = std::abs(r) *
                                          jet.factorial(p + 1 - degree(a)) /
                                          std::pow(jet.distance(x, y), p + 1 - degree(a));
                      c.require(term == 0.0, "nonzero seminorm contribution at p >= d");
                    }
                  }
            if (!c.failures.empty()) return;
          }
        }
      });

  // 9. pipeline end-to-end
  run_criterion(
      9, "pipeline: e^x jet passes all stages; exp(k^2) jet aborts at the fit stage", 30.0,
      [](Checker& c) {
        WeightFunction ws = sqrt_weight();
        PipelineConfig cfg;  // j_max 30, p_max 30, n_max 5
        Jet good = make_exp_jet({0.0, 0.5, 1.0}, 30);
        PipelineReport rep = beurling_to_roumieu_pipeline(good, ws, ws, cfg);
        for (const auto& s : rep.stages)
          c.require(s.pass, "stage '" + s.name + "' failed: " + s.detail);
        c.require(rep.all_pass(), "pipeline must pass end-to-end");
        c.require(rep.membership && rep.membership->x.has_value(),
                  "membership must stabilize at some x");

        Jet bad(1, 12);
        bad.add_point({0.0});
        bad.add_point({1.0});
        for (int k = 0; k <= 12; ++k) {
          const double v = std::exp(static_cast<double>(k) * k);
          bad.set_value(0, {k}, v);
          bad.set_value(1, {k}, v);
        }
        PipelineConfig bad_cfg = cfg;
        bad_cfg.p_max = 12;
        PipelineReport abort = beurling_to_roumieu_pipeline(bad, ws, ws, bad_cfg);
        c.require(abort.aborted, "adversarial jet must abort");
        c.require(!abort.stages.empty() && abort.stages.back().name == "fit_offsets",
                  "abort must happen at the fit stage, got: " + abort.abort_reason);
        c.require(abort.abort_reason.find("j=") != std::string::npos,
                  "abort witness must name the offending index");
      });

  // 10. non-quasianalyticity battery
  run_criterion(10, "non-quasianalyticity battery", 30.0, [](Checker& c) {
    PairVerdict s = check_nonquasianalytic(sqrt_weight(), 1e-8);
    c.require(s.verdict == Verdict::Holds, "t^0.5 converges");
    c.close(s.data.at("value"), 2.0, 1e-4, "t^0.5 tail value");
    c.require(check_nonquasianalytic(WeightFunction::parse("t", 1.0)).verdict ==
                  Verdict::Fails,
              "t diverges");
    c.require(check_nonquasianalytic(omega_alpha(0.5)).verdict == Verdict::Fails,
              "omega_0.5 diverges");
    c.require(check_nonquasianalytic(omega_alpha(1.5)).verdict == Verdict::Holds,
              "omega_1.5 converges");
    c.require(check_nonquasianalytic(omega_alpha(2.0)).verdict == Verdict::Holds,
              "omega_2 converges");
  });

  if (g_failed == 0) {
    std::printf("acceptance: all criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) FAILED\n", g_failed);
  return 1;
}
