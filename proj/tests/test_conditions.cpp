#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "catalog.hpp"
#include "ultra/conditions.hpp"

using namespace ultra;
using namespace ultra_test;

TEST_CASE("sigma_r closed forms for t^0.5") {
  WeightFunction w = sqrt_weight();
  // int_1^inf sqrt(t u) u^{-1-r} du = sqrt(t)/(r - 1/2) for r > 1/2
  SigmaR s = sigma_r(w, 0.75, 4.0);
  REQUIRE(s.converged());
  CHECK(s.value == doctest::Approx(8.0).epsilon(1e-6));

  // harmonic tail at r = 1/2
  CHECK(sigma_r(w, 0.5, 4.0).divergent());

  // r = 1 is kappa
  SigmaR k = sigma_r(w, 1.0, 9.0);
  REQUIRE(k.converged());
  CHECK(k.value == doctest::Approx(6.0).epsilon(1e-6));
}

TEST_CASE("kappa") {
  CHECK(kappa(sqrt_weight(), 9.0).value == doctest::Approx(6.0).epsilon(1e-6));

  // kappa_alpha(t) = omega_{alpha-1}(t)/(alpha-1) for large t
  WeightFunction w2 = omega_alpha(2.0);
  const double t = std::exp(30.0);
  SigmaR k = kappa(w2, t);
  REQUIRE(k.converged());
  const double omega1 = t / 30.0;
  CHECK(std::abs(k.value / omega1 - 1.0) <= 0.05);

  // kappa(t) >= w(t) (increasing integrand under a unit-mass kernel)
  for (double tt : {4.0, 100.0, 1e6}) {
    WeightFunction w = sqrt_weight();
    CHECK(kappa(w, tt).value >= w(tt) * (1.0 - 1e-9));
  }
  // kappa(t) >= w(K^j t)/K^j
  WeightFunction w = sqrt_weight();
  for (double K : {2.0, 4.0})
    for (int j : {0, 1, 3})
      CHECK(kappa(w, 50.0).value >= w(std::pow(K, j) * 50.0) / std::pow(K, j) * (1.0 - 1e-9));
}

TEST_CASE("non-quasianalyticity battery") {
  PairVerdict s = check_nonquasianalytic(sqrt_weight(), 1e-8);
  CHECK(s.verdict == Verdict::Holds);
  CHECK(std::abs(s.data.at("value") - 2.0) <= 1e-4);
  CHECK(s.data.at("ramp_part") == doctest::Approx(0.0));

  PairVerdict lin = check_nonquasianalytic(WeightFunction::parse("t", 1.0));
  CHECK(lin.verdict == Verdict::Fails);
  REQUIRE(lin.witnesses.size() >= 3);
  for (std::size_t i = 0; i + 1 < lin.witnesses.size(); ++i)
    CHECK(std::get<2>(lin.witnesses[i + 1]) > std::get<2>(lin.witnesses[i]));

  CHECK(check_nonquasianalytic(omega_alpha(0.5)).verdict == Verdict::Fails);
  CHECK(check_nonquasianalytic(omega_alpha(1.5)).verdict == Verdict::Holds);
  CHECK(check_nonquasianalytic(omega_alpha(2.0)).verdict == Verdict::Holds);
}

TEST_CASE("r-strong verdicts") {
  WeightFunction ws = sqrt_weight();
  PairVerdict v = check_r_strong(ws, ws, 0.75);
  CHECK(v.verdict == Verdict::Holds);
  REQUIRE(v.C.has_value());
  CHECK(*v.C == doctest::Approx(4.0).epsilon(0.02));  // sigma_r = 4 sigma exactly

  WeightFunction w2 = omega_alpha(2.0), w1 = omega_alpha(1.0);
  CHECK(check_r_strong(w2, w1, 1.0).verdict == Verdict::Holds);

  PairVerdict bad = check_r_strong(w2, w1, 0.9);
  CHECK(bad.verdict == Verdict::Fails);
  REQUIRE(bad.witnesses.size() >= 2);
  for (std::size_t i = 0; i + 1 < bad.witnesses.size(); ++i)
    CHECK(std::get<2>(bad.witnesses[i + 1]) > std::get<2>(bad.witnesses[i]));
}

TEST_CASE("r-strong implies s-strong for s in [r,1], with smaller C") {
  WeightFunction ws = sqrt_weight();
  PairVerdict vr = check_r_strong(ws, ws, 0.75);
  PairVerdict vs = check_r_strong(ws, ws, 0.9);
  PairVerdict v1 = check_r_strong(ws, ws, 1.0);
  REQUIRE(vr.verdict == Verdict::Holds);
  REQUIRE(vs.verdict == Verdict::Holds);
  REQUIRE(v1.verdict == Verdict::Holds);
  CHECK(*vs.C <= *vr.C * (1.0 + 1e-9));
  CHECK(*v1.C <= *vs.C * (1.0 + 1e-9));

  // supplement: w(t) <= sigma_1(t)
  for (const WeightFunction& w : {sqrt_weight(), omega_alpha(2.0)})
    for (double t : {15.0, 1e4, 1e8}) {
      SigmaR s1 = sigma_r(w, 1.0, t);
      REQUIRE(s1.converged());
      CHECK(w(t) <= s1.value * (1.0 + 1e-6));
    }
}

TEST_CASE("discrete condition: strong pair") {
  WeightFunction ws = sqrt_weight();
  PairVerdict v = check_discrete_condition(ws, ws);
  REQUIRE(v.verdict == Verdict::Holds);
  REQUIRE(v.C.has_value());
  REQUIRE(v.K.has_value());
  REQUIRE(v.H.has_value());
  REQUIRE(v.t0.has_value());
  CHECK(*v.H < *v.K);
  CHECK(*v.H > 1.0);
  // the returned constants really witness the inequality
  for (double t = *v.t0; t < 1e9; t *= 13.7)
    for (int j = 1; j <= 20; ++j)
      CHECK(ws(std::pow(*v.K, j) * t) <=
            (*v.C) * std::pow(*v.H, j) * ws(t) * (1.0 + 1e-9));
}

TEST_CASE("discrete condition: direct candidates") {
  WeightFunction ws = sqrt_weight();
  // w(4^j t) = 2^j w(t): (C, K, H) = (1, 4, 2) exactly
  DiscreteCandidate c = evaluate_discrete_candidate(ws, ws, 4.0, 2.0, 1.0, 20);
  CHECK(c.stable);
  CHECK(c.C == doctest::Approx(1.0).epsilon(1e-9));

  // (t^0.5, t^0.9) with H = K^0.6: K^{j/2} sqrt(t) <= K^{0.6 j} t^0.9 for t >= 1
  WeightFunction w9 = power_weight(0.9);
  DiscreteCandidate c2 = evaluate_discrete_candidate(ws, w9, 4.0, std::pow(4.0, 0.6), 1.0, 20);
  CHECK(c2.stable);
  CHECK(c2.C <= 1.0 + 1e-9);

  // (omega_2, omega_1): candidate with H close to K still diverges in j
  DiscreteCandidate c3 = evaluate_discrete_candidate(
      omega_alpha(2.0), omega_alpha(1.0), 2.0, std::pow(2.0, 0.95), 1.0, 20);
  CHECK(!c3.stable);
  CHECK(c3.rho_inf > 1.001);
}

TEST_CASE("discrete condition: (omega_2, omega_1) fails the full default search") {
  PairVerdict v = check_discrete_condition(omega_alpha(2.0), omega_alpha(1.0));
  CHECK(v.verdict == Verdict::Fails);
  CHECK(!v.witnesses.empty());
}

TEST_CASE("integral and discrete conditions agree on the grid") {
  WeightFunction ws = sqrt_weight();
  // r-strong at r < 1 implies discrete constants with the H = K^r pattern
  REQUIRE(check_r_strong(ws, ws, 0.75).verdict == Verdict::Holds);
  PairVerdict d = check_discrete_condition(ws, ws);
  REQUIRE(d.verdict == Verdict::Holds);
  CHECK(*d.H < *d.K);
  // conversely, the found constants make the pair r-strong for
  // r in (log H / log K, 1)
  const double r0 = std::log(*d.H) / std::log(*d.K);
  CHECK(r0 < 1.0);
  const double r = std::min(1.0, r0 + 0.1);
  CHECK(check_r_strong(ws, ws, r).verdict == Verdict::Holds);
}

TEST_CASE("geometric-sum bound: tau_r <= K^{1+r}/(K-1) * sigma_r") {
  WeightFunction ws = sqrt_weight();
  const double K = 2.0, r = 0.75;
  const double factor = std::pow(K, 1.0 + r) / (K - 1.0);
  for (double t : {4.0, 100.0, 1e6}) {
    TauR tau = tau_r(ws, K, r, t, 24);
    SigmaR sig = sigma_r(ws, r, t);
    REQUIRE(sig.converged());
    CHECK(tau.value <= factor * sig.value * (1.0 + 1e-9));
  }
}

TEST_CASE("tau_r") {
  WeightFunction ws = sqrt_weight();
  TauR a = tau_r(ws, 4.0, 0.75, 9.0, 20);
  CHECK(a.value == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(a.attained_j == 0);
  CHECK(!a.divergent);

  TauR b = tau_r(ws, 4.0, 0.25, 9.0, 20);
  CHECK(b.divergent);

  TauR c = tau_r(ws, 4.0, 0.75, 9.0, 0);
  CHECK(c.value == doctest::Approx(3.0));  // j_max = 0: just w(t)
}

TEST_CASE("interlacing tau_r <= C4 sigma_r <= C4 C5 tau_s") {
  WeightFunction ws = sqrt_weight();
  InterlacingReport rep = verify_interlacing(ws, 4.0, 0.75, 0.6);
  CHECK(rep.constants_verdict == Verdict::Holds);
  REQUIRE(rep.c4.has_value());
  REQUIRE(rep.c5.has_value());
  CHECK(*rep.c4 <= 0.26);  // tau_r = sqrt(t), sigma_r = 4 sqrt(t)
  CHECK(*rep.c5 == doctest::Approx(4.0).epsilon(0.01));
  CHECK(rep.tau_order.verdict == Verdict::Holds);

  // s = r degenerates to sigma_r <= C tau_r, still finite
  InterlacingReport deg = verify_interlacing(ws, 4.0, 0.75, 0.75);
  REQUIRE(deg.c5.has_value());
  CHECK(*deg.c5 == doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("interlacing separation: tau_s != O(tau_r) for omega_2") {
  WeightFunction w2 = omega_alpha(2.0);
  InterlacingReport rep = verify_interlacing(w2, std::exp(1.0), 0.95, 0.9);
  CHECK(rep.tau_order.verdict == Verdict::Fails);
  CHECK(rep.constants_verdict == Verdict::Inconclusive);  // sigma_r diverges here
  CHECK(rep.sigma_divergent);
}

TEST_CASE("growth indices") {
  WeightFunction ws = sqrt_weight();
  GrowthIndex g2 = growth_index(ws, ws);
  CHECK(!g2.not_strong);
  CHECK(g2.gamma >= 1.9);
  CHECK(g2.gamma <= 2.1);

  WeightFunction wc = cbrt_weight();
  GrowthIndex g3 = growth_index(wc, wc);
  CHECK(g3.gamma >= 2.85);
  CHECK(g3.gamma <= 3.15);

  // (omega, sigma) = (omega_2, omega_1): strong but not r-strong for r < 1
  GrowthIndex g1 = growth_index(omega_alpha(1.0), omega_alpha(2.0));
  CHECK(!g1.not_strong);
  CHECK(g1.gamma >= 0.95);
  CHECK(g1.gamma <= 1.05);

  // omega_2 itself is not strong
  GrowthIndex gn = growth_index(omega_alpha(2.0), omega_alpha(2.0));
  CHECK(gn.not_strong);
}

TEST_CASE("chain: strong <=> r-strong(<1) <=> discrete with sigma = w") {
  WeightFunction ws = sqrt_weight();
  CHECK(check_r_strong(ws, ws, 1.0).verdict == Verdict::Holds);
  CHECK(check_r_strong(ws, ws, 0.9).verdict == Verdict::Holds);
  PairVerdict d = check_discrete_condition(ws, ws);
  CHECK(d.verdict == Verdict::Holds);
  CHECK(*d.C <= 1.0 + 1e-6);  // C = 1 realizable when sigma = w

  WeightFunction w2 = omega_alpha(2.0);
  CHECK(check_r_strong(w2, w2, 1.0).verdict == Verdict::Fails);
  CHECK(check_r_strong(w2, w2, 0.9).verdict == Verdict::Fails);
  CHECK(check_discrete_condition(w2, w2).verdict == Verdict::Fails);
}

TEST_CASE("exponential integral") {
  ExpIntegral e20 = exp_integral(2.0, 0.0);
  CHECK(!e20.divergent);
  CHECK(e20.value == doctest::Approx(1.0).epsilon(1e-6));

  ExpIntegral e11 = exp_integral(1.0, 1.0);
  CHECK(!e11.divergent);
  CHECK(e11.value == doctest::Approx(0.21938393439552028).epsilon(1e-7));

  CHECK(exp_integral(1.0, 0.0).divergent);
  CHECK(exp_integral(2.0, -0.5).divergent);
}

TEST_CASE("exponential-integral identity at finite truncation") {
  // int_1^U omega_a(t y) y^{-1-r} dy = omega_{a-1}(t) t^{r-1} E_a^{[1,Z]}((r-1) log t),
  // Z = 1 + log(U)/log(t); verified by direct change of variables
  const double alpha = 2.0, r = 0.75, V = 40.0;  // V = log U
  WeightFunction wa = omega_alpha(alpha);
  for (double logt : {10.0, 20.0}) {
    const double t = std::exp(logt);
    const auto integrand = [&](double v) { return wa(t * std::exp(v)) * std::exp(-r * v); };
    const double lhs = integrate_finite(integrand, 0.0, V, 1e-10);
    const double omega_am1 = t / std::pow(logt, alpha - 1.0);
    const double Z = 1.0 + V / logt;
    const double rhs = omega_am1 * std::pow(t, r - 1.0) *
                       exp_integral_truncated(alpha, (r - 1.0) * logt, Z);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-4));
  }
}
