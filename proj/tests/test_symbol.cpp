#include <doctest.h>

#include <cmath>

#include "obslab/symbol.hpp"

using namespace obslab;

namespace {

// a(t, xi) = xi^2 on [0, T]  (alpha = 2, a_2 = -1 so (i xi)^2 (-1) = xi^2)
NonAutonomousSymbol heat_symbol(double T = 1.0) {
  SymbolTerm term;
  term.alpha = {2};
  term.track = CoefficientTrack(cplx{-1.0, 0.0});
  return NonAutonomousSymbol(1, 2, T, {term});
}

NonAutonomousSymbol quartic_symbol(double T = 1.0) {
  SymbolTerm term;
  term.alpha = {4};
  term.track = CoefficientTrack(cplx{1.0, 0.0});
  return NonAutonomousSymbol(1, 4, T, {term});
}

}  // namespace

TEST_CASE("symbol invariants") {
  SymbolTerm lower;
  lower.alpha = {1};
  lower.track = CoefficientTrack(cplx{1.0, 0.0});
  CHECK_THROWS_AS(NonAutonomousSymbol(1, 2, 1.0, {lower}), usage_error);  // no top term
  SymbolTerm odd;
  odd.alpha = {3};
  odd.track = CoefficientTrack(cplx{1.0, 0.0});
  CHECK_THROWS_AS(NonAutonomousSymbol(1, 3, 1.0, {odd}), usage_error);  // odd degree
}

TEST_CASE("eval_symbol examples") {
  auto heat = heat_symbol();
  double xi = 2.0;
  CHECK(std::real(heat.eval(0.3, &xi)) == doctest::Approx(4.0));
  CHECK(std::imag(heat.eval(0.3, &xi)) == doctest::Approx(0.0));

  auto quartic = quartic_symbol();
  double one = 1.0;
  CHECK(std::real(quartic.eval(0.7, &one)) == doctest::Approx(1.0));

  CHECK_THROWS_AS(heat.eval(1.5, &xi), std::domain_error);
  CHECK_THROWS_AS(heat.eval(-0.1, &xi), std::domain_error);
}

TEST_CASE("sampled track: xi^2 + i sin(t) xi") {
  // a_1 track sampled so that a(t, xi) = xi^2 + i sin(t) xi at piece midpoints;
  // (i xi) * s = i s xi, so s = sin(t).
  const int n = 4096;
  const double T = pi;
  std::vector<cplx> samples(n);
  for (int i = 0; i < n; ++i)
    samples[i] = cplx{std::sin(T * (i + 0.5) / n), 0.0};
  SymbolTerm top, drift;
  top.alpha = {2};
  top.track = CoefficientTrack(cplx{-1.0, 0.0});
  drift.alpha = {1};
  drift.track = CoefficientTrack(samples);
  NonAutonomousSymbol sym(1, 2, T, {top, drift});
  double xi = 1.0;
  cplx v = sym.eval(pi / 2.0, &xi);
  CHECK(std::real(v) == doctest::Approx(1.0));
  CHECK(std::imag(v) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("principal symbol drops lower-order terms") {
  SymbolTerm top, lower;
  top.alpha = {2};
  top.track = CoefficientTrack(cplx{-1.0, 0.0});
  lower.alpha = {1};
  lower.track = CoefficientTrack(cplx{0.0, -1.0});  // (i xi)(-i) = xi
  NonAutonomousSymbol sym(1, 2, 1.0, {top, lower});
  double xi = 3.0;
  CHECK(std::real(sym.principal(0.5, &xi)) == doctest::Approx(9.0));
  CHECK(std::real(sym.eval(0.5, &xi)) == doctest::Approx(12.0));

  // quartic with t-dependent second-order part: principal at xi=2 is 16
  SymbolTerm q, low2;
  q.alpha = {4};
  q.track = CoefficientTrack(cplx{1.0, 0.0});
  low2.alpha = {2};
  low2.track = CoefficientTrack(std::vector<cplx>{{0.0, 0.0}, {-0.5, 0.0}, {-1.0, 0.0}});
  NonAutonomousSymbol sym2(1, 4, 1.0, {q, low2});
  double two = 2.0;
  CHECK(std::real(sym2.principal(0.9, &two)) == doctest::Approx(16.0));

  // constant symbol: principal == eval everywhere
  auto heat = heat_symbol();
  for (double x : {-3.0, 0.5, 7.0})
    CHECK(heat.principal(0.2, &x) == heat.eval(0.2, &x));
}

TEST_CASE("principal homogeneity of degree m") {
  auto quartic = quartic_symbol();
  Rng rng(21);
  for (int i = 0; i < 200; ++i) {
    double xi = rng.uniform(-4.0, 4.0);
    double lam = rng.uniform(0.1, 5.0);
    double scaled = lam * xi;
    cplx lhs = quartic.principal(0.5, &scaled);
    cplx rhs = std::pow(lam, 4) * quartic.principal(0.5, &xi);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("ellipticity certificate") {
  auto heat = heat_symbol();
  auto cert = certify_ellipticity(heat);
  CHECK(cert.ok);
  CHECK(cert.c == doctest::Approx(1.0));

  // quartic with sinusoidal lower-order term: principal part only
  const int n = 64;
  std::vector<cplx> samples(n);
  for (int i = 0; i < n; ++i) samples[i] = cplx{-std::sin(1.0 * (i + 0.5) / n), 0.0};
  SymbolTerm top, low;
  top.alpha = {4};
  top.track = CoefficientTrack(cplx{1.0, 0.0});
  low.alpha = {2};
  low.track = CoefficientTrack(samples);
  NonAutonomousSymbol mixed(1, 4, 1.0, {top, low});
  auto cm = certify_ellipticity(mixed);
  CHECK(cm.ok);
  CHECK(cm.c == doctest::Approx(1.0));

  // purely imaginary top coefficient: Re part vanishes, certificate fails
  SymbolTerm imag_top;
  imag_top.alpha = {2};
  imag_top.track = CoefficientTrack(cplx{0.0, 1.0});
  NonAutonomousSymbol bad(1, 2, 1.0, {imag_top});
  auto cb = certify_ellipticity(bad);
  CHECK_FALSE(cb.ok);

  CHECK_THROWS_AS(check_uniform_ellipticity(heat, {}, {0.5}), usage_error);
}

TEST_CASE("ellipticity certificate ignores lower-order perturbations") {
  Rng rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    SymbolTerm top, low;
    top.alpha = {2};
    top.track = CoefficientTrack(cplx{-1.0, 0.0});
    low.alpha = {1};
    low.track = CoefficientTrack(cplx{rng.normal(), rng.normal()});
    NonAutonomousSymbol sym(1, 2, 1.0, {top, low});
    CHECK(certify_ellipticity(sym).c == doctest::Approx(1.0));
  }
}

TEST_CASE("garding lower bound") {
  auto heat = heat_symbol();
  CHECK(garding_lower_bound(heat, 0.5) == doctest::Approx(0.0));
  auto quartic = quartic_symbol();
  CHECK(garding_lower_bound(quartic, 0.9) == doctest::Approx(0.0));
  CHECK_THROWS_AS(garding_lower_bound(heat, 1.5), usage_error);
  CHECK_THROWS_AS(garding_lower_bound(heat, 0.0), usage_error);
}

TEST_CASE("garding bound for xi^2 + b xi matches the analytic minimum") {
  // Re a = xi^2 + b xi; the gap below c0 xi^2 is minimized analytically at
  // omega = b^2 / (4 (1 - c0)).
  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    double b = rng.uniform(-2.0, 2.0);
    double c0 = rng.uniform(0.2, 0.8);
    SymbolTerm top, drift;
    top.alpha = {2};
    top.track = CoefficientTrack(cplx{-1.0, 0.0});
    drift.alpha = {1};
    drift.track = CoefficientTrack(cplx{0.0, -b});  // (i xi)(-i b) = b xi
    NonAutonomousSymbol sym(1, 2, 1.0, {top, drift});
    double expect = b * b / (4.0 * (1.0 - c0));
    double omega = garding_lower_bound(sym, c0);
    CHECK(omega == doctest::Approx(expect).epsilon(1e-3));
    // sampled certificate never exceeds the analytic bound
    CHECK(omega <= expect * (1 + 1e-9) + 1e-12);
  }
}

TEST_CASE("garding output is a certified lower bound on random samples") {
  Rng rng(99);
  SymbolTerm top, drift;
  top.alpha = {2};
  top.track = CoefficientTrack(cplx{-1.0, 0.0});
  drift.alpha = {1};
  drift.track = CoefficientTrack(cplx{0.4, -1.3});
  NonAutonomousSymbol sym(1, 2, 1.0, {top, drift});
  double c0 = 0.6;
  double omega = garding_lower_bound(sym, c0);
  for (int i = 0; i < 10000; ++i) {
    double t = rng.uniform(0.0, 1.0);
    double xi = rng.uniform(-40.0, 40.0);
    double lhs = std::real(sym.eval(t, &xi));
    CHECK(lhs >= c0 * xi * xi - omega * (1 + 1e-9) - 1e-9);
  }
}

TEST_CASE("time integral: exactness and additivity") {
  auto heat = heat_symbol();
  double xi = 2.0;
  CHECK(std::abs(heat.time_integral(0.4, 0.4, &xi)) == 0.0);
  CHECK(std::real(heat.time_integral(0.0, 0.5, &xi)) == doctest::Approx(2.0));
  CHECK_THROWS_AS(heat.time_integral(0.6, 0.5, &xi), usage_error);

  // two-piece track: 1 on [0, 1/2), 2 on [1/2, 1]
  SymbolTerm t2;
  t2.alpha = {2};
  t2.track = CoefficientTrack(std::vector<cplx>{{-1.0, 0.0}, {-2.0, 0.0}});
  NonAutonomousSymbol sym(1, 2, 1.0, {t2});
  double one = 1.0;
  CHECK(std::real(sym.time_integral(0.0, 1.0, &one)) == doctest::Approx(1.5));

  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    double a = rng.uniform(0.0, 1.0), b = rng.uniform(0.0, 1.0), c = rng.uniform(0.0, 1.0);
    double r = std::min({a, b, c}), t = std::max({a, b, c});
    double s = a + b + c - r - t;
    double x = rng.uniform(-30.0, 30.0);
    cplx split = sym.time_integral(r, s, &x) + sym.time_integral(s, t, &x);
    cplx full = sym.time_integral(r, t, &x);
    CHECK(std::abs(split - full) <= 1e-13 * std::max(1.0, std::abs(full)));
  }
}

TEST_CASE("complex lower bound certificate") {
  auto heat = heat_symbol();
  auto clb = complex_lower_bound(heat, 0.9);
  CHECK(clb.sigma == doctest::Approx(1.0).epsilon(0.01));
  CHECK(clb.omega == doctest::Approx(0.0));

  // quartic: sigma solves (1 + sigma)(1 - c0/2) = 9 at the worst direction
  auto quartic = quartic_symbol();
  auto cq = complex_lower_bound(quartic, 0.9);
  double expect = 9.0 / (1.0 - 0.45) - 1.0;
  CHECK(cq.sigma == doctest::Approx(expect).epsilon(0.01));
  // certificate property on random complex samples
  Rng rng(55);
  for (int i = 0; i < 5000; ++i) {
    cplx z{rng.uniform(-6.0, 6.0), rng.uniform(-6.0, 6.0)};
    double re = std::real(quartic.eval_complex(0.5, &z));
    double xi = std::real(z), eta = std::imag(z);
    CHECK(re >= 0.45 * std::pow(std::abs(xi), 4) -
                    cq.sigma * std::pow(std::abs(eta), 4) - cq.omega - 1e-9);
  }
}
