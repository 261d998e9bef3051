#include <doctest.h>

#include <cmath>

#include "obslab/spectral.hpp"

using namespace obslab;

namespace {

Field random_field(const GridSpec& g, std::uint64_t seed) {
  Rng rng(seed);
  Field f(g);
  for (auto& v : f.values) v = rng.normal_complex();
  return f;
}

// O(N^2) reference DFT with the integral convention, for the 1-d oracle.
Spectrum naive_forward(const Field& f) {
  const GridSpec& g = f.grid;
  Spectrum out(g);
  for (int k = 0; k < g.points; ++k) {
    cplx acc{0.0, 0.0};
    for (int j = 0; j < g.points; ++j)
      acc += f.values[j] * std::polar(1.0, -g.coord(j) * g.freq(k));
    out.values[k] = acc * g.cell();
  }
  return out;
}

double rel_err(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(GridSpec(0, 1.0, 16), usage_error);
  CHECK_THROWS_AS(GridSpec(1, -1.0, 16), usage_error);
  CHECK_THROWS_AS(GridSpec(1, 1.0, 12), usage_error);
  CHECK_THROWS_AS(GridSpec(1, 1.0, 4), usage_error);
  GridSpec g(2, 5.0, 16);
  CHECK(g.size() == 256);
  CHECK(g.cell() == doctest::Approx(10.0 / 16));
  CHECK(g.freq(8) == doctest::Approx(-pi * 8 / 5.0));
}

TEST_CASE("forward transform matches the quadratic-cost reference") {
  GridSpec g(1, 7.0, 64);
  Field f = random_field(g, 11);
  Spectrum fast = forward_transform(f);
  Spectrum slow = naive_forward(f);
  CHECK(rel_err(fast.values, slow.values) < 1e-12);
}

TEST_CASE("zero field transforms to zero spectrum") {
  GridSpec g(1, 5.0, 32);
  Field f(g);
  Spectrum s = forward_transform(f);
  CHECK(max_abs(s.values) == 0.0);
}

TEST_CASE("Gaussian transform closed form") {
  // exp(-x^2/2) -> sqrt(2 pi) exp(-xi^2/2) under the integral convention
  GridSpec g(1, 20.0, 1024);
  Field f(g);
  for (int j = 0; j < g.points; ++j) {
    double x = g.coord(j);
    f.values[j] = std::exp(-0.5 * x * x);
  }
  Spectrum s = forward_transform(f);
  double worst = 0.0;
  for (int k = 0; k < g.points; ++k) {
    double xi = g.freq(k);
    double expect = std::sqrt(2.0 * pi) * std::exp(-0.5 * xi * xi);
    worst = std::max(worst, std::abs(s.values[k] - expect));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("transforms are mutually inverse") {
  for (int dim : {1, 2}) {
    GridSpec g(dim, 3.0, dim == 1 ? 128 : 32);
    Field f = random_field(g, 42 + dim);
    Field back = inverse_transform(forward_transform(f));
    CHECK(rel_err(back.values, f.values) < 1e-12);
  }
}

TEST_CASE("Plancherel with the Riemann scalings") {
  GridSpec g(2, 4.0, 32);
  Field f = random_field(g, 5);
  double lhs = field_norm(f, 2.0);
  double rhs = spectrum_norm_l2(forward_transform(f)) /
               std::pow(2.0 * pi, g.dim / 2.0);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("apply_multiplier identity and zero") {
  GridSpec g(1, 2.0, 32);
  Field f = random_field(g, 3);
  Spectrum s = forward_transform(f);
  Spectrum one = apply_multiplier(s, [](const double*) { return cplx{1.0, 0.0}; });
  CHECK(rel_err(one.values, s.values) == 0.0);
  Spectrum zero = apply_multiplier(s, [](const double*) { return cplx{0.0, 0.0}; });
  CHECK(max_abs(zero.values) == 0.0);
}

TEST_CASE("bump eta plateau, support and midpoint") {
  CHECK(bump_eta(0.25) == 1.0);
  CHECK(bump_eta(0.5) == 1.0);
  CHECK(bump_eta(1.0) == 0.0);
  CHECK(bump_eta(1.5) == 0.0);
  CHECK(bump_eta(0.75) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK_THROWS_AS(bump_eta(-0.1), usage_error);
  // monotone nonincreasing
  double prev = 1.0;
  for (double r = 0.0; r <= 1.2; r += 0.01) {
    double v = bump_eta(r);
    CHECK(v <= prev + 1e-15);
    prev = v;
  }
}

TEST_CASE("smooth projector: plateau, support, composition") {
  GridSpec g(1, 10.0, 256);
  Rng rng(7);
  double lambda = 4.0;

  // spectrum inside {|xi| <= lambda/2} is untouched
  Spectrum s(g);
  for (int k = 0; k < g.points; ++k)
    if (std::abs(g.freq(k)) <= lambda / 2) s.values[k] = rng.normal_complex();
  Field f = inverse_transform(s);
  Field pf = project_smooth(f, lambda);
  CHECK(rel_err(pf.values, f.values) < 1e-13);

  // spectrum beyond lambda is annihilated
  Spectrum hi(g);
  for (int k = 0; k < g.points; ++k)
    if (std::abs(g.freq(k)) >= lambda) hi.values[k] = rng.normal_complex();
  Field fh = inverse_transform(hi);
  CHECK(field_norm(project_smooth(fh, lambda), 2.0) < 1e-13 * field_norm(fh, 2.0));

  // output spectrum vanishes outside {|xi| <= lambda}
  Field fr(g);
  for (auto& v : fr.values) v = rng.normal_complex();
  Spectrum out = forward_transform(project_smooth(fr, lambda));
  for (int k = 0; k < g.points; ++k)
    if (std::abs(g.freq(k)) > lambda)
      CHECK(std::abs(out.values[k]) < 1e-12 * max_abs(out.values));

  // P_mu P_lambda = P_lambda for mu >= 2 lambda
  for (int i = 0; i < 20; ++i) {
    double l = rng.uniform(1.0, 8.0);
    double mu = rng.uniform(2.0 * l, 3.0 * l);
    Field a(g);
    for (auto& v : a.values) v = rng.normal_complex();
    Field pl = project_smooth(a, l);
    Field pm = project_smooth(pl, mu);
    CHECK(rel_err(pm.values, pl.values) < 1e-12);
  }
}

TEST_CASE("sharp projector: idempotent, band identity, flat-spectrum split") {
  GridSpec g(1, 10.0, 256);
  Rng rng(9);
  double lambda = g.freq_step() * 32;
  Field f(g);
  for (auto& v : f.values) v = rng.normal_complex();
  Field q1 = project_sharp(f, lambda);
  Field q2 = project_sharp(q1, lambda);
  CHECK(rel_err(q2.values, q1.values) < 1e-14);

  Spectrum band(g);
  for (int k = 0; k < g.points; ++k)
    if (std::abs(g.freq(k)) <= lambda) band.values[k] = rng.normal_complex();
  Field fb = inverse_transform(band);
  CHECK(rel_err(project_sharp(fb, lambda).values, fb.values) < 1e-13);

  // flat spectrum on [-2 lambda, 2 lambda]: removing [-lambda, lambda]
  // keeps 1/2 of the energy (lattice Plancherel; lambda on half-step so the
  // counts split exactly)
  double lam = g.freq_step() * 31.5;
  Spectrum flat(g);
  int inside = 0, total = 0;
  for (int k = 0; k < g.points; ++k) {
    double xi = std::abs(g.freq(k));
    if (xi <= 2 * lam) {
      flat.values[k] = 1.0;
      ++total;
      if (xi <= lam) ++inside;
    }
  }
  Field ff = inverse_transform(flat);
  Field qf = project_sharp(ff, lam);
  Field residual(g);
  for (std::size_t i = 0; i < ff.values.size(); ++i)
    residual.values[i] = ff.values[i] - qf.values[i];
  double expect = std::sqrt(static_cast<double>(total - inside) / total);
  CHECK(field_norm(residual, 2.0) ==
        doctest::Approx(expect * field_norm(ff, 2.0)).epsilon(1e-10));
}

TEST_CASE("projector uniform L^p bound") {
  GridSpec g(1, 12.0, 256);
  const double bound = smooth_cutoff_kernel_l1(g, 1.0);
  CHECK(bound >= 1.0);  // contains the identity at low frequency
  Rng rng(13);
  for (int i = 0; i < 60; ++i) {
    double lambda = rng.uniform(1.0, g.nyquist() / 4.0);
    Field f(g);
    for (auto& v : f.values) v = rng.normal_complex();
    Field pf = project_smooth(f, lambda);
    for (double p : {1.0, 2.0, std::numeric_limits<double>::infinity()})
      CHECK(field_norm(pf, p) <= bound * field_norm(f, p) * (1 + 1e-9));
  }
}
