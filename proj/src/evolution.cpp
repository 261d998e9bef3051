#include "obslab/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace obslab {

cplx propagator_multiplier(const NonAutonomousSymbol& sym, double s, double t,
                           const double* xi) {
  cplx integral = sym.time_integral(s, t, xi);
  if (std::real(integral) > 1000.0) return cplx{0.0, 0.0};
  cplx w = std::exp(-integral);
  // flush at the subnormal boundary so that split and direct evaluations
  // agree exactly once the modulus leaves the normal range
  if (std::abs(w) < std::numeric_limits<double>::min()) return cplx{0.0, 0.0};
  return w;
}

double multiplier_cocycle_residual(const NonAutonomousSymbol& sym,
                                   const GridSpec& grid, double r, double s,
                                   double t) {
  if (!(r <= s && s <= t))
    throw usage_error("multiplier_cocycle_residual: needs r <= s <= t");
  auto flush = [](cplx z) {
    return std::abs(z) < std::numeric_limits<double>::min() ? cplx{0.0, 0.0} : z;
  };
  std::array<int, 3> j{};
  double xi[3] = {0, 0, 0};
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.decode(i, j);
    for (int a = 0; a < grid.dim; ++a) xi[a] = grid.freq(j[a]);
    cplx full = flush(propagator_multiplier(sym, r, t, xi));
    cplx split = flush(propagator_multiplier(sym, r, s, xi) *
                       propagator_multiplier(sym, s, t, xi));
    double denom = std::abs(full);
    if (denom > 0.0)
      worst = std::max(worst, std::abs(split - full) / denom);
    else if (std::abs(split) != 0.0)
      worst = std::max(worst, 1.0);
  }
  return worst;
}

namespace {
void require_certificate(const EllipticityCertificate& cert) {
  if (!cert.ok)
    throw usage_error(
        "propagate: refusing without a positive ellipticity certificate");
}
}  // namespace

Spectrum propagate_spectrum(const NonAutonomousSymbol& sym,
                            const EllipticityCertificate& cert, double s, double t,
                            const Spectrum& in) {
  require_certificate(cert);
  if (s > t) throw usage_error("propagate: requires s <= t");
  return apply_multiplier(in, [&](const double* xi) {
    return propagator_multiplier(sym, s, t, xi);
  });
}

Field propagate(const NonAutonomousSymbol& sym, const EllipticityCertificate& cert,
                double s, double t, const Field& f) {
  if (s == t) return f;  // U(s,s) = Id exactly
  return inverse_transform(propagate_spectrum(sym, cert, s, t, forward_transform(f)));
}

Field kernel(const NonAutonomousSymbol& sym, const GridSpec& grid, double s,
             double t) {
  if (!(s < t)) throw usage_error("kernel: defined only for s < t");
  Spectrum mult(grid);
  std::array<int, 3> j{};
  double xi[3] = {0, 0, 0};
  for (std::size_t i = 0; i < mult.values.size(); ++i) {
    grid.decode(i, j);
    for (int a = 0; a < grid.dim; ++a) xi[a] = grid.freq(j[a]);
    mult.values[i] = propagator_multiplier(sym, s, t, xi);
  }
  return inverse_transform(mult);
}

namespace {

// int_{R^d} exp(-(c0/2) r^m) over the radial measure, by composite Simpson
// with an automatically chosen cutoff.
double radial_exp_integral(int d, double coeff, int m) {
  const double cutoff = std::pow(746.0 / coeff, 1.0 / m);
  const int n = 200000;  // even
  const double h = cutoff / n;
  auto f = [&](double r) {
    double g = std::exp(-coeff * std::pow(r, m));
    if (d == 1) return 2.0 * g;
    if (d == 2) return 2.0 * pi * r * g;
    return 4.0 * pi * r * r * g;
  };
  double acc = f(0.0) + f(cutoff);
  for (int i = 1; i < n; ++i) acc += f(i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace

GaussianBoundReport verify_gaussian_bound(const NonAutonomousSymbol& sym,
                                          const GridSpec& grid, double s, double t,
                                          double c0_fraction) {
  if (!(s < t)) throw usage_error("verify_gaussian_bound: requires s < t");
  EllipticityCertificate cert = certify_ellipticity(sym);
  if (!cert.ok) throw usage_error("verify_gaussian_bound: symbol not elliptic");
  const int m = sym.degree();
  const int d = grid.dim;
  GaussianBoundReport rep;
  rep.c0 = c0_fraction * cert.c;
  rep.C2 = (std::pow(2.0, m - 1) - 1.0) / std::pow(2.0, m);
  rep.C1 = radial_exp_integral(d, rep.c0 / 2.0, m) / std::pow(2.0 * pi, d);
  ComplexLowerBound clb = complex_lower_bound(sym, rep.c0);
  rep.sigma = clb.sigma;
  rep.omega = clb.omega;

  // Kernel and the absolute resolution limit of the discrete transform.
  Spectrum mult(grid);
  std::array<int, 3> j{};
  double xi[3] = {0, 0, 0};
  double abs_sum = 0.0;
  for (std::size_t i = 0; i < mult.values.size(); ++i) {
    grid.decode(i, j);
    for (int a = 0; a < d; ++a) xi[a] = grid.freq(j[a]);
    mult.values[i] = propagator_multiplier(sym, s, t, xi);
    abs_sum += std::abs(mult.values[i]);
  }
  Field p = inverse_transform(mult);
  rep.noise_floor = 64.0 * std::numeric_limits<double>::epsilon() * abs_sum *
                    grid.freq_volume() / std::pow(2.0 * pi, d);

  const double dt = t - s;
  const double pre = rep.C1 * std::pow(dt, -static_cast<double>(d) / m) *
                     std::exp(rep.omega * dt);
  std::size_t resolvable = 0;
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    grid.decode(i, j);
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) {
      double x = grid.coord(j[a]);
      r2 += x * x;
    }
    double decay = std::exp(
        -rep.C2 * std::pow(std::pow(std::sqrt(r2), m) / (rep.sigma * dt),
                           1.0 / (m - 1)));
    double bound = pre * decay;
    double val = std::abs(p.values[i]);
    if (bound >= rep.noise_floor) {
      ++resolvable;
      rep.max_ratio = std::max(rep.max_ratio, val / bound);
    } else {
      rep.unresolved_max = std::max(rep.unresolved_max, val);
    }
  }
  rep.resolvable_fraction =
      static_cast<double>(resolvable) / static_cast<double>(p.values.size());
  rep.pass = rep.max_ratio <= 1.0 && rep.unresolved_max <= rep.noise_floor;
  return rep;
}

double operator_norm_p(const NonAutonomousSymbol& sym, const GridSpec& grid,
                       double s, double t, double p) {
  if (!(s < t)) throw usage_error("operator_norm_p: requires s < t");
  if (!(p >= 1.0)) throw usage_error("operator_norm_p: p must be >= 1");
  // Young bound, uniform in p: the grid L^1 norm of the kernel.
  return field_norm(kernel(sym, grid, s, t), 1.0);
}

GeneratorResidual generator_consistency(const NonAutonomousSymbol& sym,
                                        const EllipticityCertificate& cert,
                                        double s, double t, const Field& f,
                                        double h) {
  require_certificate(cert);
  if (!(s < t && t < sym.horizon()))
    throw usage_error("generator_consistency: requires s < t < T");
  if (!(h > 0.0) || t - h < s)
    throw usage_error("generator_consistency: invalid step h");

  GeneratorResidual out;
  for (double b : sym.breakpoints())
    if (std::abs(t - b) < h) out.one_sided = true;

  Spectrum spec = forward_transform(f);
  double t_plus = t + h, t_minus = t - h;
  if (out.one_sided) {
    // Fall back to a difference taken inside the same track piece.
    auto bp = sym.breakpoints();
    double lo = 0.0, hi = sym.horizon();
    for (double b : bp) {
      if (b <= t) lo = std::max(lo, b);
      if (b > t) hi = std::min(hi, b);
    }
    t_plus = std::min(t + h, hi - 1e-3 * h);
    t_minus = std::max(t - h, lo + 1e-3 * h);
  }
  if (t_plus > sym.horizon()) t_plus = sym.horizon();

  Spectrum up = propagate_spectrum(sym, cert, s, t_plus, spec);
  Spectrum um = propagate_spectrum(sym, cert, s, t_minus, spec);
  Spectrum ut = propagate_spectrum(sym, cert, s, t, spec);

  Spectrum diff(f.grid), gen(f.grid);
  std::array<int, 3> j{};
  double xi[3] = {0, 0, 0};
  const double inv = 1.0 / (t_plus - t_minus);
  for (std::size_t i = 0; i < diff.values.size(); ++i) {
    f.grid.decode(i, j);
    for (int a = 0; a < f.grid.dim; ++a) xi[a] = f.grid.freq(j[a]);
    cplx a_t = sym.eval(t, xi);
    gen.values[i] = a_t * ut.values[i];
    diff.values[i] = (up.values[i] - um.values[i]) * inv + gen.values[i];
  }
  double denom = spectrum_norm_l2(gen);
  if (denom == 0.0) {
    out.residual = 0.0;  // 0/0 convention for f = 0
    return out;
  }
  out.residual = spectrum_norm_l2(diff) / denom;
  return out;
}

}  // namespace obslab
