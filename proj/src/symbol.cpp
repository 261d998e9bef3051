#include "obslab/symbol.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace obslab {

CoefficientTrack::CoefficientTrack(std::vector<cplx> s) : samples(std::move(s)) {
  if (samples.empty()) throw usage_error("CoefficientTrack: needs at least one sample");
}

namespace {
// Piece index of time t in a uniform n-piece partition of [0,T]; the final
// piece is closed at T.
int piece_index(double t, double horizon, std::size_t n) {
  int i = static_cast<int>(std::floor(t / horizon * static_cast<double>(n)));
  if (i < 0) i = 0;
  if (i >= static_cast<int>(n)) i = static_cast<int>(n) - 1;
  return i;
}
}  // namespace

cplx CoefficientTrack::value_at(double t, double horizon) const {
  if (samples.size() == 1) return samples[0];
  return samples[piece_index(t, horizon, samples.size())];
}

cplx CoefficientTrack::prefix_integral(double t, double horizon) const {
  if (samples.size() == 1) return samples[0] * t;
  const double piece = horizon / static_cast<double>(samples.size());
  int k = piece_index(t, horizon, samples.size());
  cplx acc{0.0, 0.0};
  for (int i = 0; i < k; ++i) acc += samples[i] * piece;
  acc += samples[k] * (t - k * piece);
  return acc;
}

double CoefficientTrack::sup_abs() const {
  double m = 0.0;
  for (const auto& v : samples) m = std::max(m, std::abs(v));
  return m;
}

int SymbolTerm::order() const {
  int s = 0;
  for (int a : alpha) s += a;
  return s;
}

namespace {
// z^k by repeated multiplication; exact phases for the small powers in use.
cplx int_pow(cplx z, int k) {
  cplx r{1.0, 0.0};
  for (int i = 0; i < k; ++i) r *= z;
  return r;
}

cplx monomial(const std::vector<int>& alpha, const cplx* zeta) {
  cplx r{1.0, 0.0};
  for (std::size_t a = 0; a < alpha.size(); ++a)
    r *= int_pow(cplx{0.0, 1.0} * zeta[a], alpha[a]);
  return r;
}

cplx monomial_real(const std::vector<int>& alpha, const double* xi) {
  cplx r{1.0, 0.0};
  for (std::size_t a = 0; a < alpha.size(); ++a)
    r *= int_pow(cplx{0.0, xi[a]}, alpha[a]);
  return r;
}
}  // namespace

NonAutonomousSymbol::NonAutonomousSymbol(int dim, int degree, double horizon,
                                         std::vector<SymbolTerm> terms)
    : dim_(dim), degree_(degree), horizon_(horizon), terms_(std::move(terms)) {
  if (dim < 1 || dim > 3) throw usage_error("symbol: dimension must be 1..3");
  if (degree < 2 || degree % 2 != 0)
    throw usage_error("symbol: degree must be an even integer >= 2");
  if (!(horizon > 0.0)) throw usage_error("symbol: horizon must be positive");
  bool top = false;
  for (const auto& term : terms_) {
    if (static_cast<int>(term.alpha.size()) != dim)
      throw usage_error("symbol: multi-index length must match dimension");
    for (int a : term.alpha)
      if (a < 0) throw usage_error("symbol: multi-index entries must be >= 0");
    if (term.order() > degree)
      throw usage_error("symbol: term order exceeds the stated degree");
    if (term.order() == degree && term.track.sup_abs() > 0.0) top = true;
  }
  if (!top)
    throw usage_error("symbol: no nonzero coefficient of top order |alpha| = m");
}

namespace {
void check_time(double t, double horizon) {
  if (t < 0.0 || t > horizon)
    throw std::domain_error("symbol: time outside [0, T]");
}
}  // namespace

cplx NonAutonomousSymbol::eval(double t, const double* xi) const {
  check_time(t, horizon_);
  cplx acc{0.0, 0.0};
  for (const auto& term : terms_)
    acc += term.track.value_at(t, horizon_) * monomial_real(term.alpha, xi);
  return acc;
}

cplx NonAutonomousSymbol::principal(double t, const double* xi) const {
  check_time(t, horizon_);
  cplx acc{0.0, 0.0};
  for (const auto& term : terms_)
    if (term.order() == degree_)
      acc += term.track.value_at(t, horizon_) * monomial_real(term.alpha, xi);
  return acc;
}

cplx NonAutonomousSymbol::eval_complex(double t, const cplx* zeta) const {
  check_time(t, horizon_);
  cplx acc{0.0, 0.0};
  for (const auto& term : terms_)
    acc += term.track.value_at(t, horizon_) * monomial(term.alpha, zeta);
  return acc;
}

cplx NonAutonomousSymbol::principal_complex(double t, const cplx* zeta) const {
  check_time(t, horizon_);
  cplx acc{0.0, 0.0};
  for (const auto& term : terms_)
    if (term.order() == degree_)
      acc += term.track.value_at(t, horizon_) * monomial(term.alpha, zeta);
  return acc;
}

cplx NonAutonomousSymbol::time_integral(double s, double t, const double* xi) const {
  if (s > t) throw usage_error("time_integral: requires s <= t");
  check_time(s, horizon_);
  check_time(t, horizon_);
  cplx acc{0.0, 0.0};
  for (const auto& term : terms_) {
    cplx j = term.track.prefix_integral(t, horizon_) -
             term.track.prefix_integral(s, horizon_);
    acc += j * monomial_real(term.alpha, xi);
  }
  return acc;
}

std::vector<double> NonAutonomousSymbol::breakpoints() const {
  std::size_t pieces = 1;
  for (const auto& term : terms_)
    pieces = std::lcm(pieces, term.track.samples.size());
  std::vector<double> b;
  b.reserve(pieces + 1);
  for (std::size_t i = 0; i <= pieces; ++i)
    b.push_back(horizon_ * static_cast<double>(i) / static_cast<double>(pieces));
  return b;
}

std::vector<double> NonAutonomousSymbol::time_samples() const {
  auto b = breakpoints();
  std::vector<double> mids(b.size() - 1);
  for (std::size_t i = 0; i + 1 < b.size(); ++i) mids[i] = 0.5 * (b[i] + b[i + 1]);
  return mids;
}

double NonAutonomousSymbol::lower_order_sup(int order) const {
  double s = 0.0;
  for (const auto& term : terms_)
    if (term.order() == order) s += term.track.sup_abs();
  return s;
}

std::vector<std::vector<double>> unit_sphere_lattice(int dim, int count) {
  std::vector<std::vector<double>> dirs;
  if (dim == 1) {
    dirs = {{1.0}, {-1.0}};
  } else if (dim == 2) {
    dirs.reserve(count);
    for (int i = 0; i < count; ++i) {
      double a = 2.0 * pi * i / count;
      dirs.push_back({std::cos(a), std::sin(a)});
    }
  } else {
    // Fibonacci sphere
    dirs.reserve(count);
    const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
    for (int i = 0; i < count; ++i) {
      double z = 1.0 - 2.0 * (i + 0.5) / count;
      double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      double a = 2.0 * pi * i / golden;
      dirs.push_back({r * std::cos(a), r * std::sin(a), z});
    }
  }
  return dirs;
}

EllipticityCertificate check_uniform_ellipticity(
    const NonAutonomousSymbol& sym,
    const std::vector<std::vector<double>>& xi_samples,
    const std::vector<double>& t_samples) {
  if (xi_samples.empty() || t_samples.empty())
    throw usage_error("check_uniform_ellipticity: empty sample set");
  EllipticityCertificate cert;
  cert.sphere_samples = static_cast<int>(xi_samples.size());
  cert.time_samples = static_cast<int>(t_samples.size());
  double inf = std::numeric_limits<double>::infinity();
  for (double t : t_samples) {
    for (const auto& dir : xi_samples) {
      double norm = 0.0;
      for (double x : dir) norm += x * x;
      norm = std::sqrt(norm);
      if (norm == 0.0)
        throw usage_error("check_uniform_ellipticity: xi samples must exclude 0");
      std::vector<double> unit(dir);
      for (double& x : unit) x /= norm;
      double v = std::real(sym.principal(t, unit.data()));
      if (v < inf) {
        inf = v;
        cert.witness_time = t;
        cert.witness_direction = unit;
      }
    }
  }
  cert.c = inf;
  cert.ok = inf > 0.0;
  return cert;
}

EllipticityCertificate certify_ellipticity(const NonAutonomousSymbol& sym,
                                           int sphere_count) {
  if (sphere_count <= 0)
    sphere_count = sym.dim() == 1 ? 2 : (sym.dim() == 2 ? 512 : 2048);
  return check_uniform_ellipticity(sym, unit_sphere_lattice(sym.dim(), sphere_count),
                                   sym.time_samples());
}

namespace {
// Radius beyond which  budget * R^m >= sum_{k<m} S_k R^k, with S_k the summed
// coefficient sup-norms of order k.
double dominance_radius(const NonAutonomousSymbol& sym, double budget) {
  double r = 1.0;
  for (int iter = 0; iter < 200; ++iter) {
    double lower = 0.0;
    for (int k = 0; k < sym.degree(); ++k)
      lower += sym.lower_order_sup(k) * std::pow(r, k - sym.degree());
    if (lower <= budget) return r;
    r *= 1.5;
  }
  throw numeric_error("dominance radius search failed (degenerate budget)");
}
}  // namespace

double garding_lower_bound(const NonAutonomousSymbol& sym, double c0,
                           int lattice_per_axis) {
  EllipticityCertificate cert = certify_ellipticity(sym);
  if (!cert.ok) throw usage_error("garding_lower_bound: symbol is not elliptic");
  if (!(c0 > 0.0 && c0 < cert.c))
    throw usage_error("garding_lower_bound: c0 must lie in (0, c)");
  const int d = sym.dim();
  if (lattice_per_axis <= 0) lattice_per_axis = d == 1 ? 4096 : (d == 2 ? 256 : 64);
  const double radius = dominance_radius(sym, cert.c - c0);
  const auto times = sym.time_samples();
  double omega = 0.0;
  std::array<int, 3> idx{0, 0, 0};
  const int n = lattice_per_axis;
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= n;
  std::vector<double> xi(d);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (int a = d - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % n);
      rem /= n;
    }
    double norm_m = 0.0;
    for (int a = 0; a < d; ++a) {
      xi[a] = -radius + 2.0 * radius * idx[a] / (n - 1);
      norm_m += xi[a] * xi[a];
    }
    norm_m = std::pow(std::sqrt(norm_m), sym.degree());
    for (double t : times) {
      double gap = c0 * norm_m - std::real(sym.eval(t, xi.data()));
      if (gap > omega) omega = gap;
    }
  }
  return omega;
}

ComplexLowerBound complex_lower_bound(const NonAutonomousSymbol& sym, double c0,
                                      int sphere_count, int lattice_per_axis) {
  EllipticityCertificate cert = certify_ellipticity(sym);
  if (!cert.ok) throw usage_error("complex_lower_bound: symbol is not elliptic");
  if (!(c0 > 0.0 && c0 < cert.c))
    throw usage_error("complex_lower_bound: c0 must lie in (0, c)");
  const int d = sym.dim();
  const int m = sym.degree();
  const auto times = sym.time_samples();
  if (sphere_count <= 0) sphere_count = d == 1 ? 4096 : 20000;

  // Principal part on the unit sphere of (xi, eta) in R^{2d}: find the
  // smallest sigma with  Re a_m(xi+i eta) - (c0/2)|xi|^m + sigma |eta|^m > 0.
  auto sphere = unit_sphere_lattice(2 * d <= 3 ? 2 * d : 3, sphere_count);
  std::vector<std::vector<double>> dirs;
  if (2 * d <= 3) {
    dirs = std::move(sphere);
  } else {
    // 2d = 4 or 6: random directions, deterministic seed.
    Rng rng(0x0b5e55ed);
    dirs.reserve(sphere_count);
    for (int i = 0; i < sphere_count; ++i) {
      std::vector<double> v(2 * d);
      double norm = 0.0;
      for (double& x : v) {
        x = rng.normal();
        norm += x * x;
      }
      norm = std::sqrt(norm);
      if (norm == 0.0) continue;
      for (double& x : v) x /= norm;
      dirs.push_back(std::move(v));
    }
  }

  double sigma_needed = 0.0;
  std::vector<cplx> zeta(d);
  for (const auto& dir : dirs) {
    double eta_norm = 0.0, xi_norm = 0.0;
    for (int a = 0; a < d; ++a) {
      zeta[a] = cplx{dir[a], dir[d + a]};
      xi_norm += dir[a] * dir[a];
      eta_norm += dir[d + a] * dir[d + a];
    }
    if (eta_norm < 1e-12) continue;
    xi_norm = std::pow(std::sqrt(xi_norm), m);
    eta_norm = std::pow(std::sqrt(eta_norm), m);
    for (double t : times) {
      double p = std::real(sym.principal_complex(t, zeta.data()));
      double need = ((c0 / 2.0) * xi_norm - p) / eta_norm;
      if (need > sigma_needed) sigma_needed = need;
    }
  }
  ComplexLowerBound out;
  out.sigma = std::max(1.0, sigma_needed * 1.001 + 0.001);

  // Margin of the homogeneous inequality with the chosen sigma.
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& dir : dirs) {
    double eta_norm = 0.0, xi_norm = 0.0;
    for (int a = 0; a < d; ++a) {
      zeta[a] = cplx{dir[a], dir[d + a]};
      xi_norm += dir[a] * dir[a];
      eta_norm += dir[d + a] * dir[d + a];
    }
    xi_norm = std::pow(std::sqrt(xi_norm), m);
    eta_norm = std::pow(std::sqrt(eta_norm), m);
    for (double t : times) {
      double p = std::real(sym.principal_complex(t, zeta.data()));
      margin = std::min(margin, p - (c0 / 2.0) * xi_norm + out.sigma * eta_norm);
    }
  }
  if (!(margin > 0.0)) margin = 1e-6;

  // Lower-order terms: sweep the lattice up to the dominance radius.
  bool pure_principal = true;
  for (int k = 0; k < m; ++k)
    if (sym.lower_order_sup(k) > 0.0) pure_principal = false;
  if (pure_principal) return out;

  double radius = dominance_radius(sym, margin);
  if (lattice_per_axis <= 0) lattice_per_axis = d == 1 ? 512 : 48;
  const int n = lattice_per_axis;
  std::size_t total = 1;
  for (int a = 0; a < 2 * d; ++a) total *= n;
  std::array<int, 6> idx{};
  std::vector<double> point(2 * d);
  double omega = 0.0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (int a = 2 * d - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % n);
      rem /= n;
    }
    double xi_norm = 0.0, eta_norm = 0.0;
    for (int a = 0; a < 2 * d; ++a)
      point[a] = -radius + 2.0 * radius * idx[a] / (n - 1);
    for (int a = 0; a < d; ++a) {
      zeta[a] = cplx{point[a], point[d + a]};
      xi_norm += point[a] * point[a];
      eta_norm += point[d + a] * point[d + a];
    }
    xi_norm = std::pow(std::sqrt(xi_norm), m);
    eta_norm = std::pow(std::sqrt(eta_norm), m);
    for (double t : times) {
      double gap = (c0 / 2.0) * xi_norm - out.sigma * eta_norm -
                   std::real(sym.eval_complex(t, zeta.data()));
      if (gap > omega) omega = gap;
    }
  }
  out.omega = omega;
  return out;
}

}  // namespace obslab
