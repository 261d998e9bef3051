#pragma once

#include <vector>

#include "obslab/common.hpp"

namespace obslab {

// One coefficient a_alpha(t): either a constant or piecewise-constant samples
// on a uniform partition of [0,T].  Time integrals are carried as prefix
// integrals from 0 so that integral(r,s)+integral(s,t) telescopes exactly.
struct CoefficientTrack {
  std::vector<cplx> samples;  // size >= 1

  CoefficientTrack() : samples{cplx{0.0, 0.0}} {}
  explicit CoefficientTrack(cplx constant) : samples{constant} {}
  explicit CoefficientTrack(std::vector<cplx> s);

  cplx value_at(double t, double horizon) const;
  // J(t) = int_0^t a(tau) dtau, exact for the piecewise-constant track.
  cplx prefix_integral(double t, double horizon) const;
  double sup_abs() const;
  bool constant() const { return samples.size() == 1; }
};

struct SymbolTerm {
  std::vector<int> alpha;  // multi-index, length = dimension
  CoefficientTrack track;
  int order() const;
};

// Non-autonomous polynomial  a(t,xi) = sum_{|alpha|<=m} a_alpha(t) (i xi)^alpha.
class NonAutonomousSymbol {
 public:
  NonAutonomousSymbol(int dim, int degree, double horizon,
                      std::vector<SymbolTerm> terms);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  double horizon() const { return horizon_; }
  const std::vector<SymbolTerm>& terms() const { return terms_; }

  cplx eval(double t, const double* xi) const;
  cplx principal(double t, const double* xi) const;
  // Evaluation at complex frequency xi + i eta (used by the kernel bounds).
  cplx eval_complex(double t, const cplx* zeta) const;
  cplx principal_complex(double t, const cplx* zeta) const;

  // int_s^t a(tau, xi) dtau, exact on the tracks; additive by construction.
  cplx time_integral(double s, double t, const double* xi) const;

  // Midpoints of the common refinement of all track partitions; sampling a
  // piecewise-constant symbol there is exhaustive in t.
  std::vector<double> time_samples() const;
  std::vector<double> breakpoints() const;
  // Sum of sup |a_alpha| over terms of order k.
  double lower_order_sup(int order) const;

 private:
  int dim_;
  int degree_;
  double horizon_;
  std::vector<SymbolTerm> terms_;
};

// Sampled certificate of uniform strong ellipticity: the infimum over the
// sample set of Re a_m(t,xi)/|xi|^m with |xi| = 1.
struct EllipticityCertificate {
  double c = 0.0;
  bool ok = false;
  int sphere_samples = 0;
  int time_samples = 0;
  double witness_time = 0.0;
  std::vector<double> witness_direction;
};

std::vector<std::vector<double>> unit_sphere_lattice(int dim, int count);

EllipticityCertificate check_uniform_ellipticity(
    const NonAutonomousSymbol& sym,
    const std::vector<std::vector<double>>& xi_samples,
    const std::vector<double>& t_samples);

// Default sphere resolution per dimension (2 / 512 / 2048 directions).
EllipticityCertificate certify_ellipticity(const NonAutonomousSymbol& sym,
                                           int sphere_count = 0);

// Smallest sampled omega with  Re a(t,xi) >= c0 |xi|^m - omega  on a dense
// lattice up to the radius where the principal part provably dominates.
double garding_lower_bound(const NonAutonomousSymbol& sym, double c0,
                           int lattice_per_axis = 0);

// Sampled constants (sigma, omega) of the complexified lower bound
//   Re a(t, xi + i eta) >= (c0/2)|xi|^m - sigma |eta|^m - omega,
// the inequality driving the Gaussian kernel bound.
struct ComplexLowerBound {
  double sigma = 1.0;
  double omega = 0.0;
};

ComplexLowerBound complex_lower_bound(const NonAutonomousSymbol& sym, double c0,
                                      int sphere_count = 0,
                                      int lattice_per_axis = 0);

}  // namespace obslab
