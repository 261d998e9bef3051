#pragma once

#include "obslab/grid.hpp"
#include "obslab/spectral.hpp"
#include "obslab/symbol.hpp"

namespace obslab {

// Propagator multiplier  exp(-int_s^t a(tau, xi) dtau)  at one frequency.
cplx propagator_multiplier(const NonAutonomousSymbol& sym, double s, double t,
                           const double* xi);

// Lattice-wide relative residual of the cocycle identity
// multiplier(r,t) = multiplier(r,s) multiplier(s,t).  Magnitudes below the
// smallest normal double are flushed to zero on both sides: the subnormal
// range carries no relative precision, so comparisons there are vacuous.
double multiplier_cocycle_residual(const NonAutonomousSymbol& sym,
                                   const GridSpec& grid, double r, double s,
                                   double t);

// U(t,s)f via the Fourier multiplier.  Requires a positive ellipticity
// certificate; without one the multiplier may blow up at high frequency.
Field propagate(const NonAutonomousSymbol& sym, const EllipticityCertificate& cert,
                double s, double t, const Field& f);
Spectrum propagate_spectrum(const NonAutonomousSymbol& sym,
                            const EllipticityCertificate& cert, double s, double t,
                            const Spectrum& in);

// Convolution kernel p_{t,s} (inverse transform of the multiplier); s < t.
Field kernel(const NonAutonomousSymbol& sym, const GridSpec& grid, double s,
             double t);

// Gaussian kernel bound check.  The bound carries the constants of the
// complexified symbol estimate:
//   |p_{t,s}(x)| <= C1 (t-s)^{-d/m} e^{omega (t-s)}
//                    exp(-C2 (|x|^m / (sigma (t-s)))^{1/(m-1)}),
// with C1 = (2pi)^{-d} int exp(-(c0/2)|xi|^m) dxi and C2 = (2^{m-1}-1)/2^m.
// Points where the bound falls below the transform noise floor are excluded
// from the ratio and checked against the floor instead.
struct GaussianBoundReport {
  double C1 = 0.0;
  double C2 = 0.0;
  double omega = 0.0;
  double sigma = 1.0;
  double c0 = 0.0;
  double max_ratio = 0.0;        // max |p| / bound on resolvable points
  double noise_floor = 0.0;      // absolute kernel resolution limit
  double unresolved_max = 0.0;   // max |p| where bound < floor
  double resolvable_fraction = 1.0;
  bool pass = false;
};

GaussianBoundReport verify_gaussian_bound(const NonAutonomousSymbol& sym,
                                          const GridSpec& grid, double s, double t,
                                          double c0_fraction = 0.9);

// Grid L^1 norm of the kernel: operator norm bound for every p (Young),
// exact for p in {1, infinity} when the kernel is nonnegative.
double operator_norm_p(const NonAutonomousSymbol& sym, const GridSpec& grid,
                       double s, double t, double p);

struct GeneratorResidual {
  double residual = 0.0;
  bool one_sided = false;  // t was within h of a track breakpoint
};

// Central-difference check of  d/dt U(t,s)f = -A(t) U(t,s)f  at time t.
GeneratorResidual generator_consistency(const NonAutonomousSymbol& sym,
                                        const EllipticityCertificate& cert,
                                        double s, double t, const Field& f,
                                        double h);

}  // namespace obslab
