#pragma once

#include <functional>

#include "obslab/grid.hpp"

namespace obslab {

// Discrete transforms scaled so that forward_transform is the Riemann sum of
// the integral  (Fu)(xi) = int e^{-i x.xi} u(x) dx  over the torus, and
// inverse_transform carries the matching (2pi)^-d inverse.  The pair is
// mutually inverse to machine precision.
Spectrum forward_transform(const Field& f);
Field inverse_transform(const Spectrum& s);

// Pointwise product on the frequency lattice; mult receives the frequency
// vector (length grid.dim).
Spectrum apply_multiplier(const Spectrum& s,
                          const std::function<cplx(const double*)>& mult);

// Smooth transition bump: 1 on [0,1/2], 0 on [1,inf), C^inf monotone between,
// realized as g(2-2r)/(g(2-2r)+g(2r-1)) with g(x)=e^{-1/x} for x>0.
double bump_eta(double r);

// Smooth frequency cutoff P_lambda: multiplier eta(|xi|/lambda).
Field project_smooth(const Field& f, double lambda);
Spectrum project_smooth_spectrum(const Spectrum& s, double lambda);

// Sharp cutoff Q_lambda: indicator of the box [-lambda, lambda]^d.
Field project_sharp(const Field& f, double lambda);
Spectrum project_sharp_spectrum(const Spectrum& s, double lambda);

// Grid L^1 norm of the real-space kernel of the smooth cutoff at scale
// lambda (the uniform bound for the projector family on every L^p).
double smooth_cutoff_kernel_l1(const GridSpec& g, double lambda);

// Modulated Gaussian packet exp(-|x-c|^2/(2 w^2)) e^{i m.x}, periodized over
// the neighboring torus images so the samples define a smooth torus function.
Field gaussian_packet_field(const GridSpec& g, const std::array<double, 3>& center,
                            double width, const std::array<double, 3>& modulation);

// In-place radix-2 complex FFT along every axis of a row-major array.
// inverse=true applies the conjugate transform with 1/N per axis.
void dft_nd(std::vector<cplx>& data, const GridSpec& g, bool inverse);

}  // namespace obslab
