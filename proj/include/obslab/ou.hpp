#pragma once

#include <Eigen/Dense>

#include "obslab/grid.hpp"
#include "obslab/spectral.hpp"

namespace obslab {

// Smooth matrix track with closed-form derivatives of every order:
//   M(t) = M0 + t * M1 + sin(w t) * Ms + cos(w t) * Mc.
class MatrixTrack {
 public:
  MatrixTrack() = default;
  static MatrixTrack constant(Eigen::MatrixXd m);
  static MatrixTrack affine(Eigen::MatrixXd m0, Eigen::MatrixXd m1);
  static MatrixTrack trig(Eigen::MatrixXd m0, Eigen::MatrixXd ms,
                          Eigen::MatrixXd mc, double w);

  Eigen::MatrixXd value(double t) const { return derivative(t, 0); }
  Eigen::MatrixXd derivative(double t, int order) const;
  int rows() const { return static_cast<int>(m0_.rows()); }
  double sup_norm(double horizon) const;

 private:
  Eigen::MatrixXd m0_, m1_, ms_, mc_;
  double w_ = 0.0;
  bool has_affine_ = false, has_trig_ = false;
};

struct OUSystem {
  int dim = 1;
  MatrixTrack A, B;
  double horizon = 1.0;

  void validate() const;
};

// Kolmogorov example: state (x, v) with d-dimensional blocks,
// A = [[0,0],[0,sqrt(2) Id]], B = [[0,Id],[0,0]].
OUSystem kolmogorov_system(int block_dim, double horizon);

// Transition matrices dR/dt = B(t) R, R(s,s) = Id (either time direction),
// integrated adaptively to local tolerance 1e-12.
Eigen::MatrixXd solve_transition(const OUSystem& sys, double s, double t);

// |det R(t,s) - exp(int_s^t tr B)| / exp(int_s^t tr B)
double liouville_check(const OUSystem& sys, double s, double t);

double trace_b_integral(const OUSystem& sys, double s, double t);

// Gram matrix  Q_{t,s} = int_s^t R(s,tau) A A^T R(s,tau)^T dtau.
Eigen::MatrixXd gram_matrix(const OUSystem& sys, double s, double t);

// q_{t,s}(xi) = < Q_{t,s} R(t,s)^T xi, R(t,s)^T xi >.
double quad_form(const OUSystem& sys, double s, double t,
                 const Eigen::VectorXd& xi);

// Cached per-(s,t) data for the propagator.
struct OUTransit {
  Eigen::MatrixXd R;       // R(t,s)
  Eigen::MatrixXd Q;       // Q_{t,s}
  Eigen::MatrixXd form;    // R Q R^T (the matrix of q_{t,s})
  double trace_b = 0.0;    // int_s^t tr B
  double q(const Eigen::VectorXd& xi) const;
};

OUTransit make_transit(const OUSystem& sys, double s, double t);

struct KalmanResult {
  int rank = 0;
  int k_used = 0;
  bool full_rank = false;
  bool undecided = false;  // k_max exhausted below full rank
};

KalmanResult kalman_generalized(const OUSystem& sys, double T, int k_max);

// Frequency-side change of variables F -> F(M .) by exact band-limited
// interpolation.  Factored into per-axis shears and dilations when M admits
// an LU factorization without pivoting; dense fallback otherwise.
// fast_approx enables oversampled local interpolation for large grids.
struct ShearOptions {
  bool fast_approx = false;
  // pointwise support-box gate; sits above the transform rounding floor,
  // and energy past the band is measured exactly before refusing
  double support_threshold = 1e-11;
  // relative spectral energy allowed beyond the representable band before
  // the composition refuses with an aliasing error
  double spill_tolerance = 1e-9;
};

struct aliasing_error : numeric_error {
  aliasing_error(const std::string& what, double spill)
      : numeric_error(what), spill_norm(spill) {}
  double spill_norm = 0.0;
};

Spectrum spectral_compose(const Spectrum& s, const Eigen::MatrixXd& M,
                          const ShearOptions& opts = {});

// U_p(t,s) f = F^{-1}( e^{(1/2) int tr B} e^{-q_{t,s}/2} (F f)(R(t,s)^T .) ).
Field ou_propagate(const OUSystem& sys, double s, double t, const Field& f,
                   const ShearOptions& opts = {});
Field ou_propagate(const OUSystem& sys, const OUTransit& transit, const Field& f,
                   const ShearOptions& opts = {});

// Damped dilation  A_{q,Lambda} f = F^{-1}(e^{-q/2} (F f)(L^T .))
// with q(xi) = <Q L^T xi, L^T xi>; used by the norm-bound property tests.
Field aq_lambda_apply(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& Lambda,
                      const Field& f, const ShearOptions& opts = {});

struct NormBoundReport {
  double bound = 0.0;       // e^{(1/2 - 1/p') int tr B}
  double max_ratio = 0.0;   // max ||U f||_p / ||f||_p over samples
  double max_excess = 0.0;  // max_ratio / bound
  bool pass = false;
};

NormBoundReport norm_bound_check(const OUSystem& sys, double s, double t, double p,
                                 int samples, std::uint64_t seed,
                                 const GridSpec& grid, double band_limit);

// L^2 dissipation fit against the sharp cutoff Q_{lambda/(2 sqrt d)}:
//   ||(Id - Q_{lambda/(2 sqrt d)}) U_2(t,s)|| <= c0 e^{-c1 (t-s)^{m1} lambda^2}.
struct OUDissipationFit {
  double c0 = 1.0;
  double c1 = 0.0;
  int m1 = 1;
  double K = 1.0;  // 1 + ||F^{-1} chi_1||_1
};

OUDissipationFit fit_ou_dissipation(const OUSystem& sys, const GridSpec& grid,
                                    const std::vector<double>& lambda_list,
                                    const std::vector<double>& timegap_list);

// L^p dissipation bound from the fitted L^2 constants via interpolation:
// p in (1,2]: M_p (c0 e^{-c1 gap^{m1} lambda^2})^{2-2/p},
// p in [2,oo): N_p (c0 e^{-c1 gap^{m1} lambda^2})^{2/p}.
double ou_dissipation_bound(const OUSystem& sys, const OUDissipationFit& fit,
                            double p, double lambda, double s, double t);

}  // namespace obslab
