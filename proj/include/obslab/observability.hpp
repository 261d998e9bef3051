#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "obslab/evolution.hpp"
#include "obslab/thickness.hpp"

namespace obslab {

// Constants of the abstract uncertainty/dissipation hypotheses:
//   ||P_lambda x||     <= d0 e^{d1 lambda^g1} ||C(t) P_lambda x||
//   ||(Id-P_l)U(t,s)|| <= d2 e^{-d3 lambda^g2 (t-s)^g3}
// together with the exponential bound (M, omega), the observation norm bound
// and the interpolation weight theta.
struct HypothesisConstants {
  double d0 = 1.0, d1 = 1.0, gamma1 = 1.0;
  double d2 = 1.0, d3 = 1.0, gamma2 = 2.0, gamma3 = 1.0;
  double M = 1.0, omega = 0.0;
  double obs_norm = 1.0;  // sup_t ||C(t)||
  double theta = 0.5;

  void validate() const;
};

struct InterpolationResult {
  double bound = 0.0;
  double epsilon0 = 0.0;
};

// max{ C/(theta^theta (1-theta)^{1-theta}), D (theta/(1-theta))^{1-theta} }
// * F1^theta G^{1-theta}; epsilon0 is the optimizer of the constrained side.
InterpolationResult interpolation_combine(double F1, double F2, double G,
                                          double D, double C, double theta);

struct InterpolationConstants {
  double C1t = 0.0, C2t = 0.0, C3t = 0.0;
};

InterpolationConstants interpolation_constants(const HypothesisConstants& hc);

// Explicit final-state observability constant for E = [0,T].  The closed
// form easily overflows double for estimated constants, so the log is the
// primary value; `value` is +inf when not representable.
struct CobsResult {
  double log_value = 0.0;
  double value = 0.0;
  double q = 0.0;
  double log_C1 = 0.0;
  double C2 = 0.0;
  double C3 = 0.0;
};

CobsResult cobs_explicit(const HypothesisConstants& hc, double T, double r);

// Sorted disjoint union of closed intervals in [0,T].
class IntervalSet {
 public:
  IntervalSet() = default;
  explicit IntervalSet(std::vector<std::pair<double, double>> iv);
  const std::vector<std::pair<double, double>>& intervals() const { return iv_; }
  double measure() const;
  double measure_between(double a, double b) const;
  double lower() const { return iv_.empty() ? 0.0 : iv_.front().first; }
  double upper() const { return iv_.empty() ? 0.0 : iv_.back().second; }

 private:
  std::vector<std::pair<double, double>> iv_;
};

struct LebesgueChain {
  std::vector<double> points;          // l_1 > l_2 > ... > l_K
  std::vector<double> density_ratios;  // |E cap (l_{m+1}, l_m)| / gap
  double h0 = 0.0;                     // l_1 - ell
  bool complete = false;
  int achieved_depth = 0;
};

struct chain_truncated_error : numeric_error {
  chain_truncated_error(const std::string& what, LebesgueChain best)
      : numeric_error(what), best(std::move(best)) {}
  LebesgueChain best;
};

// Geometric chain toward the density point ell: gaps with ratio q, each
// interval meeting E in at least a third of its length.
LebesgueChain lebesgue_chain(const IntervalSet& E, double q, double ell,
                             int depth);

// Chain-based constant of the general-E proof (final display + the final
// exponential-bound step), reported in log space; r enters via the Hoelder
// factor |E|^{1-1/r}.
struct ChainCobs {
  double log_value = 0.0;
  bool proof_tracked = true;  // not a paper-stated closed form
};

ChainCobs cobs_from_chain(const HypothesisConstants& hc, const IntervalSet& E,
                          const LebesgueChain& chain, double T, double r);

// ---------------------------------------------------------------------------
// Empirical estimation of the hypothesis constants.

struct UncertaintyFit {
  double d0 = 1.0, d1 = 0.0, gamma1 = 1.0;
  std::vector<double> lambdas;
  std::vector<double> worst_ratios;
  double max_fit_residual = 0.0;  // log-scale residual before inflation
  bool failure_witness = false;   // some band-limited candidate invisible
  double witness_lambda = 0.0;
};

UncertaintyFit estimate_uncertainty(const GridSpec& grid, const SetFamily& fam,
                                    const std::vector<double>& L, double rho,
                                    const std::vector<double>& lambda_list,
                                    double p, int draws, std::uint64_t seed,
                                    int threads = 1);

struct DissipationFit {
  double d2 = 1.0, d3 = 0.0, gamma2 = 2.0, gamma3 = 1.0;
  double lambda_star = 0.0;  // dissipation threshold of the elliptic proof
  // exponent fit diagnostics (sharp-cutoff oracle ratios)
  double fit_rms = 0.0;
  // envelope verification against the smooth-cutoff samples
  std::size_t samples = 0;
  std::size_t dominated = 0;
  bool envelope_ok = false;
};

DissipationFit estimate_dissipation(const NonAutonomousSymbol& sym,
                                    const EllipticityCertificate& cert,
                                    const GridSpec& grid,
                                    const std::vector<double>& lambda_list,
                                    const std::vector<double>& timegap_list,
                                    double p, int draws, std::uint64_t seed,
                                    int threads = 1);

// ---------------------------------------------------------------------------
// Observability experiments.

// Propagator abstraction: u(t) = U(t,0) u0.
using PropagatorFn = std::function<Field(double t, const Field& u0)>;

struct CandidateRatio {
  int candidate_id = 0;
  double parameter = 0.0;  // translation / mode index / packet scale
  double ratio = 0.0;
  bool infinite = false;
};

struct ObservabilityReport {
  double sup_ratio = 0.0;
  bool sup_infinite = false;
  std::vector<CandidateRatio> table;
  double log_cobs = 0.0;
  bool cobs_explicit_form = false;  // true when E = [0,T] (Remark-form bound)
  bool within_bound = false;
  double T = 0.0;
  double r = 2.0, p = 2.0;
  std::string E_description;
  int grid_points = 0;
  int grid_dim = 1;
};

std::vector<Field> make_candidates(const GridSpec& grid, int count,
                                   double band_limit, std::uint64_t seed);

ObservabilityReport empirical_ratio(const PropagatorFn& U, const SetFamily& fam,
                                    const IntervalSet& E, double T, double r,
                                    double p, const std::vector<Field>& candidates,
                                    std::optional<CobsResult> cobs,
                                    int quad_nodes_per_piece = 16, int threads = 1);

struct FalsifyResult {
  std::vector<double> centers;
  std::vector<double> ratios;
  double growth_factor = 0.0;
  double max_boundary_leakage = 0.0;
};

FalsifyResult falsify_mean_thickness(const PropagatorFn& U, const SetFamily& fam,
                                     double T, double r, double p,
                                     const Field& bump,
                                     const std::vector<double>& centers,
                                     int quad_nodes_per_piece = 16,
                                     int threads = 1);

}  // namespace obslab
