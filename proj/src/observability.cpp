#include "obslab/observability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace obslab {

void HypothesisConstants::validate() const {
  if (!(d0 >= 0.0)) throw usage_error("hypothesis constants: d0 must be >= 0");
  if (!(d1 > 0.0)) throw usage_error("hypothesis constants: d1 must be > 0");
  if (!(gamma1 > 0.0)) throw usage_error("hypothesis constants: gamma1 must be > 0");
  if (!(d2 >= 1.0)) throw usage_error("hypothesis constants: d2 must be >= 1");
  if (!(d3 > 0.0)) throw usage_error("hypothesis constants: d3 must be > 0");
  if (!(gamma2 > gamma1))
    throw usage_error("hypothesis constants: gamma2 must exceed gamma1");
  if (!(gamma3 > 0.0)) throw usage_error("hypothesis constants: gamma3 must be > 0");
  if (!(M >= 1.0)) throw usage_error("hypothesis constants: M must be >= 1");
  if (!(obs_norm >= 0.0)) throw usage_error("hypothesis constants: ||C|| must be >= 0");
  if (!(theta > 0.0 && theta < 1.0))
    throw usage_error("hypothesis constants: theta must lie in (0,1)");
}

InterpolationResult interpolation_combine(double F1, double F2, double G,
                                          double D, double C, double theta) {
  if (!(theta > 0.0 && theta < 1.0))
    throw usage_error("interpolation_combine: theta must lie in (0,1)");
  if (F1 < 0.0 || F2 < 0.0 || G < 0.0 || D < 0.0 || C < 0.0)
    throw usage_error("interpolation_combine: inputs must be nonnegative");
  InterpolationResult out;
  double k1 = C / (std::pow(theta, theta) * std::pow(1.0 - theta, 1.0 - theta));
  double k2 = D * std::pow(theta / (1.0 - theta), 1.0 - theta);
  out.bound = std::max(k1, k2) * std::pow(F1, theta) * std::pow(G, 1.0 - theta);
  out.epsilon0 = (F1 > 0.0)
                     ? std::pow(theta * G / ((1.0 - theta) * F1), 1.0 - theta)
                     : std::numeric_limits<double>::infinity();
  return out;
}

InterpolationConstants interpolation_constants(const HypothesisConstants& hc) {
  hc.validate();
  InterpolationConstants out;
  const double th = hc.theta;
  out.C1t = 1.0 / (std::pow(th, th) * std::pow(1.0 - th, 1.0 - th)) * hc.M *
            std::max(hc.d0, (1.0 + hc.d0 * hc.obs_norm) * hc.d2);
  out.C2t = std::pow(hc.d1 * hc.gamma1 / (th * hc.d3 * hc.gamma2),
                     hc.gamma1 / (hc.gamma2 - hc.gamma1)) *
            hc.d1 * (1.0 - hc.gamma1 / hc.gamma2);
  out.C3t = std::max(hc.omega, 0.0);
  return out;
}

CobsResult cobs_explicit(const HypothesisConstants& hc, double T, double r) {
  hc.validate();
  if (!(T > 0.0)) throw usage_error("cobs_explicit: T must be positive");
  if (!(r >= 1.0)) throw usage_error("cobs_explicit: r must lie in [1, infinity]");
  const InterpolationConstants ic = interpolation_constants(hc);
  const double th = hc.theta;
  const double expo = hc.gamma1 * hc.gamma3 / (hc.gamma2 - hc.gamma1);
  const double A = std::pow(6.0, expo) * ic.C2t / (1.0 - th);

  CobsResult out;
  // q = ((A + theta)/(A + 1))^{1/expo}; for large A the gap 1 - q shrinks
  // like (1-theta)/(A expo), so it is carried through expm1/log1p rather
  // than recovered from q by subtraction.
  const double log_q = std::log1p((th - 1.0) / (A + 1.0)) / expo;
  const double one_minus_q = -std::expm1(log_q);
  out.q = 1.0 - one_minus_q;
  out.log_C1 = -th / (1.0 - th) * log_q + std::log(1.0 - th) +
               th / (1.0 - th) * std::log(th) +
               (std::log(hc.M) + std::log(ic.C1t)) / (1.0 - th) +
               std::log(6.0 / one_minus_q);
  out.C2 = (A + th) / std::pow(one_minus_q, expo);
  out.C3 = std::max(hc.omega, 0.0) / (1.0 - th);
  double log_T_term = std::isinf(r) ? 0.0 : -std::log(T) / r;
  out.log_value = out.log_C1 + log_T_term + out.C2 / std::pow(T, expo) + out.C3 * T;
  out.value = out.log_value < 709.0 ? std::exp(out.log_value)
                                    : std::numeric_limits<double>::infinity();
  return out;
}

IntervalSet::IntervalSet(std::vector<std::pair<double, double>> iv) {
  for (auto& [a, b] : iv)
    if (a > b) throw usage_error("IntervalSet: interval with a > b");
  std::sort(iv.begin(), iv.end());
  for (const auto& [a, b] : iv) {
    if (!iv_.empty() && a <= iv_.back().second)
      iv_.back().second = std::max(iv_.back().second, b);
    else
      iv_.emplace_back(a, b);
  }
}

double IntervalSet::measure() const {
  double m = 0.0;
  for (const auto& [a, b] : iv_) m += b - a;
  return m;
}

double IntervalSet::measure_between(double lo, double hi) const {
  if (hi <= lo) return 0.0;
  double m = 0.0;
  for (const auto& [a, b] : iv_) {
    double l = std::max(a, lo), h = std::min(b, hi);
    if (h > l) m += h - l;
  }
  return m;
}

LebesgueChain lebesgue_chain(const IntervalSet& E, double q, double ell,
                             int depth) {
  if (!(E.measure() > 0.0)) throw usage_error("lebesgue_chain: |E| must be positive");
  if (!(q > 0.0 && q < 1.0)) throw usage_error("lebesgue_chain: q must lie in (0,1)");
  if (depth < 2) throw usage_error("lebesgue_chain: depth must be >= 2");
  const double hmax = E.upper() - ell;
  if (!(hmax > 0.0))
    throw usage_error("lebesgue_chain: ell must lie left of the end of E");

  // Candidate first gaps: E-breakpoint-aligned values plus a geometric sweep.
  std::vector<double> candidates;
  for (const auto& [a, b] : E.intervals()) {
    if (b - ell > 0.0 && b - ell <= hmax) candidates.push_back(b - ell);
    if (a - ell > 0.0 && a - ell <= hmax) candidates.push_back(a - ell);
  }
  for (double h = hmax; h > 1e-6 * hmax; h *= 0.97) candidates.push_back(h);
  std::sort(candidates.rbegin(), candidates.rend());

  auto build = [&](double h0) {
    LebesgueChain chain;
    chain.h0 = h0;
    chain.points.resize(depth);
    for (int m = 0; m < depth; ++m)
      chain.points[m] = ell + h0 * std::pow(q, m);
    chain.density_ratios.resize(depth - 1);
    chain.achieved_depth = 1;
    for (int m = 0; m + 1 < depth; ++m) {
      double hi = chain.points[m], lo = chain.points[m + 1];
      double gap = hi - lo;
      double density = E.measure_between(lo, hi) / gap;
      chain.density_ratios[m] = density;
      if (density >= 1.0 / 3.0 - 1e-12)
        chain.achieved_depth = m + 2;
      else
        break;
    }
    chain.complete = chain.achieved_depth == depth;
    return chain;
  };

  LebesgueChain best;
  for (double h0 : candidates) {
    LebesgueChain chain = build(h0);
    if (chain.complete) return chain;
    if (chain.achieved_depth > best.achieved_depth) best = chain;
  }
  std::ostringstream msg;
  msg << "lebesgue_chain: density condition unsatisfiable at depth " << depth
      << " (achieved " << best.achieved_depth << ")";
  throw chain_truncated_error(msg.str(), best);
}

ChainCobs cobs_from_chain(const HypothesisConstants& hc, const IntervalSet& E,
                          const LebesgueChain& chain, double T, double r) {
  hc.validate();
  if (chain.points.size() < 2)
    throw usage_error("cobs_from_chain: chain needs at least two points");
  const InterpolationConstants ic = interpolation_constants(hc);
  const double th = hc.theta;
  const double expo = hc.gamma1 * hc.gamma3 / (hc.gamma2 - hc.gamma1);
  const double c1 = hc.M * ic.C1t;
  const double c2 = std::pow(6.0, expo) * ic.C2t;
  const double A = c2 / (1.0 - th);
  const double log_q_proof = std::log1p((th - 1.0) / (A + 1.0)) / expo;
  const double q_proof = std::exp(log_q_proof);
  if (chain.points.size() >= 3) {
    double ratio = (chain.points[1] - chain.points[2]) /
                   (chain.points[0] - chain.points[1]);
    if (std::abs(ratio - q_proof) > 1e-9)
      throw usage_error("cobs_from_chain: chain gaps do not match the proof's q");
  }
  const double gap1 = chain.points[0] - chain.points[1];
  ChainCobs out;
  out.log_value = std::log(hc.M) +
                  std::max(hc.omega, 0.0) * (T - chain.points[0]) -
                  th / (1.0 - th) * log_q_proof + std::log(1.0 - th) +
                  th / (1.0 - th) * std::log(th) + std::log(c1) / (1.0 - th) +
                  std::log(6.0 / gap1) +
                  (c2 / (1.0 - th) + th) / std::pow(gap1, expo) +
                  ic.C3t * T / (1.0 - th);
  if (!std::isinf(r) && r > 1.0)
    out.log_value += (1.0 - 1.0 / r) * std::log(E.measure());
  else if (std::isinf(r))
    out.log_value += std::log(E.measure());
  return out;
}

// ---------------------------------------------------------------------------

namespace {

Field random_band_limited(const GridSpec& grid, double band, Rng& rng) {
  Spectrum s(grid);
  std::array<int, 3> j{};
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    grid.decode(i, j);
    bool in_band = true;
    for (int a = 0; a < grid.dim; ++a)
      if (std::abs(grid.freq(j[a])) > band) in_band = false;
    if (in_band) s.values[i] = rng.normal_complex();
  }
  return inverse_transform(s);
}

void normalize_l2(Field& f) {
  double n = field_norm(f, 2.0);
  if (n > 0.0)
    for (auto& v : f.values) v /= n;
}

}  // namespace

UncertaintyFit estimate_uncertainty(const GridSpec& grid, const SetFamily& fam,
                                    const std::vector<double>& L, double rho,
                                    const std::vector<double>& lambda_list,
                                    double p, int draws, std::uint64_t seed,
                                    int threads) {
  if (lambda_list.empty() || draws < 1)
    throw usage_error("estimate_uncertainty: empty sweep");
  auto [lo_it, hi_it] = std::minmax_element(lambda_list.begin(), lambda_list.end());
  if (*hi_it < 10.0 * *lo_it * (1.0 - 1e-12))
    throw usage_error("estimate_uncertainty: lambda list must span >= 1 decade");
  if (!is_uniformly_thick(fam, L, rho).holds)
    throw usage_error("estimate_uncertainty: family is not uniformly thick at (L, rho)");

  UncertaintyFit fit;
  fit.lambdas = lambda_list;
  fit.worst_ratios.assign(lambda_list.size(), 0.0);
  // plain chars: parallel writers touch disjoint slots
  std::vector<char> failed(lambda_list.size(), 0);

  parallel_for(lambda_list.size(), threads, [&](std::size_t li) {
    double lambda = lambda_list[li];
    double worst = 0.0;
    for (int dr = 0; dr < draws; ++dr) {
      Rng rng(Rng::substream(seed, li * 1000003ULL + dr));
      Field f = random_band_limited(grid, lambda, rng);
      Field pf = project_smooth(f, lambda);
      double num = field_norm(pf, p);
      if (num == 0.0) continue;
      for (const auto& sample : fam.samples) {
        double den = field_norm(restrict_field(pf, sample), p);
        if (den == 0.0) {
          failed[li] = 1;
          continue;
        }
        worst = std::max(worst, num / den);
      }
    }
    fit.worst_ratios[li] = worst;
  });

  for (std::size_t li = 0; li < lambda_list.size(); ++li)
    if (failed[li]) {
      fit.failure_witness = true;
      fit.witness_lambda = lambda_list[li];
    }

  // Least squares of log(worst) against lambda with gamma1 pinned to 1.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(lambda_list.size());
  for (std::size_t i = 0; i < lambda_list.size(); ++i) {
    double y = std::log(std::max(fit.worst_ratios[i], 1e-300));
    sx += lambda_list[i];
    sy += y;
    sxx += lambda_list[i] * lambda_list[i];
    sxy += lambda_list[i] * y;
  }
  double denom = n * sxx - sx * sx;
  double slope = denom > 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
  fit.d1 = std::max(slope, 1e-9);
  // Inflate d0 so the envelope dominates every sampled ratio.
  double d0 = 0.0, resid = 0.0;
  double intercept = (sy - fit.d1 * sx) / n;
  for (std::size_t i = 0; i < lambda_list.size(); ++i) {
    d0 = std::max(d0, fit.worst_ratios[i] * std::exp(-fit.d1 * lambda_list[i]));
    double y = std::log(std::max(fit.worst_ratios[i], 1e-300));
    resid = std::max(resid, std::abs(y - (intercept + fit.d1 * lambda_list[i])));
  }
  fit.d0 = d0;
  fit.max_fit_residual = resid;
  return fit;
}

DissipationFit estimate_dissipation(const NonAutonomousSymbol& sym,
                                    const EllipticityCertificate& cert,
                                    const GridSpec& grid,
                                    const std::vector<double>& lambda_list,
                                    const std::vector<double>& timegap_list,
                                    double p, int draws, std::uint64_t seed,
                                    int threads) {
  if (!cert.ok) throw usage_error("estimate_dissipation: symbol not elliptic");
  if (lambda_list.empty() || timegap_list.empty() || draws < 1)
    throw usage_error("estimate_dissipation: empty sweep");
  const int m = sym.degree();
  DissipationFit fit;
  double omega = garding_lower_bound(sym, 0.9 * cert.c);
  fit.lambda_star =
      std::pow(std::pow(2.0, m + 5) * std::max(omega, 0.0) / cert.c, 1.0 / m);
  for (double l : lambda_list) {
    if (l <= fit.lambda_star)
      throw usage_error("estimate_dissipation: lambda below the dissipation threshold");
    if (l >= grid.nyquist())
      throw usage_error("estimate_dissipation: lambda beyond the grid Nyquist frequency");
  }

  const double T = sym.horizon();
  const std::size_t cells = lambda_list.size() * timegap_list.size();
  std::vector<double> sharp(cells, 0.0), smooth(cells, 0.0);

  parallel_for(cells, threads, [&](std::size_t cell) {
    std::size_t li = cell / timegap_list.size();
    std::size_t ti = cell % timegap_list.size();
    double lambda = lambda_list[li];
    double gap = timegap_list[ti];
    if (gap > T) throw usage_error("estimate_dissipation: time gap exceeds horizon");
    std::vector<double> starts{0.0};
    if (T - gap > 1e-12) {
      starts.push_back(0.5 * (T - gap));
      starts.push_back(T - gap);
    }
    // Sharp-cutoff oracle: on L^2 the operator norm of (Id - Q_lambda)U is
    // the multiplier supremum over the lattice tail, available exactly.
    double worst_sharp = 0.0;
    std::array<int, 3> j{};
    double xi[3] = {0, 0, 0};
    for (double s : starts) {
      for (std::size_t i = 0; i < grid.size(); ++i) {
        grid.decode(i, j);
        double sup = 0.0;
        for (int a = 0; a < grid.dim; ++a) {
          xi[a] = grid.freq(j[a]);
          sup = std::max(sup, std::abs(xi[a]));
        }
        if (sup <= lambda) continue;
        worst_sharp =
            std::max(worst_sharp, std::abs(propagator_multiplier(sym, s, s + gap, xi)));
      }
    }
    sharp[cell] = worst_sharp;

    double worst_smooth = 0.0;
    for (int dr = 0; dr < draws; ++dr) {
      Rng rng(Rng::substream(seed, cell * 1009ULL + dr));
      Field f = random_band_limited(grid, grid.nyquist() * 0.999, rng);
      double nf = field_norm(f, p);
      if (nf == 0.0) continue;
      for (double s : starts) {
        Field u = propagate(sym, cert, s, s + gap, f);
        Spectrum us = forward_transform(u);
        Spectrum cut_smooth = project_smooth_spectrum(us, lambda);
        for (std::size_t i = 0; i < us.values.size(); ++i)
          cut_smooth.values[i] = us.values[i] - cut_smooth.values[i];
        worst_smooth =
            std::max(worst_smooth, field_norm(inverse_transform(cut_smooth), p) / nf);
      }
    }
    smooth[cell] = worst_smooth;
  });

  // Exponent fit on the sharp-cutoff oracle: log(-log R) regressed on
  // (log lambda, log gap).  The oracle follows the multiplier decay
  // cleanly; the smooth-cutoff transition layer would bias the slopes.
  double a11 = 0, a12 = 0, a13 = 0, a22 = 0, a23 = 0, a33 = 0;
  double b1 = 0, b2 = 0, b3 = 0;
  std::size_t used = 0;
  double zbar = 0.0;
  std::vector<double> zs(cells, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t cell = 0; cell < cells; ++cell) {
    double R = sharp[cell];
    if (!(R > 1e-280 && R < 0.7)) continue;
    std::size_t li = cell / timegap_list.size();
    std::size_t ti = cell % timegap_list.size();
    double x1 = std::log(lambda_list[li]);
    double x2 = std::log(timegap_list[ti]);
    double z = std::log(-std::log(R));
    zs[cell] = z;
    a11 += 1;
    a12 += x1;
    a13 += x2;
    a22 += x1 * x1;
    a23 += x1 * x2;
    a33 += x2 * x2;
    b1 += z;
    b2 += x1 * z;
    b3 += x2 * z;
    zbar += z;
    ++used;
  }
  if (used < 4)
    throw numeric_error(
        "estimate_dissipation: too few resolvable decay samples; widen the "
        "(lambda, timegap) sweep");
  // Solve the 3x3 normal equations by Cramer's rule.
  auto det3 = [](double m11, double m12, double m13, double m21, double m22,
                 double m23, double m31, double m32, double m33) {
    return m11 * (m22 * m33 - m23 * m32) - m12 * (m21 * m33 - m23 * m31) +
           m13 * (m21 * m32 - m22 * m31);
  };
  double D = det3(a11, a12, a13, a12, a22, a23, a13, a23, a33);
  if (std::abs(D) < 1e-12)
    throw numeric_error("estimate_dissipation: degenerate sweep design");
  double c0 = det3(b1, a12, a13, b2, a22, a23, b3, a23, a33) / D;
  double g2 = det3(a11, b1, a13, a12, b2, a23, a13, b3, a33) / D;
  double g3 = det3(a11, a12, b1, a12, a22, b2, a13, a23, b3) / D;
  fit.gamma2 = g2;
  fit.gamma3 = g3;
  double rms = 0.0;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    if (std::isnan(zs[cell])) continue;
    std::size_t li = cell / timegap_list.size();
    std::size_t ti = cell % timegap_list.size();
    double pred = c0 + g2 * std::log(lambda_list[li]) + g3 * std::log(timegap_list[ti]);
    rms += (zs[cell] - pred) * (zs[cell] - pred);
  }
  fit.fit_rms = std::sqrt(rms / used);
  if (fit.gamma2 <= 1.0)
    throw numeric_error(
        "estimate_dissipation: fitted gamma2 <= gamma1, hypothesis violated");

  // Envelope constants for the smooth-cutoff samples:  least squares of
  // log R against x = lambda^g2 gap^g3, then inflation so every sample is
  // dominated.
  double sx = 0, sy = 0, sxx = 0, sxy = 0, cnt = 0;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    double R = smooth[cell];
    if (!(R > 1e-280)) continue;
    std::size_t li = cell / timegap_list.size();
    std::size_t ti = cell % timegap_list.size();
    double x = std::pow(lambda_list[li], fit.gamma2) *
               std::pow(timegap_list[ti], fit.gamma3);
    double y = std::log(R);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    cnt += 1;
  }
  double denom = cnt * sxx - sx * sx;
  double slope = denom > 0.0 ? (cnt * sxy - sx * sy) / denom : -1e-9;
  fit.d3 = std::max(-slope, 1e-12);
  double log_d2 = 0.0;  // d2 >= 1
  for (std::size_t cell = 0; cell < cells; ++cell) {
    double R = smooth[cell];
    if (!(R > 0.0)) continue;
    std::size_t li = cell / timegap_list.size();
    std::size_t ti = cell % timegap_list.size();
    double x = std::pow(lambda_list[li], fit.gamma2) *
               std::pow(timegap_list[ti], fit.gamma3);
    log_d2 = std::max(log_d2, std::log(R) + fit.d3 * x);
  }
  fit.d2 = std::exp(log_d2) * (1.0 + 1e-12);

  fit.samples = cells;
  fit.dominated = 0;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    std::size_t li = cell / timegap_list.size();
    std::size_t ti = cell % timegap_list.size();
    double x = std::pow(lambda_list[li], fit.gamma2) *
               std::pow(timegap_list[ti], fit.gamma3);
    if (smooth[cell] <= fit.d2 * std::exp(-fit.d3 * x)) ++fit.dominated;
  }
  fit.envelope_ok = fit.dominated == fit.samples;
  return fit;
}

// ---------------------------------------------------------------------------

std::vector<Field> make_candidates(const GridSpec& grid, int count,
                                   double band_limit, std::uint64_t seed) {
  std::vector<Field> out;
  out.reserve(count);
  const int n_band = count * 2 / 5;
  const int n_packet = count * 2 / 5;
  for (int i = 0; i < count; ++i) {
    Rng rng(Rng::substream(seed, i));
    if (i < n_band) {
      Field f = random_band_limited(grid, band_limit, rng);
      normalize_l2(f);
      out.push_back(std::move(f));
    } else if (i < n_band + n_packet) {
      // Translated/dilated Gaussian packet with random modulation; the
      // minimum width keeps the packet spectrum within ~1.1 * band_limit.
      double X = grid.half_length;
      double width = std::max(7.5 / band_limit, 0.06 * X) * rng.uniform(1.0, 2.0);
      std::array<double, 3> center{}, mod{};
      for (int a = 0; a < grid.dim; ++a) {
        center[a] = rng.uniform(-0.5 * X, 0.5 * X);
        mod[a] = rng.uniform(-0.5, 0.5) * band_limit;
      }
      Field f = gaussian_packet_field(grid, center, width, mod);
      normalize_l2(f);
      out.push_back(std::move(f));
    } else {
      // Pure low-frequency lattice mode.
      Spectrum s(grid);
      int mode = i - n_band - n_packet;
      std::array<int, 3> j{0, 0, 0};
      int axis = mode % grid.dim;
      int k = mode / (2 * grid.dim) + 1;
      int sgn = ((mode / grid.dim) % 2) ? -1 : 1;
      int signed_idx = sgn * (k % std::max(1, grid.points / 4));
      j[axis] = signed_idx >= 0 ? signed_idx : grid.points + signed_idx;
      s.values[grid.encode(j)] = 1.0;
      Field f = inverse_transform(s);
      normalize_l2(f);
      out.push_back(std::move(f));
    }
  }
  return out;
}

namespace {

struct QuadratureNode {
  double t;
  double w;
};

// Composite Simpson nodes on E, split at the family's time breakpoints.
std::vector<QuadratureNode> build_nodes(const IntervalSet& E, const SetFamily& fam,
                                        double T, int nodes_per_piece) {
  std::vector<double> cuts;
  const std::size_t M = fam.samples.size();
  for (std::size_t j = 0; j <= M; ++j) cuts.push_back(T * j / M);
  std::vector<QuadratureNode> out;
  int n = std::max(2, nodes_per_piece + (nodes_per_piece % 2));
  for (const auto& [a0, b0] : E.intervals()) {
    std::vector<double> edges{std::max(0.0, a0)};
    for (double c : cuts)
      if (c > edges.front() && c < std::min(T, b0)) edges.push_back(c);
    edges.push_back(std::min(T, b0));
    std::sort(edges.begin(), edges.end());
    for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
      double a = edges[e], b = edges[e + 1];
      if (b - a < 1e-15) continue;
      double h = (b - a) / n;
      for (int i = 0; i <= n; ++i) {
        double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        out.push_back({a + i * h, w * h / 3.0});
      }
    }
  }
  return out;
}

}  // namespace

ObservabilityReport empirical_ratio(const PropagatorFn& U, const SetFamily& fam,
                                    const IntervalSet& E, double T, double r,
                                    double p, const std::vector<Field>& candidates,
                                    std::optional<CobsResult> cobs,
                                    int quad_nodes_per_piece, int threads) {
  if (candidates.empty()) throw usage_error("empirical_ratio: no candidates");
  if (!(E.measure() > 0.0)) throw usage_error("empirical_ratio: |E| must be positive");
  auto nodes = build_nodes(E, fam, T, quad_nodes_per_piece);

  ObservabilityReport rep;
  rep.T = T;
  rep.r = r;
  rep.p = p;
  rep.grid_points = fam.grid.points;
  rep.grid_dim = fam.grid.dim;
  {
    std::ostringstream os;
    os << "union of " << E.intervals().size() << " interval(s), |E| = "
       << E.measure();
    rep.E_description = os.str();
  }
  rep.table.resize(candidates.size());

  parallel_for(candidates.size(), threads, [&](std::size_t ci) {
    const Field& u0 = candidates[ci];
    double num = field_norm(U(T, u0), p);
    CandidateRatio row;
    row.candidate_id = static_cast<int>(ci);
    if (num == 0.0) {
      row.ratio = 0.0;  // 0/0 convention
      rep.table[ci] = row;
      return;
    }
    double obs;
    if (std::isinf(r)) {
      obs = 0.0;
      for (const auto& node : nodes) {
        Field u = U(node.t, u0);
        obs = std::max(obs,
                       field_norm(restrict_field(u, fam.at_time(node.t)), p));
      }
    } else {
      double acc = 0.0;
      for (const auto& node : nodes) {
        Field u = U(node.t, u0);
        double g = field_norm(restrict_field(u, fam.at_time(node.t)), p);
        acc += node.w * std::pow(g, r);
      }
      obs = std::pow(acc, 1.0 / r);
    }
    if (obs == 0.0) {
      row.infinite = true;
      row.ratio = std::numeric_limits<double>::infinity();
    } else {
      row.ratio = num / obs;
    }
    rep.table[ci] = row;
  });

  for (const auto& row : rep.table) {
    if (row.infinite) rep.sup_infinite = true;
    else rep.sup_ratio = std::max(rep.sup_ratio, row.ratio);
  }
  if (cobs) {
    rep.log_cobs = cobs->log_value;
    rep.cobs_explicit_form = true;
    rep.within_bound =
        !rep.sup_infinite &&
        (rep.sup_ratio <= 0.0 || std::log(rep.sup_ratio) <= cobs->log_value);
  }
  return rep;
}

FalsifyResult falsify_mean_thickness(const PropagatorFn& U, const SetFamily& fam,
                                     double T, double r, double p,
                                     const Field& bump,
                                     const std::vector<double>& centers,
                                     int quad_nodes_per_piece, int threads) {
  if (centers.empty()) throw usage_error("falsify_mean_thickness: no centers");
  const GridSpec& grid = fam.grid;
  for (double c : centers)
    if (std::abs(c) > 0.75 * grid.half_length)
      throw usage_error(
          "falsify_mean_thickness: torus too small for the translation range");
  IntervalSet E({{0.0, T}});
  auto nodes = build_nodes(E, fam, T, quad_nodes_per_piece);

  FalsifyResult out;
  out.centers = centers;
  out.ratios.assign(centers.size(), 0.0);
  std::vector<double> leak(centers.size(), 0.0);
  const double bump_sup = field_norm(bump, std::numeric_limits<double>::infinity());

  parallel_for(centers.size(), threads, [&](std::size_t ni) {
    // Exact torus translation: shift by a whole number of cells.
    int shift = static_cast<int>(std::lround(centers[ni] / grid.cell()));
    Field fn(grid);
    if (grid.dim != 1)
      throw usage_error("falsify_mean_thickness: one-dimensional corpus only");
    const int N = grid.points;
    for (int j = 0; j < N; ++j)
      fn.values[((j + shift) % N + N) % N] = bump.values[j];

    double num = field_norm(U(T, fn), p);
    double acc = 0.0, max_leak = 0.0;
    for (const auto& node : nodes) {
      Field u = U(node.t, fn);
      double g = field_norm(restrict_field(u, fam.at_time(node.t)), p);
      acc += node.w * std::pow(g, r);
      for (int j : {0, 1, N - 2, N - 1})
        max_leak = std::max(max_leak, std::abs(u.values[j]));
    }
    double obs = std::pow(acc, 1.0 / r);
    out.ratios[ni] = obs > 0.0 ? num / obs : std::numeric_limits<double>::infinity();
    leak[ni] = max_leak / bump_sup;
  });

  out.max_boundary_leakage = *std::max_element(leak.begin(), leak.end());
  double first = out.ratios.front(), last = out.ratios.back();
  out.growth_factor = first > 0.0 ? last / first
                                  : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace obslab
