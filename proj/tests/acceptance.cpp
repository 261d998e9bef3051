// Acceptance suite: one experiment per criterion, each printed as a single
// pass/fail line.  Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "obslab/config.hpp"
#include "obslab/evolution.hpp"
#include "obslab/observability.hpp"
#include "obslab/ou.hpp"
#include "obslab/runner.hpp"

using namespace obslab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

NonAutonomousSymbol preset_symbol(const std::string& name) {
  return Config::from_preset(name).symbol();
}

// ---------------------------------------------------------------------------
// 1. Cocycle exactness on the heat and quartic presets.
Outcome criterion_cocycle() {
  auto t0 = std::chrono::steady_clock::now();
  GridSpec g(1, 16.0, 1024);
  double worst = 0.0;
  for (const std::string name : {"heat", "quartic"}) {
    NonAutonomousSymbol sym = preset_symbol(name);
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
      double a = rng.uniform(0.0, 1.0), b = rng.uniform(0.0, 1.0),
             c = rng.uniform(0.0, 1.0);
      double r = std::min({a, b, c}), t = std::max({a, b, c});
      double s = a + b + c - r - t;
      worst = std::max(worst, multiplier_cocycle_residual(sym, g, r, s, t));
    }
  }
  double elapsed = seconds_since(t0);
  std::ostringstream os;
  os << "max residual " << worst << ", " << elapsed << " s";
  return {worst < 1e-12 && elapsed < 10.0, os.str()};
}

// 2. Heat-kernel closed form on X = 20, N = 2048.
Outcome criterion_heat_kernel() {
  NonAutonomousSymbol heat = preset_symbol("heat");
  GridSpec g(1, 20.0, 2048);
  Field p = kernel(heat, g, 0.0, 0.25);
  double worst = 0.0;
  for (int j = 0; j < g.points; ++j) {
    double x = g.coord(j);
    double expect = std::exp(-x * x) / std::sqrt(4.0 * pi * 0.25);
    worst = std::max(worst, std::abs(p.values[j] - expect));
  }
  std::ostringstream os;
  os << "max abs error " << worst;
  return {worst < 1e-8, os.str()};
}

// 3. Gaussian kernel bound with C2 = (2^{m-1}-1)/2^m across 20 (s,t) pairs.
Outcome criterion_gaussian_bound() {
  GridSpec g(1, 16.0, 1024);
  Rng rng(3);
  double worst = 0.0;
  bool ok = true;
  double c2_heat = 0.0, c2_quartic = 0.0;
  for (const std::string name : {"heat", "quartic"}) {
    NonAutonomousSymbol sym = preset_symbol(name);
    for (int i = 0; i < 20; ++i) {
      double s = rng.uniform(0.0, 0.5);
      double t = s + rng.uniform(0.02, 0.5);
      GaussianBoundReport rep = verify_gaussian_bound(sym, g, s, t);
      (name == "heat" ? c2_heat : c2_quartic) = rep.C2;
      worst = std::max(worst, rep.max_ratio);
      ok = ok && rep.pass;
    }
  }
  std::ostringstream os;
  os << "C2 = " << c2_heat << " / " << c2_quartic << ", worst ratio " << worst;
  return {ok && std::abs(c2_heat - 0.25) < 1e-15 &&
              std::abs(c2_quartic - 7.0 / 16.0) < 1e-15,
          os.str()};
}

// 4. Dissipation exponents within 10% for both elliptic presets.
Outcome criterion_dissipation() {
  auto t0 = std::chrono::steady_clock::now();
  std::ostringstream os;
  bool ok = true;
  for (const std::string name : {"heat", "quartic"}) {
    Config c = Config::from_preset(name);
    NonAutonomousSymbol sym = c.symbol();
    auto cert = certify_ellipticity(sym);
    GridSpec g = c.grid();
    auto dis = c.raw().at("dissipation");
    DissipationFit fit = estimate_dissipation(
        sym, cert, g, dis.at("lambda_list").get<std::vector<double>>(),
        dis.at("timegap_list").get<std::vector<double>>(), 2.0, 6, 2025, 1);
    double m = sym.degree();
    bool here = std::abs(fit.gamma2 - m) <= 0.1 * m &&
                std::abs(fit.gamma3 - 1.0) <= 0.1 && fit.envelope_ok &&
                fit.dominated == fit.samples;
    os << name << ": gamma2 = " << fit.gamma2 << ", gamma3 = " << fit.gamma3
       << ", dominated " << fit.dominated << "/" << fit.samples << "; ";
    ok = ok && here;
  }
  double elapsed = seconds_since(t0);
  os << elapsed << " s";
  return {ok && elapsed < 60.0, os.str()};
}

// 5. Projector algebra: composition identity and the uniform L^p bound.
Outcome criterion_projectors() {
  GridSpec g(1, 16.0, 1024);
  Rng rng(5);
  double worst_comp = 0.0;
  for (int i = 0; i < 20; ++i) {
    double lambda = rng.uniform(1.0, 10.0);
    double mu = rng.uniform(2.0 * lambda, 4.0 * lambda);
    Field f(g);
    for (auto& v : f.values) v = rng.normal_complex();
    Field pl = project_smooth(f, lambda);
    Field pm = project_smooth(pl, mu);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < pl.values.size(); ++k) {
      num += std::norm(pm.values[k] - pl.values[k]);
      den += std::norm(pl.values[k]);
    }
    worst_comp = std::max(worst_comp, std::sqrt(num / den));
  }
  const double bound = smooth_cutoff_kernel_l1(g, 1.0);
  double worst_excess = 0.0;
  for (int i = 0; i < 200; ++i) {
    double lambda = rng.uniform(0.5, g.nyquist() / 4.0);
    Field f(g);
    for (auto& v : f.values) v = rng.normal_complex();
    Field pf = project_smooth(f, lambda);
    for (double p : {1.0, 2.0, std::numeric_limits<double>::infinity()})
      worst_excess = std::max(worst_excess,
                              field_norm(pf, p) / (bound * field_norm(f, p)));
  }
  std::ostringstream os;
  os << "composition residual " << worst_comp << ", L^p excess " << worst_excess
     << " (bound " << bound << ")";
  return {worst_comp < 1e-12 && worst_excess <= 1.0 + 1e-9, os.str()};
}

// 6. Interpolation lemma property suite: 10^4 tight instances.
Outcome criterion_interpolation_lemma() {
  Rng rng(6);
  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    double theta = rng.uniform(0.05, 0.95);
    double F1 = rng.uniform(0.0, 10.0), G = rng.uniform(0.0, 10.0);
    double C = rng.uniform(0.0, 5.0), D = rng.uniform(0.0, 5.0);
    double inf_constraint;
    if (F1 == 0.0) {
      inf_constraint = C * G;
    } else if (G == 0.0) {
      inf_constraint = 0.0;
    } else {
      double eps0 = std::pow(theta * G / ((1 - theta) * F1), 1 - theta);
      inf_constraint =
          (eps0 <= 1.0)
              ? C / (std::pow(theta, theta) * std::pow(1 - theta, 1 - theta)) *
                    std::pow(F1, theta) * std::pow(G, 1 - theta)
              : C * (G + F1);
    }
    double F2 = std::min(D * F1, inf_constraint);
    double bound = interpolation_combine(F1, F2, G, D, C, theta).bound;
    if (F2 > bound * (1 + 1e-12) + 1e-300) ++violations;
  }
  std::ostringstream os;
  os << violations << " violations in 10000 instances";
  return {violations == 0, os.str()};
}

// 7. Explicit constants against an independent long-double re-evaluation.
Outcome criterion_explicit_constants() {
  Rng rng(7);
  double worst = 0.0;
  bool q_ok = true;
  for (int i = 0; i < 100; ++i) {
    HypothesisConstants hc;
    hc.d0 = rng.uniform(0.0, 5.0);
    hc.d1 = rng.uniform(0.1, 4.0);
    hc.gamma1 = rng.uniform(0.3, 1.5);
    hc.gamma2 = hc.gamma1 + rng.uniform(0.3, 2.0);
    hc.gamma3 = rng.uniform(0.5, 2.0);
    hc.d2 = rng.uniform(1.0, 4.0);
    hc.d3 = rng.uniform(0.1, 4.0);
    hc.M = rng.uniform(1.0, 3.0);
    hc.omega = rng.uniform(-1.0, 2.0);
    hc.obs_norm = rng.uniform(0.0, 2.0);
    hc.theta = rng.uniform(0.1, 0.9);
    double T = rng.uniform(0.2, 3.0);
    double r = (i % 9 == 0) ? std::numeric_limits<double>::infinity()
                            : rng.uniform(1.0, 6.0);
    CobsResult res = cobs_explicit(hc, T, r);
    q_ok = q_ok && res.q > 0.0 && res.q < 1.0;

    // independent re-evaluation in long double; the 1-q gap is carried via
    // expm1/log1p (it underflows below even extended precision otherwise)
    const long double th = hc.theta;
    const long double E = hc.gamma1 * hc.gamma3 / (hc.gamma2 - hc.gamma1);
    const long double C1t =
        1.0L / (powl(th, th) * powl(1.0L - th, 1.0L - th)) * hc.M *
        std::max<long double>(hc.d0, (1.0L + hc.d0 * hc.obs_norm) * hc.d2);
    const long double C2t =
        powl((long double)hc.d1 * hc.gamma1 / (th * hc.d3 * hc.gamma2),
             hc.gamma1 / (hc.gamma2 - hc.gamma1)) *
        hc.d1 * (1.0L - (long double)hc.gamma1 / hc.gamma2);
    const long double A = powl(6.0L, E) * C2t / (1.0L - th);
    const long double log_q = log1pl((th - 1.0L) / (A + 1.0L)) / E;
    const long double one_minus_q = -expm1l(log_q);
    const long double logC1 =
        -th / (1.0L - th) * log_q + logl(1.0L - th) + th / (1.0L - th) * logl(th) +
        (logl((long double)hc.M) + logl(C1t)) / (1.0L - th) +
        logl(6.0L) - logl(one_minus_q);
    const long double C2 = (A + th) * expl(-E * logl(one_minus_q));
    const long double C3 = std::max<long double>(hc.omega, 0.0L) / (1.0L - th);
    long double log_ref = logC1 + C2 / powl((long double)T, E) + C3 * T;
    if (!std::isinf(r)) log_ref -= logl((long double)T) / r;
    double rel = (double)(fabsl(res.log_value - log_ref) /
                          std::max<long double>(1.0L, fabsl(log_ref)));
    worst = std::max(worst, rel);
  }
  std::ostringstream os;
  os << "max relative mismatch " << worst << ", q in (0,1): " << (q_ok ? "yes" : "no");
  return {worst < 1e-12 && q_ok, os.str()};
}

// 8. Lebesgue chains: dyadic full interval and a 30% three-interval set.
Outcome criterion_lebesgue_chain() {
  IntervalSet full({{0.0, 1.0}});
  LebesgueChain c1 = lebesgue_chain(full, 0.5, 0.0, 12);
  bool exact = c1.complete;
  for (int m = 0; m < 12 && exact; ++m)
    exact = c1.points[m] == std::pow(0.5, m);
  bool density1 = true;
  for (double d : c1.density_ratios) density1 = density1 && d >= 1.0 / 3.0;

  IntervalSet three({{0.0, 0.1}, {0.3, 0.4}, {0.8, 0.9}});
  LebesgueChain c3 = lebesgue_chain(three, 0.5, 0.0, 10);
  bool density3 = c3.complete && c3.achieved_depth == 10;
  for (double d : c3.density_ratios) density3 = density3 && d >= 1.0 / 3.0 - 1e-12;

  std::ostringstream os;
  os << "dyadic chain exact: " << (exact ? "yes" : "no")
     << ", three-interval depth " << c3.achieved_depth;
  return {exact && density1 && density3, os.str()};
}

// 9. Final-state observability experiment on the heat preset.
Outcome criterion_observability(std::string* csv_path_out) {
  auto t0 = std::chrono::steady_clock::now();
  Config c = Config::from_preset("heat");
  std::string out = (std::filesystem::temp_directory_path() / "obslab_acc9").string();
  std::filesystem::create_directories(out);
  nlohmann::json patch;
  patch["out"] = out;
  patch["seed"] = 90210;
  c.merge_overrides(patch);
  RunRecord rec = run_observe(c);
  double elapsed = seconds_since(t0);
  if (csv_path_out) *csv_path_out = out + "/observe_ratios.csv";
  std::ostringstream os;
  os << "sup ratio " << rec.outputs.at("sup_ratio").get<double>()
     << ", log bound " << rec.outputs.at("log_bound").get<double>() << ", "
     << elapsed << " s";
  return {rec.pass && elapsed < 300.0, os.str()};
}

// 10. Thickness converse on the marching-bump corpus.
Outcome criterion_falsify() {
  Config c = Config::from_preset("falsify-left");
  std::string out = (std::filesystem::temp_directory_path() / "obslab_acc10").string();
  std::filesystem::create_directories(out);
  nlohmann::json patch;
  patch["out"] = out;
  c.merge_overrides(patch);
  RunRecord rec = run_falsify(c);
  std::ostringstream os;
  os << "growth factor " << rec.outputs.at("growth_factor").get<double>()
     << ", leakage " << rec.outputs.at("max_boundary_leakage").get<double>();
  return {rec.pass, os.str()};
}

// 11. OU identities: Liouville, transition cocycle, Kolmogorov form.
Outcome criterion_ou_identities() {
  Rng rng(11);
  double worst_liou = 0.0, worst_coc = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    int d = 2 + static_cast<int>(rng.next_u64() % 3);
    Eigen::MatrixXd B(d, d), A(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        B(i, j) = 0.8 * rng.normal();
        A(i, j) = rng.normal();
      }
    OUSystem sys;
    sys.dim = d;
    sys.A = MatrixTrack::constant(A);
    sys.B = MatrixTrack::constant(B);
    sys.horizon = 1.0;
    double a = rng.uniform(0.0, 1.0), b = rng.uniform(0.0, 1.0),
           cc = rng.uniform(0.0, 1.0);
    worst_liou = std::max(worst_liou, liouville_check(sys, std::min(a, b), std::max(a, b)));
    Eigen::MatrixXd lhs = solve_transition(sys, b, cc) * solve_transition(sys, a, b);
    Eigen::MatrixXd rhs = solve_transition(sys, a, cc);
    worst_coc = std::max(worst_coc, (lhs - rhs).norm() / std::max(1.0, rhs.norm()));
  }

  OUSystem kol = kolmogorov_system(1, 1.0);
  double worst_q = 0.0;
  for (int i = 0; i < 50; ++i) {
    double s = rng.uniform(0.0, 0.6), t = s + rng.uniform(0.01, 0.4);
    double gap = t - s;
    Eigen::VectorXd z(2);
    z << rng.normal(), rng.normal();
    double expect = 2.0 * gap * z(1) * z(1) + 2.0 * gap * gap * z(1) * z(0) +
                    (2.0 / 3.0) * gap * gap * gap * z(0) * z(0);
    worst_q = std::max(worst_q, std::abs(quad_form(kol, s, t, z) - expect));
  }
  std::ostringstream os;
  os << "liouville " << worst_liou << ", cocycle " << worst_coc << ", q mismatch "
     << worst_q;
  return {worst_liou < 1e-9 && worst_coc < 1e-10 && worst_q < 1e-10, os.str()};
}

// 12. Generalized Kalman rank condition.
Outcome criterion_kalman() {
  OUSystem kol = kolmogorov_system(1, 1.0);
  KalmanResult rk = kalman_generalized(kol, 1.0, 3);
  OUSystem kol2 = kolmogorov_system(2, 1.0);
  KalmanResult rk2 = kalman_generalized(kol2, 1.0, 3);

  OUSystem off;
  off.dim = 2;
  off.A = MatrixTrack::constant(Eigen::MatrixXd::Zero(2, 2));
  off.B = MatrixTrack::constant(Eigen::MatrixXd::Identity(2, 2));
  off.horizon = 1.0;
  KalmanResult rz = kalman_generalized(off, 1.0, 3);

  OUSystem idsys;
  idsys.dim = 3;
  idsys.A = MatrixTrack::constant(Eigen::MatrixXd::Identity(3, 3));
  idsys.B = MatrixTrack::constant(Eigen::MatrixXd::Zero(3, 3));
  idsys.horizon = 1.0;
  KalmanResult ri = kalman_generalized(idsys, 1.0, 3);

  bool ok = rk.full_rank && rk.k_used <= 1 && rk.rank == 2 && rk2.full_rank &&
            rk2.k_used <= 1 && rk2.rank == 4 && !rz.full_rank && rz.rank == 0 &&
            ri.full_rank && ri.k_used == 0 && ri.rank == 3;
  std::ostringstream os;
  os << "kolmogorov rank " << rk.rank << " at k=" << rk.k_used << ", A=0 rank "
     << rz.rank << ", identity rank " << ri.rank << " at k=" << ri.k_used;
  return {ok, os.str()};
}

// 13. Damped-dilation operator bound and the Kolmogorov norm sweep.
Outcome criterion_norm_bounds() {
  GridSpec g(1, 32.0, 256);
  Rng rng(13);
  int violations = 0;
  const int trials = 1000;
  for (int i = 0; i < trials; ++i) {
    double lam = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 1.6);
    Eigen::MatrixXd Lambda(1, 1), Q(1, 1);
    Lambda << lam;
    Q << rng.uniform(0.05, 2.0);
    double width = g.half_length / 12.0 * rng.uniform(1.0, 1.3);
    Field f = gaussian_packet_field(g, {rng.uniform(-8.0, 8.0), 0.0, 0.0}, width,
                                    {rng.uniform(-2.0, 2.0), 0.0, 0.0});
    double p_choices[4] = {1.0, 1.25, 2.0, 4.0};
    double p = p_choices[rng.next_u64() % 4];
    double bound = std::pow(std::abs(lam), -(1.0 - 1.0 / p));
    double nf = field_norm(f, p);
    if (nf == 0.0) continue;
    double ratio = field_norm(aq_lambda_apply(Q, Lambda, f), p) / nf;
    if (ratio > bound * (1 + 1e-10)) ++violations;
  }

  OUSystem kol = kolmogorov_system(1, 0.5);
  GridSpec g2(2, 32.0, 256);
  bool sweep_ok = true;
  double worst = 0.0;
  for (double p : {1.25, 2.0, 4.0}) {
    NormBoundReport rep = norm_bound_check(kol, 0.0, 0.5, p, 30, 113, g2, 3.0);
    sweep_ok = sweep_ok && rep.pass && rep.max_ratio <= 1.0 + 1e-10;
    worst = std::max(worst, rep.max_ratio);
  }
  std::ostringstream os;
  os << violations << "/" << trials << " lemma violations, kolmogorov sweep max "
     << worst;
  return {violations == 0 && sweep_ok, os.str()};
}

// 14. OU observability consistency across grid refinements.
Outcome criterion_ou_observability() {
  OUSystem kol = kolmogorov_system(1, 0.5);
  const double T = 0.5;
  std::vector<int> sizes{64, 128, 256};
  std::vector<double> sups;
  // grid-independent candidates: drawn on the coarsest lattice, spectra
  // embedded into the finer ones
  GridSpec coarse(2, 8.0, sizes.front());
  auto candidates = make_candidates(coarse, 40, 3.0, 1414);
  for (int n : sizes) {
    GridSpec g(2, 8.0, n);
    SetFamily fam = periodic_halves_family(g, 1.0, T);
    std::vector<Field> cands;
    for (const auto& cand : candidates) {
      Spectrum cs = forward_transform(cand);
      Spectrum embedded(g);
      std::array<int, 3> j{};
      for (std::size_t i = 0; i < cs.values.size(); ++i) {
        coarse.decode(i, j);
        std::array<int, 3> jf{0, 0, 0};
        for (int a = 0; a < 2; ++a) {
          int sk = coarse.signed_index(j[a]);
          jf[a] = sk >= 0 ? sk : g.points + sk;
        }
        embedded.values[g.encode(jf)] = cs.values[i];
      }
      cands.push_back(inverse_transform(embedded));
    }
    PropagatorFn U = [&kol](double t, const Field& u0) {
      return ou_propagate(kol, 0.0, t, u0);
    };
    IntervalSet E({{0.0, T}});
    ObservabilityReport rep =
        empirical_ratio(U, fam, E, T, 2.0, 2.0, cands, std::nullopt, 8, 1);
    if (rep.sup_infinite) return {false, "observation vanished"};
    sups.push_back(rep.sup_ratio);
  }
  double lo = *std::min_element(sups.begin(), sups.end());
  double hi = *std::max_element(sups.begin(), sups.end());
  std::ostringstream os;
  os << "sup ratios";
  for (double s : sups) os << " " << s;
  os << " (growth " << hi / lo << "x); consistency evidence only, the OU "
     << "constant is non-explicit";
  return {std::isfinite(hi) && hi / lo < 2.0, os.str()};
}

// 15. Determinism: identical seeds give byte-identical ratio tables.
Outcome criterion_determinism(const std::string& first_csv) {
  Config c = Config::from_preset("heat");
  std::string out = (std::filesystem::temp_directory_path() / "obslab_acc15").string();
  std::filesystem::create_directories(out);
  nlohmann::json patch;
  patch["out"] = out;
  patch["seed"] = 90210;
  c.merge_overrides(patch);
  run_observe(c);
  auto slurp = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  std::string a = slurp(first_csv);
  std::string b = slurp(out + "/observe_ratios.csv");
  std::ostringstream os;
  os << a.size() << " bytes vs " << b.size() << " bytes, "
     << (a == b ? "identical" : "DIFFER");
  return {!a.empty() && a == b, os.str()};
}

}  // namespace

int main() {
  int failures = 0;
  std::string csv9;
  struct Entry {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  std::vector<Entry> entries = {
      {1, "cocycle-exactness", criterion_cocycle},
      {2, "heat-kernel-oracle", criterion_heat_kernel},
      {3, "gaussian-kernel-bound", criterion_gaussian_bound},
      {4, "dissipation-exponents", criterion_dissipation},
      {5, "projector-algebra", criterion_projectors},
      {6, "interpolation-lemma", criterion_interpolation_lemma},
      {7, "explicit-constants", criterion_explicit_constants},
      {8, "lebesgue-chain", criterion_lebesgue_chain},
      {9, "final-state-observability", [&] { return criterion_observability(&csv9); }},
      {10, "thickness-converse", criterion_falsify},
      {11, "ou-identities", criterion_ou_identities},
      {12, "kalman-rank", criterion_kalman},
      {13, "norm-bounds", criterion_norm_bounds},
      {14, "ou-observability-consistency", criterion_ou_observability},
      {15, "determinism", [&] { return criterion_determinism(csv9); }},
  };
  for (auto& e : entries) {
    Outcome o;
    try {
      o = e.run();
    } catch (const std::exception& ex) {
      o.pass = false;
      o.detail = std::string("exception: ") + ex.what();
    }
    std::printf("criterion %02d %-32s %s  (%s)\n", e.id, e.name,
                o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures;
}
