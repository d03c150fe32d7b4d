#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "omneg/entangle.hpp"
#include "omneg/errors.hpp"
#include "omneg/oracle.hpp"
#include "random_spectra.hpp"

using namespace omneg;
using nlohmann::json;

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

struct Outcome {
  bool pass = true;
  std::string detail;
  // Set when the failure is a documented property of the model rather than a defect.
  bool known_limitation = false;
};

// Tracks the count of PT symplectic eigenvalues below one over every pipeline run.
struct EigenCensus {
  int runs = 0;
  int worst = 0;
  NegativityResult record(NegativityResult r) {
    ++runs;
    worst = std::max(worst, r.below_one);
    return r;
  }
} census;

NegativityResult negativity(const OscillatorParams& p, const NoiseModel& m, const SqueezeTransform& sq,
                            const ModeGrid& g, Partition part = Partition::output_only) {
  return census.record(discretized_negativity(p, m, sq, g, part));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x, int digits = 6) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

OscillatorParams oscillator(const json& c, double omega_q_hz, double eta = 1.0) {
  return {kTwoPi * c.at("omega_m_hz").get<double>(), kTwoPi * c.at("gamma_m_hz").get<double>(), kTwoPi * omega_q_hz,
          eta};
}

ModeGrid grid(const json& c) { return {c.at("n_modes").get<int>(), c.at("dt").get<double>()}; }

// Closed form against the quoted ratios, rounded to three decimals.
Outcome closed_form(const json& c) {
  Outcome o;
  const double of = kTwoPi * c.at("omega_f_hz").get<double>();
  double slowest = 0.0;
  for (const auto& k : c.at("cases")) {
    const auto p = oscillator(c, k.at("omega_q_hz"), k.at("eta"));
    const auto t0 = std::chrono::steady_clock::now();
    const double ratio = closed_form_white_threshold({of, of}, p).omega_s / of;
    slowest = std::max(slowest, seconds_since(t0));
    const double want = k.at("ratio");
    const bool ok = std::round(1000.0 * ratio) == std::round(1000.0 * want);
    o.pass = o.pass && ok;
    o.detail += fmt(ratio, 5) + (ok ? " " : "(want " + fmt(want) + ") ");
  }
  o.pass = o.pass && slowest < c.at("max_seconds").get<double>();
  o.detail += "slowest " + fmt(slowest * 1e6, 3) + " us";
  return o;
}

Outcome indicator_threshold(const json& c, const json& base) {
  Outcome o;
  const double of = kTwoPi * base.at("omega_f_hz").get<double>();
  double slowest = 0.0;
  for (const auto& k : base.at("cases")) {
    const auto p = oscillator(base, k.at("omega_q_hz"), k.at("eta"));
    const auto family = [&](double os) { return white_noise_model({of, os}, p); };
    const auto t0 = std::chrono::steady_clock::now();
    const auto t = find_threshold(indicator_metric(p, family), 0.5 * of, 2.0 * of, c.at("rel_tol"));
    slowest = std::max(slowest, seconds_since(t0));
    const double closed = closed_form_white_threshold({of, of}, p).omega_s;
    const double dev = std::abs(t.scale / closed - 1.0);
    o.pass = o.pass && dev < c.at("tolerance").get<double>();
    o.detail += fmt(t.scale / of, 5) + " ";
  }
  o.pass = o.pass && slowest < c.at("max_seconds").get<double>();
  o.detail += "slowest " + fmt(slowest, 3) + " s";
  return o;
}

Outcome universality(const json& c, std::mt19937_64& rng) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::uniform_real_distribution<double> damping(0.01, 0.2);
  double worst = 0.0;
  int failures = 0;
  for (int k = 0; k < c.at("configs").get<int>(); ++k) {
    const OscillatorParams base{kTwoPi, kTwoPi * damping(rng), 0.0, 1.0};
    const NoiseModel m = omneg::testing::random_physical_noise(rng, base);
    try {
      std::vector<double> dets;
      for (double q : c.at("omega_q_hz")) {
        OscillatorParams p = base;
        p.omega_q = kTwoPi * q;
        dets.push_back(indicator(p, m).det_value);
      }
      for (double d : dets) worst = std::max(worst, std::abs(d / dets.front() - 1.0));
    } catch (const NumericalError& e) {
      ++failures;
      o.detail += std::string("[") + e.what() + "] ";
    }
  }
  const double elapsed = seconds_since(t0);
  o.pass = failures == 0 && worst < c.at("tolerance").get<double>() && elapsed < c.at("max_seconds").get<double>();
  o.detail += "worst relative spread " + fmt(worst, 3) + ", " + fmt(elapsed, 3) + " s";
  return o;
}

Outcome discretized(const json& c) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const double of = kTwoPi * c.at("omega_f_hz").get<double>();
  const ModeGrid g = grid(c);
  std::vector<double> neg, ind;
  for (double q : c.at("omega_q_hz")) {
    const auto p = oscillator(c, q);
    const auto family = [&](double os) { return white_noise_model({of, os}, p); };
    const double ti = find_threshold(indicator_metric(p, family), 0.25 * of, 4.0 * of, 1e-6).scale;
    const auto metric = [&](double os) {
      return negativity(p, family(os), SqueezeTransform::none(), g).min_sympl_eig - (1.0 - kEntangledTolerance);
    };
    neg.push_back(find_threshold(metric, 0.5 * ti, 2.0 * ti, c.at("rel_tol")).scale);
    ind.push_back(ti);
  }
  const double spread = std::abs(neg[1] / neg[0] - 1.0);
  double vs_indicator = 0.0;
  for (size_t k = 0; k < neg.size(); ++k) vs_indicator = std::max(vs_indicator, std::abs(neg[k] / ind[k] - 1.0));
  const double elapsed = seconds_since(t0);
  o.pass = spread < c.at("universality_tolerance").get<double>() &&
           vs_indicator < c.at("indicator_tolerance").get<double>() && elapsed < c.at("max_seconds").get<double>();
  o.detail = "negativity thresholds " + fmt(neg[0] / kTwoPi) + ", " + fmt(neg[1] / kTwoPi) + " Hz; indicator " +
             fmt(ind[0] / kTwoPi) + " Hz; spread " + fmt(spread, 3) + ", vs indicator " + fmt(vs_indicator, 3) +
             "; " + fmt(elapsed, 3) + " s";
  return o;
}

Outcome no_sensing(const json& c, std::mt19937_64& rng) {
  Outcome o;
  const auto p = oscillator(c, c.at("omega_q_hz"));
  const double beta = c.at("sensing_scale");
  std::uniform_real_distribution<double> margin(0.01, 2.0);
  int entangled = 0, cases = c.at("cases");
  std::string errors;
  for (int k = 0; k < cases; ++k) {
    NoiseModel m;
    m.force = omneg::testing::random_force_spectrum(rng, p, kTwoPi * c.at("cutoff_hz").get<double>(), margin(rng));
    m.sensing = RationalSpectrum::white(1.0);
    m.sensing_scale = beta;
    try {
      entangled += indicator(p, m).entangled;
    } catch (const NumericalError& e) {
      errors = e.what();
    }
  }
  o.detail = std::to_string(entangled) + "/" + std::to_string(cases) + " random spectra entangled";
  if (!errors.empty()) o.detail += " [" + errors + "]";
  const bool random_ok = entangled == cases;

  // Zero crossing of the indicator along scale * (FDT-saturating white force).
  const RationalSpectrum fdt = fdt_white_limit(1.0, p);
  const auto metric = [&](double s) {
    NoiseModel m;
    m.force = fdt.scaled(s);
    m.sensing = RationalSpectrum::white(1.0);
    m.sensing_scale = beta;
    return indicator(p, m).det_value;
  };
  bool fdt_ok = false;
  try {
    const double crossing = find_threshold(metric, 0.1, 10.0, 1e-6).scale;
    fdt_ok = std::abs(crossing - 1.0) < c.at("fdt_tolerance").get<double>();
    o.detail += "; FDT crossing at scale " + fmt(crossing);
  } catch (const NumericalError& e) {
    o.detail += std::string("; FDT crossing undefined: ") + e.what();
  }
  // Crossing predicted by the minus-factor condition alone.
  const double unit = no_sensing_criterion(p, spectral_factorize(fdt.as_rational())).minus_factor_sq;
  o.detail += "; minus-factor condition crosses at scale " + fmt(p.gamma_m / unit);
  o.pass = random_ok && fdt_ok;
  o.known_limitation = random_ok && !fdt_ok;
  return o;
}

Outcome monotonicity(const json& c, std::mt19937_64& rng) {
  Outcome o;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const ModeGrid g = grid(c);
  const int points = c.at("ramp_points");
  const double decades = c.at("ramp_decades"), slack = c.at("slack");
  int violations = 0;
  double worst = 0.0;
  for (int k = 0; k < c.at("configs").get<int>(); ++k) {
    const OscillatorParams p{kTwoPi, kTwoPi * (0.3 + 0.2 * u(rng)), kTwoPi * (2.0 + 4.0 * u(rng)), 1.0};
    NoiseModel m = white_noise_model({kTwoPi * (1.0 + 2.0 * u(rng)), kTwoPi * (1.0 + 3.0 * u(rng))}, p);
    double prev = 0.0;
    for (int j = 0; j < points; ++j) {
      m.sensing_scale = std::pow(10.0, decades * (double(j) / (points - 1) - 0.5));
      const double now = negativity(p, m, SqueezeTransform::none(), g).min_sympl_eig;
      if (j > 0 && now < prev - slack) {
        ++violations;
        worst = std::max(worst, prev - now);
      }
      prev = now;
    }
  }
  o.pass = violations == 0;
  o.detail = std::to_string(violations) + " violations" + (violations ? ", largest drop " + fmt(worst, 3) : "");
  return o;
}

SqueezeTransform random_fd_squeezer(std::mt19937_64& rng, double omega_m) {
  std::uniform_real_distribution<double> r(0.3, 1.5), lg(-1.0, 1.0), det(-5.0, 5.0), angle(0.0, M_PI), coin(0.0, 1.0);
  const SqueezeTransform cavity = fd_squeeze_transform(r(rng), omega_m * std::pow(10.0, lg(rng)), omega_m * det(rng));
  return coin(rng) < 0.5 ? cavity : cavity.then(SqueezeTransform::rotation(angle(rng)));
}

// Same horizon, step refined until the fastest kernel rate is resolved.
ModeGrid resolving(const ModeGrid& g, const OscillatorParams& p, const NoiseModel& m, const SqueezeTransform& sq) {
  const double dt = std::min(g.dt, M_PI / (CovarianceOptions{}.nyquist_factor * build_transfer_table(p, m, sq).fastest_rate()));
  return {static_cast<int>(std::ceil(g.horizon() / dt)), dt};
}

Outcome fd_squeezing(const json& c, std::mt19937_64& rng) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const ModeGrid base = grid(c);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto draw = [&](double lo, double hi) {
    const OscillatorParams p{kTwoPi, kTwoPi * (0.3 + 0.2 * u(rng)), kTwoPi * (2.0 + 4.0 * u(rng)), 1.0};
    const double of = kTwoPi * (2.0 + 2.0 * u(rng));
    return std::pair{p, white_noise_model({of, of * (lo + (hi - lo) * u(rng))}, p)};
  };

  int tested = 0, created = 0, drawn = 0;
  while (tested < c.at("separable_configs").get<int>() && drawn < 100) {
    ++drawn;
    const auto [p, m] = draw(0.3, 0.8);
    if (negativity(p, m, SqueezeTransform::none(), base).entangled()) continue;
    ++tested;
    for (int s = 0; s < c.at("squeezers").get<int>(); ++s) {
      const SqueezeTransform sq = random_fd_squeezer(rng, p.omega_m);
      created += negativity(p, m, sq, resolving(base, p, m, sq)).entangled();
    }
  }

  int ordered = 0, lost = 0;
  drawn = 0;
  while (ordered + lost < c.at("entangled_configs").get<int>() && drawn < 100) {
    ++drawn;
    const auto [p, m] = draw(1.5, 4.0);
    const SqueezeTransform sq = random_fd_squeezer(rng, p.omega_m);
    const ModeGrid g = resolving(base, p, m, sq);
    if (!negativity(p, m, sq, g).entangled()) continue;
    OscillatorParams doubled = p;
    doubled.omega_q *= 2.0;
    (negativity(doubled, m, sq, resolving(base, doubled, m, sq)).entangled() ? ordered : lost)++;
  }
  const double elapsed = seconds_since(t0);
  o.pass = tested == c.at("separable_configs").get<int>() && created == 0 &&
           ordered == c.at("entangled_configs").get<int>() && elapsed < c.at("max_seconds").get<double>();
  o.detail = std::to_string(created) + " of " + std::to_string(tested * c.at("squeezers").get<int>()) +
             " squeezed runs entangled from separable; " + std::to_string(ordered) + "/" +
             std::to_string(ordered + lost) + " stay entangled at doubled coupling; " + fmt(elapsed, 3) + " s";
  return o;
}

Outcome joint(const json& c, const json& base) {
  Outcome o;
  const double of = kTwoPi * base.at("omega_f_hz").get<double>();
  const ModeGrid g = grid(c);
  const double r = c.at("r");
  std::vector<double> thresholds;
  int below = 0, points = 0;
  for (double q : base.at("omega_q_hz")) {
    const auto p = oscillator(base, q);
    const FilterCavity fc = filter_cavity_params(p);
    const SqueezeTransform sq = fd_squeeze_transform(r, fc.gamma_c, fc.delta_c);
    const auto metric = [&](double os) {
      return negativity(p, white_noise_model({of, os}, p), sq, g, Partition::joint).min_sympl_eig -
             (1.0 - kEntangledTolerance);
    };
    thresholds.push_back(find_threshold(metric, 0.5 * of, 2.0 * of, c.at("rel_tol")).scale);
    for (double os_hz : c.at("sweep_omega_s_hz")) {
      const NoiseModel m = white_noise_model({of, kTwoPi * os_hz}, p);
      const double en_joint = negativity(p, m, sq, g, Partition::joint).log_neg;
      const double en_out = negativity(p, m, sq, g, Partition::output_only).log_neg;
      ++points;
      below += en_joint < en_out - 1e-9;
    }
  }
  const double spread = std::abs(thresholds[1] / thresholds[0] - 1.0);
  o.pass = spread < c.at("tolerance").get<double>() && below == 0;
  o.detail = "joint thresholds " + fmt(thresholds[0] / of, 5) + ", " + fmt(thresholds[1] / of, 5) +
             " x Omega_F (spread " + fmt(spread, 3) + "); joint below output-only at " + std::to_string(below) + "/" +
             std::to_string(points) + " points";
  return o;
}

Outcome oracle(const json& c, std::uint64_t seed) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto p = oscillator(c, c.at("omega_q_hz"));
  const NoiseModel m = white_noise_model(
      {kTwoPi * c.at("omega_f_hz").get<double>(), kTwoPi * c.at("omega_s_hz").get<double>()}, p);
  const ModeGrid g = grid(c);
  SimConfig sim;
  sim.dt_sim = g.dt / c.at("steps_per_mode").get<double>();
  sim.burn_in = 10.0 / p.gamma_m;
  sim.n_trajectories = c.at("trajectories");
  sim.seed = seed;
  sim.threads = std::max(1u, std::thread::hardware_concurrency());
  const auto sampled = simulate_covariance(p, m, sim, g, c.at("groups"));
  const auto cmp = compare_to_analytic(sampled, build_covariance(build_transfer_table(p, m), g));
  const double elapsed = seconds_since(t0);
  o.pass = cmp.max_abs_z < c.at("max_abs_z").get<double>() && elapsed < c.at("max_seconds").get<double>();
  o.detail = std::to_string(cmp.entries) + " entries, max |z| " + fmt(cmp.max_abs_z, 4) + ", KS p " +
             fmt(cmp.ks_pvalue, 3) + ", " + fmt(elapsed, 3) + " s";
  return o;
}

Outcome wiener_hopf(const json& c, std::mt19937_64& rng) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto grid_pts = omneg::testing::real_grid(1000);
  double recon = 0.0, proj = 0.0, trip = 0.0;
  int failures = 0;
  for (int k = 0; k < c.at("cases").get<int>(); ++k) {
    try {
      const Rational s = omneg::testing::random_spectrum(rng);
      const auto f = spectral_factorize(s);
      recon = std::max(recon, reconstruction_error(f, s, grid_pts));

      const Rational mixed = omneg::testing::random_mixed(rng, 4);
      const Rational plus = causal_project(mixed), minus = anticausal_project(mixed);
      const Rational again = causal_project(plus), none = anticausal_project(plus);
      const Rational h = omneg::testing::random_causal(rng, 3);
      const Rational back = wiener_hopf_solve(f, s * h);
      for (double w : {-7.0, -1.3, -0.2, 0.0, 0.4, 2.2, 9.0}) {
        proj = std::max({proj, std::abs(plus(w) + minus(w) - mixed(w)), std::abs(again(w) - plus(w)),
                         std::abs(none(w))});
        trip = std::max(trip, std::abs(back(w) - h(w)) / std::max(1.0, std::abs(h(w))));
      }
    } catch (const NumericalError& e) {
      ++failures;
    }
  }
  const double elapsed = seconds_since(t0);
  o.pass = failures == 0 && recon < c.at("reconstruction").get<double>() && proj < c.at("projection").get<double>() &&
           trip < c.at("round_trip").get<double>() && elapsed < c.at("max_seconds").get<double>();
  o.detail = "reconstruction " + fmt(recon, 3) + ", projection " + fmt(proj, 3) + ", round trip " + fmt(trip, 3) +
             (failures ? ", " + std::to_string(failures) + " failures" : "") + ", " + fmt(elapsed, 3) + " s";
  return o;
}

Outcome gaussian(const json& c) {
  Outcome o;
  const double tol = c.at("tolerance");
  double worst = 0.0;
  for (double r : c.at("tmsv_r")) {
    const double ch = std::cosh(2.0 * r), sh = std::sinh(2.0 * r);
    Eigen::MatrixXd v(4, 4);
    v << ch, 0, sh, 0, 0, ch, 0, -sh, sh, 0, ch, 0, 0, -sh, 0, ch;
    const auto neg = census.record(log_negativity(GaussianState::from_covariance(v, {ModeRole::oscillator, ModeRole::output})));
    // Brute force: moduli of the eigenvalues of i K V with the first momentum flipped.
    Eigen::MatrixXd flip = Eigen::MatrixXd::Identity(4, 4);
    flip(1, 1) = -1.0;
    const Eigen::MatrixXcd m =
        cplx(0.0, 1.0) * GaussianState::standard_commutator(2).cast<cplx>() * (flip * v * flip).cast<cplx>();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m);
    double smallest = 1e300;
    for (int k = 0; k < 4; ++k) smallest = std::min(smallest, std::abs(es.eigenvalues()(k)));
    const double brute = std::max(0.0, -std::log(smallest));
    worst = std::max({worst, std::abs(neg.log_neg - 2.0 * r), std::abs(brute - 2.0 * r)});
  }
  const auto vac = GaussianState::from_covariance(Eigen::MatrixXd::Identity(6, 6),
                                                  {ModeRole::oscillator, ModeRole::output, ModeRole::output});
  const double vac_en = census.record(log_negativity(vac)).log_neg;
  o.pass = worst < tol && vac_en == 0.0 && census.worst <= 1;
  o.detail = "TMSV error " + fmt(worst, 3) + ", vacuum E_N " + fmt(vac_en) + ", at most " +
             std::to_string(census.worst) + " PT eigenvalue below one over " + std::to_string(census.runs) + " runs";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : OMNEG_PRESET_DIR "/acceptance.json";
  std::ifstream in(path);
  if (!in) {
    std::cerr << "cannot open " << path << "\n";
    return 2;
  }
  const json cfg = json::parse(in);
  const std::uint64_t seed = cfg.at("seed");

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const auto stream = [seed](int id) {
    std::seed_seq seq{seed, static_cast<std::uint64_t>(id)};
    return std::mt19937_64(seq);
  };
  const std::vector<Criterion> criteria{
      {1, "closed-form white-noise threshold", [&] { return closed_form(cfg.at("closed_form")); }},
      {2, "indicator threshold vs closed form",
       [&] { return indicator_threshold(cfg.at("indicator_threshold"), cfg.at("closed_form")); }},
      {3, "indicator universality in the coupling", [&] {
         auto rng = stream(3);
         return universality(cfg.at("universality"), rng);
       }},
      {4, "discretized threshold cross-validation", [&] { return discretized(cfg.at("discretized")); }},
      {5, "force-noise-only criterion", [&] {
         auto rng = stream(5);
         return no_sensing(cfg.at("no_sensing"), rng);
       }},
      {6, "monotonicity in sensing noise", [&] {
         auto rng = stream(6);
         return monotonicity(cfg.at("monotonicity"), rng);
       }},
      {7, "frequency-dependent squeezing theorems", [&] {
         auto rng = stream(7);
         return fd_squeezing(cfg.at("fd_squeezing"), rng);
       }},
      {8, "joint-field universality", [&] { return joint(cfg.at("joint"), cfg.at("discretized")); }},
      {9, "Monte Carlo oracle agreement", [&] { return oracle(cfg.at("oracle"), seed); }},
      {10, "Wiener-Hopf property suite", [&] {
         auto rng = stream(10);
         return wiener_hopf(cfg.at("wiener_hopf"), rng);
       }},
      {11, "Gaussian-information unit suite", [&] { return gaussian(cfg.at("gaussian")); }},
  };

  int unexpected = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double elapsed = seconds_since(t0);
    std::cout << "criterion " << c.id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << c.name << "  (" << o.detail
              << ")  [" << fmt(elapsed, 3) << " s]";
    if (!o.pass && o.known_limitation) std::cout << "  known limitation, see README";
    std::cout << std::endl;
    unexpected += !o.pass && !o.known_limitation;
  }
  return unexpected == 0 ? 0 : 1;
}
