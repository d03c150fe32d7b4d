#include "omneg/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include "omneg/errors.hpp"

namespace omneg {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Causal filter driven by white noise, realized as a sum of first-order modes.
class NoiseSynth {
 public:
  NoiseSynth() = default;
  NoiseSynth(const SpectralFactors& f, double h) : h_(h) {
    const auto pf = f.plus().partial_fractions();
    if (pf.polynomial.degree() > 0) throw NumericalError("noise filter grows at high frequency");
    direct_ = pf.polynomial.coeff(0).real();
    for (const auto& t : pf.terms) {
      if (t.power != 1) throw NumericalError("noise filter with repeated poles is not supported");
      if (!(t.pole.imag() < 0.0)) throw NumericalError("unstable noise filter realization");
      const cplx a = cplx(0.0, -1.0) * t.pole * h;
      modes_.push_back({std::exp(a), (std::exp(a) - 1.0) / a, cplx(0.0, -1.0) * t.coeff});
    }
    x_.assign(modes_.size(), cplx{});
  }
  static NoiseSynth from_spectrum(const RationalSpectrum& s, double h) {
    NoiseSynth n;
    n.h_ = h;
    if (s.is_zero()) return n;
    if (s.is_white()) {
      n.direct_ = std::sqrt(s(0.0));
      return n;
    }
    return NoiseSynth(spectral_factorize(s.as_rational()), h);
  }
  double fastest_rate() const {
    double r = 0.0;
    for (const auto& m : modes_) r = std::max(r, std::abs(std::log(m.decay)) / h_);
    return r;
  }
  bool silent() const { return direct_ == 0.0 && modes_.empty(); }
  // Advances by one step with white increment dw; returns the integral of the output.
  double step(double dw) {
    if (modes_.empty()) return direct_ * dw;
    const double before = smooth();
    for (size_t j = 0; j < modes_.size(); ++j) x_[j] = modes_[j].decay * x_[j] + modes_[j].gain * dw;
    last_ = smooth();
    return direct_ * dw + 0.5 * h_ * (before + last_);
  }
  // Point value of the output after the last step.
  double value(double dw) const { return direct_ * dw / h_ + last_; }

 private:
  struct Mode {
    cplx decay;
    cplx gain;
    cplx weight;
  };
  double smooth() const {
    cplx acc{};
    for (size_t j = 0; j < modes_.size(); ++j) acc += modes_[j].weight * x_[j];
    return acc.real();
  }
  double h_ = 1.0;
  double direct_ = 0.0;
  double last_ = 0.0;
  std::vector<Mode> modes_;
  std::vector<cplx> x_;
};

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ULL))) {}

std::uint64_t CounterRng::next_u64() { return splitmix64(key_ + 0x9E3779B97F4A7C15ULL * ++counter_); }

double CounterRng::uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

double CounterRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  const double a = 2.0 * std::numbers::pi * uniform();
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

std::vector<double> colored_noise_stream(const SpectralFactors& factors, const SimConfig& cfg,
                                         std::uint64_t stream) {
  const double h = cfg.dt_sim;
  NoiseSynth synth(factors, h);
  if (synth.fastest_rate() * h > 0.5) {
    std::ostringstream msg;
    msg << "step too large for noise rate " << synth.fastest_rate();
    throw ConfigError(msg.str());
  }
  CounterRng rng(cfg.seed, stream);
  const double sh = std::sqrt(h);
  const auto burn = static_cast<long>(std::ceil(cfg.burn_in / h));
  const auto count = static_cast<long>(std::ceil(cfg.duration / h));
  std::vector<double> out;
  out.reserve(static_cast<size_t>(count));
  for (long k = 0; k < burn + count; ++k) {
    const double dw = sh * rng.normal();
    synth.step(dw);
    if (k >= burn) out.push_back(synth.value(dw));
  }
  return out;
}

SpectrumEstimate estimate_spectrum(const std::vector<double>& samples, double dt,
                                   const std::vector<double>& omegas, int segment_length) {
  const int l = segment_length;
  const int segments = static_cast<int>(samples.size()) / l;
  if (segments < 2) throw ConfigError("too few samples for the requested segment length");
  std::vector<double> window(static_cast<size_t>(l));
  double wsum = 0.0;
  for (int n = 0; n < l; ++n) {
    window[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / l);
    wsum += window[n] * window[n];
  }
  SpectrumEstimate est;
  for (double w : omegas) {
    std::vector<double> per;
    for (int s = 0; s < segments; ++s) {
      cplx acc{};
      for (int n = 0; n < l; ++n)
        acc += window[n] * samples[static_cast<size_t>(s) * l + n] * std::polar(1.0, w * n * dt);
      per.push_back(dt * std::norm(acc) / wsum);
    }
    double mean = 0.0;
    for (double x : per) mean += x;
    mean /= segments;
    double var = 0.0;
    for (double x : per) var += (x - mean) * (x - mean);
    var /= (segments - 1);
    est.value.push_back(mean);
    est.std_error.push_back(std::sqrt(var / segments));
  }
  return est;
}

SampledCovariance simulate_covariance(const OscillatorParams& p, const NoiseModel& model,
                                      const SimConfig& cfg, const ModeGrid& grid,
                                      int jackknife_groups) {
  p.validate();
  if (!(p.gamma_m > 0.0)) throw ConfigError("no stationary state: gamma_m must be positive");
  if (cfg.burn_in < 10.0 / p.gamma_m) throw ConfigError("burn-in must be at least 10 / gamma_m");
  if (cfg.n_trajectories < 2 * jackknife_groups)
    throw ConfigError("need at least two trajectories per jackknife group");
  if (cfg.dt_sim > grid.dt / 10.0) throw ConfigError("dt_sim must not exceed a tenth of the mode width");

  const double w = p.omega_m, sw = std::sqrt(w);
  const double couple = p.omega_q / sw;
  const double keep = std::sqrt(p.eta), lose = std::sqrt(1.0 - p.eta);
  const int spm = static_cast<int>(std::ceil(grid.dt / cfg.dt_sim - 1e-9));
  const double h = grid.dt / spm;

  const auto probe_force = NoiseSynth::from_spectrum(model.effective_force(), h);
  const auto probe_sense = NoiseSynth::from_spectrum(model.effective_sensing(), h);
  const double stiff = std::max({w, p.gamma_m, probe_force.fastest_rate(), probe_sense.fastest_rate()});
  if (stiff * h > 0.5) {
    std::ostringstream msg;
    msg << "step " << h << " s is unstable for rate " << stiff << " rad/s";
    throw ConfigError(msg.str());
  }

  const int n = grid.n_modes;
  const int dim = 2 + 2 * n;
  const long burn = static_cast<long>(std::ceil(cfg.burn_in / h));
  const int groups = jackknife_groups;
  const int per_group = cfg.n_trajectories / groups;

  std::vector<Eigen::MatrixXd> group_sum(static_cast<size_t>(groups), Eigen::MatrixXd::Zero(dim, dim));

  auto run_group = [&](int g) {
    Eigen::VectorXd x(dim);
    Eigen::MatrixXd& acc = group_sum[static_cast<size_t>(g)];
    for (int t = g * per_group; t < (g + 1) * per_group; ++t) {
      CounterRng rng(cfg.seed, static_cast<std::uint64_t>(t));
      NoiseSynth force = NoiseSynth::from_spectrum(model.effective_force(), h);
      NoiseSynth sense = NoiseSynth::from_spectrum(model.effective_sensing(), h);
      const double sh = std::sqrt(h);
      double b1 = 0.0, b2 = 0.0;
      x.setZero();
      const long total = burn + static_cast<long>(n) * spm;
      for (long k = 0; k < total; ++k) {
        const double du1 = sh * rng.normal(), du2 = sh * rng.normal();
        const double dwf = sh * rng.normal(), dws = sh * rng.normal();
        const double de1 = sh * rng.normal(), de2 = sh * rng.normal();
        const double kick = couple * du1 + force.step(dwf);
        const double old_b1 = b1;
        b2 = (b2 - w * b1 * h + kick) / (1.0 + p.gamma_m * h);
        b1 += w * b2 * h;
        const double sensed = sense.step(dws);
        if (k < burn) continue;
        // Chronological slot j maps to mode n - 1 - j, counted backwards from t = 0.
        const int slot = static_cast<int>((k - burn) / spm);
        const int mode = n - 1 - slot;
        x(2 + 2 * mode) += keep * du1 + lose * de1;
        x(3 + 2 * mode) += keep * (du2 + couple * (0.5 * (old_b1 + b1) * h + sensed)) + lose * de2;
      }
      x.tail(2 * n) /= std::sqrt(grid.dt);
      x(0) = b1;
      x(1) = b2;
      acc.selfadjointView<Eigen::Lower>().rankUpdate(x);
    }
    acc.triangularView<Eigen::StrictlyUpper>() = acc.transpose();
  };

  const int workers = std::max(1, std::min(cfg.threads, groups));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int g = next++; g < groups; g = next++) run_group(g);
  };
  std::vector<std::thread> pool;
  for (int i = 1; i < workers; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& s : group_sum) total += s;
  const double count = static_cast<double>(groups) * per_group;

  SampledCovariance out;
  out.cov = total / count;
  Eigen::MatrixXd var = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& s : group_sum) {
    const Eigen::MatrixXd loo = (total - s) / (count - per_group);
    var.array() += (loo - out.cov).array().square();
  }
  out.std_error = (var * (groups - 1.0) / groups).array().sqrt();
  out.roles.push_back(ModeRole::oscillator);
  out.roles.insert(out.roles.end(), static_cast<size_t>(n), ModeRole::output);
  out.step = h;
  return out;
}

double kolmogorov_pvalue(double d, int n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-12) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

OracleComparison compare_to_analytic(const SampledCovariance& sampled, const GaussianState& analytic) {
  if (sampled.cov.rows() != analytic.cov.rows())
    throw ConfigError("sampled and analytic covariances differ in size");
  const Eigen::Index dim = sampled.cov.rows();
  OracleComparison out;
  out.z = Eigen::MatrixXd::Zero(dim, dim);
  std::vector<double> zs;
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = i; j < dim; ++j) {
      const double se = sampled.std_error(i, j);
      if (!(se > 0.0)) continue;
      const double z = (sampled.cov(i, j) - analytic.cov(i, j)) / se;
      out.z(i, j) = out.z(j, i) = z;
      out.max_abs_z = std::max(out.max_abs_z, std::abs(z));
      zs.push_back(z);
    }
  out.entries = static_cast<int>(zs.size());
  if (zs.empty()) return out;
  std::sort(zs.begin(), zs.end());
  const double m = static_cast<double>(zs.size());
  for (size_t k = 0; k < zs.size(); ++k) {
    const double cdf = 0.5 * std::erfc(-zs[k] / std::numbers::sqrt2);
    out.ks_statistic = std::max({out.ks_statistic, (k + 1) / m - cdf, cdf - k / m});
  }
  out.ks_pvalue = kolmogorov_pvalue(out.ks_statistic, static_cast<int>(zs.size()));
  return out;
}

}  // namespace omneg
