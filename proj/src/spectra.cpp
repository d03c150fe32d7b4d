#include "omneg/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "omneg/errors.hpp"

namespace omneg {

namespace {

void trim_real(std::vector<double>& v) {
  while (!v.empty() && v.back() == 0.0) v.pop_back();
}

double eval_real(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double characteristic_scale(const std::vector<double>& num, const std::vector<double>& den) {
  double log_sum = 0.0;
  int count = 0;
  for (const auto* c : {&num, &den}) {
    const auto rts = roots(Poly::from_real(*c));
    for (cplx r : rts)
      if (std::abs(r) > 0.0) {
        log_sum += std::log(std::abs(r));
        ++count;
      }
  }
  return count ? std::exp(log_sum / count) : 1.0;
}

}  // namespace

void OscillatorParams::validate() const {
  if (!(omega_m > 0.0)) throw ConfigError("omega_m must be positive");
  if (!(gamma_m >= 0.0)) throw ConfigError("gamma_m must be nonnegative");
  if (!(omega_q >= 0.0)) throw ConfigError("omega_q must be nonnegative");
  if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("eta must lie in (0, 1]");
}

std::vector<Root> OscillatorParams::susceptibility_poles() const {
  const cplx shift = std::sqrt(cplx(omega_m * omega_m - 0.25 * gamma_m * gamma_m, 0.0));
  const cplx centre(0.0, -0.5 * gamma_m);
  if (shift == cplx{}) return {{centre, 2}};
  return {{centre + shift, 1}, {centre - shift, 1}};
}

RationalSpectrum::RationalSpectrum(std::vector<double> num, std::vector<double> den, double scale)
    : num_(std::move(num)), den_(std::move(den)), scale_(scale) {
  trim_real(num_);
  trim_real(den_);
  if (den_.empty()) throw ConfigError("spectrum denominator is zero");
  if (!(scale_ >= 0.0)) throw ConfigError("spectrum scale must be nonnegative");
  if (num_.size() > den_.size()) throw ConfigError("spectrum grows without bound at high frequency");
  for (double c : num_)
    if (!std::isfinite(c)) throw ConfigError("spectrum coefficient is not finite");
  for (double c : den_)
    if (!std::isfinite(c)) throw ConfigError("spectrum coefficient is not finite");

  const auto den_roots = roots(Poly::from_real(den_));
  double rscale = 0.0;
  for (cplx r : den_roots) rscale = std::max(rscale, std::abs(r));
  for (cplx r : den_roots)
    if (std::abs(r.imag()) < 1e-9 * std::max(rscale, 1e-300)) {
      std::ostringstream msg;
      msg << "spectrum denominator has a real root at " << r.real();
      throw ConfigError(msg.str());
    }
  if (is_zero()) return;

  const auto grid = symmetric_log_grid(characteristic_scale(num_, den_), 200, 5.0);
  double vmax = 0.0;
  for (double w : grid) vmax = std::max(vmax, std::abs((*this)(w)));
  for (double w : grid) {
    const double a = (*this)(w), b = (*this)(-w);
    if (std::abs(a - b) > 1e-9 * vmax) {
      std::ostringstream msg;
      msg << "spectrum is not even: S(" << w << ") = " << a << " but S(" << -w << ") = " << b;
      throw ConfigError(msg.str());
    }
    if (a < -1e-12 * vmax) {
      std::ostringstream msg;
      msg << "spectrum is negative at " << w;
      throw ConfigError(msg.str());
    }
  }
}

RationalSpectrum RationalSpectrum::white(double level) {
  if (!(level >= 0.0)) throw ConfigError("white noise level must be nonnegative");
  return RationalSpectrum({level}, {1.0}, 1.0);
}

bool RationalSpectrum::is_zero() const { return num_.empty() || scale_ == 0.0; }

bool RationalSpectrum::is_white() const { return num_.size() <= 1 && den_.size() == 1; }

double RationalSpectrum::operator()(double omega) const {
  if (is_zero()) return 0.0;
  return scale_ * eval_real(num_, omega) / eval_real(den_, omega);
}

Rational RationalSpectrum::as_rational() const {
  if (is_zero()) return Rational::constant(0.0);
  return Rational::from_polys(Poly::from_real(num_) * scale_, Poly::from_real(den_));
}

RationalSpectrum RationalSpectrum::scaled(double factor) const {
  if (!(factor >= 0.0) || !std::isfinite(factor)) throw ConfigError("spectrum scale must be finite and >= 0");
  RationalSpectrum out = *this;
  out.scale_ *= factor;
  return out;
}

RationalSpectrum RationalSpectrum::plus_white(double level) const {
  if (level == 0.0) return *this;
  std::vector<double> num(den_.size(), 0.0);
  for (size_t k = 0; k < num_.size(); ++k) num[k] += scale_ * num_[k];
  for (size_t k = 0; k < den_.size(); ++k) num[k] += level * den_[k];
  return RationalSpectrum(std::move(num), den_, 1.0);
}

cplx mech_susceptibility(const OscillatorParams& p, double omega) {
  const cplx den(p.omega_m * p.omega_m - omega * omega, -p.gamma_m * omega);
  if (den == cplx{}) throw NumericalError("undamped resonance");
  return 1.0 / den;
}

Rational susceptibility_rational(const OscillatorParams& p) {
  return Rational(Poly::constant(-1.0), p.susceptibility_poles());
}

Rational susceptibility_modulus_sq(const OscillatorParams& p) {
  const Rational chi = susceptibility_rational(p);
  return chi * chi.conj();
}

NoiseModel white_noise_model(const WhiteNoiseParams& w, const OscillatorParams& p) {
  if (!(w.omega_s > 0.0)) throw ConfigError("infinite sensing noise: omega_s must be positive");
  if (!(w.omega_f >= 0.0)) throw ConfigError("omega_f must be nonnegative");
  NoiseModel m;
  m.force = RationalSpectrum::white(2.0 * w.omega_f * w.omega_f / p.omega_m);
  m.sensing = RationalSpectrum::white(2.0 * p.omega_m / (w.omega_s * w.omega_s));
  return m;
}

double chi_F(const NoiseModel& m, const OscillatorParams& p, double omega) {
  return p.omega_m * std::norm(mech_susceptibility(p, omega)) * m.force_scale * m.force(omega);
}

double chi_S(const NoiseModel& m, const OscillatorParams& p, double omega) {
  return m.sensing_scale * m.sensing(omega) / p.omega_m;
}

double chi_EN(const NoiseModel& m, const OscillatorParams& p, double omega) {
  return chi_F(m, p, omega) + chi_S(m, p, omega);
}

Rational chi_F_rational(const NoiseModel& m, const OscillatorParams& p) {
  return susceptibility_modulus_sq(p) * m.effective_force().as_rational() * cplx(p.omega_m);
}

RationalSpectrum fdt_white_limit(double temperature_ratio, const OscillatorParams& p) {
  if (!(temperature_ratio >= 1.0))
    throw ConfigError("temperature ratio below 1 is outside high-temperature validity");
  return RationalSpectrum::white(2.0 * p.gamma_m * temperature_ratio);
}

NoiseModel to_dimensionless(double mass, const PhysicalNoise& noise, const OscillatorParams& p) {
  if (!(mass > 0.0)) throw ConfigError("mass must be positive");
  NoiseModel m;
  m.force = noise.force_psd.scaled(2.0 / (kHbar * mass * p.omega_m));
  m.sensing = noise.position_psd.scaled(2.0 * mass * p.omega_m / kHbar);
  return m;
}

PhysicalNoise to_physical(double mass, const NoiseModel& model, const OscillatorParams& p) {
  if (!(mass > 0.0)) throw ConfigError("mass must be positive");
  return {model.effective_force().scaled(kHbar * mass * p.omega_m / 2.0),
          model.effective_sensing().scaled(kHbar / (2.0 * mass * p.omega_m))};
}

std::vector<double> symmetric_log_grid(double centre, int points_per_side, double decades) {
  std::vector<double> g;
  g.reserve(2 * static_cast<size_t>(points_per_side) + 1);
  g.push_back(0.0);
  for (int k = 0; k < points_per_side; ++k) {
    const double x = -decades + 2.0 * decades * k / std::max(points_per_side - 1, 1);
    const double w = centre * std::pow(10.0, x);
    g.push_back(w);
    g.push_back(-w);
  }
  return g;
}

}  // namespace omneg
