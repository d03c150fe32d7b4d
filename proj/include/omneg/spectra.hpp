#pragma once

#include <vector>

#include "omneg/rational.hpp"

namespace omneg {

struct OscillatorParams {
  double omega_m = 1.0;  // rad/s
  double gamma_m = 0.0;  // rad/s
  double omega_q = 0.0;  // rad/s
  double eta = 1.0;

  void validate() const;
  // Poles of the mechanical susceptibility (lower half-plane when damped).
  std::vector<Root> susceptibility_poles() const;
};

// Real, even, nonnegative ratio of polynomials in frequency times a scale.
class RationalSpectrum {
 public:
  RationalSpectrum(std::vector<double> num, std::vector<double> den, double scale = 1.0);

  static RationalSpectrum white(double level);
  static RationalSpectrum zero() { return white(0.0); }

  const std::vector<double>& numerator() const { return num_; }
  const std::vector<double>& denominator() const { return den_; }
  double scale() const { return scale_; }
  bool is_zero() const;
  bool is_white() const;

  double operator()(double omega) const;
  // The spectrum as a complex rational function with the scale folded in.
  Rational as_rational() const;
  RationalSpectrum scaled(double factor) const;
  // Sum with a constant level.
  RationalSpectrum plus_white(double level) const;

 private:
  std::vector<double> num_;
  std::vector<double> den_;
  double scale_;
};

struct NoiseModel {
  RationalSpectrum force = RationalSpectrum::zero();
  RationalSpectrum sensing = RationalSpectrum::zero();
  double force_scale = 1.0;
  double sensing_scale = 1.0;

  RationalSpectrum effective_force() const { return force.scaled(force_scale); }
  RationalSpectrum effective_sensing() const { return sensing.scaled(sensing_scale); }
};

struct WhiteNoiseParams {
  double omega_f = 0.0;  // rad/s
  double omega_s = 0.0;  // rad/s
};

cplx mech_susceptibility(const OscillatorParams& p, double omega);
// chi as a rational function with its poles kept exactly.
Rational susceptibility_rational(const OscillatorParams& p);
// |chi|^2 as a rational function.
Rational susceptibility_modulus_sq(const OscillatorParams& p);

NoiseModel white_noise_model(const WhiteNoiseParams& w, const OscillatorParams& p);

double chi_F(const NoiseModel& m, const OscillatorParams& p, double omega);
double chi_S(const NoiseModel& m, const OscillatorParams& p, double omega);
double chi_EN(const NoiseModel& m, const OscillatorParams& p, double omega);
Rational chi_F_rational(const NoiseModel& m, const OscillatorParams& p);

// White high-temperature force spectrum; ratio = 2 kB T / (hbar omega_m).
RationalSpectrum fdt_white_limit(double temperature_ratio, const OscillatorParams& p);

// Physical spectra: force in N^2/Hz, sensing in m^2/Hz, both double-sided in
// the same angular-frequency convention as the dimensionless ones.
struct PhysicalNoise {
  RationalSpectrum force_psd;
  RationalSpectrum position_psd;
};

inline constexpr double kHbar = 1.054571817e-34;

NoiseModel to_dimensionless(double mass, const PhysicalNoise& noise, const OscillatorParams& p);
PhysicalNoise to_physical(double mass, const NoiseModel& model, const OscillatorParams& p);

// Log-spaced symmetric grid of real frequencies around a characteristic scale.
std::vector<double> symmetric_log_grid(double centre, int points_per_side, double decades = 4.0);

}  // namespace omneg
