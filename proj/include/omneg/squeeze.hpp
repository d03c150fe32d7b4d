#pragma once

#include <array>
#include <functional>
#include <string>

#include "omneg/rational.hpp"
#include "omneg/spectra.hpp"

namespace omneg {

enum class SqueezeKind { none, constant, rotation, filter_cavity, general };

// Causal symplectic map of the input quadratures. Entries are stored up to a
// common frequency-dependent phase, which never enters second moments.
class SqueezeTransform {
 public:
  static SqueezeTransform none();
  static SqueezeTransform constant(double r);
  static SqueezeTransform rotation(double theta);
  // Detuned cavity acting on constant squeezing r.
  static SqueezeTransform filter_cavity(double r, double gamma_c, double delta_c);
  // Real rational A, B, C, D with AD - BC = 1.
  static SqueezeTransform general(Rational a, Rational b, Rational c, Rational d);

  // `next` applied after this transform.
  SqueezeTransform then(const SqueezeTransform& next) const;

  SqueezeKind kind() const { return kind_; }
  double r() const { return r_; }
  double theta() const { return theta_; }
  double gamma_c() const { return gamma_c_; }
  double delta_c() const { return delta_c_; }
  bool is_identity() const { return kind_ == SqueezeKind::none; }
  // True when the map is a constant squeeze and/or rotation.
  bool is_frequency_independent() const;

  // Entry (row, col) of the transfer matrix.
  const Rational& entry(int row, int col) const { return q_[2 * row + col]; }
  std::array<cplx, 4> at(double omega) const;
  double t1(double omega) const;
  double t2(double omega) const;
  double t12(double omega) const;

 private:
  SqueezeTransform(SqueezeKind kind, std::array<Rational, 4> q) : kind_(kind), q_(std::move(q)) {}
  SqueezeKind kind_ = SqueezeKind::none;
  std::array<Rational, 4> q_;
  double r_ = 0.0, theta_ = 0.0, gamma_c_ = 0.0, delta_c_ = 0.0;
};

struct SymplecticReport {
  bool ok = true;
  double worst_determinant_error = 0.0;
  double worst_realness_error = 0.0;
  double worst_identity_error = 0.0;  // |T1 T2 - T12^2 - 1|
  double min_t1 = 0.0;
  double worst_omega = 0.0;
  std::string message;
};

SymplecticReport validate_symplectic(const SqueezeTransform& sq, int grid_points = 1000,
                                     double tol = 1e-10);

struct FilterCavity {
  double gamma_c;
  double delta_c;
  bool high_q;  // false when gamma_m is not small against omega_m
};

FilterCavity filter_cavity_params(const OscillatorParams& p);
SqueezeTransform fd_squeeze_transform(double r, double gamma_c, double delta_c);

// Phase-quadrature output spectrum from the quantum sources alone.
std::function<double(double)> quantum_noise_spectrum(const OscillatorParams& p,
                                                     const SqueezeTransform& sq);

// A, B, C, D built from squeeze r and angles theta, rho.
std::array<double, 4> symplectic_from_angles(double r, double theta, double rho);

}  // namespace omneg
