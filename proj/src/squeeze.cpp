#include "omneg/squeeze.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "omneg/errors.hpp"

namespace omneg {

namespace {

Rational scalar(double v) { return Rational::constant(v); }

std::array<Rational, 4> product(const std::array<Rational, 4>& a, const std::array<Rational, 4>& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
          a[2] * b[1] + a[3] * b[3]};
}

}  // namespace

SqueezeTransform SqueezeTransform::none() {
  return {SqueezeKind::none, {scalar(1.0), scalar(0.0), scalar(0.0), scalar(1.0)}};
}

SqueezeTransform SqueezeTransform::constant(double r) {
  SqueezeTransform s(SqueezeKind::constant,
                     {scalar(std::exp(r)), scalar(0.0), scalar(0.0), scalar(std::exp(-r))});
  s.r_ = r;
  return s;
}

SqueezeTransform SqueezeTransform::rotation(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  SqueezeTransform t(SqueezeKind::rotation, {scalar(c), scalar(-s), scalar(s), scalar(c)});
  t.theta_ = theta;
  return t;
}

SqueezeTransform SqueezeTransform::filter_cavity(double r, double gamma_c, double delta_c) {
  if (!(gamma_c > 0.0)) throw ConfigError("filter cavity linewidth must be positive");
  // 1 / (delta^2 - (W + i gamma)^2) = -1 / ((W - (delta - i gamma)) (W - (-delta - i gamma)))
  const std::vector<Root> poles{{cplx(delta_c, -gamma_c), 1}, {cplx(-delta_c, -gamma_c), 1}};
  const Poly diag({cplx(gamma_c * gamma_c - delta_c * delta_c), 0.0, 1.0});
  const Rational on(diag * -1.0, poles);
  const Rational off(Poly::constant(2.0 * gamma_c * delta_c), poles);
  const double er = std::exp(r), emr = std::exp(-r);
  SqueezeTransform s(SqueezeKind::filter_cavity, {on * er, off * emr, off * -er, on * emr});
  s.r_ = r;
  s.gamma_c_ = gamma_c;
  s.delta_c_ = delta_c;
  return s;
}

SqueezeTransform SqueezeTransform::general(Rational a, Rational b, Rational c, Rational d) {
  return {SqueezeKind::general, {std::move(a), std::move(b), std::move(c), std::move(d)}};
}

SqueezeTransform SqueezeTransform::then(const SqueezeTransform& next) const {
  if (is_identity()) return next;
  if (next.is_identity()) return *this;
  return {SqueezeKind::general, product(next.q_, q_)};
}

bool SqueezeTransform::is_frequency_independent() const {
  for (const auto& e : q_)
    if (!e.poles().empty() || e.numerator().degree() > 0) return false;
  return true;
}

std::array<cplx, 4> SqueezeTransform::at(double omega) const {
  return {q_[0](omega), q_[1](omega), q_[2](omega), q_[3](omega)};
}

double SqueezeTransform::t1(double omega) const {
  const auto m = at(omega);
  return std::norm(m[0]) + std::norm(m[1]);
}

double SqueezeTransform::t2(double omega) const {
  const auto m = at(omega);
  return std::norm(m[2]) + std::norm(m[3]);
}

double SqueezeTransform::t12(double omega) const {
  const auto m = at(omega);
  return (m[0] * std::conj(m[2]) + m[1] * std::conj(m[3])).real();
}

SymplecticReport validate_symplectic(const SqueezeTransform& sq, int grid_points, double tol) {
  double scale = 1.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (const Root& p : sq.entry(i, j).poles()) scale = std::max(scale, std::abs(p.value));
  const auto grid = symmetric_log_grid(scale, std::max(grid_points / 2, 1), 4.0);

  SymplecticReport rep;
  rep.min_t1 = std::numeric_limits<double>::infinity();
  double worst = -1.0;
  for (double w : grid) {
    const auto m = sq.at(w);
    const cplx det = m[0] * m[3] - m[1] * m[2];
    const double det_err = std::abs(std::abs(det) - 1.0);
    const cplx unphase = std::sqrt(det);
    double norm = 0.0, imag = 0.0;
    for (cplx e : m) {
      const cplx rr = e / unphase;
      norm = std::max(norm, std::abs(rr));
      imag = std::max(imag, std::abs(rr.imag()));
    }
    const double real_err = imag / std::max(norm, 1e-300);
    const double t1 = std::norm(m[0]) + std::norm(m[1]);
    const double t2 = std::norm(m[2]) + std::norm(m[3]);
    const double t12 = (m[0] * std::conj(m[2]) + m[1] * std::conj(m[3])).real();
    const double id_err = std::abs(t1 * t2 - t12 * t12 - 1.0);
    rep.worst_determinant_error = std::max(rep.worst_determinant_error, det_err);
    rep.worst_realness_error = std::max(rep.worst_realness_error, real_err);
    rep.worst_identity_error = std::max(rep.worst_identity_error, id_err / std::max(1.0, t1 * t2));
    rep.min_t1 = std::min(rep.min_t1, t1);
    const double score = std::max({det_err, real_err});
    if (score > worst) {
      worst = score;
      rep.worst_omega = w;
    }
  }
  rep.ok = rep.worst_determinant_error <= tol && rep.worst_realness_error <= tol &&
           rep.min_t1 > 0.0;
  if (!rep.ok) {
    std::ostringstream msg;
    msg << "symplectic violation: |det|-1 up to " << rep.worst_determinant_error
        << ", realness error up to " << rep.worst_realness_error << ", min T1 " << rep.min_t1
        << ", worst at omega = " << rep.worst_omega;
    rep.message = msg.str();
  }
  return rep;
}

FilterCavity filter_cavity_params(const OscillatorParams& p) {
  if (!(p.omega_q > 0.0)) throw ConfigError("filter cavity is degenerate for omega_q = 0");
  const double w2 = p.omega_m * p.omega_m;
  const double q4 = std::pow(p.omega_q, 4);
  // -w2 + sqrt(w2^2 + q4) without cancellation
  const double gamma_c = std::sqrt(0.5 * q4 / (w2 + std::sqrt(w2 * w2 + q4)));
  return {gamma_c, p.omega_q * p.omega_q / (2.0 * gamma_c), p.gamma_m < 0.1 * p.omega_m};
}

SqueezeTransform fd_squeeze_transform(double r, double gamma_c, double delta_c) {
  return SqueezeTransform::filter_cavity(r, gamma_c, delta_c);
}

std::function<double(double)> quantum_noise_spectrum(const OscillatorParams& p,
                                                     const SqueezeTransform& sq) {
  return [p, sq](double w) {
    const cplx back = p.omega_q * p.omega_q * mech_susceptibility(p, w);
    const auto m = sq.at(w);
    return std::norm(m[2] + back * m[0]) + std::norm(m[3] + back * m[1]);
  };
}

std::array<double, 4> symplectic_from_angles(double r, double theta, double rho) {
  const double ch = std::cosh(r), sh = std::sinh(r);
  return {std::cos(theta) * ch + std::cos(rho) * sh, -std::sin(theta) * ch + std::sin(rho) * sh,
          std::sin(theta) * ch + std::sin(rho) * sh, std::cos(theta) * ch - std::cos(rho) * sh};
}

}  // namespace omneg
