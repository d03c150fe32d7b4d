#pragma once

#include <functional>
#include <vector>

#include "omneg/rational.hpp"

namespace omneg {

// Causal/anticausal split R = R+ R- of a spectrum that is real and nonnegative
// on the real axis. R+ carries the lower half-plane zeros and poles.
struct SpectralFactors {
  double gain = 1.0;  // positive leading coefficient of R+
  std::vector<Root> zeros;
  std::vector<Root> poles;

  Rational plus() const;
  Rational minus() const;
  Rational plus_inverse() const;
  Rational minus_inverse() const;
  cplx plus_at(cplx z) const;
  cplx minus_at(cplx z) const { return std::conj(plus_at(std::conj(z))); }
};

SpectralFactors spectral_factorize(const Rational& spectrum);

// Relative deviation of R+R- from R at the given real frequencies.
double reconstruction_error(const SpectralFactors& f, const Rational& spectrum,
                            std::span<const double> grid);

// Partial-fraction terms with poles below (causal) or above the real axis.
Rational causal_project(const Rational& f);
Rational anticausal_project(const Rational& f);

// Spectrum of the causal solution of the half-line equation M * h = g.
Rational wiener_hopf_solve(const SpectralFactors& m, const Rational& g);

// Time-domain kernel f(t) = integral dW/2pi F(W) exp(-i W t) of a proper rational F.
class TimeKernel {
 public:
  explicit TimeKernel(const Rational& spectrum);

  cplx operator()(double t) const;
  cplx delta_weight() const { return delta_; }
  // Largest pole modulus and slowest decay rate.
  double fastest_rate() const;
  double slowest_decay() const;

 private:
  struct Mode {
    cplx pole;
    int power;
    cplx weight;  // value = weight * t^(power-1) * exp(-i pole t)
  };
  static cplx sum(const std::vector<Mode>& modes, double t);
  std::vector<Mode> causal_;
  std::vector<Mode> anticausal_;
  cplx delta_{};
};

cplx inverse_ft_rational(const Rational& f, double t);

// integral over t > 0 of f(t) h(t) for strictly proper f, by residues in the
// lower half-plane; h may be improper.
cplx half_line_pairing(const Rational& f, const Rational& h);

// integral dW/2pi F(W) for a rational F decaying at least as 1/W^2.
cplx frequency_integral(const Rational& f);

struct Extrapolation {
  double value;
  double error_estimate;
};

// Richardson extrapolation of g(eps) to eps -> 0 on eps0 * 4^-k, k < levels.
Extrapolation extrapolate_to_zero(const std::function<double(double)>& g, double eps0,
                                  int levels = 4);

}  // namespace omneg
