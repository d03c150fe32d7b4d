#include "omneg/ratfact.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "omneg/errors.hpp"

namespace omneg {

namespace {

constexpr double kAxisTol = 1e-9;
constexpr double kRealZeroTol = 1e-7;

std::vector<cplx> expand(const std::vector<Root>& rts) {
  std::vector<cplx> out;
  for (const Root& r : rts) out.insert(out.end(), static_cast<size_t>(r.multiplicity), r.value);
  return out;
}

int total(const std::vector<Root>& rts) {
  int n = 0;
  for (const Root& r : rts) n += r.multiplicity;
  return n;
}

void require_off_axis(const Rational& f, const char* what) {
  const double tol = kAxisTol * pole_scale(f);
  for (const Root& p : f.poles())
    if (std::abs(p.value.imag()) < tol) {
      std::ostringstream msg;
      msg << what << ": pole at " << p.value << " lies on the real axis";
      throw NumericalError(msg.str());
    }
}

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

}  // namespace

Rational SpectralFactors::plus() const {
  const auto z = expand(zeros);
  return Rational(Poly::from_roots(z, gain), poles);
}

Rational SpectralFactors::minus() const { return plus().conj(); }

Rational SpectralFactors::plus_inverse() const {
  const auto p = expand(poles);
  return Rational(Poly::from_roots(p, 1.0 / gain), zeros);
}

Rational SpectralFactors::minus_inverse() const { return plus_inverse().conj(); }

cplx SpectralFactors::plus_at(cplx z) const {
  cplx v = gain;
  for (const Root& r : zeros) v *= std::pow(z - r.value, r.multiplicity);
  for (const Root& r : poles) v /= std::pow(z - r.value, r.multiplicity);
  return v;
}

SpectralFactors spectral_factorize(const Rational& spectrum) {
  if (spectrum.is_zero()) throw NumericalError("not factorizable: spectrum vanishes identically");
  const cplx lead = spectrum.numerator().lead();
  if (!(lead.real() > 0.0) || std::abs(lead.imag()) > 1e-10 * std::abs(lead))
    throw NumericalError("not factorizable: leading coefficient is not positive real");

  SpectralFactors out;
  out.gain = std::sqrt(lead.real());

  const double pscale = pole_scale(spectrum);
  int upper_poles = 0;
  for (const Root& p : spectrum.poles()) {
    if (std::abs(p.value.imag()) < kAxisTol * pscale) {
      std::ostringstream msg;
      msg << "non-integrable spectrum: real pole at " << p.value.real();
      throw NumericalError(msg.str());
    }
    if (p.value.imag() < 0.0)
      out.poles.push_back(p);
    else
      upper_poles += p.multiplicity;
  }
  if (upper_poles != total(out.poles))
    throw NumericalError("not factorizable: poles are not mirrored across the real axis");

  const auto zs = roots(spectrum.numerator());
  std::vector<cplx> near_real;
  int upper_zeros = 0;
  for (cplx z : zs) {
    if (std::abs(z.imag()) <= kRealZeroTol * std::max(std::abs(z), 1e-300))
      near_real.push_back({z.real(), 0.0});
    else if (z.imag() < 0.0)
      out.zeros.push_back({z, 1});
    else
      ++upper_zeros;
  }
  for (const Root& r : cluster_roots(near_real)) {
    if (r.multiplicity % 2 != 0) {
      std::ostringstream msg;
      msg << "not factorizable: odd-multiplicity real zero at " << r.value.real();
      throw NumericalError(msg.str());
    }
    out.zeros.push_back({r.value, r.multiplicity / 2});
  }
  if (upper_zeros != static_cast<int>(zs.size() - near_real.size()) - upper_zeros)
    throw NumericalError("not factorizable: zeros are not mirrored across the real axis");

  out.zeros = cluster_roots(expand(out.zeros));
  sort_roots(out.zeros);
  sort_roots(out.poles);
  return out;
}

double reconstruction_error(const SpectralFactors& f, const Rational& spectrum,
                            std::span<const double> grid) {
  double worst = 0.0;
  for (double w : grid) {
    const cplx want = spectrum(w);
    const cplx got = f.plus_at(w) * f.minus_at(w);
    worst = std::max(worst, std::abs(got - want) / std::max(std::abs(want), 1e-300));
  }
  return worst;
}

Rational causal_project(const Rational& f) {
  require_off_axis(f, "ambiguous projection");
  return Rational::from_partial_fractions(
      f.partial_fractions().select([](cplx p) { return p.imag() < 0.0; }));
}

Rational anticausal_project(const Rational& f) {
  require_off_axis(f, "ambiguous projection");
  return Rational::from_partial_fractions(
      f.partial_fractions().select([](cplx p) { return p.imag() > 0.0; }));
}

Rational wiener_hopf_solve(const SpectralFactors& m, const Rational& g) {
  return m.plus_inverse() * causal_project(g * m.minus_inverse());
}

TimeKernel::TimeKernel(const Rational& spectrum) {
  require_off_axis(spectrum, "inverse transform");
  const auto pf = spectrum.partial_fractions();
  if (pf.polynomial.degree() >= 1)
    throw NumericalError("inverse transform: spectrum grows at large frequency");
  delta_ = pf.polynomial.coeff(0);
  for (const auto& t : pf.terms) {
    const cplx shape = std::pow(cplx(0.0, -1.0), t.power - 1) / factorial(t.power - 1);
    if (t.pole.imag() < 0.0)
      causal_.push_back({t.pole, t.power, cplx(0.0, -1.0) * t.coeff * shape});
    else
      anticausal_.push_back({t.pole, t.power, cplx(0.0, 1.0) * t.coeff * shape});
  }
}

cplx TimeKernel::sum(const std::vector<Mode>& modes, double t) {
  cplx acc{};
  for (const auto& m : modes) {
    const cplx e = std::exp(cplx(0.0, -1.0) * m.pole * t);
    acc += m.power == 1 ? m.weight * e : m.weight * std::pow(t, m.power - 1) * e;
  }
  return acc;
}

cplx TimeKernel::operator()(double t) const {
  if (t > 0.0) return sum(causal_, t);
  if (t < 0.0) return sum(anticausal_, t);
  return 0.5 * (sum(causal_, 0.0) + sum(anticausal_, 0.0));
}

double TimeKernel::fastest_rate() const {
  double r = 0.0;
  for (const auto* v : {&causal_, &anticausal_})
    for (const auto& m : *v) r = std::max(r, std::abs(m.pole));
  return r;
}

double TimeKernel::slowest_decay() const {
  double r = std::numeric_limits<double>::infinity();
  for (const auto* v : {&causal_, &anticausal_})
    for (const auto& m : *v) r = std::min(r, std::abs(m.pole.imag()));
  return r;
}

cplx inverse_ft_rational(const Rational& f, double t) {
  if (!f.is_strictly_proper()) throw NumericalError("inverse transform needs a strictly proper function");
  return TimeKernel(f)(t);
}

cplx half_line_pairing(const Rational& f, const Rational& h) {
  if (!f.is_strictly_proper()) throw NumericalError("pairing needs a strictly proper left factor");
  require_off_axis(f, "pairing");
  const auto pf = f.partial_fractions();
  cplx acc{};
  for (const Root& p : f.poles()) {
    if (p.value.imag() >= 0.0) continue;
    const auto ht = h.taylor(-p.value, p.multiplicity);
    for (const auto& t : pf.terms) {
      if (t.pole != p.value) continue;
      const double sign = (t.power - 1) % 2 == 0 ? 1.0 : -1.0;
      acc += t.coeff * sign * ht[t.power - 1];
    }
  }
  return cplx(0.0, -1.0) * acc;
}

cplx frequency_integral(const Rational& f) {
  if (f.numerator().degree() > f.denominator_degree() - 2)
    throw NumericalError("frequency integral diverges");
  return TimeKernel(f)(0.0);
}

Extrapolation extrapolate_to_zero(const std::function<double(double)>& g, double eps0, int levels) {
  if (levels < 2) throw ConfigError("extrapolation needs at least two levels");
  std::vector<std::vector<double>> table(static_cast<size_t>(levels));
  for (int k = 0; k < levels; ++k) {
    table[k].push_back(g(eps0 * std::pow(4.0, -k)));
    for (int j = 1; j <= k; ++j) {
      const double f = std::pow(4.0, j);
      table[k].push_back((f * table[k][j - 1] - table[k - 1][j - 1]) / (f - 1.0));
    }
  }
  const double best = table.back().back();
  const double prev = table[levels - 2].back();
  return {best, std::abs(best - prev)};
}

}  // namespace omneg
