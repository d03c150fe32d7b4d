#include "omneg/rational.hpp"

#include <algorithm>
#include <cmath>

#include "omneg/errors.hpp"

namespace omneg {

namespace {

constexpr double kMergeTol = 1e-10;

bool same_pole(cplx a, cplx b) {
  return std::abs(a - b) <= kMergeTol * std::max({std::abs(a), std::abs(b), 1e-300});
}

int find_pole(const std::vector<Root>& ps, cplx p) {
  for (size_t i = 0; i < ps.size(); ++i)
    if (same_pole(ps[i].value, p)) return static_cast<int>(i);
  return -1;
}

Poly linear_power(cplx p, int m) {
  Poly out = Poly::constant(1.0);
  const Poly lin(std::vector<cplx>{-p, 1.0});
  for (int k = 0; k < m; ++k) out = out * lin;
  return out;
}

Poly product_except(const std::vector<Root>& ps, int skip) {
  Poly out = Poly::constant(1.0);
  for (size_t i = 0; i < ps.size(); ++i)
    if (static_cast<int>(i) != skip) out = out * linear_power(ps[i].value, ps[i].multiplicity);
  return out;
}

// Numerator of f once its denominator is widened to the pole set `target`.
Poly lift(const Rational& f, const std::vector<Root>& target) {
  Poly num = f.numerator();
  for (const Root& t : target) {
    const int idx = find_pole(f.poles(), t.value);
    const int have = idx < 0 ? 0 : f.poles()[idx].multiplicity;
    num = num * linear_power(t.value, t.multiplicity - have);
  }
  return num;
}

std::vector<Root> pole_union(const std::vector<Root>& a, const std::vector<Root>& b) {
  std::vector<Root> out = a;
  for (const Root& r : b) {
    const int idx = find_pole(out, r.value);
    if (idx < 0)
      out.push_back(r);
    else
      out[idx].multiplicity = std::max(out[idx].multiplicity, r.multiplicity);
  }
  return out;
}

}  // namespace

cplx PartialFractions::operator()(cplx z) const {
  cplx acc = polynomial(z);
  for (const auto& t : terms) acc += t.coeff / std::pow(z - t.pole, t.power);
  return acc;
}

PartialFractions PartialFractions::select(const std::function<bool(cplx)>& keep_pole) const {
  PartialFractions out;
  for (const auto& t : terms)
    if (keep_pole(t.pole)) out.terms.push_back(t);
  return out;
}

Rational::Rational(Poly num, std::vector<Root> poles) : num_(std::move(num)) {
  for (const Root& r : poles) {
    if (r.multiplicity <= 0) continue;
    const int idx = find_pole(poles_, r.value);
    if (idx < 0)
      poles_.push_back(r);
    else
      poles_[idx].multiplicity += r.multiplicity;
  }
  if (num_.is_zero()) poles_.clear();
}

Rational Rational::constant(cplx c) { return Rational(Poly::constant(c), {}); }

Rational Rational::polynomial(Poly p) { return Rational(std::move(p), {}); }

Rational Rational::from_polys(const Poly& num, const Poly& den) {
  if (den.is_zero()) throw NumericalError("rational function with zero denominator");
  const auto rts = roots(den);
  return Rational(num * (1.0 / den.lead()), cluster_roots(rts));
}

Rational Rational::from_partial_fractions(const PartialFractions& pf) {
  std::vector<Root> ps;
  for (const auto& t : pf.terms) {
    const int idx = find_pole(ps, t.pole);
    if (idx < 0)
      ps.push_back({t.pole, t.power});
    else
      ps[idx].multiplicity = std::max(ps[idx].multiplicity, t.power);
  }
  Poly num = pf.polynomial * product_except(ps, -1);
  for (const auto& t : pf.terms) {
    const int idx = find_pole(ps, t.pole);
    num += t.coeff * linear_power(ps[idx].value, ps[idx].multiplicity - t.power) *
           product_except(ps, idx);
  }
  return Rational(std::move(num), std::move(ps));
}

Poly Rational::denominator() const { return product_except(poles_, -1); }

int Rational::denominator_degree() const {
  int d = 0;
  for (const Root& r : poles_) d += r.multiplicity;
  return d;
}

cplx Rational::operator()(cplx z) const {
  cplx den = 1.0;
  for (const Root& r : poles_) den *= std::pow(z - r.value, r.multiplicity);
  return num_(z) / den;
}

std::vector<cplx> Rational::taylor(cplx z0, int order) const {
  std::vector<cplx> s = num_.taylor(z0, order);
  for (const Root& r : poles_) {
    if (z0 == r.value) throw NumericalError("Taylor expansion requested at a pole");
    s = series_mul(s, inverse_power_series(z0 - r.value, r.multiplicity, order), order);
  }
  return s;
}

PartialFractions Rational::partial_fractions() const {
  PartialFractions pf;
  Poly rem = num_;
  if (num_.degree() >= denominator_degree()) {
    auto [q, r] = divmod(num_, denominator());
    pf.polynomial = std::move(q);
    rem = std::move(r);
  }
  for (size_t i = 0; i < poles_.size(); ++i) {
    const cplx p = poles_[i].value;
    const int m = poles_[i].multiplicity;
    std::vector<cplx> s = rem.taylor(p, m);
    for (size_t j = 0; j < poles_.size(); ++j) {
      if (j == i) continue;
      s = series_mul(s, inverse_power_series(p - poles_[j].value, poles_[j].multiplicity, m), m);
    }
    for (int k = 1; k <= m; ++k) pf.terms.push_back({p, k, s[m - k]});
  }
  return pf;
}

Rational Rational::conj() const {
  std::vector<Root> ps = poles_;
  for (auto& r : ps) r.value = std::conj(r.value);
  return Rational(num_.conjugated(), std::move(ps));
}

Rational Rational::reflected() const {
  std::vector<Root> ps = poles_;
  for (auto& r : ps) r.value = -r.value;
  const double sign = (denominator_degree() % 2 == 0) ? 1.0 : -1.0;
  return Rational(num_.reflected() * sign, std::move(ps));
}

Rational Rational::times_z(int power) const {
  return Rational(num_ * Poly::monomial(power), poles_);
}

Rational Rational::inverse() const {
  if (num_.is_zero()) throw NumericalError("inverse of the zero rational function");
  const auto zs = roots(num_);
  return Rational(denominator() * (1.0 / num_.lead()), cluster_roots(zs));
}

Rational operator*(const Rational& a, const Rational& b) {
  std::vector<Root> ps = a.poles_;
  ps.insert(ps.end(), b.poles_.begin(), b.poles_.end());
  return Rational(a.num_ * b.num_, std::move(ps));
}

Rational operator*(Rational a, cplx s) {
  a.num_ *= s;
  if (a.num_.is_zero()) a.poles_.clear();
  return a;
}

Rational operator+(const Rational& a, const Rational& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  auto u = pole_union(a.poles_, b.poles_);
  Poly num = lift(a, u) + lift(b, u);
  return Rational(std::move(num), std::move(u));
}

Rational operator-(const Rational& a, const Rational& b) { return a + b * cplx(-1.0); }

double pole_scale(const Rational& f) {
  double s = 0.0;
  for (const Root& r : f.poles()) s = std::max(s, std::abs(r.value));
  return s > 0.0 ? s : 1.0;
}

}  // namespace omneg
