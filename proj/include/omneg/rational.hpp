#pragma once

#include <functional>
#include <vector>

#include "omneg/poly.hpp"

namespace omneg {

struct PfTerm {
  cplx pole;
  int power = 1;  // term coeff / (z - pole)^power
  cplx coeff;
};

// Polynomial part plus pole terms of a rational function.
struct PartialFractions {
  Poly polynomial;
  std::vector<PfTerm> terms;

  cplx operator()(cplx z) const;
  PartialFractions select(const std::function<bool(cplx)>& keep_pole) const;
};

// Rational function num(z) / prod (z - p)^m with the denominator kept factored.
class Rational {
 public:
  Rational() = default;
  Rational(Poly num, std::vector<Root> poles);

  static Rational constant(cplx c);
  static Rational polynomial(Poly p);
  // Finds the denominator roots numerically.
  static Rational from_polys(const Poly& num, const Poly& den);
  static Rational from_partial_fractions(const PartialFractions& pf);

  const Poly& numerator() const { return num_; }
  const std::vector<Root>& poles() const { return poles_; }
  Poly denominator() const;
  int denominator_degree() const;
  bool is_zero() const { return num_.is_zero(); }
  bool is_strictly_proper() const { return num_.degree() < denominator_degree(); }

  cplx operator()(cplx z) const;
  // Taylor coefficients around a point that is not a pole.
  std::vector<cplx> taylor(cplx z0, int order) const;
  PartialFractions partial_fractions() const;

  // conj(f(conj z)): equals conj(f) on the real axis.
  Rational conj() const;
  Rational reflected() const;  // f(-z)
  Rational times_z(int power = 1) const;
  Rational inverse() const;  // 1/f, roots of the numerator become poles

  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator*(Rational a, cplx s);
  friend Rational operator*(cplx s, Rational a) { return std::move(a) * s; }
  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);

 private:
  Poly num_;
  std::vector<Root> poles_;
};

// Largest pole modulus, or 1 when there are none.
double pole_scale(const Rational& f);

}  // namespace omneg
