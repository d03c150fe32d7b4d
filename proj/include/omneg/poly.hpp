#pragma once

#include <complex>
#include <span>
#include <utility>
#include <vector>

namespace omneg {

using cplx = std::complex<double>;

// Dense polynomial with complex coefficients stored in ascending order.
class Poly {
 public:
  Poly() = default;
  explicit Poly(std::vector<cplx> coeffs);

  static Poly constant(cplx c);
  static Poly from_real(std::span<const double> coeffs);
  static Poly monomial(int power, cplx c = 1.0);
  // lead * prod (z - r) over the given roots
  static Poly from_roots(std::span<const cplx> roots, cplx lead = 1.0);

  // -1 for the zero polynomial
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  const std::vector<cplx>& coeffs() const { return c_; }
  cplx lead() const { return c_.empty() ? cplx{} : c_.back(); }
  cplx coeff(int k) const;

  cplx operator()(cplx z) const;
  Poly derivative() const;
  Poly reflected() const;   // p(-z)
  Poly conjugated() const;  // conj applied to every coefficient
  // Taylor coefficients of p around z0: entry j multiplies (z - z0)^j.
  std::vector<cplx> taylor(cplx z0, int order) const;

  Poly& operator+=(const Poly& o);
  Poly& operator-=(const Poly& o);
  Poly& operator*=(cplx s);

  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(Poly a, cplx s) { return a *= s; }
  friend Poly operator*(cplx s, Poly a) { return a *= s; }
  friend Poly operator*(const Poly& a, const Poly& b);

 private:
  void trim();
  std::vector<cplx> c_;
};

// Quotient and remainder of a / b.
std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b);

// All roots, from a balanced companion matrix followed by Newton polishing.
std::vector<cplx> roots(const Poly& p);

struct Root {
  cplx value;
  int multiplicity = 1;
};

// Groups nearly coincident roots; the cluster centre is the mean.
std::vector<Root> cluster_roots(std::span<const cplx> values, double rel_tol = 1e-6);

// Sort by real part, then imaginary part.
void sort_roots(std::vector<Root>& roots);

// Truncated power series helpers (coefficient j multiplies e^j).
std::vector<cplx> series_mul(std::span<const cplx> a, std::span<const cplx> b, int order);
// Series of (d + e)^(-m) truncated to the given order.
std::vector<cplx> inverse_power_series(cplx d, int m, int order);

}  // namespace omneg
