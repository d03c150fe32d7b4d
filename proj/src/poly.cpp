#include "omneg/poly.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "omneg/errors.hpp"

namespace omneg {

Poly::Poly(std::vector<cplx> coeffs) : c_(std::move(coeffs)) { trim(); }

void Poly::trim() {
  while (!c_.empty() && c_.back() == cplx{}) c_.pop_back();
}

Poly Poly::constant(cplx c) { return Poly(std::vector<cplx>{c}); }

Poly Poly::from_real(std::span<const double> coeffs) {
  return Poly(std::vector<cplx>(coeffs.begin(), coeffs.end()));
}

Poly Poly::monomial(int power, cplx c) {
  std::vector<cplx> v(static_cast<size_t>(power) + 1);
  v.back() = c;
  return Poly(std::move(v));
}

Poly Poly::from_roots(std::span<const cplx> rts, cplx lead) {
  std::vector<cplx> v{lead};
  for (cplx r : rts) {
    v.push_back(0.0);
    for (size_t j = v.size() - 1; j > 0; --j) v[j] = v[j - 1] - r * v[j];
    v[0] = -r * v[0];
  }
  return Poly(std::move(v));
}

cplx Poly::coeff(int k) const {
  return (k >= 0 && k < static_cast<int>(c_.size())) ? c_[k] : cplx{};
}

cplx Poly::operator()(cplx z) const {
  cplx acc{};
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * z + *it;
  return acc;
}

Poly Poly::derivative() const {
  if (c_.size() <= 1) return {};
  std::vector<cplx> d(c_.size() - 1);
  for (size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
  return Poly(std::move(d));
}

Poly Poly::reflected() const {
  std::vector<cplx> d = c_;
  for (size_t k = 1; k < d.size(); k += 2) d[k] = -d[k];
  return Poly(std::move(d));
}

Poly Poly::conjugated() const {
  std::vector<cplx> d = c_;
  for (auto& x : d) x = std::conj(x);
  return Poly(std::move(d));
}

std::vector<cplx> Poly::taylor(cplx z0, int order) const {
  std::vector<cplx> b = c_;
  const int n = degree();
  for (int i = 0; i < n; ++i)
    for (int j = n - 1; j >= i; --j) b[j] += z0 * b[j + 1];
  b.resize(static_cast<size_t>(std::max(order, 0)), cplx{});
  return b;
}

Poly& Poly::operator+=(const Poly& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size());
  for (size_t k = 0; k < o.c_.size(); ++k) c_[k] += o.c_[k];
  trim();
  return *this;
}

Poly& Poly::operator-=(const Poly& o) {
  if (o.c_.size() > c_.size()) c_.resize(o.c_.size());
  for (size_t k = 0; k < o.c_.size(); ++k) c_[k] -= o.c_[k];
  trim();
  return *this;
}

Poly& Poly::operator*=(cplx s) {
  for (auto& x : c_) x *= s;
  trim();
  return *this;
}

Poly operator*(const Poly& a, const Poly& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<cplx> r(a.c_.size() + b.c_.size() - 1);
  for (size_t i = 0; i < a.c_.size(); ++i)
    for (size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
  return Poly(std::move(r));
}

std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b) {
  if (b.is_zero()) throw NumericalError("polynomial division by zero");
  const int na = a.degree(), nb = b.degree();
  if (na < nb) return {Poly{}, a};
  std::vector<cplx> rem = a.coeffs();
  std::vector<cplx> quo(static_cast<size_t>(na - nb) + 1);
  const cplx lb = b.lead();
  for (int k = na - nb; k >= 0; --k) {
    const cplx q = rem[k + nb] / lb;
    quo[k] = q;
    for (int j = 0; j <= nb; ++j) rem[k + j] -= q * b.coeffs()[j];
    rem[k + nb] = 0.0;
  }
  rem.resize(static_cast<size_t>(nb));
  return {Poly(std::move(quo)), Poly(std::move(rem))};
}

namespace {

// Diagonal similarity balancing in the 1-norm (Parlett and Reinsch).
void balance(Eigen::MatrixXcd& a) {
  const Eigen::Index n = a.rows();
  constexpr double radix = 2.0;
  bool converged = false;
  for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
    converged = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      const double s = c + r;
      double f = 1.0, g = r / radix;
      while (c < g) {
        f *= radix;
        c *= radix * radix;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= radix * radix;
      }
      if ((c + r) / f < 0.95 * s) {
        converged = false;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
}

cplx newton_polish(const Poly& p, const Poly& dp, cplx z) {
  double best = std::abs(p(z));
  for (int it = 0; it < 4 && best > 0.0; ++it) {
    const cplx d = dp(z);
    if (d == cplx{}) break;
    const cplx next = z - p(z) / d;
    const double res = std::abs(p(next));
    if (!(res < best)) break;
    best = res;
    z = next;
  }
  return z;
}

}  // namespace

std::vector<cplx> roots(const Poly& p) {
  const int n = p.degree();
  if (n < 1) return {};
  std::vector<cplx> out;
  int low = 0;
  while (p.coeffs()[low] == cplx{}) ++low;
  out.assign(static_cast<size_t>(low), cplx{});
  const int m = n - low;
  if (m == 0) return out;

  const auto& c = p.coeffs();
  const double scale = std::pow(std::abs(c[low]) / std::abs(c[n]), 1.0 / m);
  std::vector<cplx> monic(static_cast<size_t>(m));
  for (int j = 0; j < m; ++j) monic[j] = c[low + j] * std::pow(scale, j - m) / c[n];

  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(m, m);
  for (int j = 1; j < m; ++j) comp(j, j - 1) = 1.0;
  for (int j = 0; j < m; ++j) comp(j, m - 1) = -monic[j];
  balance(comp);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(comp, false);
  if (solver.info() != Eigen::Success)
    throw NumericalError("companion eigenvalue solve did not converge");

  const Poly dp = p.derivative();
  for (Eigen::Index k = 0; k < m; ++k)
    out.push_back(newton_polish(p, dp, solver.eigenvalues()[k] * scale));
  return out;
}

std::vector<Root> cluster_roots(std::span<const cplx> values, double rel_tol) {
  std::vector<Root> out;
  std::vector<bool> used(values.size(), false);
  for (size_t i = 0; i < values.size(); ++i) {
    if (used[i]) continue;
    cplx sum = values[i];
    int mult = 1;
    used[i] = true;
    for (size_t j = i + 1; j < values.size(); ++j) {
      if (used[j]) continue;
      const double tol =
          rel_tol * std::max({std::abs(values[i]), std::abs(values[j]), 1e-300});
      if (std::abs(values[i] - values[j]) <= tol) {
        sum += values[j];
        ++mult;
        used[j] = true;
      }
    }
    out.push_back({sum / static_cast<double>(mult), mult});
  }
  return out;
}

void sort_roots(std::vector<Root>& rts) {
  std::sort(rts.begin(), rts.end(), [](const Root& a, const Root& b) {
    if (a.value.real() != b.value.real()) return a.value.real() < b.value.real();
    return a.value.imag() < b.value.imag();
  });
}

std::vector<cplx> series_mul(std::span<const cplx> a, std::span<const cplx> b, int order) {
  std::vector<cplx> r(static_cast<size_t>(order));
  for (int i = 0; i < order && i < static_cast<int>(a.size()); ++i)
    for (int j = 0; i + j < order && j < static_cast<int>(b.size()); ++j) r[i + j] += a[i] * b[j];
  return r;
}

std::vector<cplx> inverse_power_series(cplx d, int m, int order) {
  std::vector<cplx> base(static_cast<size_t>(order));
  cplx term = 1.0 / d;
  for (int j = 0; j < order; ++j) {
    base[j] = term;
    term *= -1.0 / d;
  }
  std::vector<cplx> out(static_cast<size_t>(order));
  if (order > 0) out[0] = 1.0;
  for (int k = 0; k < m; ++k) out = series_mul(out, base, order);
  return out;
}

}  // namespace omneg
