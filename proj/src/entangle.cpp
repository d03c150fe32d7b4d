#include "omneg/entangle.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <Eigen/SparseCore>
#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "omneg/errors.hpp"

namespace omneg {

namespace {

const cplx I1(0.0, 1.0);

// Ingredients of the reduced 2x2 problem for vacuum-like input.
struct ReducedProblem {
  double omega_q = 0.0;
  std::optional<SpectralFactors> m;  // factors of M (absent when omega_q = 0)
  std::array<Rational, 2> f;         // back-action responses
  std::array<Rational, 2> g;         // force-noise responses
  Eigen::Matrix2d vbb = Eigen::Matrix2d::Zero();
};

Rational real_on_axis(const Rational& r) {
  std::vector<cplx> c = r.numerator().coeffs();
  for (auto& x : c) x = x.real();
  return Rational(Poly(std::move(c)), r.poles());
}

ReducedProblem reduce(OscillatorParams p, NoiseModel model, const SqueezeTransform& sq,
                      double eps) {
  p.validate();
  if (!(p.gamma_m > 0.0)) throw ConfigError("no stationary state: gamma_m must be positive");
  if (!sq.is_frequency_independent())
    throw ConfigError("indicator covers frequency-independent squeezing only");
  if (!sq.is_identity()) {
    if (p.eta < 1.0) throw ConfigError("indicator with both squeezing and detection loss is not supported");
    // A constant symplectic input map is equivalent to rescaling the coupling by sqrt(T1).
    p.omega_q *= std::sqrt(sq.t1(0.0));
  }
  if (p.eta < 1.0) std::tie(p, model) = fold_passive_loss(p, model);

  const double w = p.omega_m, sw = std::sqrt(w);
  const Rational chi = susceptibility_rational(p);
  const Rational absq = chi * chi.conj();
  const Rational chi_f = chi_F_rational(model, p);

  ReducedProblem out;
  out.omega_q = p.omega_q;
  if (!chi_f.is_zero()) {
    out.vbb(0, 0) = w * frequency_integral(chi_f).real();
    out.vbb(1, 1) = frequency_integral(chi_f.times_z(2)).real() / w;
  }
  if (p.omega_q == 0.0) return out;

  const Rational chi_s = model.effective_sensing().as_rational() * cplx(1.0 / w);
  const Rational m = real_on_axis(chi_f + chi_s + absq.times_z() * cplx(-2.0 * p.gamma_m) +
                                  Rational::constant(eps));
  SpectralFactors fm = spectral_factorize(m);
  fm.gain *= p.omega_q;
  out.m = std::move(fm);

  const double q = p.omega_q;
  out.f = {chi * cplx(q * sw), chi.times_z() * cplx(0.0, q / sw)};
  out.g = {chi_f * cplx(q * sw), chi_f.times_z() * cplx(0.0, q / sw)};
  return out;
}

// <x, M^-1 y> for real-in-time x, y given by their spectra.
cplx inner(const ReducedProblem& r, const Rational& x, const Rational& y) {
  if (x.is_zero() || y.is_zero()) return 0.0;
  return half_line_pairing(x, wiener_hopf_solve(*r.m, y));
}

Eigen::Matrix2cd measurement_term(const ReducedProblem& r) {
  Eigen::Matrix2cd pm = Eigen::Matrix2cd::Zero();
  if (!r.m) return pm;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      pm(a, b) = inner(r, r.f[a], r.f[b]) - I1 * inner(r, r.f[a], r.g[b]) +
                 I1 * inner(r, r.g[a], r.f[b]) + inner(r, r.g[a], r.g[b]);
  return pm;
}

IndicatorResult finish(const ReducedProblem& r) {
  IndicatorResult res;
  Eigen::Matrix2cd k;
  k << 0.0, I1, -I1, 0.0;
  res.matrix = r.vbb.cast<cplx>() + k - measurement_term(r);
  res.hermiticity_error = (res.matrix - res.matrix.adjoint()).norm() / res.matrix.norm();
  res.det_value = res.matrix.determinant().real();
  res.entangled = res.det_value < 0.0;
  return res;
}

}  // namespace

std::vector<double> symplectic_eigenvalues(const GaussianState& s) {
  const Eigen::Index n = s.cov.rows();
  if (n % 2 != 0 || s.comm.rows() != n) throw ConfigError("state dimensions are inconsistent");
  Eigen::LLT<Eigen::MatrixXd> llt(s.cov);
  if (llt.info() != Eigen::Success)
    throw NumericalError("covariance is not positive definite; symplectic spectrum undefined");
  const Eigen::SparseMatrix<double> k = s.comm.sparseView();
  const Eigen::MatrixXd kl = k * Eigen::MatrixXd(llt.matrixL());
  // L^T K L is antisymmetric; its singular values are the symplectic eigenvalues, twice each.
  const Eigen::MatrixXd b = llt.matrixU() * kl;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(b);
  if (svd.info() != Eigen::Success) throw NumericalError("singular value solve did not converge");
  std::vector<double> sv(svd.singularValues().data(), svd.singularValues().data() + n);
  std::sort(sv.begin(), sv.end());
  std::vector<double> out;
  for (Eigen::Index j = 0; j + 1 < n; j += 2) out.push_back(0.5 * (sv[j] + sv[j + 1]));
  return out;
}

NegativityResult log_negativity(const GaussianState& s) {
  NegativityResult r;
  r.sympl_spectrum = symplectic_eigenvalues(partial_transpose(s));
  r.min_sympl_eig = r.sympl_spectrum.front();
  for (double l : r.sympl_spectrum) {
    if (l < 1.0) r.log_neg += -std::log(l);
    if (l < 1.0 - kEntangledTolerance) ++r.below_one;
  }
  return r;
}

IndicatorResult indicator(const OscillatorParams& p, const NoiseModel& model,
                          const SqueezeTransform& sq) {
  return finish(reduce(p, model, sq, 0.0));
}

RegularizedIndicator indicator_regularized(const OscillatorParams& p, const NoiseModel& model,
                                           double eps0, int levels) {
  const auto e = extrapolate_to_zero(
      [&](double eps) { return finish(reduce(p, model, SqueezeTransform::none(), eps)).det_value; },
      eps0, levels);
  return {e.value, e.error_estimate, e.value < 0.0};
}

ConditionalResult conditional_state_test(const OscillatorParams& p, const NoiseModel& model) {
  const ReducedProblem r = reduce(p, model, SqueezeTransform::none(), 0.0);
  ConditionalResult out;
  out.lambda = r.vbb.cast<cplx>();
  if (r.m) {
    // Correlation of the record with each oscillator quadrature, split into the
    // symmetrized part and the commutator part (both real in time).
    const std::array<Rational, 2> sym{r.g[0], r.g[1] * cplx(-1.0)};
    const std::array<Rational, 2> com{r.f[0] * cplx(-1.0), r.f[1]};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const cplx a = inner(r, sym[i], sym[j]) - I1 * inner(r, sym[i], com[j]) +
                       I1 * inner(r, com[i], sym[j]) + inner(r, com[i], com[j]);
        out.lambda(i, j) -= a;
      }
  }
  const cplx l12 = out.lambda(0, 1);
  const double l11 = out.lambda(0, 0).real(), l22 = out.lambda(1, 1).real();
  out.uncertainty_gap = l11 * l22 - std::norm(I1 - l12);
  out.real_form = l11 * l22 - l12.real() * l12.real();
  out.violates_uncertainty = out.uncertainty_gap < 0.0;
  return out;
}

NoSensingResult no_sensing_criterion(const OscillatorParams& p, const SpectralFactors& force) {
  p.validate();
  NoSensingResult r;
  const auto poles = p.susceptibility_poles();
  r.overdamped = p.gamma_m >= 2.0 * p.omega_m;
  r.pole = poles.front().value;
  for (const Root& q : poles) {
    if (r.overdamped ? std::abs(q.value.imag()) > std::abs(r.pole.imag()) : q.value.real() > 0.0)
      r.pole = q.value;
  }
  r.minus_factor_sq = std::norm(force.minus_at(r.pole));
  r.entangled = r.minus_factor_sq > p.gamma_m;
  r.resonance_value = (force.plus_at(p.omega_m) * force.minus_at(p.omega_m)).real();
  r.high_q_entangled = r.resonance_value >= 2.0 * p.gamma_m * (1.0 - 1e-12);
  return r;
}

ClosedFormThreshold closed_form_white_threshold(const WhiteNoiseParams& w, const OscillatorParams& p) {
  const double omega_n =
      std::sqrt(w.omega_f * w.omega_f + (1.0 - p.eta) * p.omega_q * p.omega_q / 2.0);
  const double slow = std::max(p.omega_m, p.gamma_m);
  return {omega_n, w.omega_f >= 10.0 * slow && w.omega_s >= 10.0 * slow};
}

ThresholdResult find_threshold(const std::function<double(double)>& metric, double lo, double hi,
                               double rel_tol) {
  if (!(lo > 0.0 && hi > lo)) throw ConfigError("threshold bracket must satisfy 0 < lo < hi");
  const double f_lo = metric(lo), f_hi = metric(hi);
  int evals = 2;
  if ((f_lo < 0.0) == (f_hi < 0.0)) {
    std::ostringstream msg;
    msg << "no transition in range [" << lo << ", " << hi << "]: metric " << f_lo << " and " << f_hi;
    throw NumericalError(msg.str());
  }
  const bool lo_negative = f_lo < 0.0;
  while (hi / lo > 1.0 + rel_tol) {
    const double mid = std::sqrt(lo * hi);
    const double f = metric(mid);
    ++evals;
    if ((f < 0.0) == lo_negative)
      lo = mid;
    else
      hi = mid;
  }
  return {std::sqrt(lo * hi), evals};
}

std::function<double(double)> indicator_metric(const OscillatorParams& p, NoiseFamily family) {
  return [p, family = std::move(family)](double x) { return indicator(p, family(x)).det_value; };
}

NegativityResult discretized_negativity(const OscillatorParams& p, const NoiseModel& model,
                                        const SqueezeTransform& sq, const ModeGrid& grid,
                                        Partition partition) {
  const auto table = build_transfer_table(p, model, sq);
  return log_negativity(build_covariance(table, grid, partition));
}

std::function<double(double)> negativity_metric(const OscillatorParams& p, NoiseFamily family,
                                                const SqueezeTransform& sq, const ModeGrid& grid,
                                                Partition partition) {
  return [=](double x) {
    return discretized_negativity(p, family(x), sq, grid, partition).min_sympl_eig -
           (1.0 - kEntangledTolerance);
  };
}

MonotonicityReport fd_monotonicity_check(const OscillatorParams& p, const NoiseModel& model,
                                         const SqueezeTransform& sq,
                                         const std::vector<double>& omega_q_list,
                                         const ModeGrid& grid, double slack) {
  if (!std::is_sorted(omega_q_list.begin(), omega_q_list.end()))
    throw ConfigError("omega_q list must be increasing");
  MonotonicityReport rep;
  for (double q : omega_q_list) {
    OscillatorParams pq = p;
    pq.omega_q = q;
    const auto r = discretized_negativity(pq, model, sq, grid);
    rep.min_eigs.push_back(r.min_sympl_eig);
    rep.entangled.push_back(r.entangled());
  }
  std::ostringstream msg;
  for (size_t i = 1; i < omega_q_list.size(); ++i) {
    if (rep.entangled[i - 1] && !rep.entangled[i]) {
      rep.up_closed = false;
      msg << "entangled at omega_q = " << omega_q_list[i - 1] << " but not at " << omega_q_list[i]
          << "; ";
    }
    if (rep.min_eigs[i] > rep.min_eigs[i - 1] + slack) {
      rep.ordered = false;
      msg << "min eigenvalue rises from " << rep.min_eigs[i - 1] << " to " << rep.min_eigs[i]
          << " between omega_q = " << omega_q_list[i - 1] << " and " << omega_q_list[i] << "; ";
    }
  }
  rep.violation = msg.str();
  return rep;
}

}  // namespace omneg
