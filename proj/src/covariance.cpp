#include "omneg/covariance.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "omneg/errors.hpp"

namespace omneg {

namespace {

constexpr int idx(Observable o) { return static_cast<int>(o); }
constexpr int idx(Source s) { return static_cast<int>(s); }

// Causal filter whose squared modulus is the given spectrum.
Rational whitening_filter(const RationalSpectrum& s) {
  if (s.is_zero()) return Rational::constant(0.0);
  if (s.is_white()) return Rational::constant(std::sqrt(s(0.0)));
  return spectral_factorize(s.as_rational()).plus();
}

struct GaussRule {
  std::vector<double> nodes;    // on [0, 1]
  std::vector<double> weights;  // summing to 1
};

// Gauss-Legendre rule from the Jacobi matrix eigenproblem.
GaussRule gauss_legendre(int n) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    j(k, k - 1) = j(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  GaussRule g;
  for (int k = 0; k < n; ++k) {
    g.nodes.push_back(0.5 * (es.eigenvalues()[k] + 1.0));
    g.weights.push_back(es.eigenvectors()(0, k) * es.eigenvectors()(0, k));
  }
  return g;
}

class BoxAverager {
 public:
  BoxAverager(double dt, int points) : dt_(dt), rule_(gauss_legendre(points)) {}

  // (1/dt) int_{-dt}^{dt} (dt - |s|) C(delta + s) ds, plus the delta weight at zero lag.
  double overlap(const TimeKernel& c, double delta, bool same_slot) const {
    cplx acc{};
    for (size_t k = 0; k < rule_.nodes.size(); ++k) {
      const double s = dt_ * rule_.nodes[k];
      const double w = rule_.weights[k] * (dt_ - s);
      acc += w * (c(delta + s) + c(delta - s));
    }
    acc += same_slot ? c.delta_weight() : cplx{};
    return acc.real();
  }

  // (1/sqrt dt) int_a^{a+dt} C(tau) dtau.
  double window(const TimeKernel& c, double a) const {
    cplx acc{};
    for (size_t k = 0; k < rule_.nodes.size(); ++k)
      acc += rule_.weights[k] * c(a + dt_ * rule_.nodes[k]);
    return (acc * std::sqrt(dt_)).real();
  }

 private:
  double dt_;
  GaussRule rule_;
};

}  // namespace

Rational TransferTable::cross_spectrum(Observable a, Observable b) const {
  Rational acc = Rational::constant(0.0);
  for (int s = 0; s < kSources; ++s) {
    const Rational& ha = h_[idx(a)][s];
    const Rational& hb = h_[idx(b)][s];
    if (ha.is_zero() || hb.is_zero()) continue;
    acc = acc + ha * hb.conj();
  }
  return acc;
}

double TransferTable::fastest_rate() const {
  double r = 0.0;
  for (const auto& row : h_)
    for (const auto& e : row)
      for (const Root& p : e.poles()) r = std::max(r, std::abs(p.value));
  return r;
}

double TransferTable::slowest_decay() const {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& row : h_)
    for (const auto& e : row)
      for (const Root& p : e.poles()) r = std::min(r, std::abs(p.value.imag()));
  return r;
}

double TransferTable::crossover_rate() const {
  const double w0 = params_.omega_m;
  double best = 0.0;
  for (int k = 0; k <= 900; ++k) {
    const double w = w0 * std::pow(10.0, -3.0 + 9.0 * k / 900.0);
    const double f = chi_F(noise_, params_, w), s = chi_S(noise_, params_, w);
    if (f > 0.0 && s > 0.0 && f >= s) best = w;
  }
  return best;
}

TransferTable build_transfer_table(const OscillatorParams& p, const NoiseModel& model,
                                   const SqueezeTransform& sq) {
  p.validate();
  if (!(p.gamma_m > 0.0)) throw ConfigError("no stationary state: gamma_m must be positive");
  TransferTable t(p, model, sq);
  for (auto& row : t.h_) row.fill(Rational::constant(0.0));

  const Rational chi = susceptibility_rational(p);
  const Rational force = whitening_filter(model.effective_force());
  const Rational sensing = whitening_filter(model.effective_sensing());
  const double sw = std::sqrt(p.omega_m);

  auto& h = t.h_;
  for (Source s : {Source::u1, Source::u2}) {
    const int col = s == Source::u1 ? 0 : 1;
    h[idx(Observable::in1)][idx(s)] = sq.entry(0, col);
    h[idx(Observable::in2)][idx(s)] = sq.entry(1, col);
    h[idx(Observable::b1)][idx(s)] = chi * sq.entry(0, col) * cplx(p.omega_q * sw);
  }
  h[idx(Observable::b1)][idx(Source::force)] = chi * force * cplx(p.omega_m);

  const double couple = p.omega_q / sw;
  const double keep = std::sqrt(p.eta), lose = std::sqrt(1.0 - p.eta);
  for (int s = 0; s < kSources; ++s) {
    const Rational& b1 = h[idx(Observable::b1)][s];
    h[idx(Observable::b2)][s] = b1.times_z() * cplx(0.0, -1.0 / p.omega_m);
    h[idx(Observable::v1)][s] = h[idx(Observable::in1)][s] * keep;
    h[idx(Observable::v2)][s] = (h[idx(Observable::in2)][s] + b1 * couple) * keep;
  }
  h[idx(Observable::v2)][idx(Source::sensing)] = sensing * (couple * keep);
  if (lose > 0.0) {
    h[idx(Observable::v1)][idx(Source::loss1)] = Rational::constant(lose);
    h[idx(Observable::v2)][idx(Source::loss2)] = Rational::constant(lose);
  }
  return t;
}

GridChoice auto_grid(const TransferTable& table, const GridOptions& opt) {
  if (opt.nyquist_factor < 5.0) throw ConfigError("nyquist factor must be at least 5");
  const double cross = table.crossover_rate();
  const double rate = std::max(table.fastest_rate(), cross);
  GridChoice out;
  out.grid.dt = M_PI / (opt.nyquist_factor * rate);
  double horizon = 10.0 / table.slowest_decay();
  if (cross > 0.0) horizon = std::max(horizon, 20.0 / cross);
  const double want = std::ceil(horizon / out.grid.dt);
  if (want > opt.max_modes) {
    out.grid.n_modes = opt.max_modes;
    std::ostringstream msg;
    msg << "horizon capped at " << opt.max_modes * out.grid.dt << " s (wanted " << horizon << " s)";
    out.warning = msg.str();
  } else {
    out.grid.n_modes = std::max(1, static_cast<int>(want));
  }
  return out;
}

Eigen::MatrixXd GaussianState::standard_commutator(int modes) {
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(2 * modes, 2 * modes);
  for (int m = 0; m < modes; ++m) {
    k(2 * m, 2 * m + 1) = 1.0;
    k(2 * m + 1, 2 * m) = -1.0;
  }
  return k;
}

GaussianState GaussianState::from_covariance(Eigen::MatrixXd cov, std::vector<ModeRole> roles) {
  if (cov.rows() != cov.cols() || cov.rows() != 2 * static_cast<Eigen::Index>(roles.size()))
    throw ConfigError("covariance size does not match the mode list");
  GaussianState s;
  s.comm = standard_commutator(static_cast<int>(roles.size()));
  s.cov = std::move(cov);
  s.roles = std::move(roles);
  return s;
}

std::vector<std::string> GaussianState::labels() const {
  std::vector<std::string> out;
  int out_k = 0, in_k = 0;
  for (ModeRole r : roles) {
    switch (r) {
      case ModeRole::oscillator:
        out.emplace_back("b1");
        out.emplace_back("b2");
        break;
      case ModeRole::output:
        out.push_back("v1[" + std::to_string(out_k) + "]");
        out.push_back("v2[" + std::to_string(out_k++) + "]");
        break;
      case ModeRole::input:
        out.push_back("u1[" + std::to_string(in_k) + "]");
        out.push_back("u2[" + std::to_string(in_k++) + "]");
        break;
    }
  }
  return out;
}

GaussianState build_covariance(const TransferTable& table, const ModeGrid& grid,
                               Partition partition, const CovarianceOptions& opt) {
  if (grid.n_modes < 1 || !(grid.dt > 0.0)) throw ConfigError("mode grid needs N >= 1 and dt > 0");
  const double rate = table.fastest_rate();
  if (M_PI / grid.dt < opt.nyquist_factor * rate) {
    std::ostringstream msg;
    msg << "Nyquist violation: rate " << rate << " rad/s needs dt <= "
        << M_PI / (opt.nyquist_factor * rate) << " s";
    throw ConfigError(msg.str());
  }

  const int n = grid.n_modes;
  const bool joint = partition == Partition::joint;
  const int modes = 1 + n + (joint ? n : 0);
  const double dt = grid.dt;
  const BoxAverager box(dt, opt.quadrature_points);

  std::map<std::pair<int, int>, TimeKernel> kernels;
  auto kernel = [&](Observable a, Observable b) -> const TimeKernel& {
    const auto key = std::make_pair(idx(a), idx(b));
    auto it = kernels.find(key);
    if (it == kernels.end())
      it = kernels.emplace(key, TimeKernel(table.cross_spectrum(a, b))).first;
    return it->second;
  };

  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(2 * modes, 2 * modes);
  auto set = [&](int i, int j, double x) {
    v(i, j) = x;
    v(j, i) = x;
  };
  const std::array<Observable, 2> osc{Observable::b1, Observable::b2};
  const std::array<Observable, 2> out{Observable::v1, Observable::v2};
  const std::array<Observable, 2> in{Observable::in1, Observable::in2};
  const int out0 = 2, in0 = 2 + 2 * n;

  for (int i = 0; i < 2; ++i)
    for (int j = i; j < 2; ++j) set(i, j, kernel(osc[i], osc[j])(0.0).real());

  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const TimeKernel& c = kernel(osc[i], out[j]);
      for (int k = 0; k < n; ++k) set(i, out0 + 2 * k + j, box.window(c, k * dt));
      if (!joint) continue;
      const TimeKernel& ci = kernel(osc[i], in[j]);
      for (int m = 0; m < n; ++m) set(i, in0 + 2 * m + j, box.window(ci, -(m + 1) * dt));
    }

  // Toeplitz light blocks: lag index d = l - k.
  auto toeplitz = [&](const std::array<Observable, 2>& obs, int base) {
    for (int i = 0; i < 2; ++i)
      for (int j = i; j < 2; ++j) {
        const TimeKernel& c = kernel(obs[i], obs[j]);
        std::vector<double> lag(2 * n - 1);
        for (int d = -(n - 1); d <= n - 1; ++d) lag[d + n - 1] = box.overlap(c, d * dt, d == 0);
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            if (i == j && l < k) continue;
            set(base + 2 * k + i, base + 2 * l + j, lag[l - k + n - 1]);
          }
      }
  };
  toeplitz(out, out0);
  if (joint) {
    // Input slots sit at +(m + 1/2) dt, output slots at -(k + 1/2) dt.
    for (int i = 0; i < 2; ++i)
      for (int j = i; j < 2; ++j) {
        const TimeKernel& c = kernel(in[i], in[j]);
        std::vector<double> lag(2 * n - 1);
        for (int d = -(n - 1); d <= n - 1; ++d) lag[d + n - 1] = box.overlap(c, d * dt, d == 0);
        for (int m = 0; m < n; ++m)
          for (int l = 0; l < n; ++l) {
            if (i == j && l < m) continue;
            set(in0 + 2 * m + i, in0 + 2 * l + j, lag[m - l + n - 1]);
          }
      }
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const TimeKernel& c = kernel(out[i], in[j]);
        std::vector<double> hankel(2 * n - 1);
        for (int s = 0; s < 2 * n - 1; ++s) hankel[s] = box.overlap(c, -(s + 1) * dt, false);
        for (int k = 0; k < n; ++k)
          for (int m = 0; m < n; ++m) set(out0 + 2 * k + i, in0 + 2 * m + j, hankel[k + m]);
      }
  }

  std::vector<ModeRole> roles{ModeRole::oscillator};
  roles.insert(roles.end(), static_cast<size_t>(n), ModeRole::output);
  if (joint) roles.insert(roles.end(), static_cast<size_t>(n), ModeRole::input);
  return GaussianState::from_covariance(std::move(v), std::move(roles));
}

LossFold apply_passive_loss(const OscillatorParams& p) {
  p.validate();
  LossFold f{p, p.omega_q * p.omega_q * (1.0 - p.eta) / p.omega_m};
  f.params.omega_q = p.omega_q * std::sqrt(p.eta);
  f.params.eta = 1.0;
  return f;
}

std::pair<OscillatorParams, NoiseModel> fold_passive_loss(const OscillatorParams& p,
                                                          const NoiseModel& model) {
  const LossFold f = apply_passive_loss(p);
  NoiseModel m = model;
  m.force = model.effective_force().plus_white(f.extra_force_level);
  m.force_scale = 1.0;
  return {f.params, m};
}

GaussianState partial_transpose(const GaussianState& s) {
  auto it = std::find(s.roles.begin(), s.roles.end(), ModeRole::oscillator);
  if (it == s.roles.end()) throw ConfigError("partial transpose needs the oscillator mode");
  const auto row = 2 * (it - s.roles.begin()) + 1;
  GaussianState t = s;
  t.cov.row(row) *= -1.0;
  t.cov.col(row) *= -1.0;
  return t;
}

double physicality_margin(const GaussianState& s) {
  const Eigen::MatrixXcd h = s.cov.cast<cplx>() + cplx(0.0, 1.0) * s.comm.cast<cplx>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void write_covariance_csv(const GaussianState& s, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open " + path + " for writing");
  const auto labels = s.labels();
  f << "row";
  for (const auto& l : labels) f << ',' << l;
  f << '\n';
  f.precision(17);
  for (Eigen::Index i = 0; i < s.cov.rows(); ++i) {
    f << labels[i];
    for (Eigen::Index j = 0; j < s.cov.cols(); ++j) f << ',' << s.cov(i, j);
    f << '\n';
  }
}

}  // namespace omneg
