#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "omneg/ratfact.hpp"
#include "omneg/spectra.hpp"
#include "omneg/squeeze.hpp"

namespace omneg {

// Independent unit-white sources driving the system.
enum class Source { u1, u2, force, sensing, loss1, loss2 };
// Quadratures whose correlations are modelled.
enum class Observable { b1, b2, v1, v2, in1, in2 };

inline constexpr int kSources = 6;
inline constexpr int kObservables = 6;

class TransferTable {
 public:
  const Rational& response(Observable o, Source s) const {
    return h_[static_cast<int>(o)][static_cast<int>(s)];
  }
  cplx response_at(Observable o, Source s, double omega) const { return response(o, s)(omega); }
  // Symmetrized cross-spectrum sum_s H_a,s conj(H_b,s).
  Rational cross_spectrum(Observable a, Observable b) const;

  const OscillatorParams& params() const { return params_; }
  const NoiseModel& noise() const { return noise_; }
  const SqueezeTransform& squeezer() const { return squeezer_; }

  // Largest pole modulus, slowest decay and the force/sensing crossover frequency.
  double fastest_rate() const;
  double slowest_decay() const;
  double crossover_rate() const;

 private:
  friend TransferTable build_transfer_table(const OscillatorParams&, const NoiseModel&,
                                            const SqueezeTransform&);
  TransferTable(OscillatorParams p, NoiseModel n, SqueezeTransform s)
      : params_(p), noise_(std::move(n)), squeezer_(std::move(s)) {}
  std::array<std::array<Rational, kSources>, kObservables> h_;
  OscillatorParams params_;
  NoiseModel noise_;
  SqueezeTransform squeezer_;
};

TransferTable build_transfer_table(const OscillatorParams& p, const NoiseModel& model,
                                   const SqueezeTransform& sq = SqueezeTransform::none());

struct ModeGrid {
  int n_modes = 1;
  double dt = 0.1;
  double horizon() const { return n_modes * dt; }
};

struct GridOptions {
  double nyquist_factor = 10.0;
  int max_modes = 4096;
};

struct GridChoice {
  ModeGrid grid;
  std::string warning;  // empty unless the horizon was capped
};

// Step from the fastest rate, horizon from correlation decay.
GridChoice auto_grid(const TransferTable& table, const GridOptions& opt = {});

enum class Partition { output_only, joint };
enum class ModeRole { oscillator, output, input };

// Gaussian state with quadratures ordered mode by mode: (x_0, p_0, x_1, p_1, ...).
struct GaussianState {
  Eigen::MatrixXd cov;
  Eigen::MatrixXd comm;
  std::vector<ModeRole> roles;

  int modes() const { return static_cast<int>(roles.size()); }
  static Eigen::MatrixXd standard_commutator(int modes);
  static GaussianState from_covariance(Eigen::MatrixXd cov, std::vector<ModeRole> roles);
  std::vector<std::string> labels() const;
};

struct CovarianceOptions {
  double nyquist_factor = 5.0;
  int quadrature_points = 16;
};

GaussianState build_covariance(const TransferTable& table, const ModeGrid& grid,
                               Partition partition = Partition::output_only,
                               const CovarianceOptions& opt = {});

struct LossFold {
  OscillatorParams params;  // omega_q scaled by sqrt(eta), eta = 1
  double extra_force_level;  // white force level omega_q^2 (1 - eta) / omega_m
};

LossFold apply_passive_loss(const OscillatorParams& p);
// Equivalent lossless system with the extra white force folded into the model.
std::pair<OscillatorParams, NoiseModel> fold_passive_loss(const OscillatorParams& p,
                                                          const NoiseModel& model);

GaussianState partial_transpose(const GaussianState& s);

// Smallest eigenvalue of cov + i comm.
double physicality_margin(const GaussianState& s);

void write_covariance_csv(const GaussianState& s, const std::string& path);

}  // namespace omneg
