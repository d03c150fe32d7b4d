#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "omneg/covariance.hpp"

namespace omneg {

// Natural logarithm is used for the negativity.
inline constexpr double kEntangledTolerance = 1e-6;

std::vector<double> symplectic_eigenvalues(const GaussianState& s);

struct NegativityResult {
  double log_neg = 0.0;
  double min_sympl_eig = 1.0;
  std::vector<double> sympl_spectrum;
  int below_one = 0;  // eigenvalues under 1 - kEntangledTolerance
  bool entangled() const { return min_sympl_eig < 1.0 - kEntangledTolerance; }
};

// Partial transpose on the oscillator followed by the symplectic spectrum.
NegativityResult log_negativity(const GaussianState& s);

struct IndicatorResult {
  double det_value = 0.0;
  Eigen::Matrix2cd matrix;
  bool entangled = false;
  double hermiticity_error = 0.0;
};

// Requires a frequency-independent squeezer; losses are folded when no squeezing is present.
IndicatorResult indicator(const OscillatorParams& p, const NoiseModel& model,
                          const SqueezeTransform& sq = SqueezeTransform::none());

// Indicator with the noise spectrum M regularized by eps and extrapolated to eps -> 0.
struct RegularizedIndicator {
  double det_value;
  double error_estimate;
  bool entangled;
};
RegularizedIndicator indicator_regularized(const OscillatorParams& p, const NoiseModel& model,
                                           double eps0, int levels = 4);

struct ConditionalResult {
  Eigen::Matrix2cd lambda;      // conditional second moments
  double uncertainty_gap;       // lambda11 lambda22 - |i - lambda12|^2
  double real_form;             // lambda11 lambda22 - Re(lambda12)^2
  bool violates_uncertainty;    // uncertainty_gap < 0
};

ConditionalResult conditional_state_test(const OscillatorParams& p, const NoiseModel& model);

struct NoSensingResult {
  cplx pole;                    // mechanical pole used
  double minus_factor_sq;       // |S-(pole)|^2
  bool entangled;               // minus_factor_sq > gamma_m
  double resonance_value;       // S(omega_m)
  bool high_q_entangled;        // resonance_value >= 2 gamma_m
  bool overdamped;
};

NoSensingResult no_sensing_criterion(const OscillatorParams& p, const SpectralFactors& force);

struct ClosedFormThreshold {
  double omega_s;     // entangled iff Omega_S exceeds this
  bool free_mass_ok;  // false when Omega_F or Omega_S are not large against omega_m, gamma_m
};

ClosedFormThreshold closed_form_white_threshold(const WhiteNoiseParams& w, const OscillatorParams& p);

struct ThresholdResult {
  double scale;
  int evaluations;
};

// Log-scale bisection on the sign change of a metric that is negative when entangled.
ThresholdResult find_threshold(const std::function<double(double)>& metric, double lo, double hi,
                               double rel_tol = 1e-3);

using NoiseFamily = std::function<NoiseModel(double)>;

// Signed metrics for find_threshold.
std::function<double(double)> indicator_metric(const OscillatorParams& p, NoiseFamily family);
std::function<double(double)> negativity_metric(const OscillatorParams& p, NoiseFamily family,
                                                const SqueezeTransform& sq, const ModeGrid& grid,
                                                Partition partition = Partition::output_only);

// Smallest PT symplectic eigenvalue of the discretized state.
NegativityResult discretized_negativity(const OscillatorParams& p, const NoiseModel& model,
                                        const SqueezeTransform& sq, const ModeGrid& grid,
                                        Partition partition = Partition::output_only);

struct MonotonicityReport {
  bool up_closed = true;
  bool ordered = true;  // min eigenvalue non-increasing along the list
  std::vector<double> min_eigs;
  std::vector<bool> entangled;
  std::string violation;
};

MonotonicityReport fd_monotonicity_check(const OscillatorParams& p, const NoiseModel& model,
                                         const SqueezeTransform& sq,
                                         const std::vector<double>& omega_q_list,
                                         const ModeGrid& grid, double slack = 1e-9);

}  // namespace omneg
