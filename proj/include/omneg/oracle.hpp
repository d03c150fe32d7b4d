#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "omneg/covariance.hpp"
#include "omneg/ratfact.hpp"

namespace omneg {

struct SimConfig {
  double dt_sim = 1e-3;
  double duration = 1.0;  // length of a colored stream
  double burn_in = 10.0;
  int n_trajectories = 1000;
  std::uint64_t seed = 1;
  int threads = 1;
};

// Counter-based generator: each (key, counter) pair maps to an independent draw.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);
  std::uint64_t next_u64();
  double uniform();  // (0, 1)
  double normal();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Samples of a Gaussian process with spectrum |R+|^2 at spacing dt_sim.
std::vector<double> colored_noise_stream(const SpectralFactors& factors, const SimConfig& cfg,
                                         std::uint64_t stream = 0);

// Welch-type estimate of the two-sided spectrum at the given angular frequencies.
struct SpectrumEstimate {
  std::vector<double> value;
  std::vector<double> std_error;
};
SpectrumEstimate estimate_spectrum(const std::vector<double>& samples, double dt,
                                   const std::vector<double>& omegas, int segment_length);

struct SampledCovariance {
  Eigen::MatrixXd cov;
  Eigen::MatrixXd std_error;  // delete-one-group jackknife
  std::vector<ModeRole> roles;
  double step = 0.0;
};

// Langevin integration of oscillator plus output light on the given mode grid.
SampledCovariance simulate_covariance(const OscillatorParams& p, const NoiseModel& model,
                                      const SimConfig& cfg, const ModeGrid& grid,
                                      int jackknife_groups = 20);

struct OracleComparison {
  Eigen::MatrixXd z;
  double max_abs_z = 0.0;
  double ks_statistic = 0.0;
  double ks_pvalue = 1.0;
  int entries = 0;
};

OracleComparison compare_to_analytic(const SampledCovariance& sampled, const GaussianState& analytic);

// Asymptotic Kolmogorov distribution tail.
double kolmogorov_pvalue(double d, int n);

}  // namespace omneg
