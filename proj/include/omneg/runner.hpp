#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "omneg/config.hpp"
#include "omneg/entangle.hpp"

namespace omneg {

struct RunOptions {
  std::filesystem::path out_dir = ".";
  int threads = 1;
  std::optional<std::filesystem::path> dump_cov;
};

// One evaluated sweep point; absent fields were not computed.
struct PointResult {
  double value = 0.0;
  std::optional<double> log_neg;
  std::optional<double> min_sympl_eig;
  std::optional<double> indicator_det;
  bool entangled = false;
  std::optional<bool> paths_agree;
  double seconds = 0.0;
};

inline constexpr const char* kSweepHeader =
    "swept_param,log_neg,min_sympl_eig,indicator_det,entangled,paths_agree";

std::string format_number(double x);
std::string sweep_row(const PointResult& r);

// Evaluates one scenario with the methods requested in cfg.
PointResult evaluate_point(const RunConfig& cfg, const Scenario& s, double value,
                           const std::filesystem::path* dump_cov = nullptr);

// Parallel evaluation; results keep the order of `values`.
std::vector<PointResult> run_sweep(const RunConfig& cfg, const Scenario& base,
                                   const std::string& param, const std::vector<double>& values,
                                   int threads, const std::filesystem::path* dump_cov = nullptr);

// Threshold of `param` by log bisection with the given method (not `both`).
ThresholdResult scenario_threshold(const RunConfig& cfg, const Scenario& base,
                                   const ThresholdSpec& spec, Method method);

const std::vector<std::string>& verbs();

// Runs a verb; returns the process exit status. Errors propagate as exceptions.
int run_verb(const std::string& verb, const std::filesystem::path& config_path,
             const RunOptions& opt, std::ostream& out, std::ostream& log);

}  // namespace omneg
