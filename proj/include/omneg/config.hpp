#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "omneg/covariance.hpp"
#include "omneg/oracle.hpp"
#include "omneg/spectra.hpp"
#include "omneg/squeeze.hpp"

namespace omneg {

// Noise description that can be rebuilt for any oscillator (white levels depend on omega_m).
struct NoiseSpec {
  bool white = true;
  WhiteNoiseParams levels;          // rad/s, used when white
  RationalSpectrum force = RationalSpectrum::zero();
  RationalSpectrum sensing = RationalSpectrum::zero();
  double force_scale = 1.0;
  double sensing_scale = 1.0;

  NoiseModel build(const OscillatorParams& p) const;
};

struct SqueezeSpec {
  SqueezeKind kind = SqueezeKind::none;
  double r = 0.0;
  double theta = 0.0;
  std::optional<double> gamma_c;  // rad/s; tuned to the oscillator when absent
  std::optional<double> delta_c;
  std::array<Rational, 4> general{Rational::constant(1.0), Rational::constant(0.0),
                                  Rational::constant(0.0), Rational::constant(1.0)};

  SqueezeTransform build(const OscillatorParams& p) const;
};

// One fully specified physical configuration.
struct Scenario {
  OscillatorParams oscillator;
  NoiseSpec noise;
  SqueezeSpec squeeze;

  NoiseModel model() const { return noise.build(oscillator); }
  SqueezeTransform squeezer() const { return squeeze.build(oscillator); }
  // Copy with one named parameter replaced (Hz inputs are converted to rad/s).
  Scenario with(const std::string& param, double value) const;
};

enum class Method { indicator, negativity, both };

struct SweepSpec {
  std::string param;
  std::vector<double> values;
};

struct ThresholdSpec {
  std::string param;
  double lo = 0.0;
  double hi = 0.0;
  double rel_tol = 1e-3;
};

struct FigureSpec {
  std::vector<double> etas;
  std::vector<double> omega_q_hz;
  double r = 1.0;
};

struct OracleSpec {
  SimConfig sim;
  ModeGrid grid{10, 0.05};
  int jackknife_groups = 20;
};

struct RunConfig {
  Scenario scenario;
  std::optional<ModeGrid> grid;  // automatic when absent
  GridOptions grid_options;
  Partition partition = Partition::output_only;
  Method method = Method::both;
  std::optional<SweepSpec> sweep;
  std::optional<ThresholdSpec> threshold;
  FigureSpec figure;
  OracleSpec oracle;
  std::uint64_t seed = 1;
  nlohmann::json source;  // parsed input, used for the provenance hash
};

// Names accepted by Scenario::with and the sweep/threshold sections.
const std::vector<std::string>& sweepable_parameters();

RunConfig parse_config(const nlohmann::json& doc);
// {type: zero | white | rational, ...} as used inside the noise section.
RationalSpectrum parse_spectrum(const nlohmann::json& doc);
nlohmann::json read_json(const std::filesystem::path& path);
RunConfig load_config(const std::filesystem::path& path);

// FNV-1a over the canonical serialization of the parsed document.
std::string config_hash(const nlohmann::json& doc);

}  // namespace omneg
