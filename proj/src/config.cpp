#include "omneg/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "omneg/errors.hpp"

namespace omneg {

namespace {

using nlohmann::json;

constexpr double kTwoPi = 2.0 * M_PI;

// Cursor into the document that remembers its path for diagnostics.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError((path_.empty() ? std::string("config") : path_) + ": " + what);
  }
  const std::string& path() const { return path_; }
  const json& raw() const { return j_; }
  bool has(const std::string& key) const { return j_.contains(key); }

  Node child(const std::string& key) const {
    if (!j_.contains(key)) Node(j_, join(key)).fail("missing required field");
    return {j_.at(key), join(key)};
  }
  Node element(size_t k) const { return {j_.at(k), path_ + "[" + std::to_string(k) + "]"}; }

  void expect_object(std::initializer_list<const char*> allowed) const {
    if (!j_.is_object()) fail("expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j_.items())
      if (!ok.count(key)) Node(value, join(key)).fail("unknown field");
  }

  double number() const {
    if (!j_.is_number()) fail("expected a number");
    const double v = j_.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }
  double number(const std::string& key) const { return child(key).number(); }
  double number(const std::string& key, double fallback) const {
    return has(key) ? child(key).number() : fallback;
  }
  double positive(const std::string& key) const {
    const double v = number(key);
    if (!(v > 0.0)) child(key).fail("must be positive");
    return v;
  }
  int integer(const std::string& key, int fallback) const {
    if (!has(key)) return fallback;
    const Node n = child(key);
    if (!n.raw().is_number_integer()) n.fail("expected an integer");
    return n.raw().get<int>();
  }
  std::string text(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const Node n = child(key);
    if (!n.raw().is_string()) n.fail("expected a string");
    return n.raw().get<std::string>();
  }
  std::vector<double> numbers() const {
    if (!j_.is_array()) fail("expected an array of numbers");
    std::vector<double> out;
    for (size_t k = 0; k < j_.size(); ++k) out.push_back(element(k).number());
    return out;
  }

 private:
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const json& j_;
  std::string path_;
};

RationalSpectrum spectrum_from(const Node& n) {
  const std::string type = n.text("type", "");
  try {
    if (type == "zero") {
      n.expect_object({"type"});
      return RationalSpectrum::zero();
    }
    if (type == "white") {
      n.expect_object({"type", "level"});
      const double level = n.number("level");
      if (level < 0.0) n.child("level").fail("must be nonnegative");
      return RationalSpectrum::white(level);
    }
    if (type == "rational") {
      n.expect_object({"type", "num", "den", "scale"});
      return RationalSpectrum(n.child("num").numbers(), n.child("den").numbers(), n.number("scale", 1.0));
    }
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    if (msg.rfind(n.path(), 0) == 0) throw;
    n.fail(msg);
  }
  n.child("type").fail("expected \"zero\", \"white\" or \"rational\"");
}

NoiseSpec parse_noise(const Node& n) {
  NoiseSpec s;
  const std::string type = n.text("type", "white");
  if (type == "white") {
    n.expect_object({"type", "omega_f_hz", "omega_s_hz", "force_scale", "sensing_scale"});
    s.white = true;
    s.levels.omega_f = kTwoPi * n.number("omega_f_hz");
    s.levels.omega_s = kTwoPi * n.number("omega_s_hz");
    if (s.levels.omega_f < 0.0) n.child("omega_f_hz").fail("must be nonnegative");
    if (!(s.levels.omega_s > 0.0)) n.child("omega_s_hz").fail("infinite sensing noise (must be positive)");
  } else if (type == "rational") {
    n.expect_object({"type", "force", "sensing", "force_scale", "sensing_scale"});
    s.white = false;
    if (n.has("force")) s.force = spectrum_from(n.child("force"));
    if (n.has("sensing")) s.sensing = spectrum_from(n.child("sensing"));
  } else {
    n.child("type").fail("expected \"white\" or \"rational\"");
  }
  s.force_scale = n.number("force_scale", 1.0);
  s.sensing_scale = n.number("sensing_scale", 1.0);
  if (s.force_scale < 0.0) n.child("force_scale").fail("must be nonnegative");
  if (s.sensing_scale < 0.0) n.child("sensing_scale").fail("must be nonnegative");
  return s;
}

Rational parse_entry(const Node& n) {
  n.expect_object({"num", "den"});
  const auto num = n.child("num").numbers();
  const auto den = n.has("den") ? n.child("den").numbers() : std::vector<double>{1.0};
  if (num.size() > 9 || den.size() > 9) n.fail("degree above 8 is not supported; factor the transform");
  const Poly d = Poly::from_real(den);
  if (d.is_zero()) n.child("den").fail("denominator is zero");
  return Rational::from_polys(Poly::from_real(num), d);
}

SqueezeSpec parse_squeeze(const Node& n) {
  n.expect_object({"type", "r", "theta", "gamma_c_hz", "delta_c_hz", "A", "B", "C", "D"});
  SqueezeSpec s;
  const std::string type = n.text("type", "none");
  s.r = n.number("r", 0.0);
  s.theta = n.number("theta", 0.0);
  if (n.has("gamma_c_hz")) s.gamma_c = kTwoPi * n.number("gamma_c_hz");
  if (n.has("delta_c_hz")) s.delta_c = kTwoPi * n.number("delta_c_hz");
  if (type == "none") {
    s.kind = SqueezeKind::none;
  } else if (type == "constant") {
    s.kind = SqueezeKind::constant;
  } else if (type == "rotation") {
    s.kind = SqueezeKind::rotation;
  } else if (type == "filter_cavity") {
    s.kind = SqueezeKind::filter_cavity;
    if (s.gamma_c.has_value() != s.delta_c.has_value()) n.fail("give both gamma_c_hz and delta_c_hz or neither");
    if (s.gamma_c && !(*s.gamma_c > 0.0)) n.child("gamma_c_hz").fail("must be positive");
  } else if (type == "general") {
    s.kind = SqueezeKind::general;
    const char* names[] = {"A", "B", "C", "D"};
    for (int k = 0; k < 4; ++k) s.general[k] = parse_entry(n.child(names[k]));
    const auto rep = validate_symplectic(s.build({1.0, 0.0, 0.0, 1.0}));
    if (!rep.ok) n.fail("transform is not symplectic: " + rep.message);
  } else {
    n.child("type").fail("expected none, constant, rotation, filter_cavity or general");
  }
  return s;
}

std::vector<double> parse_values(const Node& n) {
  if (n.has("values")) {
    auto v = n.child("values").numbers();
    if (v.empty()) n.child("values").fail("needs at least one value");
    return v;
  }
  const double lo = n.number("from"), hi = n.number("to");
  const int points = n.integer("points", 2);
  if (points < 2) n.child("points").fail("needs at least 2 points");
  const std::string scale = n.text("scale", "lin");
  std::vector<double> v;
  if (!(lo > 0.0 && hi > 0.0)) n.fail("sweep range must be positive");
  if (scale == "log") {
    for (int k = 0; k < points; ++k) v.push_back(lo * std::pow(hi / lo, double(k) / (points - 1)));
  } else if (scale == "lin") {
    for (int k = 0; k < points; ++k) v.push_back(lo + (hi - lo) * k / (points - 1));
  } else {
    n.child("scale").fail("expected \"lin\" or \"log\"");
  }
  return v;
}

void check_param(const Node& n) {
  const std::string name = n.text("param", "");
  const auto& ok = sweepable_parameters();
  if (std::find(ok.begin(), ok.end(), name) == ok.end()) {
    std::string list;
    for (const auto& s : ok) list += (list.empty() ? "" : ", ") + s;
    n.child("param").fail("unknown parameter \"" + name + "\" (expected one of " + list + ")");
  }
}

}  // namespace

NoiseModel NoiseSpec::build(const OscillatorParams& p) const {
  NoiseModel m;
  if (white) {
    m = white_noise_model(levels, p);
  } else {
    m.force = force;
    m.sensing = sensing;
  }
  m.force_scale = force_scale;
  m.sensing_scale = sensing_scale;
  return m;
}

SqueezeTransform SqueezeSpec::build(const OscillatorParams& p) const {
  switch (kind) {
    case SqueezeKind::none:
      return SqueezeTransform::none();
    case SqueezeKind::constant:
      return SqueezeTransform::constant(r);
    case SqueezeKind::rotation:
      return SqueezeTransform::rotation(theta);
    case SqueezeKind::filter_cavity: {
      if (gamma_c) return fd_squeeze_transform(r, *gamma_c, *delta_c);
      const FilterCavity fc = filter_cavity_params(p);
      return fd_squeeze_transform(r, fc.gamma_c, fc.delta_c);
    }
    case SqueezeKind::general:
      return SqueezeTransform::general(general[0], general[1], general[2], general[3]);
  }
  return SqueezeTransform::none();
}

const std::vector<std::string>& sweepable_parameters() {
  static const std::vector<std::string> names{"omega_s_hz", "omega_f_hz",    "omega_q_hz",
                                              "omega_m_hz", "gamma_m_hz",    "eta",
                                              "force_scale", "sensing_scale", "r"};
  return names;
}

Scenario Scenario::with(const std::string& param, double value) const {
  Scenario s = *this;
  if (param == "omega_s_hz" || param == "omega_f_hz") {
    if (!s.noise.white) throw ConfigError(param + " applies to white noise only");
    (param == "omega_s_hz" ? s.noise.levels.omega_s : s.noise.levels.omega_f) = kTwoPi * value;
  } else if (param == "omega_q_hz") {
    s.oscillator.omega_q = kTwoPi * value;
  } else if (param == "omega_m_hz") {
    s.oscillator.omega_m = kTwoPi * value;
  } else if (param == "gamma_m_hz") {
    s.oscillator.gamma_m = kTwoPi * value;
  } else if (param == "eta") {
    s.oscillator.eta = value;
  } else if (param == "force_scale") {
    s.noise.force_scale = value;
  } else if (param == "sensing_scale") {
    s.noise.sensing_scale = value;
  } else if (param == "r") {
    s.squeeze.r = value;
  } else {
    throw ConfigError("unknown parameter " + param);
  }
  s.oscillator.validate();
  return s;
}

RunConfig parse_config(const nlohmann::json& doc) {
  const Node root(doc, "");
  root.expect_object({"oscillator", "detection", "noise", "squeeze", "numerics", "partition", "method", "sweep",
                      "threshold", "figure", "oracle", "seed"});
  RunConfig cfg;
  cfg.source = doc;

  const Node osc = root.child("oscillator");
  osc.expect_object({"omega_m_hz", "gamma_m_hz", "omega_q_hz"});
  OscillatorParams& p = cfg.scenario.oscillator;
  p.omega_m = kTwoPi * osc.positive("omega_m_hz");
  p.gamma_m = kTwoPi * osc.number("gamma_m_hz");
  p.omega_q = kTwoPi * osc.number("omega_q_hz", 0.0);
  if (p.gamma_m < 0.0) osc.child("gamma_m_hz").fail("must be nonnegative");
  if (p.omega_q < 0.0) osc.child("omega_q_hz").fail("must be nonnegative");
  if (root.has("detection")) {
    const Node det = root.child("detection");
    det.expect_object({"eta"});
    p.eta = det.number("eta", 1.0);
    if (!(p.eta > 0.0 && p.eta <= 1.0)) det.child("eta").fail("must lie in (0, 1]");
  }

  cfg.scenario.noise = parse_noise(root.child("noise"));
  if (root.has("squeeze")) cfg.scenario.squeeze = parse_squeeze(root.child("squeeze"));

  if (root.has("numerics")) {
    const Node num = root.child("numerics");
    num.expect_object({"n_modes", "dt", "nyquist_factor", "max_modes"});
    if (num.has("n_modes") || num.has("dt")) {
      const int n = num.integer("n_modes", 0);
      if (n < 1) num.child("n_modes").fail("must be at least 1");
      cfg.grid = ModeGrid{n, num.positive("dt")};
    }
    cfg.grid_options.nyquist_factor = num.number("nyquist_factor", cfg.grid_options.nyquist_factor);
    cfg.grid_options.max_modes = num.integer("max_modes", cfg.grid_options.max_modes);
    if (cfg.grid_options.nyquist_factor < 5.0) num.child("nyquist_factor").fail("must be at least 5");
  }

  const std::string part = root.text("partition", "output");
  if (part == "output") cfg.partition = Partition::output_only;
  else if (part == "joint") cfg.partition = Partition::joint;
  else root.child("partition").fail("expected \"output\" or \"joint\"");

  const std::string method = root.text("method", "both");
  if (method == "indicator") cfg.method = Method::indicator;
  else if (method == "negativity") cfg.method = Method::negativity;
  else if (method == "both") cfg.method = Method::both;
  else root.child("method").fail("expected \"indicator\", \"negativity\" or \"both\"");

  if (root.has("sweep")) {
    const Node sw = root.child("sweep");
    sw.expect_object({"param", "values", "from", "to", "points", "scale"});
    check_param(sw);
    cfg.sweep = SweepSpec{sw.text("param", ""), parse_values(sw)};
  }

  if (root.has("threshold")) {
    const Node th = root.child("threshold");
    th.expect_object({"param", "lo", "hi", "rel_tol"});
    check_param(th);
    ThresholdSpec t{th.text("param", ""), th.positive("lo"), th.positive("hi"), th.number("rel_tol", 1e-3)};
    if (!(t.hi > t.lo)) th.child("hi").fail("must exceed lo");
    if (!(t.rel_tol > 0.0)) th.child("rel_tol").fail("must be positive");
    cfg.threshold = t;
  }

  if (root.has("figure")) {
    const Node fig = root.child("figure");
    fig.expect_object({"eta", "omega_q_hz", "r"});
    if (fig.has("eta")) cfg.figure.etas = fig.child("eta").numbers();
    if (fig.has("omega_q_hz")) cfg.figure.omega_q_hz = fig.child("omega_q_hz").numbers();
    cfg.figure.r = fig.number("r", cfg.figure.r);
  }

  cfg.seed = root.has("seed") ? root.child("seed").raw().get<std::uint64_t>() : 1;
  if (root.has("seed") && !root.child("seed").raw().is_number_unsigned()) root.child("seed").fail("expected a nonnegative integer");

  if (root.has("oracle")) {
    const Node orc = root.child("oracle");
    orc.expect_object({"trajectories", "dt_sim", "burn_in", "n_modes", "dt", "groups", "threads"});
    OracleSpec& o = cfg.oracle;
    o.grid = ModeGrid{orc.integer("n_modes", o.grid.n_modes), orc.number("dt", o.grid.dt)};
    o.sim.n_trajectories = orc.integer("trajectories", 10000);
    o.sim.dt_sim = orc.number("dt_sim", o.grid.dt / 64.0);
    o.sim.burn_in = orc.number("burn_in", p.gamma_m > 0.0 ? 10.0 / p.gamma_m : 0.0);
    o.jackknife_groups = orc.integer("groups", o.jackknife_groups);
    if (o.grid.n_modes < 1) orc.child("n_modes").fail("must be at least 1");
    if (!(o.grid.dt > 0.0)) orc.child("dt").fail("must be positive");
    if (o.jackknife_groups < 2) orc.child("groups").fail("must be at least 2");
  }
  cfg.oracle.sim.seed = cfg.seed;
  return cfg;
}

nlohmann::json read_json(const std::filesystem::path& path) {
  if (path.extension() == ".toml")
    throw ConfigError(path.string() + ": TOML is not supported, use the JSON form of the same schema");
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  try {
    return nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path) { return parse_config(read_json(path)); }

RationalSpectrum parse_spectrum(const nlohmann::json& doc) { return spectrum_from(Node(doc, "spectrum")); }

std::string config_hash(const nlohmann::json& doc) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : doc.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << h;
  return out.str();
}

}  // namespace omneg
