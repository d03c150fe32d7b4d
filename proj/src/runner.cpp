#include "omneg/runner.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "omneg/errors.hpp"
#include "omneg/oracle.hpp"
#include "omneg/ratfact.hpp"

#ifndef OMNEG_VERSION
#define OMNEG_VERSION "0.0.0"
#endif

namespace omneg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string opt_number(const std::optional<double>& x) { return x ? format_number(*x) : ""; }

ModeGrid grid_for(const RunConfig& cfg, const TransferTable& table, std::string* warning) {
  if (cfg.grid) return *cfg.grid;
  const GridChoice choice = auto_grid(table, cfg.grid_options);
  if (warning && !choice.warning.empty()) *warning = choice.warning;
  return choice.grid;
}

// Finest step and longest horizon of the automatic grids at both ends of a range.
ModeGrid common_grid(const RunConfig& cfg, const Scenario& base, const std::string& param, double lo,
                     double hi, std::ostream* log) {
  if (cfg.grid) return *cfg.grid;
  ModeGrid out{1, std::numeric_limits<double>::infinity()};
  double horizon = 0.0;
  for (double x : {lo, hi}) {
    const Scenario s = base.with(param, x);
    const auto table = build_transfer_table(s.oscillator, s.model(), s.squeezer());
    const GridChoice c = auto_grid(table, cfg.grid_options);
    if (log && !c.warning.empty()) *log << "warning: " << c.warning << "\n";
    out.dt = std::min(out.dt, c.grid.dt);
    horizon = std::max(horizon, c.grid.horizon());
  }
  out.n_modes = std::min(cfg.grid_options.max_modes, std::max(1, int(std::ceil(horizon / out.dt))));
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << text;
}

struct Emitter {
  fs::path dir;
  std::vector<std::string> outputs;

  void file(const std::string& name, const std::string& text) {
    write_text(dir / name, text);
    outputs.push_back(name);
  }

  // Vega-lite line chart over a CSV with swept_param on a log axis.
  void descriptor(const std::string& csv, const std::string& x_title, const std::string& y_field,
                  bool has_curve) {
    json enc = {{"x",
                 {{"field", "swept_param"},
                  {"type", "quantitative"},
                  {"scale", {{"type", "log"}}},
                  {"title", x_title}}},
                {"y", {{"field", y_field}, {"type", "quantitative"}}}};
    if (has_curve) enc["color"] = {{"field", "curve"}, {"type", "nominal"}};
    const json spec = {{"$schema", "https://vega.github.io/schema/vega-lite/v5.json"},
                       {"data", {{"url", csv}, {"format", {{"type", "csv"}}}}},
                       {"mark", "line"},
                       {"encoding", enc}};
    const auto stem = fs::path(csv).stem().string();
    file(stem + ".vl.json", spec.dump(2) + "\n");
  }
};

std::string timing_csv(const std::vector<std::pair<std::string, PointResult>>& rows) {
  std::ostringstream out;
  out << "curve,swept_param,seconds\n";
  for (const auto& [curve, r] : rows) out << curve << "," << format_number(r.value) << "," << format_number(r.seconds) << "\n";
  return out.str();
}

std::string y_field(Method m) { return m == Method::indicator ? "indicator_det" : "log_neg"; }

std::string curve_label(const std::vector<std::pair<std::string, double>>& parts) {
  std::string out;
  for (const auto& [k, v] : parts) out += (out.empty() ? "" : " ") + k + "=" + format_number(v);
  return out;
}

std::vector<double> default_log_range(double lo, double hi, int points) {
  std::vector<double> v;
  for (int k = 0; k < points; ++k) v.push_back(lo * std::pow(hi / lo, double(k) / (points - 1)));
  return v;
}

json roots_json(const std::vector<Root>& roots) {
  json out = json::array();
  for (const auto& r : roots)
    out.push_back({{"re", r.value.real()}, {"im", r.value.imag()}, {"multiplicity", r.multiplicity}});
  return out;
}

double characteristic_scale(const SpectralFactors& f) {
  double acc = 0.0;
  int n = 0;
  for (const auto* set : {&f.zeros, &f.poles})
    for (const auto& r : *set) {
      acc += std::log(std::max(std::abs(r.value), 1e-12));
      ++n;
    }
  return n ? std::exp(acc / n) : 1.0;
}

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::string sweep_row(const PointResult& r) {
  std::string out = format_number(r.value);
  out += "," + opt_number(r.log_neg) + "," + opt_number(r.min_sympl_eig) + "," + opt_number(r.indicator_det);
  out += r.entangled ? ",1," : ",0,";
  if (r.paths_agree) out += *r.paths_agree ? "1" : "0";
  return out;
}

PointResult evaluate_point(const RunConfig& cfg, const Scenario& s, double value, const fs::path* dump_cov) {
  const auto start = std::chrono::steady_clock::now();
  PointResult r;
  r.value = value;
  const NoiseModel model = s.model();
  const SqueezeTransform sq = s.squeezer();
  std::optional<bool> by_indicator, by_negativity;

  if (cfg.method != Method::negativity) {
    try {
      if (cfg.partition == Partition::joint) throw ConfigError("the indicator covers the output-only partition");
      const IndicatorResult ind = indicator(s.oscillator, model, sq);
      r.indicator_det = ind.det_value;
      by_indicator = ind.entangled;
    } catch (const ConfigError&) {
      if (cfg.method == Method::indicator) throw;
    }
  }
  if (cfg.method != Method::indicator) {
    const TransferTable table = build_transfer_table(s.oscillator, model, sq);
    const ModeGrid grid = grid_for(cfg, table, nullptr);
    const GaussianState state = build_covariance(table, grid, cfg.partition);
    if (dump_cov) write_covariance_csv(state, dump_cov->string());
    const NegativityResult neg = log_negativity(state);
    r.log_neg = neg.log_neg;
    r.min_sympl_eig = neg.min_sympl_eig;
    by_negativity = neg.entangled();
  }
  r.entangled = by_indicator ? *by_indicator : by_negativity.value_or(false);
  if (by_indicator && by_negativity) r.paths_agree = *by_indicator == *by_negativity;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<PointResult> run_sweep(const RunConfig& cfg, const Scenario& base, const std::string& param,
                                   const std::vector<double>& values, int threads, const fs::path* dump_cov) {
  std::vector<PointResult> out(values.size());
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  auto work = [&] {
    for (size_t k; (k = next++) < values.size();) {
      try {
        const Scenario s = param.empty() ? base : base.with(param, values[k]);
        out[k] = evaluate_point(cfg, s, values[k], k == 0 ? dump_cov : nullptr);
      } catch (...) {
        std::lock_guard lock(failure_lock);
        if (!failure) failure = std::current_exception();
        next = values.size();
      }
    }
  };
  const int n = std::clamp(threads, 1, std::max(1, int(values.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

ThresholdResult scenario_threshold(const RunConfig& cfg, const Scenario& base, const ThresholdSpec& spec,
                                   Method method) {
  if (method == Method::indicator) {
    if (cfg.partition == Partition::joint) throw ConfigError("the indicator covers the output-only partition");
    return find_threshold(
        [&](double x) {
          const Scenario s = base.with(spec.param, x);
          return indicator(s.oscillator, s.model(), s.squeezer()).det_value;
        },
        spec.lo, spec.hi, spec.rel_tol);
  }
  const ModeGrid grid = common_grid(cfg, base, spec.param, spec.lo, spec.hi, nullptr);
  return find_threshold(
      [&](double x) {
        const Scenario s = base.with(spec.param, x);
        return discretized_negativity(s.oscillator, s.model(), s.squeezer(), grid, cfg.partition).min_sympl_eig -
               (1.0 - kEntangledTolerance);
      },
      spec.lo, spec.hi, spec.rel_tol);
}

const std::vector<std::string>& verbs() {
  static const std::vector<std::string> v{"sweep",  "negativity", "indicator", "threshold",
                                          "factorize", "oracle",  "fig2",      "fig3"};
  return v;
}

namespace {

struct Context {
  const RunOptions& opt;
  std::ostream& out;
  std::ostream& log;
  Emitter emit;
};

void report_grid(const RunConfig& cfg, const Scenario& s, Context& ctx) {
  if (cfg.grid || cfg.method == Method::indicator) return;
  std::string warning;
  const auto table = build_transfer_table(s.oscillator, s.model(), s.squeezer());
  const ModeGrid g = grid_for(cfg, table, &warning);
  ctx.log << "auto grid: " << g.n_modes << " modes, dt = " << format_number(g.dt) << " s\n";
  if (!warning.empty()) ctx.log << "warning: " << warning << "\n";
}

std::string cmd_sweep(RunConfig cfg, const std::string& name, Context& ctx) {
  const std::string param = cfg.sweep ? cfg.sweep->param : "";
  const std::vector<double> values = cfg.sweep ? cfg.sweep->values : std::vector<double>{kNaN};
  report_grid(cfg, param.empty() ? cfg.scenario : cfg.scenario.with(param, values.back()), ctx);
  const fs::path* dump = ctx.opt.dump_cov ? &*ctx.opt.dump_cov : nullptr;
  const auto rows = run_sweep(cfg, cfg.scenario, param, values, ctx.opt.threads, dump);

  std::ostringstream csv;
  csv << kSweepHeader << "\n";
  std::vector<std::pair<std::string, PointResult>> timing;
  int disagreements = 0;
  for (const auto& r : rows) {
    csv << sweep_row(r) << "\n";
    timing.emplace_back("", r);
    disagreements += r.paths_agree && !*r.paths_agree;
  }
  ctx.emit.file(name + ".csv", csv.str());
  ctx.emit.file(name + "_timing.csv", timing_csv(timing));
  if (cfg.sweep) ctx.emit.descriptor(name + ".csv", param, y_field(cfg.method), false);
  ctx.out << csv.str();
  if (disagreements) ctx.log << "warning: the two paths disagree at " << disagreements << " point(s)\n";
  return param;
}

void cmd_threshold(const RunConfig& cfg, Context& ctx) {
  if (!cfg.threshold) throw ConfigError("threshold: missing required section");
  const ThresholdSpec& spec = *cfg.threshold;
  std::ostringstream csv;
  csv << "method,param,threshold,evaluations\n";
  for (Method m : {Method::indicator, Method::negativity}) {
    if (cfg.method != Method::both && cfg.method != m) continue;
    const auto t = scenario_threshold(cfg, cfg.scenario, spec, m);
    csv << (m == Method::indicator ? "indicator" : "negativity") << "," << spec.param << ","
        << format_number(t.scale) << "," << t.evaluations << "\n";
  }
  ctx.emit.file("threshold.csv", csv.str());
  ctx.out << csv.str();
}

void cmd_factorize(const json& doc, Context& ctx) {
  const json& body = doc.contains("spectrum") ? doc.at("spectrum") : doc;
  const RationalSpectrum spectrum = parse_spectrum(body);
  const Rational target = spectrum.as_rational();
  const SpectralFactors f = spectral_factorize(target);
  const auto grid = symmetric_log_grid(characteristic_scale(f), 200, 6.0);
  const double residual = reconstruction_error(f, target, grid);
  const json report = {{"gain", f.gain},
                       {"zeros", roots_json(f.zeros)},
                       {"poles", roots_json(f.poles)},
                       {"reconstruction_residual", residual}};
  ctx.emit.file("factorize.json", report.dump(2) + "\n");
  ctx.out << "gain " << format_number(f.gain) << "\n";
  for (const auto& [label, set] : {std::pair{"zero", &f.zeros}, std::pair{"pole", &f.poles}})
    for (const auto& r : *set)
      ctx.out << label << " " << format_number(r.value.real()) << " " << format_number(r.value.imag())
              << " x" << r.multiplicity << "\n";
  ctx.out << "reconstruction residual " << format_number(residual) << "\n";
}

void cmd_oracle(const RunConfig& cfg, Context& ctx) {
  const Scenario& s = cfg.scenario;
  if (s.squeeze.kind != SqueezeKind::none) throw ConfigError("squeeze: the sampler supports vacuum input only");
  const NoiseModel model = s.model();
  SimConfig sim = cfg.oracle.sim;
  sim.threads = ctx.opt.threads;
  const SampledCovariance sampled =
      simulate_covariance(s.oscillator, model, sim, cfg.oracle.grid, cfg.oracle.jackknife_groups);
  const GaussianState analytic = build_covariance(build_transfer_table(s.oscillator, model), cfg.oracle.grid);
  const OracleComparison cmp = compare_to_analytic(sampled, analytic);
  const auto labels = analytic.labels();

  std::ostringstream csv;
  csv << "row,col,analytic,sampled,std_error,z\n";
  for (Eigen::Index i = 0; i < analytic.cov.rows(); ++i)
    for (Eigen::Index j = i; j < analytic.cov.cols(); ++j)
      csv << labels[i] << "," << labels[j] << "," << format_number(analytic.cov(i, j)) << ","
          << format_number(sampled.cov(i, j)) << "," << format_number(sampled.std_error(i, j)) << ","
          << format_number(cmp.z(i, j)) << "\n";
  ctx.emit.file("oracle.csv", csv.str());
  ctx.out << "entries " << cmp.entries << "\nmax_abs_z " << format_number(cmp.max_abs_z) << "\nks_statistic "
          << format_number(cmp.ks_statistic) << "\nks_pvalue " << format_number(cmp.ks_pvalue) << "\n";
}

std::vector<double> omega_s_values(const RunConfig& cfg) {
  if (cfg.sweep) {
    if (cfg.sweep->param != "omega_s_hz") throw ConfigError("sweep.param: figures sweep omega_s_hz");
    return cfg.sweep->values;
  }
  return default_log_range(1.0, 500.0, 60);
}

ThresholdSpec omega_s_bracket(const RunConfig& cfg) {
  if (cfg.threshold) {
    if (cfg.threshold->param != "omega_s_hz") throw ConfigError("threshold.param: figures bisect omega_s_hz");
    return *cfg.threshold;
  }
  return {"omega_s_hz", 1.0, 500.0, 1e-4};
}

void cmd_fig2(const RunConfig& cfg, Context& ctx) {
  if (!cfg.scenario.noise.white) throw ConfigError("noise.type: the figure uses white noise");
  const auto etas = cfg.figure.etas.empty() ? std::vector<double>{1.0, 0.9} : cfg.figure.etas;
  const auto qs = cfg.figure.omega_q_hz.empty() ? std::vector<double>{10.0, 20.0} : cfg.figure.omega_q_hz;
  const auto values = omega_s_values(cfg);
  const ThresholdSpec bracket = omega_s_bracket(cfg);
  const double omega_f_hz = cfg.scenario.noise.levels.omega_f / kTwoPi;

  std::ostringstream csv, th;
  csv << "curve," << kSweepHeader << "\n";
  th << "curve,eta,omega_q_hz,method,threshold_hz,ratio_to_omega_f\n";
  std::vector<std::pair<std::string, PointResult>> timing;
  for (double eta : etas)
    for (double q : qs) {
      const Scenario base = cfg.scenario.with("eta", eta).with("omega_q_hz", q);
      const std::string curve = curve_label({{"eta", eta}, {"omega_q_hz", q}});
      for (const auto& r : run_sweep(cfg, base, "omega_s_hz", values, ctx.opt.threads)) {
        csv << curve << "," << sweep_row(r) << "\n";
        timing.emplace_back(curve, r);
      }
      const auto closed = closed_form_white_threshold(base.noise.levels, base.oscillator);
      th << curve << "," << format_number(eta) << "," << format_number(q) << ",closed_form,"
         << format_number(closed.omega_s / kTwoPi) << "," << format_number(closed.omega_s / kTwoPi / omega_f_hz)
         << "\n";
      for (Method m : {Method::indicator, Method::negativity}) {
        if (cfg.method != Method::both && cfg.method != m) continue;
        const auto t = scenario_threshold(cfg, base, bracket, m);
        th << curve << "," << format_number(eta) << "," << format_number(q) << ","
           << (m == Method::indicator ? "indicator" : "negativity") << "," << format_number(t.scale) << ","
           << format_number(t.scale / omega_f_hz) << "\n";
      }
    }
  ctx.emit.file("fig2.csv", csv.str());
  ctx.emit.file("fig2_thresholds.csv", th.str());
  ctx.emit.file("fig2_timing.csv", timing_csv(timing));
  ctx.emit.descriptor("fig2.csv", "omega_s_hz", y_field(cfg.method), true);
  ctx.out << th.str();
}

void cmd_fig3(const RunConfig& cfg, Context& ctx) {
  const auto qs = cfg.figure.omega_q_hz.empty() ? std::vector<double>{5.0, 10.0} : cfg.figure.omega_q_hz;
  const auto values = omega_s_values(cfg);
  RunConfig run = cfg;
  run.method = Method::both;

  struct Family {
    const char* name;
    bool squeezed;
    Partition partition;
  };
  const Family families[] = {{"vacuum_output", false, Partition::output_only},
                             {"fd_output", true, Partition::output_only},
                             {"fd_joint", true, Partition::joint}};

  std::ostringstream csv, th;
  csv << "curve," << kSweepHeader << "\n";
  th << "curve,omega_q_hz,threshold_hz,evaluations\n";
  std::vector<std::pair<std::string, PointResult>> timing;
  for (double q : qs)
    for (const auto& fam : families) {
      Scenario base = cfg.scenario.with("omega_q_hz", q);
      base.squeeze.kind = fam.squeezed ? SqueezeKind::filter_cavity : SqueezeKind::none;
      base.squeeze.r = fam.squeezed ? cfg.figure.r : 0.0;
      run.partition = fam.partition;
      report_grid(run, base.with("omega_s_hz", values.back()), ctx);
      const std::string curve = std::string(fam.name) + " " + curve_label({{"omega_q_hz", q}});
      for (const auto& r : run_sweep(run, base, "omega_s_hz", values, ctx.opt.threads)) {
        csv << curve << "," << sweep_row(r) << "\n";
        timing.emplace_back(curve, r);
      }
      if (cfg.threshold) {
        const auto t = scenario_threshold(run, base, omega_s_bracket(cfg), Method::negativity);
        th << curve << "," << format_number(q) << "," << format_number(t.scale) << "," << t.evaluations << "\n";
      }
    }
  ctx.emit.file("fig3.csv", csv.str());
  if (cfg.threshold) ctx.emit.file("fig3_thresholds.csv", th.str());
  ctx.emit.file("fig3_timing.csv", timing_csv(timing));
  ctx.emit.descriptor("fig3.csv", "omega_s_hz", "log_neg", true);
  if (cfg.threshold) ctx.out << th.str();
}

}  // namespace

int run_verb(const std::string& verb, const fs::path& config_path, const RunOptions& opt, std::ostream& out,
             std::ostream& log) {
  if (std::find(verbs().begin(), verbs().end(), verb) == verbs().end())
    throw ConfigError("unknown verb " + verb);
  fs::create_directories(opt.out_dir);
  Context ctx{opt, out, log, Emitter{opt.out_dir, {}}};

  const json doc = read_json(config_path);
  json manifest = {{"verb", verb}, {"config_hash", config_hash(doc)}, {"version", OMNEG_VERSION}};
  if (verb == "factorize") {
    cmd_factorize(doc, ctx);
  } else {
    RunConfig cfg = parse_config(doc);
    manifest["seed"] = cfg.seed;
    if (verb == "sweep") {
      if (!cfg.sweep) throw ConfigError("sweep: missing required section");
      manifest["swept_param"] = cmd_sweep(cfg, "sweep", ctx);
    } else if (verb == "negativity" || verb == "indicator") {
      cfg.method = verb == "negativity" ? Method::negativity : Method::indicator;
      manifest["swept_param"] = cmd_sweep(cfg, verb, ctx);
    } else if (verb == "threshold") {
      cmd_threshold(cfg, ctx);
    } else if (verb == "oracle") {
      cmd_oracle(cfg, ctx);
    } else if (verb == "fig2") {
      cmd_fig2(cfg, ctx);
    } else {
      cmd_fig3(cfg, ctx);
    }
  }
  manifest["outputs"] = ctx.emit.outputs;
  manifest["libraries"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                         "." + std::to_string(EIGEN_MINOR_VERSION)},
                           {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                 std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                 std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  manifest["compiler"] = __VERSION__;
  write_text(opt.out_dir / "manifest.json", manifest.dump(2) + "\n");
  return 0;
}

}  // namespace omneg
