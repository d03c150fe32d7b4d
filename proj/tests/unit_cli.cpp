#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "omneg/config.hpp"
#include "omneg/errors.hpp"
#include "omneg/runner.hpp"

using namespace omneg;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("omneg_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const json& doc) {
  const fs::path path = dir / "config.json";
  std::ofstream(path) << doc.dump(2);
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args, const fs::path& dir) {
  const char* bin = std::getenv("OMNEG_BIN");
  REQUIRE(bin != nullptr);
  const std::string cmd = std::string(bin) + " " + args + " >" + (dir / "stdout.txt").string() + " 2>" +
                          (dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json trivial_sweep() {
  return {{"oscillator", {{"omega_m_hz", 1.0}, {"gamma_m_hz", 0.2}, {"omega_q_hz", 4.0}}},
          {"noise", {{"type", "white"}, {"omega_f_hz", 4.0}, {"omega_s_hz", 4.0}}},
          {"method", "indicator"},
          {"sweep", {{"param", "omega_s_hz"}, {"values", {1.0, 40.0}}}}};
}

std::string config_error(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("golden sweep output") {
  const auto dir = scratch("golden");
  CHECK(run_cli("sweep --config " + write_config(dir, trivial_sweep()).string() + " --out " + (dir / "out").string(),
                dir) == 0);
  CHECK(slurp(dir / "out" / "sweep.csv") ==
        "swept_param,log_neg,min_sympl_eig,indicator_det,entangled,paths_agree\n"
        "1,,,50.85087748,0,\n"
        "40,,,-3.916242942,1,\n");
  const json manifest = json::parse(slurp(dir / "out" / "manifest.json"));
  CHECK(manifest.at("verb") == "sweep");
  CHECK(manifest.at("swept_param") == "omega_s_hz");
  CHECK(manifest.at("config_hash").get<std::string>().size() == 16);
  CHECK(manifest.at("outputs").size() == 3);
  CHECK(fs::exists(dir / "out" / "sweep.vl.json"));
}

TEST_CASE("reruns are byte identical and independent of worker count") {
  const auto dir = scratch("rerun");
  json doc = trivial_sweep();
  doc["method"] = "both";
  doc["numerics"] = {{"n_modes", 60}, {"dt", 0.02}};
  doc["sweep"] = {{"param", "omega_s_hz"}, {"from", 1.0}, {"to", 40.0}, {"points", 5}, {"scale", "log"}};
  const auto cfg = write_config(dir, doc).string();
  REQUIRE(run_cli("sweep --config " + cfg + " --out " + (dir / "a").string(), dir) == 0);
  REQUIRE(run_cli("sweep --config " + cfg + " --threads 4 --out " + (dir / "b").string(), dir) == 0);
  CHECK(slurp(dir / "a" / "sweep.csv") == slurp(dir / "b" / "sweep.csv"));
  CHECK(slurp(dir / "a" / "manifest.json") == slurp(dir / "b" / "manifest.json"));
  std::istringstream rows(slurp(dir / "a" / "sweep.csv"));
  std::string line;
  std::getline(rows, line);
  int count = 0;
  while (std::getline(rows, line)) {
    ++count;
    CHECK(line.back() == '1');  // both paths agree
  }
  CHECK(count == 5);
}

TEST_CASE("covariance dump carries labelled blocks") {
  const auto dir = scratch("dump");
  json doc = trivial_sweep();
  doc.erase("sweep");
  doc["numerics"] = {{"n_modes", 3}, {"dt", 0.05}};
  const auto cfg = write_config(dir, doc).string();
  REQUIRE(run_cli("negativity --config " + cfg + " --out " + dir.string() + " --dump-cov " + (dir / "cov.csv").string(),
                  dir) == 0);
  const std::string cov = slurp(dir / "cov.csv");
  CHECK(cov.rfind("row,b1,b2,v1[0]", 0) == 0);
  std::istringstream csv(slurp(dir / "negativity.csv"));
  std::string header, row;
  std::getline(csv, header);
  std::getline(csv, row);
  CHECK(row.rfind(",", 0) == 0);  // no swept parameter
}

TEST_CASE("exit codes") {
  const auto dir = scratch("codes");
  json bad = trivial_sweep();
  bad["sweep"]["param"] = "omega_x";
  CHECK(run_cli("sweep --config " + write_config(dir, bad).string(), dir) == 2);
  CHECK(slurp(dir / "stderr.txt").find("sweep.param") != std::string::npos);

  json unphysical = {{"oscillator", {{"omega_m_hz", 1.0}, {"gamma_m_hz", 0.2}, {"omega_q_hz", 1.0}}},
                     {"noise",
                      {{"type", "rational"},
                       {"force", {{"type", "white"}, {"level", 0.01}}},
                       {"sensing", {{"type", "white"}, {"level", 1e-8}}}}},
                     {"method", "indicator"}};
  CHECK(run_cli("indicator --config " + write_config(dir, unphysical).string() + " --out " + dir.string(), dir) == 3);
  CHECK(run_cli("bogus --config " + (dir / "config.json").string(), dir) == 2);
  CHECK(run_cli("sweep --config " + (dir / "missing.json").string(), dir) == 2);
}

TEST_CASE("factorize verb") {
  const auto dir = scratch("factorize");
  const json spectrum = {{"type", "rational"}, {"num", {4.0, 0.0, 1.0}}, {"den", {1.0, 0.0, 0.01, 0.0, 1e-4}}, {"scale", 2.0}};
  REQUIRE(run_cli("factorize --config " + write_config(dir, spectrum).string() + " --out " + dir.string(), dir) == 0);
  const json report = json::parse(slurp(dir / "factorize.json"));
  CHECK(report.at("zeros").size() == 1);
  CHECK(report.at("poles").size() == 2);
  CHECK(report.at("zeros")[0].at("im").get<double>() == doctest::Approx(-2.0));
  CHECK(report.at("reconstruction_residual").get<double>() < 1e-10);
}

TEST_CASE("config diagnostics name the offending field") {
  json doc = trivial_sweep();
  CHECK_NOTHROW(parse_config(doc));

  doc["oscillator"]["omega_mhz"] = 1.0;
  CHECK(config_error(doc).rfind("oscillator.omega_mhz: unknown field", 0) == 0);

  doc = trivial_sweep();
  doc["noise"].erase("omega_s_hz");
  CHECK(config_error(doc).rfind("noise.omega_s_hz: missing", 0) == 0);

  doc = trivial_sweep();
  doc["sweep"] = {{"param", "eta"}, {"from", 0.5}, {"to", 1.0}, {"points", 1}};
  CHECK(config_error(doc).rfind("sweep.points", 0) == 0);

  doc["sweep"] = {{"param", "eta"}, {"from", -0.5}, {"to", 1.0}, {"points", 3}};
  CHECK(config_error(doc).rfind("sweep: sweep range must be positive", 0) == 0);

  doc = trivial_sweep();
  doc["noise"] = {{"type", "rational"}, {"force", {{"type", "rational"}, {"num", {1.0, 1.0}}, {"den", {1.0}}}}};
  CHECK(config_error(doc).rfind("noise.force", 0) == 0);

  doc = trivial_sweep();
  doc["squeeze"] = {{"type", "general"},
                    {"A", {{"num", {2.0}}}},
                    {"B", {{"num", {0.0}}}},
                    {"C", {{"num", {0.0}}}},
                    {"D", {{"num", {2.0}}}}};
  CHECK(config_error(doc).rfind("squeeze: transform is not symplectic", 0) == 0);

  doc = trivial_sweep();
  doc["detection"] = {{"eta", 1.5}};
  CHECK(config_error(doc).rfind("detection.eta", 0) == 0);
}

TEST_CASE("parsed values and parameter overrides") {
  json doc = trivial_sweep();
  doc["sweep"] = {{"param", "omega_q_hz"}, {"from", 1.0}, {"to", 100.0}, {"points", 3}, {"scale", "log"}};
  doc["squeeze"] = {{"type", "filter_cavity"}, {"r", 1.0}};
  const RunConfig cfg = parse_config(doc);
  REQUIRE(cfg.sweep);
  CHECK(cfg.sweep->values[1] == doctest::Approx(10.0));
  CHECK(cfg.scenario.oscillator.omega_m == doctest::Approx(2.0 * M_PI));
  CHECK(cfg.method == Method::indicator);
  CHECK(!cfg.grid);

  const Scenario s = cfg.scenario.with("omega_q_hz", 8.0).with("r", 0.5);
  CHECK(s.oscillator.omega_q == doctest::Approx(16.0 * M_PI));
  CHECK(s.squeezer().kind() == SqueezeKind::filter_cavity);
  CHECK(s.squeezer().r() == 0.5);
  CHECK_THROWS_AS(cfg.scenario.with("eta", 0.0), ConfigError);
  CHECK(config_hash(doc) == config_hash(json::parse(doc.dump())));
  doc["seed"] = 2;
  CHECK(config_hash(doc) != config_hash(cfg.source));
}

TEST_CASE("point evaluation reports both paths") {
  RunConfig cfg = parse_config(trivial_sweep());
  cfg.method = Method::both;
  cfg.grid = ModeGrid{80, 0.02};
  const PointResult far = evaluate_point(cfg, cfg.scenario.with("omega_s_hz", 40.0), 40.0);
  CHECK(far.entangled);
  CHECK(far.log_neg.value() > 0.0);
  CHECK(far.paths_agree.value());
  CHECK(sweep_row(far).rfind("40,", 0) == 0);

  cfg.partition = Partition::joint;
  const PointResult joint = evaluate_point(cfg, cfg.scenario.with("omega_s_hz", 40.0), 40.0);
  CHECK(!joint.indicator_det);
  CHECK(!joint.paths_agree);
  CHECK(format_number(std::nan("")) == "");
  CHECK(format_number(0.1) == "0.1");
}
