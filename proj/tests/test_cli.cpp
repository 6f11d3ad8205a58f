#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "approx.hpp"
#include "duallif/cli.hpp"
#include "duallif/trace_io.hpp"
#include "duallif/waveform.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "duallif");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code =
      duallif::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "duallif_cli_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) { return duallif::read_text_file(p); }

std::vector<std::vector<double>> read_csv(const fs::path& p, std::string* header = nullptr) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  if (header) *header = line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

bool one_error_line(const std::string& err, const std::string& kind) {
  return err.rfind("error: " + kind + ": ", 0) == 0 &&
         std::count(err.begin(), err.end(), '\n') == 1;
}

}  // namespace

TEST_CASE("waveform: CSV extremes, empty-support window and energy re-integration") {
  const auto dir = scratch("waveform");
  const auto r = cli({"waveform", "--out", dir.string()});
  REQUIRE(r.code == 0);
  CHECK(r.err.empty());
  std::string header;
  const auto rows = read_csv(dir / "waveform.csv", &header);
  CHECK(header == "t_s,v_spk_V");
  double vmax = -1.0, vmin = 1.0;
  for (const auto& row : rows) {
    vmax = std::max(vmax, row[1]);
    vmin = std::min(vmin, row[1]);
  }
  CHECK(vmax == rel(0.3, 1e-9));
  CHECK(vmin == rel(-0.1, 1e-3));

  // trapezoid over the sampled spike against the closed form
  double e = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i)
    e += 0.5 * (rows[i][1] * rows[i][1] + rows[i - 1][1] * rows[i - 1][1]) *
         (rows[i][0] - rows[i - 1][0]);
  CHECK(e / 1e6 == rel(duallif::energy_into_load(duallif::default_shape(), 1e6), 5e-3));

  const auto pair = read_csv(dir / "pair.csv", &header);
  CHECK(header == "t_s,v_pre_V,v_post_V,v_net_V");
  for (const auto& row : pair) CHECK(row[3] == rel(row[2] - row[1], 1e-9));

  const json summary = json::parse(slurp(dir / "waveform_summary.json"));
  const double w = summary.at("over_threshold_window_s").get<double>();
  CHECK(w > 0.32e-6);
  CHECK(w < 0.48e-6);

  const auto quiet = scratch("waveform_quiet");
  REQUIRE(cli({"waveform", "--out", quiet.string(), "--set", "waveform.t_start=5e-6", "--set",
               "waveform.t_end=6e-6"})
              .code == 0);
  for (const auto& row : read_csv(quiet / "waveform.csv")) CHECK(row[1] == 0.0);
}

TEST_CASE("stdp: curve file and probe agreement") {
  const auto dir = scratch("stdp");
  const auto r = cli({"stdp", "--out", dir.string()});
  REQUIRE(r.code == 0);
  std::string header;
  const auto rows = read_csv(dir / "stdp.csv", &header);
  CHECK(header == "delta_t_s,delta_g_S,delta_g_rel");
  CHECK(rows.size() == 121);
  const json summary = json::parse(slurp(dir / "stdp_summary.json"));
  CHECK(summary.at("probes_agree").get<bool>());
}

TEST_CASE("run: traces, manifest and byte-identical replay") {
  const auto dir = scratch("run");
  std::ofstream(dir / "net.json") << R"({"neurons": [{"id": 1}, {"id": 2}],
    "synapses": [{"id": 1, "pre": 1, "post": 2, "r_init": 51000}]})";
  std::ofstream(dir / "stim.json") << R"({"neurons": [{"id": 1, "spikes": [1e-6]}]})";
  const auto a = dir / "a";
  const auto r = cli({"run", "--network", (dir / "net.json").string(), "--stimulus",
                      (dir / "stim.json").string(), "--set", "sim.t_end=2e-5", "--decimate", "5",
                      "--out", a.string()});
  REQUIRE(r.code == 0);
  std::string header;
  const auto rows = read_csv(a / "trace.csv", &header);
  CHECK(header == "t_s,v_mem_1,mode_1,v_mem_2,mode_2,g_S_1,r_ohm_1");
  CHECK(rows.size() == 401);
  const auto fires = read_csv(a / "fires.csv", &header);
  CHECK(header == "neuron_id,t_onset_s");
  REQUIRE(fires.size() == 2);
  CHECK(fires[1][0] == 2.0);

  const json manifest = json::parse(slurp(a / "manifest.json"));
  CHECK(manifest.at("command") == "run");
  CHECK(manifest.at("config_hash").get<std::string>().size() == 16);

  const auto b = dir / "b";
  REQUIRE(cli({"run", "--config", (a / "manifest.json").string(), "--out", b.string()}).code == 0);
  CHECK(slurp(a / "trace.csv") == slurp(b / "trace.csv"));
  CHECK(slurp(a / "fires.csv") == slurp(b / "fires.csv"));
  CHECK(json::parse(slurp(b / "manifest.json")).at("config_hash") == manifest.at("config_hash"));
}

TEST_CASE("pavlov: report") {
  const auto dir = scratch("pavlov");
  REQUIRE(cli({"pavlov", "--out", dir.string()}).code == 0);
  const json rep = json::parse(slurp(dir / "report.json"));
  CHECK(rep.at("passed").get<bool>());
  CHECK(fs::exists(dir / "trace.csv"));
  CHECK(fs::exists(dir / "fires.csv"));
}

TEST_CASE("energy: report on stdout") {
  const auto r = cli({"energy", "--set", "energy.r_load=1e6"});
  REQUIRE(r.code == 0);
  const json rep = json::parse(r.out);
  CHECK(rep.at("below_measured").get<bool>());
  CHECK_FALSE(rep.at("caveat").get<std::string>().empty());
  CHECK(cli({"energy", "--set", "energy.r_load=0"}).code == 1);
}

TEST_CASE("calibrate: feasible and infeasible") {
  const auto ok = scratch("calibrate_ok");
  REQUIRE(cli({"calibrate", "--out", ok.string()}).code == 0);
  const json rep = json::parse(slurp(ok / "calibration.json"));
  CHECK(rep.at("feasible").get<bool>());
  CHECK(fs::exists(ok / "calibration_log.csv"));

  const auto bad = scratch("calibrate_bad");
  const auto r = cli({"calibrate", "--out", bad.string(), "--set", "calibrate.window=6e-7"});
  CHECK(r.code == 1);
  CHECK(one_error_line(r.err, "validation"));
  CHECK(r.err.find("window bound") != std::string::npos);
}

TEST_CASE("exit codes and one-line errors") {
  const auto dir = scratch("errors");
  auto r = cli({"waveform", "--out", dir.string(), "--set", "shape.nope=1"});
  CHECK(r.code == 1);
  CHECK(one_error_line(r.err, "validation"));

  r = cli({"waveform", "--out", dir.string(), "--set", "shape.t_rise=0.4e-6", "--set",
           "shape.t_fall=0.4e-6"});
  CHECK(r.code == 1);
  CHECK(one_error_line(r.err, "validation"));

  r = cli({"waveform", "--config", (dir / "missing.json").string(), "--out", dir.string()});
  CHECK(r.code == 2);
  CHECK(one_error_line(r.err, "io"));

  std::ofstream(dir / "broken.json") << "{ not json";
  r = cli({"waveform", "--config", (dir / "broken.json").string(), "--out", dir.string()});
  CHECK(r.code == 1);
  CHECK(one_error_line(r.err, "validation"));

  std::ofstream(dir / "blocker") << "x";
  r = cli({"waveform", "--out", (dir / "blocker" / "sub").string()});
  CHECK(r.code == 2);
  CHECK(one_error_line(r.err, "io"));

  r = cli({"waveform"});
  CHECK(r.code == 1);
  CHECK(one_error_line(r.err, "validation"));

  r = cli({"bogus"});
  CHECK(r.code == 1);
  CHECK(one_error_line(r.err, "validation"));

  r = cli({"run", "--out", dir.string(), "--dt", "-1"});
  CHECK(r.code == 1);
  CHECK(one_error_line(r.err, "validation"));
}
