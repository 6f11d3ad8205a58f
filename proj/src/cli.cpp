#include "duallif/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "duallif/config.hpp"
#include "duallif/error.hpp"
#include "duallif/scenarios.hpp"
#include "duallif/trace_io.hpp"

namespace duallif::cli {

namespace fs = std::filesystem;
using config::json;

namespace {

struct Options {
  std::string command;
  std::string config_path;
  std::vector<std::string> sets;
  std::string out_dir;
  std::optional<double> dt;
  std::optional<unsigned> decimate;
  std::string network_path;
  std::string stimulus_path;
};

json load_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ValidationError(path + ": not valid JSON");
  return j;
}

/// A manifest written by a previous run is accepted as a config: its resolved config is used.
json load_config(const Options& o) {
  if (o.config_path.empty()) return json(nullptr);
  json j = load_json_file(o.config_path);
  if (j.is_object() && j.contains("manifest_version") && j.contains("config")) return j["config"];
  return j;
}

json resolved_config(const Options& o) {
  json doc = config::resolve(load_config(o));
  if (!o.network_path.empty()) {
    json net = load_json_file(o.network_path);
    config::apply_override(doc, "network=" + net.dump());
  }
  if (!o.stimulus_path.empty()) {
    json st = load_json_file(o.stimulus_path);
    config::apply_override(doc, "stimulus=" + st.dump());
  }
  for (const auto& s : o.sets) config::apply_override(doc, s);
  if (o.dt) doc["sim"]["dt"] = *o.dt;
  if (o.decimate) {
    if (o.command == "pavlov") doc["pavlov"]["trace_decimation"] = *o.decimate;
    else doc["sim"]["trace_decimation"] = *o.decimate;
  }
  return doc;
}

fs::path require_out_dir(const Options& o) {
  if (o.out_dir.empty()) throw ValidationError(o.command + ": --out DIR is required");
  std::error_code ec;
  fs::create_directories(o.out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + o.out_dir + ": " + ec.message());
  return fs::path(o.out_dir);
}

class OutputSet {
public:
  OutputSet(const Options& o, const json& resolved) : opts_(o), resolved_(resolved) {}

  void write(const fs::path& path, const std::string& contents) {
    write_text_file(path, contents);
    written_.push_back(path.generic_string());
  }
  void add(const fs::path& path) { written_.push_back(path.generic_string()); }

  void write_manifest(const fs::path& dir) {
    json inputs = json::object();
    if (!opts_.config_path.empty()) inputs["config"] = opts_.config_path;
    if (!opts_.network_path.empty()) inputs["network"] = opts_.network_path;
    if (!opts_.stimulus_path.empty()) inputs["stimulus"] = opts_.stimulus_path;
    json m = {{"manifest_version", 1},
              {"command", opts_.command},
              {"tool_version", config::kToolVersion},
              {"config", resolved_},
              {"config_hash", config::config_hash(resolved_)},
              {"inputs", inputs},
              {"outputs", written_}};
    write_text_file(dir / "manifest.json", m.dump(2) + "\n");
  }

private:
  const Options& opts_;
  const json& resolved_;
  std::vector<std::string> written_;
};

std::string csv_row(std::initializer_list<double> values) {
  std::string line;
  bool first = true;
  for (double v : values) {
    if (!first) line += ',';
    line += format_number(v);
    first = false;
  }
  line += '\n';
  return line;
}

std::vector<double> time_grid(double t0, double t1, double step) {
  if (!(step > 0.0) || !(t1 >= t0)) throw ValidationError("waveform: need step > 0 and t_end >= t_start");
  std::vector<double> ts;
  const auto n = static_cast<long>(std::floor((t1 - t0) / step + 1e-9));
  for (long k = 0; k <= n; ++k) ts.push_back(t0 + static_cast<double>(k) * step);
  return ts;
}

int cmd_waveform(const Options& o, std::ostream& out) {
  const json cfg = resolved_config(o);
  const auto shape = config::shape(cfg);
  const auto thr = config::thresholds(cfg);
  require_valid(shape);
  const auto& w = cfg.at("waveform");
  const double step = w.at("step").get<double>();
  const double delta_t = w.at("delta_t").get<double>();
  const fs::path dir = require_out_dir(o);
  OutputSet outputs(o, cfg);

  std::string csv = "t_s,v_spk_V\n";
  double v_max = -1e300, v_min = 1e300;
  for (double t : time_grid(w.at("t_start").get<double>(), w.at("t_end").get<double>(), step)) {
    const double v = spike_voltage(shape, t);
    v_max = std::max(v_max, v);
    v_min = std::min(v_min, v);
    csv += csv_row({t, v});
  }
  outputs.write(dir / "waveform.csv", csv);

  std::string pair = "t_s,v_pre_V,v_post_V,v_net_V\n";
  // The pair grid covers the pair's own support with a margin, independent of the spike grid.
  const double lo = std::min(0.0, delta_t) - 0.5e-6;
  const double hi = std::max(0.0, delta_t) + shape.duration() + 0.5e-6;
  for (double t : time_grid(lo, hi, step)) {
    const double pre = spike_voltage(shape, t);
    const double post = spike_voltage(shape, t - delta_t);
    pair += csv_row({t, pre, post, post - pre});
  }
  outputs.write(dir / "pair.csv", pair);

  json summary = {{"v_max_V", v_max},
                  {"v_min_V", v_min},
                  {"v_refr_V", shape.v_refr},
                  {"duration_s", shape.duration()},
                  {"delta_t_s", delta_t},
                  {"v_tp_V", thr.v_tp},
                  {"v_tm_V", thr.v_tm},
                  {"over_threshold_window_s", over_threshold_window(shape, thr, delta_t)},
                  {"peak_net_potential_V", peak_net_potential(shape, delta_t)},
                  {"shape_violations", validate_shape(shape, thr)}};
  outputs.write(dir / "waveform_summary.json", summary.dump(2) + "\n");
  outputs.write_manifest(dir);
  out << summary.dump() << '\n';
  return kExitOk;
}

int cmd_stdp(const Options& o, std::ostream& out) {
  const json cfg = resolved_config(o);
  const auto neuron = config::neuron_params(cfg);
  const auto syn = config::synapse_params(cfg);
  const auto settings = config::stdp_settings(cfg);
  const auto sim = config::sim_config(cfg);
  require_valid(neuron.shape, syn.thr);
  if (auto v = validate_synapse_params(syn); !v.empty()) throw ValidationError(std::move(v));
  const fs::path dir = require_out_dir(o);
  OutputSet outputs(o, cfg);

  const auto grid = scenarios::delta_t_grid(settings.dt_min, settings.dt_max, settings.dt_step);
  auto curve = scenarios::stdp_curve(neuron.shape, syn, grid, settings.g_ref);
  scenarios::cross_validate(curve, neuron, syn, settings.probes, sim.dt);

  std::string csv = "delta_t_s,delta_g_S,delta_g_rel\n";
  for (const auto& p : curve.points) csv += csv_row({p.delta_t, p.delta_g, p.delta_g_rel});
  outputs.write(dir / "stdp.csv", csv);

  json probes = json::array();
  for (const auto& p : curve.probes)
    probes.push_back({{"delta_t_s", p.delta_t},
                      {"closed_form_S", p.closed_form},
                      {"simulated_S", p.simulated},
                      {"rel_error", p.rel_error}});
  json summary = {{"points", curve.points.size()},
                  {"g_ref_S", curve.g_ref},
                  {"dt_s", sim.dt},
                  {"probes", probes},
                  {"probe_tolerance", settings.probe_tolerance},
                  {"probes_agree", scenarios::probes_agree(curve, settings.probe_tolerance)}};
  outputs.write(dir / "stdp_summary.json", summary.dump(2) + "\n");
  outputs.write_manifest(dir);
  out << summary.dump() << '\n';
  return kExitOk;
}

int cmd_run(const Options& o, std::ostream& out) {
  const json cfg = resolved_config(o);
  const auto net = config::network(cfg);
  const auto stim = config::stimulus(cfg);
  const auto sim = config::sim_config(cfg);
  if (auto v = validate_stimulus(stim, net); !v.empty()) throw ValidationError(std::move(v));
  const fs::path dir = require_out_dir(o);
  OutputSet outputs(o, cfg);

  Trace trace = run(net, stim, sim);
  trace.config_hash = config::config_hash(cfg);
  write_trace_files(trace, dir);
  outputs.add(dir / "trace.csv");
  if (trace.record.fires) outputs.add(dir / "fires.csv");
  outputs.write_manifest(dir);
  out << json{{"rows", trace.rows.size()},
              {"fires", trace.fires.size()},
              {"config_hash", trace.config_hash}}
             .dump()
      << '\n';
  return kExitOk;
}

int cmd_pavlov(const Options& o, std::ostream& out) {
  const json cfg = resolved_config(o);
  const auto pc = config::pavlov_config(cfg);
  const fs::path dir = require_out_dir(o);
  OutputSet outputs(o, cfg);

  auto report = scenarios::run_pavlov(pc);
  report.trace.config_hash = config::config_hash(cfg);
  json rj = config::to_json(report);
  rj["config_hash"] = report.trace.config_hash;
  outputs.write(dir / "report.json", rj.dump(2) + "\n");
  write_trace_files(report.trace, dir);
  outputs.add(dir / "trace.csv");
  if (report.trace.record.fires) outputs.add(dir / "fires.csv");
  outputs.write_manifest(dir);
  out << json{{"assertions", rj["assertions"]},
              {"trials_run", report.trials_run},
              {"passed", report.passed()}}
             .dump()
      << '\n';
  return kExitOk;
}

int cmd_energy(const Options& o, std::ostream& out) {
  const json cfg = resolved_config(o);
  const auto shape = config::shape(cfg);
  const auto& e = cfg.at("energy");
  const double r_load = e.at("r_load").get<double>();
  const double n = e.at("n_synapses").get<double>();
  if (!(n >= 1.0) || n != std::floor(n)) throw ValidationError("energy.n_synapses must be an integer >= 1");
  const auto report = scenarios::energy_report(shape, r_load, static_cast<unsigned>(n));
  const json rj = config::to_json(report);
  if (!o.out_dir.empty()) {
    const fs::path dir = require_out_dir(o);
    OutputSet outputs(o, cfg);
    outputs.write(dir / "energy.json", rj.dump(2) + "\n");
    outputs.write_manifest(dir);
  }
  out << rj.dump(2) << '\n';
  return kExitOk;
}

int cmd_calibrate(const Options& o, std::ostream& out) {
  const json cfg = resolved_config(o);
  const auto targets = config::calibration_targets(cfg);
  const auto report = scenarios::calibrate_shape(targets);
  const json rj = config::to_json(report);
  if (!o.out_dir.empty()) {
    const fs::path dir = require_out_dir(o);
    OutputSet outputs(o, cfg);
    outputs.write(dir / "calibration.json", rj.dump(2) + "\n");
    std::string csv = "v_a_plus_V,v_a_minus_V,tau_decay_s,window_s,peak_V,accepted,note\n";
    for (const auto& c : report.log)
      csv += format_number(c.v_a_plus) + ',' + format_number(c.v_a_minus) + ',' +
             format_number(c.tau_decay) + ',' + format_number(c.window) + ',' +
             format_number(c.peak) + ',' + (c.accepted ? "1" : "0") + ',' + c.note + '\n';
    outputs.write(dir / "calibration_log.csv", csv);
    outputs.write_manifest(dir);
  }
  if (!report.feasible) throw ValidationError("infeasible calibration targets: " + report.binding_constraint);
  out << json{{"shape", rj["shape"]}, {"window_s", report.window}, {"peak_V", report.peak}}.dump()
      << '\n';
  return kExitOk;
}

std::string one_line(const std::string& s) {
  std::string r = s;
  for (char& c : r)
    if (c == '\n' || c == '\r') c = ' ';
  return r;
}

std::string join(const std::vector<std::string>& v) {
  std::string r;
  for (std::size_t i = 0; i < v.size(); ++i) r += (i ? "; " : "") + v[i];
  return r;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Behavioral simulator for dual-mode LIF neurons with resistive STDP synapses",
               "duallif"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON config (or a manifest.json from a previous run)");
    sub->add_option("--set", o.sets, "Override a config value, key.path=value (repeatable)");
    sub->add_option("--out", o.out_dir, "Output directory");
    sub->add_option("--dt", o.dt, "Simulation time step, seconds");
    sub->add_option("--decimate", o.decimate, "Trace row decimation factor")->check(CLI::PositiveNumber);
  };
  auto* waveform = app.add_subcommand("waveform", "Sample the spike and a spike pair to CSV");
  auto* stdp = app.add_subcommand("stdp", "Closed-form STDP curve, cross-checked by simulation");
  auto* runc = app.add_subcommand("run", "Simulate a network and write traces");
  auto* pavlov = app.add_subcommand("pavlov", "Three-neuron associative learning experiment");
  auto* energy = app.add_subcommand("energy", "Per-spike load dissipation report");
  auto* calibrate = app.add_subcommand("calibrate", "Search a spike shape for pair-window targets");
  for (auto* sub : {waveform, stdp, runc, pavlov, energy, calibrate}) add_common(sub);
  runc->add_option("--network", o.network_path, "Network JSON (replaces the config's network)");
  runc->add_option("--stimulus", o.stimulus_path, "Stimulus JSON (replaces the config's stimulus)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: validation: " << one_line(e.what()) << '\n';
    return kExitValidation;
  }

  try {
    for (auto* sub : app.get_subcommands()) o.command = sub->get_name();
    if (o.command == "waveform") return cmd_waveform(o, out);
    if (o.command == "stdp") return cmd_stdp(o, out);
    if (o.command == "run") return cmd_run(o, out);
    if (o.command == "pavlov") return cmd_pavlov(o, out);
    if (o.command == "energy") return cmd_energy(o, out);
    if (o.command == "calibrate") return cmd_calibrate(o, out);
    err << "error: validation: unknown command\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "error: validation: " << one_line(join(e.violations())) << '\n';
    return kExitValidation;
  } catch (const IoError& e) {
    err << "error: io: " << one_line(e.what()) << '\n';
    return kExitIo;
  } catch (const std::domain_error& e) {
    err << "error: validation: " << one_line(e.what()) << '\n';
    return kExitValidation;
  } catch (const json::exception& e) {
    err << "error: validation: " << one_line(e.what()) << '\n';
    return kExitValidation;
  }
}

}  // namespace duallif::cli
