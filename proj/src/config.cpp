#include "duallif/config.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include "duallif/error.hpp"

namespace duallif::config {

namespace {

// Sections whose contents are free-form lists, replaced wholesale on merge.
const std::set<std::string> kOpaqueSections = {"network", "stimulus"};

void merge_into(json& base, const json& user, const std::string& path,
                std::vector<std::string>& errors) {
  if (!user.is_object()) {
    errors.push_back((path.empty() ? std::string("config") : path) + ": expected an object");
    return;
  }
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key_path = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) {
      errors.push_back(key_path + ": unknown key");
      continue;
    }
    json& slot = base[it.key()];
    const json& v = it.value();
    if (slot.is_object() && !kOpaqueSections.count(key_path)) {
      merge_into(slot, v, key_path, errors);
    } else if (kOpaqueSections.count(key_path)) {
      if (!v.is_object()) errors.push_back(key_path + ": expected an object");
      else slot = v;
    } else if (slot.is_number()) {
      if (!v.is_number() && !v.is_null()) errors.push_back(key_path + ": expected a number");
      else slot = v;
    } else if (slot.is_boolean()) {
      if (!v.is_boolean()) errors.push_back(key_path + ": expected true or false");
      else slot = v;
    } else if (slot.is_array()) {
      if (!v.is_array()) errors.push_back(key_path + ": expected an array");
      else slot = v;
    } else {
      slot = v;
    }
  }
}

double num(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ValidationError(where + "." + key + ": missing");
  const json& v = j.at(key);
  if (!v.is_number()) throw ValidationError(where + "." + key + ": expected a number");
  return v.get<double>();
}

unsigned uint_of(const json& j, const char* key, const std::string& where) {
  const double v = num(j, key, where);
  if (v < 0.0 || v != std::floor(v) || v > 4294967295.0)
    throw ValidationError(where + "." + key + ": expected a non-negative integer");
  return static_cast<unsigned>(v);
}

void require_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  std::vector<std::string> errs;
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) errs.push_back(where + "." + it.key() + ": unknown key");
  if (!errs.empty()) throw ValidationError(std::move(errs));
}

NeuronParams apply_neuron_fields(NeuronParams p, const json& j, const std::string& where) {
  if (j.contains("c_mem")) p.c_mem = num(j, "c_mem", where);
  if (j.contains("r_leaky")) {
    p.r_leaky = j.at("r_leaky").is_null() ? std::numeric_limits<double>::infinity()
                                           : num(j, "r_leaky", where);
  }
  if (j.contains("v_thr")) p.v_thr = num(j, "v_thr", where);
  if (j.contains("v_refr") && !j.at("v_refr").is_null()) p.v_refr = num(j, "v_refr", where);
  if (j.contains("hysteresis")) p.hysteresis = num(j, "hysteresis", where);
  return p;
}

SynapseParams apply_synapse_fields(SynapseParams p, const json& j, const std::string& where) {
  if (j.contains("g_min")) p.g_min = num(j, "g_min", where);
  if (j.contains("g_max")) p.g_max = num(j, "g_max", where);
  if (j.contains("eta_p")) p.eta_p = num(j, "eta_p", where);
  if (j.contains("eta_d")) p.eta_d = num(j, "eta_d", where);
  if (j.contains("v_tp")) p.thr.v_tp = num(j, "v_tp", where);
  if (j.contains("v_tm")) p.thr.v_tm = num(j, "v_tm", where);
  return p;
}

}  // namespace

json to_json(const SpikeShape& s) {
  return {{"v_refr", s.v_refr},       {"v_a_plus", s.v_a_plus}, {"v_a_minus", s.v_a_minus},
          {"t_plus", s.t_plus},       {"t_minus", s.t_minus},   {"tau_decay", s.tau_decay},
          {"t_rise", s.t_rise},       {"t_fall", s.t_fall}};
}

SpikeShape shape_from_json(const json& j) {
  require_keys(j,
               {"v_refr", "v_a_plus", "v_a_minus", "t_plus", "t_minus", "tau_decay", "t_rise",
                "t_fall"},
               "shape");
  SpikeShape s;
  s.v_refr = num(j, "v_refr", "shape");
  s.v_a_plus = num(j, "v_a_plus", "shape");
  s.v_a_minus = num(j, "v_a_minus", "shape");
  s.t_plus = num(j, "t_plus", "shape");
  s.t_minus = num(j, "t_minus", "shape");
  s.tau_decay = num(j, "tau_decay", "shape");
  s.t_rise = num(j, "t_rise", "shape");
  s.t_fall = num(j, "t_fall", "shape");
  return s;
}

json to_json(const PlasticityThresholds& t) { return {{"v_tp", t.v_tp}, {"v_tm", t.v_tm}}; }

json default_config() {
  const auto n = default_neuron_params();
  const auto syn = default_synapse_params();
  const SimConfig sim;
  const scenarios::StdpSettings stdp;
  const scenarios::CalibrationTargets cal;
  const scenarios::PavlovConfig pav;
  return {
      {"shape", to_json(default_shape())},
      {"thresholds", to_json(default_thresholds())},
      {"neuron",
       {{"c_mem", n.c_mem}, {"r_leaky", n.r_leaky}, {"v_thr", n.v_thr},
        {"v_refr", nullptr}, {"hysteresis", n.hysteresis}}},
      {"synapse", {{"g_min", syn.g_min}, {"g_max", syn.g_max}, {"eta_p", syn.eta_p},
                   {"eta_d", syn.eta_d}}},
      {"sim",
       {{"dt", sim.dt},
        {"t_end", sim.t_end},
        {"trace_decimation", sim.trace_decimation},
        {"record", {{"v_mem", true}, {"ports", false}, {"g", true}, {"fires", true}}}}},
      {"network", {{"neurons", json::array()}, {"synapses", json::array()}}},
      {"stimulus", {{"neurons", json::array()}}},
      {"waveform", {{"t_start", -0.5e-6}, {"t_end", 3.5e-6}, {"step", 1e-9}, {"delta_t", 0.5e-6}}},
      {"stdp",
       {{"dt_min", stdp.dt_min},
        {"dt_max", stdp.dt_max},
        {"dt_step", stdp.dt_step},
        {"g_ref", stdp.g_ref},
        {"probes", stdp.probes},
        {"probe_tolerance", stdp.probe_tolerance}}},
      {"energy", {{"r_load", 1e6}, {"n_synapses", 1000}}},
      {"pavlov",
       {{"r1_init", pav.r1_init},
        {"r2_init", pav.r2_init},
        {"max_trials", pav.max_trials},
        {"first_stimulus", pav.first_stimulus},
        {"trial_interval", pav.trial_interval},
        {"probe_offset", pav.probe_offset},
        {"trace_decimation", pav.sim.trace_decimation}}},
      {"calibrate",
       {{"v_tp", cal.v_tp},
        {"v_tm", cal.v_tm},
        {"delta_t", cal.delta_t},
        {"window", cal.window},
        {"window_tolerance", cal.window_tolerance},
        {"peak", cal.peak},
        {"margin", cal.margin},
        {"t_plus", cal.t_plus},
        {"t_minus", cal.t_minus},
        {"amplitude_step", cal.amplitude_step},
        {"tau_min", cal.tau_min},
        {"tau_max", cal.tau_max},
        {"tau_resolution", cal.tau_resolution}}},
  };
}

json resolve(const json& user) {
  json out = default_config();
  if (user.is_null()) return out;
  std::vector<std::string> errors;
  merge_into(out, user, "", errors);
  if (!errors.empty()) throw ValidationError(std::move(errors));
  return out;
}

void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw ValidationError("--set expects key=value, got '" + std::string(assignment) + "'");
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json patch = value;
  std::size_t end = key.size();
  while (true) {
    const auto dot = key.rfind('.', end - 1);
    const std::string part =
        dot == std::string::npos ? key.substr(0, end) : key.substr(dot + 1, end - dot - 1);
    if (part.empty()) throw ValidationError("--set has an empty key segment: '" + key + "'");
    patch = json{{part, patch}};
    if (dot == std::string::npos) break;
    end = dot;
  }
  std::vector<std::string> errors;
  merge_into(doc, patch, "", errors);
  if (!errors.empty()) throw ValidationError(std::move(errors));
}

std::string config_hash(const json& resolved) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : resolved.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

SpikeShape shape(const json& r) { return shape_from_json(r.at("shape")); }

PlasticityThresholds thresholds(const json& r) {
  const auto& t = r.at("thresholds");
  return {num(t, "v_tp", "thresholds"), num(t, "v_tm", "thresholds")};
}

NeuronParams neuron_params(const json& r) {
  NeuronParams p;
  p.shape = shape(r);
  p.v_refr = p.shape.v_refr;
  return apply_neuron_fields(p, r.at("neuron"), "neuron");
}

SynapseParams synapse_params(const json& r) {
  SynapseParams p;
  p.thr = thresholds(r);
  return apply_synapse_fields(p, r.at("synapse"), "synapse");
}

SimConfig sim_config(const json& r) {
  const auto& j = r.at("sim");
  SimConfig c;
  c.dt = num(j, "dt", "sim");
  c.t_end = num(j, "t_end", "sim");
  c.trace_decimation = uint_of(j, "trace_decimation", "sim");
  const auto& rec = j.at("record");
  c.record = {rec.at("v_mem").get<bool>(), rec.at("ports").get<bool>(), rec.at("g").get<bool>(),
              rec.at("fires").get<bool>()};
  return c;
}

Network network(const json& r) {
  const auto& j = r.at("network");
  require_keys(j, {"neurons", "synapses"}, "network");
  const auto base_neuron = neuron_params(r);
  const auto base_synapse = synapse_params(r);
  Network net;
  if (j.contains("neurons")) {
    if (!j.at("neurons").is_array()) throw ValidationError("network.neurons: expected an array");
    for (const auto& n : j.at("neurons")) {
      const std::string where = "network.neurons[]";
      require_keys(n, {"id", "c_mem", "r_leaky", "v_thr", "v_refr", "hysteresis"}, where);
      net.neurons.push_back({uint_of(n, "id", where), apply_neuron_fields(base_neuron, n, where)});
    }
  }
  if (j.contains("synapses")) {
    if (!j.at("synapses").is_array()) throw ValidationError("network.synapses: expected an array");
    for (const auto& s : j.at("synapses")) {
      const std::string where = "network.synapses[]";
      require_keys(s,
                   {"id", "pre", "post", "r_init", "g_init", "g_min", "g_max", "eta_p", "eta_d",
                    "v_tp", "v_tm"},
                   where);
      SynapseSpec spec;
      spec.id = uint_of(s, "id", where);
      spec.pre = uint_of(s, "pre", where);
      spec.post = uint_of(s, "post", where);
      spec.params = apply_synapse_fields(base_synapse, s, where);
      if (s.contains("r_init") == s.contains("g_init"))
        throw ValidationError(where + ": exactly one of r_init or g_init is required");
      spec.g_init = s.contains("g_init") ? num(s, "g_init", where) : 1.0 / num(s, "r_init", where);
      net.synapses.push_back(spec);
    }
  }
  return net;
}

Stimulus stimulus(const json& r) {
  const auto& j = r.at("stimulus");
  require_keys(j, {"neurons"}, "stimulus");
  Stimulus st;
  if (!j.contains("neurons")) return st;
  if (!j.at("neurons").is_array()) throw ValidationError("stimulus.neurons: expected an array");
  for (const auto& n : j.at("neurons")) {
    const std::string where = "stimulus.neurons[]";
    require_keys(n, {"id", "spikes", "currents"}, where);
    auto& ns = st.per_neuron[uint_of(n, "id", where)];
    if (n.contains("spikes")) {
      for (const auto& t : n.at("spikes")) {
        if (!t.is_number()) throw ValidationError(where + ".spikes: expected numbers");
        ns.spikes.push_back(t.get<double>());
      }
    }
    if (n.contains("currents")) {
      for (const auto& c : n.at("currents")) {
        require_keys(c, {"t0", "t1", "amps"}, where + ".currents[]");
        ns.currents.push_back({num(c, "t0", where), num(c, "t1", where), num(c, "amps", where)});
      }
    }
  }
  return st;
}

scenarios::StdpSettings stdp_settings(const json& r) {
  const auto& j = r.at("stdp");
  scenarios::StdpSettings s;
  s.dt_min = num(j, "dt_min", "stdp");
  s.dt_max = num(j, "dt_max", "stdp");
  s.dt_step = num(j, "dt_step", "stdp");
  s.g_ref = num(j, "g_ref", "stdp");
  s.probe_tolerance = num(j, "probe_tolerance", "stdp");
  s.probes.clear();
  for (const auto& p : j.at("probes")) {
    if (!p.is_number()) throw ValidationError("stdp.probes: expected numbers");
    s.probes.push_back(p.get<double>());
  }
  return s;
}

scenarios::CalibrationTargets calibration_targets(const json& r) {
  const auto& j = r.at("calibrate");
  const std::string w = "calibrate";
  scenarios::CalibrationTargets t;
  t.v_tp = num(j, "v_tp", w);
  t.v_tm = num(j, "v_tm", w);
  t.delta_t = num(j, "delta_t", w);
  t.window = num(j, "window", w);
  t.window_tolerance = num(j, "window_tolerance", w);
  t.peak = num(j, "peak", w);
  t.margin = num(j, "margin", w);
  t.t_plus = num(j, "t_plus", w);
  t.t_minus = num(j, "t_minus", w);
  t.amplitude_step = num(j, "amplitude_step", w);
  t.tau_min = num(j, "tau_min", w);
  t.tau_max = num(j, "tau_max", w);
  t.tau_resolution = num(j, "tau_resolution", w);
  return t;
}

scenarios::PavlovConfig pavlov_config(const json& r) {
  const auto& j = r.at("pavlov");
  const std::string w = "pavlov";
  scenarios::PavlovConfig c;
  c.neuron = neuron_params(r);
  c.synapse = synapse_params(r);
  c.r1_init = num(j, "r1_init", w);
  c.r2_init = num(j, "r2_init", w);
  c.max_trials = uint_of(j, "max_trials", w);
  c.first_stimulus = num(j, "first_stimulus", w);
  c.trial_interval = num(j, "trial_interval", w);
  c.probe_offset = num(j, "probe_offset", w);
  c.sim = sim_config(r);
  c.sim.trace_decimation = uint_of(j, "trace_decimation", w);
  return c;
}

namespace {

json phase_json(const scenarios::PavlovPhase& p) {
  json stimuli = json::array();
  for (const auto& s : p.stimuli)
    stimuli.push_back(
        {{"label", s.label}, {"t_s", s.t}, {"neurons", s.neurons}, {"output_fired", s.output_fired}});
  json traj = json::array();
  for (const auto& r : p.bell_resistance) traj.push_back({{"t_s", r.t}, {"r_ohm", r.r_ohm}});
  return {{"label", p.label},
          {"stimuli", stimuli},
          {"output_fires", p.output_fires},
          {"bell_synapse_resistance", traj}};
}

}  // namespace

json to_json(const scenarios::PavlovReport& r) {
  return {{"phases", json::array({phase_json(r.before), phase_json(r.training), phase_json(r.after)})},
          {"trials_run", r.trials_run},
          {"learned_after_trial",
           r.learned_after_trial ? json(*r.learned_after_trial) : json(nullptr)},
          {"assertions",
           {{"before_food_fires_bell_does_not", r.before_ok},
            {"training_bell_resistance_strictly_decreases", r.training_ok},
            {"after_bell_alone_fires", r.after_ok}}},
          {"passed", r.passed()}};
}

json to_json(const scenarios::EnergyReport& r) {
  return {{"r_load_ohm", r.r_load},
          {"n_synapses", r.n_synapses},
          {"energy_per_synapse_J", r.per_synapse},
          {"energy_per_synapse_quadrature_J", r.per_synapse_quadrature},
          {"closed_form_vs_quadrature_rel", r.relative_disagreement},
          {"energy_total_J", r.total},
          {"measured_per_spike_per_synapse_J", r.measured_reference},
          {"below_measured", r.below_reference},
          {"caveat", r.caveat}};
}

json to_json(const scenarios::CalibrationReport& r) {
  json log = json::array();
  for (const auto& c : r.log)
    log.push_back({{"v_a_plus", c.v_a_plus},
                   {"v_a_minus", c.v_a_minus},
                   {"tau_decay", c.tau_decay},
                   {"window_s", c.window},
                   {"peak_V", c.peak},
                   {"accepted", c.accepted},
                   {"note", c.note}});
  json out = {{"feasible", r.feasible}, {"search_log", log}};
  if (r.feasible) {
    out["shape"] = to_json(r.shape);
    out["window_s"] = r.window;
    out["peak_V"] = r.peak;
  } else {
    out["binding_constraint"] = r.binding_constraint;
  }
  return out;
}

}  // namespace duallif::config
