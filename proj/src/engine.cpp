#include "duallif/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "duallif/error.hpp"

namespace duallif {

namespace {

std::string fmt_id(const char* kind, unsigned id, const std::string& what) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s %u: ", kind, id);
  return buf + what;
}

}  // namespace

std::vector<std::string> validate_network(const Network& net) {
  std::vector<std::string> out;
  std::set<unsigned> neuron_ids;
  for (const auto& n : net.neurons) {
    if (!neuron_ids.insert(n.id).second) out.push_back(fmt_id("neuron", n.id, "duplicate id"));
    for (auto& v : validate_neuron_params(n.params)) out.push_back(fmt_id("neuron", n.id, v));
  }
  std::set<unsigned> synapse_ids;
  for (const auto& s : net.synapses) {
    if (!synapse_ids.insert(s.id).second) out.push_back(fmt_id("synapse", s.id, "duplicate id"));
    if (!neuron_ids.count(s.pre))
      out.push_back(fmt_id("synapse", s.id, "pre references unknown neuron " + std::to_string(s.pre)));
    if (!neuron_ids.count(s.post))
      out.push_back(
          fmt_id("synapse", s.id, "post references unknown neuron " + std::to_string(s.post)));
    if (s.pre == s.post) out.push_back(fmt_id("synapse", s.id, "self-loop synapse"));
    for (auto& v : validate_synapse_params(s.params)) out.push_back(fmt_id("synapse", s.id, v));
    if (!(s.g_init >= s.params.g_min && s.g_init <= s.params.g_max))
      out.push_back(fmt_id("synapse", s.id, "initial conductance outside [g_min, g_max]"));
  }
  return out;
}

std::vector<std::string> validate_stimulus(const Stimulus& stim, const Network& net) {
  std::vector<std::string> out;
  std::set<unsigned> ids;
  for (const auto& n : net.neurons) ids.insert(n.id);
  for (const auto& [id, ns] : stim.per_neuron) {
    if (!ids.count(id)) {
      out.push_back(fmt_id("stimulus", id, "unknown neuron"));
      continue;
    }
    for (double t : ns.spikes)
      if (!(t >= 0.0) || !std::isfinite(t))
        out.push_back(fmt_id("stimulus", id, "spike time must be finite and >= 0"));
    auto segs = ns.currents;
    for (const auto& s : segs) {
      if (!(s.t0 >= 0.0) || !(s.t1 > s.t0) || !std::isfinite(s.t1) || !std::isfinite(s.amps))
        out.push_back(fmt_id("stimulus", id, "current segment needs 0 <= t0 < t1, finite amps"));
    }
    std::sort(segs.begin(), segs.end(),
              [](const CurrentSegment& a, const CurrentSegment& b) { return a.t0 < b.t0; });
    for (std::size_t k = 1; k < segs.size(); ++k)
      if (segs[k].t0 < segs[k - 1].t1)
        out.push_back(fmt_id("stimulus", id, "current segments overlap"));
  }
  return out;
}

std::vector<std::string> validate_sim_config(const SimConfig& cfg) {
  std::vector<std::string> out;
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) out.emplace_back("sim: dt must be > 0");
  if (!(cfg.t_end >= 0.0) || !std::isfinite(cfg.t_end)) out.emplace_back("sim: t_end must be >= 0");
  if (cfg.trace_decimation < 1) out.emplace_back("sim: trace_decimation must be >= 1");
  return out;
}

Engine::Engine(Network net, SimConfig cfg) : net_(std::move(net)), cfg_(cfg) {
  auto problems = validate_network(net_);
  auto sim_problems = validate_sim_config(cfg_);
  problems.insert(problems.end(), sim_problems.begin(), sim_problems.end());
  for (const auto& n : net_.neurons)
    if (cfg_.dt > 0.0 && !(n.params.tau_m() > cfg_.dt))
      problems.push_back(fmt_id("neuron", n.id, "leak time constant must exceed dt"));
  if (!problems.empty()) throw ValidationError(std::move(problems));

  std::sort(net_.neurons.begin(), net_.neurons.end(),
            [](const NeuronSpec& a, const NeuronSpec& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < net_.neurons.size(); ++i) neuron_pos_[net_.neurons[i].id] = i;
  for (std::size_t k = 0; k < net_.synapses.size(); ++k) {
    const auto& s = net_.synapses[k];
    synapse_pos_[s.id] = k;
    pre_idx_.push_back(neuron_pos_.at(s.pre));
    post_idx_.push_back(neuron_pos_.at(s.post));
    g_.push_back(s.g_init);
  }
  for (const auto& n : net_.neurons) neurons_.push_back(resting_state(n.params));

  const auto nn = net_.neurons.size();
  pending_spikes_.resize(nn);
  currents_.resize(nn);
  v_port_.assign(nn, 0.0);
  i_node_.assign(nn, 0.0);
  discarded_q_.assign(nn, 0.0);
  v_before_.assign(nn, 0.0);
  i_syn_.assign(net_.synapses.size(), 0.0);

  for (const auto& n : net_.neurons) trace_.neuron_ids.push_back(n.id);
  for (const auto& s : net_.synapses) trace_.synapse_ids.push_back(s.id);
  trace_.record = cfg_.record;
  record_row();
}

std::size_t Engine::neuron_index(unsigned id) const {
  auto it = neuron_pos_.find(id);
  if (it == neuron_pos_.end()) throw ValidationError("unknown neuron " + std::to_string(id));
  return it->second;
}

std::size_t Engine::synapse_index(unsigned id) const {
  auto it = synapse_pos_.find(id);
  if (it == synapse_pos_.end()) throw ValidationError("unknown synapse " + std::to_string(id));
  return it->second;
}

void Engine::add_stimulus(const Stimulus& stim) {
  if (auto v = validate_stimulus(stim, net_); !v.empty()) throw ValidationError(std::move(v));
  for (const auto& [id, ns] : stim.per_neuron) {
    for (double t : ns.spikes) schedule_spike(id, t);
    for (const auto& seg : ns.currents) add_current(id, seg);
  }
}

void Engine::schedule_spike(unsigned neuron_id, double t_onset) {
  if (!(t_onset >= 0.0) || !std::isfinite(t_onset))
    throw ValidationError(fmt_id("stimulus", neuron_id, "spike time must be finite and >= 0"));
  auto& q = pending_spikes_[neuron_index(neuron_id)];
  // Descending order so the earliest onset sits at the back.
  q.insert(std::upper_bound(q.begin(), q.end(), t_onset, std::greater<>()), t_onset);
}

void Engine::add_current(unsigned neuron_id, CurrentSegment seg) {
  auto& segs = currents_[neuron_index(neuron_id)];
  for (const auto& s : segs)
    if (seg.t0 < s.t1 && s.t0 < seg.t1)
      throw ValidationError(fmt_id("stimulus", neuron_id, "current segments overlap"));
  if (!(seg.t0 >= 0.0) || !(seg.t1 > seg.t0))
    throw ValidationError(fmt_id("stimulus", neuron_id, "current segment needs 0 <= t0 < t1"));
  segs.push_back(seg);
}

double Engine::injected_current(std::size_t idx, double t0, double t1) const {
  // Step-averaged, so the delivered charge is exact for any segment alignment.
  double charge = 0.0;
  for (const auto& s : currents_[idx]) {
    const double lo = std::max(t0, s.t0);
    const double hi = std::min(t1, s.t1);
    if (hi > lo) charge += s.amps * (hi - lo);
  }
  return charge / (t1 - t0);
}

void Engine::step() {
  const double dt = cfg_.dt;
  const double t0 = time();
  const double t1 = static_cast<double>(step_ + 1) * dt;
  const double tmid = t0 + 0.5 * dt;
  const double due_slack = 1e-6 * dt;
  const auto nn = neurons_.size();

  for (std::size_t i = 0; i < nn; ++i) {
    auto& q = pending_spikes_[i];
    bool due = false;
    while (!q.empty() && q.back() <= t0 + due_slack) {
      q.pop_back();
      if (due || neurons_[i].mode == Mode::Firing) {
        ++dropped_forced_;
        continue;
      }
      due = true;
    }
    if (due) {
      neurons_[i] = begin_fire(neurons_[i], net_.neurons[i].params, t0);
      trace_.fires.push_back({net_.neurons[i].id, t0, true});
    }
  }

  for (std::size_t i = 0; i < nn; ++i)
    v_port_[i] = port_voltage(neurons_[i], net_.neurons[i].params, tmid);

  std::fill(i_node_.begin(), i_node_.end(), 0.0);
  for (std::size_t k = 0; k < g_.size(); ++k) {
    const double v_pre = v_port_[pre_idx_[k]];
    const double v_post = v_port_[post_idx_[k]];
    const double i = synapse_current(g_[k], v_pre, v_post);
    i_syn_[k] = i;
    i_node_[post_idx_[k]] += i;
    i_node_[pre_idx_[k]] -= i;
    const auto& p = net_.synapses[k].params;
    if (const double dg = plasticity_increment(p, v_post - v_pre, dt); dg != 0.0)
      g_[k] = std::clamp(g_[k] + dg, p.g_min, p.g_max);
  }

  for (std::size_t i = 0; i < nn; ++i) {
    const auto& params = net_.neurons[i].params;
    v_before_[i] = neurons_[i].v_mem;
    if (neurons_[i].mode == Mode::Firing) {
      discarded_q_[i] += i_node_[i] * dt;
      continue;
    }
    const double i_in = i_node_[i] + (currents_[i].empty() ? 0.0 : injected_current(i, t0, t1));
    neurons_[i] = integrate_step(neurons_[i], params, i_in, dt);
  }

  for (std::size_t i = 0; i < nn; ++i) {
    const auto& params = net_.neurons[i].params;
    if (neurons_[i].mode == Mode::Integration &&
        check_fire(neurons_[i], params) == FireDecision::Fire) {
      // The onset is placed at the crossing inside this step, so the spike phase does not
      // carry a grid-sized lag. Its drive still reaches other neurons only from the next step.
      const double v0 = v_before_[i];
      const double v1 = neurons_[i].v_mem;
      const double frac = v0 > params.v_thr && v0 > v1 ? (v0 - params.v_thr) / (v0 - v1) : 1.0;
      const double onset = t0 + std::clamp(frac, 0.0, 1.0) * dt;
      neurons_[i] = begin_fire(neurons_[i], params, onset);
      trace_.fires.push_back({net_.neurons[i].id, onset, false});
    } else if (fire_elapsed(neurons_[i], params, t1)) {
      neurons_[i] = end_fire(neurons_[i], params, t1);
    }
  }

  ++step_;
  if (step_ % cfg_.trace_decimation == 0) record_row();
}

Engine Engine::detached_copy() const {
  Engine copy(Network{}, cfg_);
  copy.net_ = net_;
  copy.neuron_pos_ = neuron_pos_;
  copy.synapse_pos_ = synapse_pos_;
  copy.pre_idx_ = pre_idx_;
  copy.post_idx_ = post_idx_;
  copy.neurons_ = neurons_;
  copy.g_ = g_;
  copy.pending_spikes_ = pending_spikes_;
  copy.currents_ = currents_;
  copy.v_port_ = v_port_;
  copy.i_syn_ = i_syn_;
  copy.i_node_ = i_node_;
  copy.discarded_q_ = discarded_q_;
  copy.v_before_ = v_before_;
  copy.dropped_forced_ = dropped_forced_;
  copy.step_ = step_;
  copy.trace_.neuron_ids = trace_.neuron_ids;
  copy.trace_.synapse_ids = trace_.synapse_ids;
  copy.trace_.record = trace_.record;
  copy.trace_.config_hash = trace_.config_hash;
  copy.trace_.rows.clear();
  return copy;
}

void Engine::run_until(double t) {
  const auto target = static_cast<std::uint64_t>(std::floor(t / cfg_.dt + 1e-6));
  while (step_ < target) step();
}

void Engine::record_row() {
  const auto& rec = cfg_.record;
  TraceRow row;
  row.t = time();
  if (rec.v_mem) {
    row.v_mem.reserve(neurons_.size());
    row.mode.reserve(neurons_.size());
    for (const auto& s : neurons_) {
      row.v_mem.push_back(s.v_mem);
      row.mode.push_back(s.mode);
    }
  }
  if (rec.ports) {
    for (std::size_t i = 0; i < neurons_.size(); ++i)
      row.port.push_back(port_voltage(neurons_[i], net_.neurons[i].params, row.t));
  }
  if (rec.g) row.g = g_;
  trace_.rows.push_back(std::move(row));
}

Trace run(const Network& net, const Stimulus& stim, const SimConfig& cfg) {
  Engine engine(net, cfg);
  engine.add_stimulus(stim);
  engine.run_until(cfg.t_end);
  return engine.take_trace();
}

}  // namespace duallif
