#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "duallif/neuron.hpp"
#include "duallif/synapse.hpp"

namespace duallif {

struct NeuronSpec {
  unsigned id = 0;
  NeuronParams params;
};

struct SynapseSpec {
  unsigned id = 0;
  unsigned pre = 0;
  unsigned post = 0;
  SynapseParams params;
  double g_init = 0.0;
};

/// Directed pre -> post topology. Neurons are kept sorted by ascending id.
struct Network {
  std::vector<NeuronSpec> neurons;
  std::vector<SynapseSpec> synapses;
};

std::vector<std::string> validate_network(const Network& net);

/// Piecewise-constant current injected into a neuron's summing node over [t0, t1).
struct CurrentSegment {
  double t0 = 0.0;
  double t1 = 0.0;
  double amps = 0.0;
};

struct NeuronStimulus {
  std::vector<double> spikes;  ///< forced firing onsets, seconds
  std::vector<CurrentSegment> currents;
};

struct Stimulus {
  std::map<unsigned, NeuronStimulus> per_neuron;
};

std::vector<std::string> validate_stimulus(const Stimulus& stim, const Network& net);

struct RecordFlags {
  bool v_mem = true;  ///< v_mem_<id> and mode_<id> columns
  bool ports = false;
  bool g = true;
  bool fires = true;

  bool operator==(const RecordFlags&) const = default;
};

struct SimConfig {
  double dt = 10e-9;
  double t_end = 0.0;
  unsigned trace_decimation = 1;
  RecordFlags record;
};

std::vector<std::string> validate_sim_config(const SimConfig& cfg);

struct FireEvent {
  unsigned neuron_id = 0;
  double t_onset = 0.0;
  bool forced = false;

  bool operator==(const FireEvent&) const = default;
};

struct TraceRow {
  double t = 0.0;
  std::vector<double> v_mem;
  std::vector<Mode> mode;
  std::vector<double> port;
  std::vector<double> g;
};

struct Trace {
  std::vector<unsigned> neuron_ids;
  std::vector<unsigned> synapse_ids;
  RecordFlags record;
  std::vector<TraceRow> rows;
  std::vector<FireEvent> fires;
  std::string config_hash;
};

/// Fixed-step simulator. Step k advances [k*dt, (k+1)*dt) in this order:
///   forced onsets due at k*dt start firing (dropped if the neuron is already firing);
///   port voltages are taken at the step midpoint; every synapse gets its current and
///   V_net = V_post - V_pre; plasticity is applied; integrating neurons integrate the net
///   current at their node (firing neurons discard it); threshold crossings start firing in
///   ascending id order, with the onset interpolated inside the step and the drive visible
///   from step k+1; spikes that have run T_spk end; a row is recorded.
class Engine {
public:
  Engine(Network net, SimConfig cfg);

  void add_stimulus(const Stimulus& stim);
  void schedule_spike(unsigned neuron_id, double t_onset);
  void add_current(unsigned neuron_id, CurrentSegment seg);

  void step();
  /// Steps until the clock reaches t (rounded to the grid).
  void run_until(double t);

  double time() const noexcept { return static_cast<double>(step_) * cfg_.dt; }
  std::uint64_t step_count() const noexcept { return step_; }
  const SimConfig& config() const noexcept { return cfg_; }
  const Network& network() const noexcept { return net_; }

  std::size_t neuron_index(unsigned id) const;
  std::size_t synapse_index(unsigned id) const;
  const NeuronState& neuron(unsigned id) const { return neurons_[neuron_index(id)]; }
  double conductance(unsigned synapse_id) const { return g_[synapse_index(synapse_id)]; }

  /// Per-synapse currents of the last step, positive into the post node.
  std::span<const double> last_synapse_currents() const noexcept { return i_syn_; }
  /// Net synaptic current arriving at each neuron's node during the last step (index order).
  std::span<const double> last_node_currents() const noexcept { return i_node_; }
  /// Charge delivered to firing neurons and never integrated, per neuron (index order).
  std::span<const double> discarded_charge() const noexcept { return discarded_q_; }
  std::uint64_t dropped_forced_spikes() const noexcept { return dropped_forced_; }

  /// Copy of the full simulation state with an empty trace, for what-if continuations.
  Engine detached_copy() const;

  const Trace& trace() const noexcept { return trace_; }
  Trace take_trace() { return std::move(trace_); }

private:
  void record_row();
  double injected_current(std::size_t idx, double t0, double t1) const;

  Network net_;
  SimConfig cfg_;
  std::map<unsigned, std::size_t> neuron_pos_;
  std::map<unsigned, std::size_t> synapse_pos_;
  std::vector<std::size_t> pre_idx_;
  std::vector<std::size_t> post_idx_;

  std::vector<NeuronState> neurons_;
  std::vector<double> g_;
  std::vector<std::vector<double>> pending_spikes_;  // sorted descending, popped from back
  std::vector<std::vector<CurrentSegment>> currents_;

  std::vector<double> v_port_;
  std::vector<double> i_syn_;
  std::vector<double> i_node_;
  std::vector<double> discarded_q_;
  std::vector<double> v_before_;
  std::uint64_t dropped_forced_ = 0;

  std::uint64_t step_ = 0;
  Trace trace_;
};

/// Validate, simulate [0, t_end] and return the trace. Deterministic.
Trace run(const Network& net, const Stimulus& stim, const SimConfig& cfg);

}  // namespace duallif
