#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "duallif/engine.hpp"

namespace duallif::scenarios {

// ---------------------------------------------------------------------------
// STDP characterization

struct StdpPoint {
  double delta_t = 0.0;
  double delta_g = 0.0;      ///< S, signed, unclamped
  double delta_g_rel = 0.0;  ///< delta_g / g_ref
};

struct StdpProbe {
  double delta_t = 0.0;
  double closed_form = 0.0;  ///< pair_weight_change, S
  double simulated = 0.0;    ///< conductance change measured in a two-neuron engine run, S
  double rel_error = 0.0;
};

struct StdpCurve {
  double g_ref = 0.0;
  std::vector<StdpPoint> points;
  std::vector<StdpProbe> probes;
};

struct StdpSettings {
  double dt_min = -6e-6;
  double dt_max = 6e-6;
  double dt_step = 0.1e-6;
  double g_ref = 1e-6;
  std::vector<double> probes{-0.5e-6, 0.3e-6, 0.5e-6};
  double probe_tolerance = 0.01;
};

/// min + k*step for k = 0.. while <= max (tolerant to rounding), with -0 normalized.
std::vector<double> delta_t_grid(double dt_min, double dt_max, double dt_step);

StdpCurve stdp_curve(const SpikeShape& shape, const SynapseParams& params,
                     std::span<const double> delta_t_grid, double g_ref);

/// Forced pre spike at 1 us, forced post spike delta_t later, in a fresh two-neuron engine;
/// returns g_final - g_init.
double simulated_pair_weight_change(const NeuronParams& neuron, const SynapseParams& params,
                                    double g_init, double delta_t, double dt);

/// Fills curve.probes with closed-form vs engine comparisons at the given offsets.
void cross_validate(StdpCurve& curve, const NeuronParams& neuron, const SynapseParams& params,
                    std::span<const double> probes, double dt);

bool probes_agree(const StdpCurve& curve, double tolerance);

// ---------------------------------------------------------------------------
// Spike shape calibration

struct CalibrationTargets {
  double v_tp = 0.34;
  double v_tm = 0.34;
  double delta_t = 0.5e-6;
  double window = 0.4e-6;
  double window_tolerance = 0.2;  ///< relative
  double peak = 0.4;              ///< V_net peak of the pair, i.e. v_a_plus + v_a_minus
  double margin = 0.04;           ///< minimum single-spike distance below each threshold
  double t_plus = 0.5e-6;
  double t_minus = 2.5e-6;
  double amplitude_step = 0.01;
  double tau_min = 10e-9;
  double tau_max = 10e-6;
  double tau_resolution = 1e-9;
};

struct CalibrationCandidate {
  double v_a_plus = 0.0;
  double v_a_minus = 0.0;
  double tau_decay = 0.0;
  double window = 0.0;
  double peak = 0.0;
  bool accepted = false;
  std::string note;
};

struct CalibrationReport {
  bool feasible = false;
  std::string binding_constraint;  ///< set when infeasible
  SpikeShape shape;
  double window = 0.0;
  double peak = 0.0;
  std::vector<CalibrationCandidate> log;
};

/// Deterministic search: v_a_plus on an amplitude grid (largest admissible wins),
/// v_a_minus = peak - v_a_plus, tau_decay by bisection on the tau_resolution grid so the
/// over-threshold window at delta_t is as close to the target as the grid allows.
CalibrationReport calibrate_shape(const CalibrationTargets& targets);

// ---------------------------------------------------------------------------
// Energy

/// Measured per-spike, per-synapse energy of the silicon neuron, J. Includes opamp and bias
/// power that the load-dissipation model does not cover.
inline constexpr double kMeasuredEnergyPerSpikePerSynapse = 9.3e-12;

struct EnergyReport {
  double r_load = 0.0;
  unsigned n_synapses = 0;
  double per_synapse = 0.0;             ///< closed form, J
  double per_synapse_quadrature = 0.0;  ///< J
  double relative_disagreement = 0.0;
  double total = 0.0;  ///< per_synapse * n_synapses
  double measured_reference = kMeasuredEnergyPerSpikePerSynapse;
  bool below_reference = false;
  std::string caveat;
};

EnergyReport energy_report(const SpikeShape& shape, double r_load, unsigned n_synapses);

// ---------------------------------------------------------------------------
// Associative (Pavlovian) learning with three neurons

inline constexpr unsigned kFoodNeuron = 1;        ///< IFN1, unconditioned stimulus
inline constexpr unsigned kBellNeuron = 2;        ///< IFN2, conditioned stimulus
inline constexpr unsigned kSalivationNeuron = 3;  ///< IFN3, output
inline constexpr unsigned kFoodSynapse = 1;       ///< IFN1 -> IFN3
inline constexpr unsigned kBellSynapse = 2;       ///< IFN2 -> IFN3

struct PavlovConfig {
  NeuronParams neuron = default_neuron_params();
  SynapseParams synapse = default_synapse_params();
  double r1_init = 51e3;
  double r2_init = 1e6;
  unsigned max_trials = 30;
  double first_stimulus = 10e-6;
  double trial_interval = 100e-6;  ///< spacing of stimulus slots
  double probe_offset = 50e-6;     ///< bell-alone probe after each co-stimulation
  SimConfig sim{10e-9, 0.0, 10, RecordFlags{}};
};

struct StimulusEvent {
  std::string label;
  double t = 0.0;
  std::vector<unsigned> neurons;
  bool output_fired = false;
};

struct ResistancePoint {
  double t = 0.0;
  double r_ohm = 0.0;
};

struct PavlovPhase {
  std::string label;
  std::vector<StimulusEvent> stimuli;
  unsigned output_fires = 0;
  std::vector<ResistancePoint> bell_resistance;
};

struct PavlovReport {
  PavlovPhase before;
  PavlovPhase training;
  PavlovPhase after;
  unsigned trials_run = 0;
  std::optional<unsigned> learned_after_trial;
  bool before_ok = false;    ///< output fires for food alone, not for bell alone
  bool training_ok = false;  ///< bell synapse resistance strictly decreases trial to trial
  bool after_ok = false;     ///< output fires for bell alone
  Trace trace;

  bool passed() const noexcept { return before_ok && training_ok && after_ok; }
};

Network pavlov_network(const PavlovConfig& cfg);

PavlovReport run_pavlov(const PavlovConfig& cfg);

/// Rate that makes the bell synapse firing-sufficient after `pairings` co-stimulations,
/// from charge balance and the closed-form pair integral at the co-stimulation spike lag.
double learning_rate_for_pairings(const PavlovConfig& cfg, unsigned pairings);

}  // namespace duallif::scenarios
