#pragma once

#include <string>
#include <vector>

#include "duallif/waveform.hpp"

namespace duallif {

/// Dual-mode leaky integrate-and-fire neuron built around one opamp.
///
/// Integration: the opamp is an inverting leaky integrator whose summing node is a virtual
/// ground at v_refr, so injected current pulls v_mem down. Firing starts once v_mem <= v_thr
/// (v_thr < v_refr); the opamp then buffers the spike onto both ports for T_spk while C_mem
/// is held discharged.
struct NeuronParams {
  double c_mem = 10e-12;
  double r_leaky = 10e6;  ///< may be +inf (no leak)
  double v_thr = -0.1;
  double v_refr = 0.0;
  double hysteresis = 0.0;
  SpikeShape shape = default_shape();

  double tau_m() const noexcept { return r_leaky * c_mem; }

  bool operator==(const NeuronParams&) const = default;
};

NeuronParams default_neuron_params();

std::vector<std::string> validate_neuron_params(const NeuronParams& p);

enum class Mode { Integration, Firing };

enum class FireDecision { Stay, Fire };

struct NeuronState {
  Mode mode = Mode::Integration;
  double v_mem = 0.0;
  double t_fire_onset = 0.0;  ///< meaningful in Firing mode only
  bool armed = true;          ///< comparator re-armed (v_mem went back above v_thr + hysteresis)

  bool operator==(const NeuronState&) const = default;
};

NeuronState resting_state(const NeuronParams& p);

/// Exponential-Euler step of C dv/dt = -i_in - (v - v_refr)/R, exact for constant i_in.
NeuronState integrate_step(NeuronState s, const NeuronParams& p, double i_in, double dt);

/// Boundary inclusive: v_mem == v_thr fires.
FireDecision check_fire(const NeuronState& s, const NeuronParams& p);

NeuronState begin_fire(NeuronState s, const NeuronParams& p, double t_now);
NeuronState end_fire(NeuronState s, const NeuronParams& p, double t_now);

/// True once the spike started at t_fire_onset has run its full duration at t_now.
bool fire_elapsed(const NeuronState& s, const NeuronParams& p, double t_now);

/// Voltage this neuron presents to every attached synapse, on both of its ports.
double port_voltage(const NeuronState& s, const NeuronParams& p, double t_now);

}  // namespace duallif
