#include "duallif/neuron.hpp"

#include <cmath>
#include <cstdio>

#include "duallif/error.hpp"

namespace duallif {

namespace {
// Slack for comparing grid times built as k*dt against onset + T_spk.
constexpr double kTimeSlack = 1e-15;
}  // namespace

NeuronParams default_neuron_params() { return NeuronParams{}; }

std::vector<std::string> validate_neuron_params(const NeuronParams& p) {
  std::vector<std::string> out;
  auto add = [&](const char* what, double v) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s (got %.6g)", what, v);
    out.emplace_back(buf);
  };
  if (!(p.c_mem > 0.0) || !std::isfinite(p.c_mem)) add("c_mem must be > 0", p.c_mem);
  if (!(p.r_leaky > 0.0)) add("r_leaky must be > 0", p.r_leaky);
  if (!std::isfinite(p.v_refr)) add("v_refr must be finite", p.v_refr);
  if (!(p.v_thr < p.v_refr)) add("v_thr must be below v_refr (downward crossing)", p.v_thr);
  if (!(p.hysteresis >= 0.0)) add("hysteresis must be >= 0", p.hysteresis);
  if (p.shape.v_refr != p.v_refr) add("shape.v_refr must equal the neuron v_refr", p.shape.v_refr);
  for (auto& v : validate_shape(p.shape)) out.push_back("shape: " + v);
  return out;
}

NeuronState resting_state(const NeuronParams& p) {
  NeuronState s;
  s.v_mem = p.v_refr;
  s.armed = p.v_refr >= p.v_thr + p.hysteresis;
  return s;
}

NeuronState integrate_step(NeuronState s, const NeuronParams& p, double i_in, double dt) {
  if (s.mode != Mode::Integration)
    throw ContractViolation("integrate_step called on a neuron in firing mode");
  if (!(dt > 0.0)) throw ContractViolation("integrate_step requires dt > 0");

  if (std::isinf(p.r_leaky)) {
    s.v_mem -= i_in * dt / p.c_mem;
  } else {
    const double tau = p.tau_m();
    const double decay = std::exp(-dt / tau);
    // R * (1 - exp(-dt/tau)), written with expm1 so huge R stays accurate.
    const double gain = -p.r_leaky * std::expm1(-dt / tau);
    s.v_mem = p.v_refr + (s.v_mem - p.v_refr) * decay - i_in * gain;
  }
  if (!s.armed && s.v_mem >= p.v_thr + p.hysteresis) s.armed = true;
  return s;
}

FireDecision check_fire(const NeuronState& s, const NeuronParams& p) {
  if (s.mode != Mode::Integration)
    throw ContractViolation("check_fire called on a neuron in firing mode");
  return (s.armed && s.v_mem <= p.v_thr) ? FireDecision::Fire : FireDecision::Stay;
}

NeuronState begin_fire(NeuronState s, const NeuronParams& p, double t_now) {
  if (s.mode != Mode::Integration)
    throw ContractViolation("begin_fire called on a neuron already firing");
  s.mode = Mode::Firing;
  s.v_mem = p.v_refr;
  s.t_fire_onset = t_now;
  s.armed = false;
  return s;
}

bool fire_elapsed(const NeuronState& s, const NeuronParams& p, double t_now) {
  return s.mode == Mode::Firing && t_now + kTimeSlack >= s.t_fire_onset + p.shape.duration();
}

NeuronState end_fire(NeuronState s, const NeuronParams& p, double t_now) {
  if (s.mode != Mode::Firing) throw ContractViolation("end_fire called on an integrating neuron");
  if (!fire_elapsed(s, p, t_now))
    throw ContractViolation("end_fire called before the spike duration elapsed");
  s.mode = Mode::Integration;
  s.v_mem = p.v_refr;
  s.armed = p.v_refr >= p.v_thr + p.hysteresis;
  return s;
}

double port_voltage(const NeuronState& s, const NeuronParams& p, double t_now) {
  if (s.mode == Mode::Integration) return p.v_refr;
  return spike_voltage(p.shape, t_now - s.t_fire_onset);
}

}  // namespace duallif
