#pragma once

#include <string>
#include <vector>

#include "duallif/waveform.hpp"

namespace duallif {

/// Two-terminal resistive device. Conductance up means resistance down means potentiation.
struct SynapseParams {
  double g_min = 1e-9;  ///< 1 GOhm
  double g_max = 1e-4;  ///< 10 kOhm
  PlasticityThresholds thr = default_thresholds();
  double eta_p = 0.0;  ///< S / (V*s)
  double eta_d = 0.0;  ///< S / (V*s)

  bool operator==(const SynapseParams&) const = default;
};

/// Shipped default rate; scenarios::learning_rate_for_pairings(defaults, 20) rounds to it.
inline constexpr double kDefaultLearningRate = 46.0;

SynapseParams default_synapse_params();

std::vector<std::string> validate_synapse_params(const SynapseParams& p);

struct SynapseState {
  double g = 0.0;
  unsigned pre_id = 0;
  unsigned post_id = 0;
};

/// Current through the device, positive into the post-synaptic summing node.
inline double synapse_current(double g, double v_pre_port, double v_post_port) {
  return g * (v_pre_port - v_post_port);
}

/// Conductance change for one time step at net potential v_net = V_post - V_pre, before clamping.
double plasticity_increment(const SynapseParams& p, double v_net, double dt);

/// One explicit step of the threshold-gated linear overdrive law, clamped to [g_min, g_max].
SynapseState apply_plasticity_step(SynapseState state, const SynapseParams& p, double v_net,
                                   double dt);

/// Closed-form STDP function: eta_p * pot - eta_d * dep for one spike pair (pre at 0, post at
/// delta_t). Signed and unclamped.
double pair_weight_change(const SynapseParams& p, const SpikeShape& shape, double delta_t,
                          double step = kDefaultQuadratureStep);

}  // namespace duallif
