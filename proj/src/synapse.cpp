#include "duallif/synapse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace duallif {

SynapseParams default_synapse_params() {
  SynapseParams p;
  p.eta_p = kDefaultLearningRate;
  p.eta_d = kDefaultLearningRate;
  return p;
}

std::vector<std::string> validate_synapse_params(const SynapseParams& p) {
  std::vector<std::string> out;
  auto add = [&](const char* what, double v) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s (got %.6g)", what, v);
    out.emplace_back(buf);
  };
  if (!(p.g_min > 0.0) || !std::isfinite(p.g_min)) add("g_min must be > 0", p.g_min);
  if (!(p.g_max >= p.g_min) || !std::isfinite(p.g_max)) add("g_max must be >= g_min", p.g_max);
  if (!(p.thr.v_tp > 0.0)) add("v_tp must be > 0", p.thr.v_tp);
  if (!(p.thr.v_tm > 0.0)) add("v_tm must be > 0", p.thr.v_tm);
  if (!(p.eta_p >= 0.0) || !std::isfinite(p.eta_p)) add("eta_p must be >= 0", p.eta_p);
  if (!(p.eta_d >= 0.0) || !std::isfinite(p.eta_d)) add("eta_d must be >= 0", p.eta_d);
  return out;
}

double plasticity_increment(const SynapseParams& p, double v_net, double dt) {
  const double pot = std::max(0.0, v_net - p.thr.v_tp);
  const double dep = std::max(0.0, -v_net - p.thr.v_tm);
  if (pot == 0.0 && dep == 0.0) return 0.0;
  return (p.eta_p * pot - p.eta_d * dep) * dt;
}

SynapseState apply_plasticity_step(SynapseState state, const SynapseParams& p, double v_net,
                                   double dt) {
  const double dg = plasticity_increment(p, v_net, dt);
  if (dg != 0.0) state.g = std::clamp(state.g + dg, p.g_min, p.g_max);
  return state;
}

double pair_weight_change(const SynapseParams& p, const SpikeShape& shape, double delta_t,
                          double step) {
  const auto ov = overdrive_integrals(shape, p.thr, delta_t, step);
  return p.eta_p * ov.pot - p.eta_d * ov.dep;
}

}  // namespace duallif
