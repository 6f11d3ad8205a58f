#pragma once

// Randomized networks shared by the unit tests and the acceptance suite.

#include <cmath>
#include <cstdint>
#include <random>

#include "duallif/engine.hpp"

namespace fixtures {

using namespace duallif;

// Random network with forced spikes, used for bounds and dt-halving properties.
struct RandomCase {
  Network net;
  Stimulus stim;
};

inline RandomCase random_case(std::uint64_t seed, unsigned n_neurons, unsigned n_synapses) {
  std::mt19937_64 rng(seed);
  RandomCase c;
  for (unsigned i = 1; i <= n_neurons; ++i) c.net.neurons.push_back({i, default_neuron_params()});
  std::uniform_int_distribution<unsigned> pick(1, n_neurons);
  std::uniform_real_distribution<double> logr(std::log(20e3), std::log(2e6));
  SynapseParams sp = default_synapse_params();
  sp.eta_p = sp.eta_d = 5000.0;  // aggressive, to push conductances into the clamps
  for (unsigned k = 1; k <= n_synapses; ++k) {
    unsigned a = pick(rng), b = pick(rng);
    while (b == a) b = pick(rng);
    c.net.synapses.push_back({k, a, b, sp, 1.0 / std::exp(logr(rng))});
  }
  std::uniform_real_distribution<double> when(0.0, 90e-6);
  for (unsigned i = 1; i <= n_neurons; ++i) {
    auto& ns = c.stim.per_neuron[i];
    for (int s = 0; s < 6; ++s) ns.spikes.push_back(std::round(when(rng) / 20e-9) * 20e-9);
  }
  return c;
}

// One forced input fanning out to driven outputs, input spikes spaced beyond 2*T_spk. Every
// spontaneous fire is then one hop from a forced one. Recurrent cascades are not used for
// dt comparisons: a crossing that lands on a different step can tip a downstream neuron
// over or under threshold, and the runs stop being comparable.
inline RandomCase fan_out_case(std::uint64_t seed, unsigned n_out) {
  std::mt19937_64 rng(seed);
  RandomCase c;
  for (unsigned i = 1; i <= n_out + 1; ++i) c.net.neurons.push_back({i, default_neuron_params()});
  std::uniform_real_distribution<double> r(40e3, 160e3);
  SynapseParams sp = default_synapse_params();
  sp.eta_p = sp.eta_d = kDefaultLearningRate;
  for (unsigned b = 2; b <= n_out + 1; ++b) c.net.synapses.push_back({b - 1, 1, b, sp, 1.0 / r(rng)});
  std::uniform_real_distribution<double> gap(7e-6, 12e-6);
  double t = 1e-6;
  for (int s = 0; s < 8; ++s, t += std::round(gap(rng) / 20e-9) * 20e-9)
    c.stim.per_neuron[1].spikes.push_back(t);
  return c;
}

}  // namespace fixtures
