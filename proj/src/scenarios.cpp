#include "duallif/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "duallif/error.hpp"

namespace duallif::scenarios {

namespace {

// Nearest double to an exact decimal count of `unit`, so grid values print cleanly.
double on_grid(long count, double unit_inverse) {
  return static_cast<double>(count) / unit_inverse;
}

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<double> delta_t_grid(double dt_min, double dt_max, double dt_step) {
  if (!(dt_step > 0.0) || !(dt_max >= dt_min))
    throw ValidationError("stdp: need dt_step > 0 and dt_max >= dt_min");
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor((dt_max - dt_min) / dt_step + 1e-9));
  for (long k = 0; k <= n; ++k) {
    double v = dt_min + static_cast<double>(k) * dt_step;
    // Snap to the picosecond so that e.g. -6us + 60 * 0.1us is exactly 0.
    v = std::round(v * 1e12) / 1e12;
    out.push_back(v == 0.0 ? 0.0 : v);
  }
  return out;
}

StdpCurve stdp_curve(const SpikeShape& shape, const SynapseParams& params,
                     std::span<const double> grid, double g_ref) {
  require_valid(shape);
  if (!(g_ref > 0.0)) throw ValidationError("stdp: g_ref must be > 0");
  StdpCurve curve;
  curve.g_ref = g_ref;
  curve.points.reserve(grid.size());
  for (double dt : grid) {
    const double dg = pair_weight_change(params, shape, dt);
    curve.points.push_back({dt, dg, dg / g_ref});
  }
  return curve;
}

double simulated_pair_weight_change(const NeuronParams& neuron, const SynapseParams& params,
                                    double g_init, double delta_t, double dt) {
  Network net;
  net.neurons = {{1, neuron}, {2, neuron}};
  net.synapses = {{1, 1, 2, params, g_init}};
  SimConfig cfg;
  cfg.dt = dt;
  cfg.trace_decimation = 1u << 30;
  cfg.record = RecordFlags{false, false, false, true};

  const double lead = 1e-6;
  const double pre_onset = std::round((lead + std::max(0.0, -delta_t)) / dt) * dt;
  const double post_onset = pre_onset + std::round(delta_t / dt) * dt;
  Engine engine(std::move(net), cfg);
  engine.schedule_spike(1, pre_onset);
  engine.schedule_spike(2, post_onset);
  engine.run_until(std::max(pre_onset, post_onset) + neuron.shape.duration() + lead);
  return engine.conductance(1) - g_init;
}

void cross_validate(StdpCurve& curve, const NeuronParams& neuron, const SynapseParams& params,
                    std::span<const double> probes, double dt) {
  curve.probes.clear();
  for (double delta_t : probes) {
    StdpProbe p;
    p.delta_t = delta_t;
    p.closed_form = pair_weight_change(params, neuron.shape, delta_t);
    p.simulated = simulated_pair_weight_change(neuron, params, curve.g_ref, delta_t, dt);
    const double scale = std::max(std::abs(p.closed_form), 1e-300);
    p.rel_error = std::abs(p.simulated - p.closed_form) / scale;
    if (p.closed_form == 0.0 && p.simulated == 0.0) p.rel_error = 0.0;
    curve.probes.push_back(p);
  }
}

bool probes_agree(const StdpCurve& curve, double tolerance) {
  return std::all_of(curve.probes.begin(), curve.probes.end(),
                     [&](const StdpProbe& p) { return p.rel_error < tolerance; });
}

// ---------------------------------------------------------------------------

CalibrationReport calibrate_shape(const CalibrationTargets& tg) {
  CalibrationReport rep;
  auto infeasible = [&](std::string why) {
    rep.feasible = false;
    rep.binding_constraint = std::move(why);
    return rep;
  };

  if (!(tg.v_tp > 0.0) || !(tg.v_tm > 0.0) || !(tg.t_plus > 0.0) || !(tg.t_minus >= 0.0) ||
      !(tg.window > 0.0) || !(tg.amplitude_step > 0.0) || !(tg.tau_resolution > 0.0) ||
      !(tg.tau_max > tg.tau_min) || !(tg.delta_t > 0.0))
    throw ValidationError("calibrate: targets must be positive with tau_max > tau_min");

  const double overlap_bound = std::min(tg.delta_t, tg.t_plus);
  if (tg.window > overlap_bound)
    return infeasible(fmt("window bound: target window %.4g s exceeds the positive pulse "
                          "overlap min(delta_t, t_plus) = %.4g s",
                          tg.window, overlap_bound));
  if (tg.v_tp - tg.margin < tg.amplitude_step)
    return infeasible(fmt("sub-threshold single spike: v_tp %.4g V leaves no admissible "
                          "v_a_plus (smallest grid amplitude %.4g V)",
                          tg.v_tp, tg.amplitude_step));
  if (!(tg.peak > tg.v_tp))
    return infeasible(fmt("pair peak %.4g V does not exceed v_tp %.4g V", tg.peak, tg.v_tp));

  // Grid values are count / inverse-unit; an integral inverse keeps e.g. 437 ns exact.
  const double amp_inv = 1e9;  // amplitudes on a nanovolt grid
  const double raw_tau_inv = 1.0 / tg.tau_resolution;
  const double tau_inv = std::abs(raw_tau_inv - std::round(raw_tau_inv)) < 1e-6 * raw_tau_inv
                             ? std::round(raw_tau_inv)
                             : raw_tau_inv;
  const PlasticityThresholds thr{tg.v_tp, tg.v_tm};

  auto make_shape = [&](double ap, double am, double tau) {
    SpikeShape s;
    s.v_a_plus = ap;
    s.v_a_minus = am;
    s.t_plus = tg.t_plus;
    s.t_minus = tg.t_minus;
    s.tau_decay = tau;
    s.t_rise = slew_rise_time(ap);
    s.t_fall = slew_fall_time(ap, am);
    return s;
  };

  const auto n_lo = static_cast<long>(std::ceil(tg.tau_min * tau_inv - 1e-9));
  const auto n_hi = static_cast<long>(std::floor(tg.tau_max * tau_inv + 1e-9));
  const auto k_max = static_cast<long>(std::floor((tg.v_tp - tg.margin) / tg.amplitude_step + 1e-9));

  std::optional<CalibrationCandidate> best;
  for (long k = k_max; k >= 1; --k) {
    CalibrationCandidate c;
    c.v_a_plus = on_grid(std::lround(static_cast<double>(k) * tg.amplitude_step * amp_inv), amp_inv);
    c.v_a_minus = on_grid(std::lround((tg.peak - c.v_a_plus) * amp_inv), amp_inv);
    c.peak = c.v_a_plus + c.v_a_minus;
    if (c.v_a_minus < 0.0 || c.v_a_minus > tg.v_tm - tg.margin) {
      c.note = "rejected: v_a_minus outside [0, v_tm - margin]";
      rep.log.push_back(c);
      continue;
    }
    auto window_at = [&](long n) {
      return over_threshold_window(make_shape(c.v_a_plus, c.v_a_minus, on_grid(n, tau_inv)), thr,
                                   tg.delta_t);
    };
    long lo = n_lo;
    long hi = n_hi;
    if (window_at(hi) < tg.window) {
      c.tau_decay = on_grid(hi, tau_inv);
      c.window = window_at(hi);
      c.note = "rejected: window target unreachable within tau range";
      rep.log.push_back(c);
      continue;
    }
    if (window_at(lo) < tg.window) {
      // Smallest n with window >= target; window grows monotonically with tau.
      while (hi - lo > 1) {
        const long mid = lo + (hi - lo) / 2;
        (window_at(mid) >= tg.window ? hi : lo) = mid;
      }
      const double w_lo = window_at(lo);
      const double w_hi = window_at(hi);
      const long n = (tg.window - w_lo < w_hi - tg.window) ? lo : hi;
      c.tau_decay = on_grid(n, tau_inv);
      c.window = n == lo ? w_lo : w_hi;
    } else {
      c.tau_decay = on_grid(lo, tau_inv);
      c.window = window_at(lo);
    }
    if (std::abs(c.window - tg.window) > tg.window_tolerance * tg.window) {
      c.note = "rejected: window outside tolerance";
      rep.log.push_back(c);
      continue;
    }
    c.peak = peak_net_potential(make_shape(c.v_a_plus, c.v_a_minus, c.tau_decay), tg.delta_t);
    if (!best) {
      c.accepted = true;
      c.note = "selected: largest admissible v_a_plus";
      best = c;
    } else {
      c.note = "admissible";
    }
    rep.log.push_back(c);
  }

  if (!best) return infeasible("no amplitude split reaches the window target within tolerance");
  rep.feasible = true;
  rep.shape = make_shape(best->v_a_plus, best->v_a_minus, best->tau_decay);
  rep.window = best->window;
  rep.peak = best->peak;
  return rep;
}

// ---------------------------------------------------------------------------

EnergyReport energy_report(const SpikeShape& shape, double r_load, unsigned n_synapses) {
  if (n_synapses < 1) throw ValidationError("energy: n_synapses must be >= 1");
  EnergyReport r;
  r.r_load = r_load;
  r.n_synapses = n_synapses;
  r.per_synapse = energy_into_load(shape, r_load);
  r.per_synapse_quadrature = energy_into_load_quadrature(shape, r_load);
  r.relative_disagreement = std::abs(r.per_synapse_quadrature - r.per_synapse) / r.per_synapse;
  r.total = r.per_synapse * static_cast<double>(n_synapses);
  r.below_reference = r.per_synapse < r.measured_reference;
  r.caveat =
      "modeled component is resistive load dissipation only; the measured 9.3 pJ/spike/synapse "
      "also includes opamp, comparator and bias power of the neuron circuit, which is not "
      "modeled here";
  return r;
}

// ---------------------------------------------------------------------------

Network pavlov_network(const PavlovConfig& cfg) {
  Network net;
  net.neurons = {{kFoodNeuron, cfg.neuron}, {kBellNeuron, cfg.neuron}, {kSalivationNeuron, cfg.neuron}};
  net.synapses = {{kFoodSynapse, kFoodNeuron, kSalivationNeuron, cfg.synapse, 1.0 / cfg.r1_init},
                  {kBellSynapse, kBellNeuron, kSalivationNeuron, cfg.synapse, 1.0 / cfg.r2_init}};
  return net;
}

namespace {

class PavlovRun {
public:
  explicit PavlovRun(const PavlovConfig& cfg)
      : cfg_(cfg), engine_(pavlov_network(cfg), cfg.sim), t_next_(cfg.first_stimulus) {}

  StimulusEvent stimulate(std::string label, std::vector<unsigned> neurons, double t) {
    return stimulate_on(engine_, std::move(label), std::move(neurons), t);
  }

  /// Bell-alone stimulus applied to a detached copy; the real run is left untouched.
  StimulusEvent probe(double t) {
    Engine what_if = engine_.detached_copy();
    return stimulate_on(what_if, "bell probe (detached copy)", {kBellNeuron}, t);
  }

  double take_slot() {
    const double t = t_next_;
    t_next_ += cfg_.trial_interval;
    return t;
  }

  ResistancePoint bell_resistance() const {
    return {engine_.time(), 1.0 / engine_.conductance(kBellSynapse)};
  }

  unsigned output_fires_since(double t) const {
    unsigned n = 0;
    for (const auto& f : engine_.trace().fires)
      if (f.neuron_id == kSalivationNeuron && f.t_onset >= t) ++n;
    return n;
  }

  void settle(double t) { engine_.run_until(t); }
  Trace take_trace() { return engine_.take_trace(); }

private:
  StimulusEvent stimulate_on(Engine& engine, std::string label, std::vector<unsigned> neurons,
                             double t) {
    for (unsigned id : neurons) engine.schedule_spike(id, t);
    const std::size_t seen = engine.trace().fires.size();
    engine.run_until(t + cfg_.neuron.shape.duration() + cfg_.sim.dt);
    StimulusEvent ev{std::move(label), t, std::move(neurons), false};
    const auto& fires = engine.trace().fires;
    for (std::size_t k = seen; k < fires.size(); ++k)
      if (fires[k].neuron_id == kSalivationNeuron && !fires[k].forced) ev.output_fired = true;
    return ev;
  }

  const PavlovConfig& cfg_;
  Engine engine_;
  double t_next_;
};

}  // namespace

PavlovReport run_pavlov(const PavlovConfig& cfg) {
  if (cfg.max_trials < 1) throw ValidationError("pavlov: max_trials must be >= 1");
  if (!(cfg.r1_init > 0.0) || !(cfg.r2_init > 0.0))
    throw ValidationError("pavlov: initial resistances must be > 0");
  const double spike = cfg.neuron.shape.duration();
  if (!(cfg.probe_offset > spike) || !(cfg.trial_interval > cfg.probe_offset + spike) ||
      !(cfg.first_stimulus >= 0.0))
    throw ValidationError(
        "pavlov: need probe_offset > T_spk and trial_interval > probe_offset + T_spk");

  PavlovReport rep;
  PavlovRun run(cfg);

  rep.before.label = "before";
  rep.before.bell_resistance.push_back(run.bell_resistance());
  const double before_start = cfg.first_stimulus;
  rep.before.stimuli.push_back(run.stimulate("food alone", {kFoodNeuron}, run.take_slot()));
  rep.before.stimuli.push_back(run.stimulate("bell alone", {kBellNeuron}, run.take_slot()));
  rep.before_ok = rep.before.stimuli[0].output_fired && !rep.before.stimuli[1].output_fired;

  rep.training.label = "training";
  const double training_start = cfg.first_stimulus + 2.0 * cfg.trial_interval;
  run.settle(training_start);
  rep.before.output_fires = run.output_fires_since(before_start) - run.output_fires_since(training_start);
  rep.training.bell_resistance.push_back(run.bell_resistance());
  for (unsigned trial = 1; trial <= cfg.max_trials; ++trial) {
    const double t = run.take_slot();
    rep.training.stimuli.push_back(
        run.stimulate("food + bell", {kFoodNeuron, kBellNeuron}, t));
    rep.training.bell_resistance.push_back(run.bell_resistance());
    rep.trials_run = trial;
    run.settle(t + cfg.probe_offset);
    auto probe = run.probe(t + cfg.probe_offset);
    const bool learned = probe.output_fired;
    rep.training.stimuli.push_back(std::move(probe));
    if (learned) {
      rep.learned_after_trial = trial;
      break;
    }
  }
  bool decreasing = rep.training.bell_resistance.size() >= 2;
  for (std::size_t k = 1; k < rep.training.bell_resistance.size(); ++k)
    decreasing = decreasing &&
                 rep.training.bell_resistance[k].r_ohm < rep.training.bell_resistance[k - 1].r_ohm;
  rep.training_ok = decreasing;

  rep.after.label = "after";
  const double after_start = run.take_slot();
  run.settle(after_start);
  rep.training.output_fires =
      run.output_fires_since(training_start) - run.output_fires_since(after_start);
  rep.after.bell_resistance.push_back(run.bell_resistance());
  rep.after.stimuli.push_back(run.stimulate("bell alone", {kBellNeuron}, after_start));
  run.settle(after_start + cfg.trial_interval);
  rep.after.bell_resistance.push_back(run.bell_resistance());
  rep.after.output_fires = run.output_fires_since(after_start);
  rep.after_ok = rep.after.stimuli[0].output_fired;

  rep.trace = run.take_trace();
  return rep;
}

double learning_rate_for_pairings(const PavlovConfig& cfg, unsigned pairings) {
  if (pairings < 1) throw ValidationError("pairings must be >= 1");
  const auto& n = cfg.neuron;
  const auto& s = n.shape;
  const double depth = n.v_refr - n.v_thr;
  const double r = n.r_leaky;
  const double tau = n.tau_m();
  // Conductance whose positive pulse alone charges C_mem through the threshold depth.
  const double g_suff = depth / (s.v_a_plus * r * -std::expm1(-s.t_plus / tau));
  // Spike lag of the output under co-stimulation: threshold crossing time, rounded up to the
  // grid, plus the one-step latency before the output spike starts.
  auto lag = [&](double g_total) {
    const double x = depth / (g_total * s.v_a_plus * r);
    const double t_cross = x >= 1.0 ? s.t_plus : -tau * std::log1p(-x);
    return std::ceil(t_cross / cfg.sim.dt - 1e-9) * cfg.sim.dt;
  };
  auto pairings_needed_reach = [&](double eta) {
    double g1 = 1.0 / cfg.r1_init;
    double g2 = 1.0 / cfg.r2_init;
    for (unsigned k = 0; k < pairings; ++k) {
      const auto ov = overdrive_integrals(s, cfg.synapse.thr, lag(g1 + g2));
      g1 = std::min(cfg.synapse.g_max, g1 + eta * ov.pot);
      g2 = std::min(cfg.synapse.g_max, g2 + eta * ov.pot);
    }
    return g2;
  };
  double lo = 0.0;
  double hi = 1.0;
  while (pairings_needed_reach(hi) < g_suff) hi *= 2.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (pairings_needed_reach(mid) >= g_suff ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace duallif::scenarios
