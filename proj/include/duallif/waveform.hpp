#pragma once

#include <string>
#include <vector>

namespace duallif {

/// Parameterized STDP-compatible action potential, all amplitudes relative to v_refr.
///
/// Shape over one spike period T_spk = t_plus + t_minus:
///   [0, t_rise)                linear rise v_refr -> v_refr + v_a_plus
///   [t_rise, t_plus - t_fall)  plateau at v_refr + v_a_plus
///   [t_plus - t_fall, t_plus)  linear fall to v_refr - v_a_minus
///   [t_plus, T_spk)            v_refr - v_a_minus * exp(-(t - t_plus) / tau_decay)
/// and exactly v_refr elsewhere (the tail is truncated at T_spk).
struct SpikeShape {
  double v_refr = 0.0;
  double v_a_plus = 0.0;
  double v_a_minus = 0.0;
  double t_plus = 0.0;
  double t_minus = 0.0;
  double tau_decay = 0.0;
  double t_rise = 0.0;
  double t_fall = 0.0;

  double duration() const noexcept { return t_plus + t_minus; }

  bool operator==(const SpikeShape&) const = default;
};

struct PlasticityThresholds {
  double v_tp = 0.0;  ///< potentiate while V_net > v_tp
  double v_tm = 0.0;  ///< depress while V_net < -v_tm

  bool operator==(const PlasticityThresholds&) const = default;
};

/// Driver slew rates used to derive default edge ramps, V/s.
inline constexpr double kRiseSlewRate = 784e6;
inline constexpr double kFallSlewRate = 500e6;

/// Default quadrature step for the pair integrals.
inline constexpr double kDefaultQuadratureStep = 1e-9;

/// Calibrated default shape (see scenarios::calibrate_shape, which regenerates it).
SpikeShape default_shape();
PlasticityThresholds default_thresholds();

/// Edge ramps implied by the driver slew rates for the given amplitudes.
double slew_rise_time(double v_a_plus);
double slew_fall_time(double v_a_plus, double v_a_minus);

/// Structural checks only (durations, edge fit).
std::vector<std::string> validate_shape(const SpikeShape& shape);
/// Structural checks plus the single-spike sub-threshold condition.
std::vector<std::string> validate_shape(const SpikeShape& shape,
                                        const PlasticityThresholds& thr);
/// Throws ValidationError listing every violation.
void require_valid(const SpikeShape& shape);
void require_valid(const SpikeShape& shape, const PlasticityThresholds& thr);

double spike_voltage(const SpikeShape& shape, double t);

/// V_post(t) - V_pre(t) with the pre spike starting at 0 and the post spike at delta_t.
double net_potential(const SpikeShape& shape, double delta_t, double t);

struct OverdriveIntegrals {
  double pot = 0.0;  ///< integral of max(0, V_net - v_tp), V*s
  double dep = 0.0;  ///< integral of max(0, -V_net - v_tm), V*s
};

/// Trapezoid rule on a grid of at most `step`, split at every waveform breakpoint
/// of both spikes so that edges and the pulse/tail transition never fall inside a cell.
OverdriveIntegrals overdrive_integrals(const SpikeShape& shape,
                                       const PlasticityThresholds& thr, double delta_t,
                                       double step = kDefaultQuadratureStep);

/// Measure of {t : V_net(t) > v_tp}. Crossings are located by bisection inside each grid cell.
double over_threshold_window(const SpikeShape& shape, const PlasticityThresholds& thr,
                             double delta_t, double step = kDefaultQuadratureStep);

/// Peak of V_net over the pair support (sampled on the same split grid).
double peak_net_potential(const SpikeShape& shape, double delta_t,
                          double step = kDefaultQuadratureStep);

/// Closed-form energy dissipated in a resistive load by one spike.
double energy_into_load(const SpikeShape& shape, double r_load);

/// Same quantity by split-grid trapezoid quadrature; cross-check for the closed form.
double energy_into_load_quadrature(const SpikeShape& shape, double r_load,
                                   double step = kDefaultQuadratureStep);

}  // namespace duallif
