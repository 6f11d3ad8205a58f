#include "duallif/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

#include "duallif/error.hpp"

namespace duallif {

namespace {

std::string describe(const char* what, double value) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s (got %.6g)", what, value);
  return buf;
}

// Piecewise evaluation. With left_limit the value returned is lim_{s->t-} v(s),
// which differs from v(t) only at breakpoints.
double eval_spike(const SpikeShape& s, double t, bool left_limit) {
  auto before = [&](double b) { return left_limit ? t <= b : t < b; };
  const double fall_start = s.t_plus - s.t_fall;
  if (before(0.0)) return s.v_refr;
  if (before(s.t_rise)) return s.v_refr + s.v_a_plus * (t / s.t_rise);
  if (before(fall_start)) return s.v_refr + s.v_a_plus;
  if (before(s.t_plus)) {
    const double frac = (t - fall_start) / s.t_fall;
    return s.v_refr + s.v_a_plus - (s.v_a_plus + s.v_a_minus) * frac;
  }
  if (before(s.duration())) {
    return s.v_refr - s.v_a_minus * std::exp(-(t - s.t_plus) / s.tau_decay);
  }
  return s.v_refr;
}

std::vector<double> spike_breakpoints(const SpikeShape& s, double onset) {
  return {onset,
          onset + s.t_rise,
          onset + s.t_plus - s.t_fall,
          onset + s.t_plus,
          onset + s.duration()};
}

std::vector<double> sorted_unique(std::vector<double> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

std::vector<double> pair_breakpoints(const SpikeShape& s, double delta_t) {
  auto pts = spike_breakpoints(s, 0.0);
  auto post = spike_breakpoints(s, delta_t);
  pts.insert(pts.end(), post.begin(), post.end());
  return sorted_unique(std::move(pts));
}

// Walks every cell of the split grid. `f(t, left)` must honour one-sided limits; the
// visitor receives (a, b, f(a+), f(b-)).
template <typename Visitor>
void for_each_cell(const std::vector<double>& breaks, double step,
                   const std::function<double(double, bool)>& f, Visitor&& visit) {
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k];
    const double b = breaks[k + 1];
    const double len = b - a;
    if (!(len > 0.0)) continue;
    const auto n = static_cast<long>(std::max(1.0, std::ceil(len / step - 1e-9)));
    const double h = len / static_cast<double>(n);
    double left_val = f(a, false);
    for (long i = 0; i < n; ++i) {
      const double x0 = a + h * static_cast<double>(i);
      const double x1 = (i + 1 == n) ? b : a + h * static_cast<double>(i + 1);
      const double right_val = (i + 1 == n) ? f(x1, true) : f(x1, false);
      visit(x0, x1, left_val, right_val);
      left_val = (i + 1 == n) ? 0.0 : right_val;
    }
  }
}

// Root of g on [a, b] given a sign change, bisection to ~1e-15 s.
double bisect_crossing(const std::function<double(double)>& g, double a, double b, double ga) {
  for (int it = 0; it < 80 && (b - a) > 1e-16; ++it) {
    const double m = 0.5 * (a + b);
    const double gm = g(m);
    if ((gm > 0.0) == (ga > 0.0)) {
      a = m;
      ga = gm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

// Trapezoid integral of max(0, g) over a cell, splitting the cell at the sign change.
double positive_part_integral(const std::function<double(double)>& g, double a, double b,
                              double ga, double gb) {
  if (ga >= 0.0 && gb >= 0.0) return 0.5 * (ga + gb) * (b - a);
  if (ga <= 0.0 && gb <= 0.0) return 0.0;
  const double c = bisect_crossing(g, a, b, ga);
  return ga > 0.0 ? 0.5 * ga * (c - a) : 0.5 * gb * (b - c);
}

double measure_positive(const std::function<double(double)>& g, double a, double b, double ga,
                        double gb) {
  if (ga > 0.0 && gb > 0.0) return b - a;
  if (ga <= 0.0 && gb <= 0.0) return 0.0;
  const double c = bisect_crossing(g, a, b, ga);
  return ga > 0.0 ? c - a : b - c;
}

double net_limit(const SpikeShape& s, double delta_t, double t, bool left) {
  return eval_spike(s, t - delta_t, left) - eval_spike(s, t, left);
}

}  // namespace

SpikeShape default_shape() {
  SpikeShape s;
  s.v_refr = 0.0;
  s.v_a_plus = 0.30;
  s.v_a_minus = 0.10;
  s.t_plus = 0.5e-6;
  s.t_minus = 2.5e-6;
  s.tau_decay = 437e-9;
  s.t_rise = slew_rise_time(s.v_a_plus);
  s.t_fall = slew_fall_time(s.v_a_plus, s.v_a_minus);
  return s;
}

PlasticityThresholds default_thresholds() { return {0.34, 0.34}; }

double slew_rise_time(double v_a_plus) { return v_a_plus / kRiseSlewRate; }

double slew_fall_time(double v_a_plus, double v_a_minus) {
  return (v_a_plus + v_a_minus) / kFallSlewRate;
}

std::vector<std::string> validate_shape(const SpikeShape& s) {
  std::vector<std::string> out;
  const auto finite = [](double x) { return std::isfinite(x); };
  if (!finite(s.v_refr)) out.push_back(describe("v_refr must be finite", s.v_refr));
  if (!finite(s.v_a_plus) || s.v_a_plus < 0.0)
    out.push_back(describe("v_a_plus must be >= 0", s.v_a_plus));
  if (!finite(s.v_a_minus) || s.v_a_minus < 0.0)
    out.push_back(describe("v_a_minus must be >= 0", s.v_a_minus));
  if (!finite(s.t_plus) || s.t_plus <= 0.0)
    out.push_back(describe("t_plus must be > 0", s.t_plus));
  if (!finite(s.t_minus) || s.t_minus < 0.0)
    out.push_back(describe("t_minus must be >= 0", s.t_minus));
  if (!finite(s.tau_decay) || s.tau_decay <= 0.0)
    out.push_back(describe("tau_decay must be > 0", s.tau_decay));
  if (!finite(s.t_rise) || s.t_rise < 0.0)
    out.push_back(describe("t_rise must be >= 0", s.t_rise));
  if (!finite(s.t_fall) || s.t_fall < 0.0)
    out.push_back(describe("t_fall must be >= 0", s.t_fall));
  if (s.t_rise + s.t_fall > s.t_plus)
    out.push_back(describe("edges overlap: t_rise + t_fall exceeds t_plus", s.t_rise + s.t_fall));
  return out;
}

std::vector<std::string> validate_shape(const SpikeShape& s, const PlasticityThresholds& thr) {
  auto out = validate_shape(s);
  if (!(thr.v_tp > 0.0)) out.push_back(describe("v_tp must be > 0", thr.v_tp));
  if (!(thr.v_tm > 0.0)) out.push_back(describe("v_tm must be > 0", thr.v_tm));
  if (s.v_a_plus >= thr.v_tp)
    out.push_back(describe("lone spike would potentiate: v_a_plus >= v_tp", s.v_a_plus));
  if (s.v_a_minus >= thr.v_tm)
    out.push_back(describe("lone spike would depress: v_a_minus >= v_tm", s.v_a_minus));
  return out;
}

void require_valid(const SpikeShape& shape) {
  if (auto v = validate_shape(shape); !v.empty()) throw ValidationError(std::move(v));
}

void require_valid(const SpikeShape& shape, const PlasticityThresholds& thr) {
  if (auto v = validate_shape(shape, thr); !v.empty()) throw ValidationError(std::move(v));
}

namespace {

double unchecked_net(const SpikeShape& shape, double delta_t, double t) {
  return eval_spike(shape, t - delta_t, false) - eval_spike(shape, t, false);
}

}  // namespace

double spike_voltage(const SpikeShape& shape, double t) {
  require_valid(shape);
  return eval_spike(shape, t, false);
}

double net_potential(const SpikeShape& shape, double delta_t, double t) {
  require_valid(shape);
  return unchecked_net(shape, delta_t, t);
}

OverdriveIntegrals overdrive_integrals(const SpikeShape& shape, const PlasticityThresholds& thr,
                                       double delta_t, double step) {
  require_valid(shape);
  if (!(step > 0.0)) throw ValidationError(describe("quadrature step must be > 0", step));
  OverdriveIntegrals out;
  if (delta_t == 0.0) return out;
  const auto breaks = pair_breakpoints(shape, delta_t);
  const std::function<double(double, bool)> vnet = [&](double t, bool left) {
    return net_limit(shape, delta_t, t, left);
  };
  const std::function<double(double)> pot_g = [&](double t) {
    return unchecked_net(shape, delta_t, t) - thr.v_tp;
  };
  const std::function<double(double)> dep_g = [&](double t) {
    return -unchecked_net(shape, delta_t, t) - thr.v_tm;
  };
  for_each_cell(breaks, step, vnet, [&](double a, double b, double va, double vb) {
    out.pot += positive_part_integral(pot_g, a, b, va - thr.v_tp, vb - thr.v_tp);
    out.dep += positive_part_integral(dep_g, a, b, -va - thr.v_tm, -vb - thr.v_tm);
  });
  return out;
}

double over_threshold_window(const SpikeShape& shape, const PlasticityThresholds& thr,
                             double delta_t, double step) {
  require_valid(shape);
  if (delta_t == 0.0) return 0.0;
  const auto breaks = pair_breakpoints(shape, delta_t);
  const std::function<double(double, bool)> vnet = [&](double t, bool left) {
    return net_limit(shape, delta_t, t, left);
  };
  const std::function<double(double)> g = [&](double t) {
    return unchecked_net(shape, delta_t, t) - thr.v_tp;
  };
  double total = 0.0;
  for_each_cell(breaks, step, vnet, [&](double a, double b, double va, double vb) {
    total += measure_positive(g, a, b, va - thr.v_tp, vb - thr.v_tp);
  });
  return total;
}

double peak_net_potential(const SpikeShape& shape, double delta_t, double step) {
  require_valid(shape);
  if (delta_t == 0.0) return 0.0;
  const auto breaks = pair_breakpoints(shape, delta_t);
  const std::function<double(double, bool)> vnet = [&](double t, bool left) {
    return net_limit(shape, delta_t, t, left);
  };
  double peak = 0.0;
  for_each_cell(breaks, step, vnet, [&](double, double, double va, double vb) {
    peak = std::max({peak, va, vb});
  });
  return peak;
}

double energy_into_load(const SpikeShape& s, double r_load) {
  require_valid(s);
  if (!(r_load > 0.0)) throw std::domain_error(describe("r_load must be > 0", r_load));
  const double ap = s.v_a_plus;
  const double am = s.v_a_minus;
  const double plateau = s.t_plus - s.t_rise - s.t_fall;
  // Integral of (v - v_refr)^2 over each piece; a ramp from x to y over T gives T(x^2+xy+y^2)/3.
  const double rise = ap * ap * s.t_rise / 3.0;
  const double flat = ap * ap * plateau;
  const double fall = s.t_fall * (ap * ap - ap * am + am * am) / 3.0;
  const double tail =
      am * am * 0.5 * s.tau_decay * (1.0 - std::exp(-2.0 * s.t_minus / s.tau_decay));
  return (rise + flat + fall + tail) / r_load;
}

double energy_into_load_quadrature(const SpikeShape& s, double r_load, double step) {
  require_valid(s);
  if (!(r_load > 0.0)) throw std::domain_error(describe("r_load must be > 0", r_load));
  const auto breaks = sorted_unique(spike_breakpoints(s, 0.0));
  const std::function<double(double, bool)> sq = [&](double t, bool left) {
    const double d = eval_spike(s, t, left) - s.v_refr;
    return d * d;
  };
  double total = 0.0;
  for_each_cell(breaks, step, sq,
                [&](double a, double b, double fa, double fb) { total += 0.5 * (fa + fb) * (b - a); });
  return total / r_load;
}

}  // namespace duallif
