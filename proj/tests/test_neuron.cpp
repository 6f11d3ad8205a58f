#include <doctest.h>

#include <cmath>
#include <limits>
#include <optional>

#include "approx.hpp"
#include "duallif/error.hpp"
#include "duallif/neuron.hpp"

using namespace duallif;

TEST_CASE("resting neuron stays at v_refr with no input") {
  const auto p = default_neuron_params();
  auto s = resting_state(p);
  for (int i = 0; i < 100000; ++i) s = integrate_step(s, p, 0.0, 10e-9);
  CHECK(s.v_mem == p.v_refr);
  CHECK(check_fire(s, p) == FireDecision::Stay);
}

TEST_CASE("leak decays by one e-fold per tau_m") {
  auto p = default_neuron_params();
  p.v_refr = 0.05;
  p.v_thr = -1.0;
  p.shape.v_refr = p.v_refr;
  const double tau = p.tau_m();
  for (int n : {10, 1000, 12345}) {
    NeuronState s = resting_state(p);
    s.v_mem = p.v_refr - 0.2;
    for (int i = 0; i < n; ++i) s = integrate_step(s, p, 0.0, tau / n);
    const double expected = -0.2 * std::exp(-1.0);
    CHECK(std::abs((s.v_mem - p.v_refr) - expected) <= 1e-4 * std::abs(expected));
  }
}

TEST_CASE("constant current reaches the leaky equilibrium") {
  const auto p = default_neuron_params();
  NeuronState s = resting_state(p);
  s.armed = false;  // just watch the approach
  const double i = 1e-9;
  for (int k = 0; k < 3000; ++k) s = integrate_step(s, p, i, p.tau_m() / 100);
  CHECK(s.v_mem == rel(p.v_refr - i * p.r_leaky, 1e-9));
}

TEST_CASE("ideal integrator charges linearly") {
  auto p = default_neuron_params();
  p.r_leaky = std::numeric_limits<double>::infinity();
  const double i = 0.3 / 51e3;  // 0.3 V over 51 kOhm into a virtual ground
  NeuronState s = resting_state(p);
  s.armed = false;
  for (int k = 0; k < 50; ++k) s = integrate_step(s, p, i, 10e-9);
  CHECK(s.v_mem == rel(-i * 0.5e-6 / p.c_mem, 1e-12));
  CHECK(s.v_mem == rel(-0.294, 1e-3));
}

TEST_CASE("threshold check is boundary inclusive") {
  const auto p = default_neuron_params();
  NeuronState s = resting_state(p);
  CHECK(check_fire(s, p) == FireDecision::Stay);
  s.v_mem = p.v_thr;
  CHECK(check_fire(s, p) == FireDecision::Fire);
  s.v_mem = std::nextafter(p.v_thr, 1.0);
  CHECK(check_fire(s, p) == FireDecision::Stay);
  s.v_mem = p.v_thr - 0.5;
  CHECK(check_fire(s, p) == FireDecision::Fire);
}

TEST_CASE("hysteresis re-arms only after v_mem climbs past v_thr + hysteresis") {
  auto p = default_neuron_params();
  p.r_leaky = std::numeric_limits<double>::infinity();
  p.hysteresis = 0.2;  // re-arm level 0.1 V, above v_refr
  NeuronState s = resting_state(p);
  CHECK_FALSE(s.armed);
  s = integrate_step(s, p, 1e-6, 2e-6);  // down to -0.2 V
  CHECK(s.v_mem < p.v_thr);
  CHECK(check_fire(s, p) == FireDecision::Stay);
  s = integrate_step(s, p, -1e-6, 3e-6);  // up to +0.1 V
  CHECK(s.armed);
  s = integrate_step(s, p, 1e-6, 2.5e-6);
  CHECK(check_fire(s, p) == FireDecision::Fire);
}

TEST_CASE("mode transitions and contract violations") {
  const auto p = default_neuron_params();
  NeuronState s = resting_state(p);
  s.v_mem = -0.2;
  s = begin_fire(s, p, 1e-6);
  CHECK(s.mode == Mode::Firing);
  CHECK(s.v_mem == p.v_refr);
  CHECK(s.t_fire_onset == 1e-6);
  CHECK_THROWS_AS(integrate_step(s, p, 0.0, 1e-9), ContractViolation);
  CHECK_THROWS_AS(check_fire(s, p), ContractViolation);
  CHECK_THROWS_AS(begin_fire(s, p, 2e-6), ContractViolation);
  CHECK_THROWS_AS(end_fire(s, p, 3.99e-6), ContractViolation);
  CHECK_FALSE(fire_elapsed(s, p, 3.99e-6));
  CHECK(fire_elapsed(s, p, 4e-6));
  s = end_fire(s, p, 4e-6);
  CHECK(s.mode == Mode::Integration);
  CHECK(s.v_mem == p.v_refr);
  CHECK_THROWS_AS(end_fire(s, p, 5e-6), ContractViolation);
  CHECK_THROWS_AS(integrate_step(s, p, 0.0, 0.0), ContractViolation);
}

TEST_CASE("port voltage follows the mode") {
  const auto p = default_neuron_params();
  NeuronState s = resting_state(p);
  CHECK(port_voltage(s, p, 123.0) == p.v_refr);
  s = begin_fire(s, p, 2e-6);
  CHECK(port_voltage(s, p, 2e-6) == p.v_refr);
  CHECK(port_voltage(s, p, 2.25e-6) == rel(0.3));
  CHECK(port_voltage(s, p, 2e-6 + p.shape.t_plus + p.shape.tau_decay) ==
        rel(-0.1 * std::exp(-1.0), 1e-12));
}

TEST_CASE("fire time converges as dt shrinks") {
  const auto p = default_neuron_params();
  const double i = 2e-6;
  auto first_fire = [&](double dt) -> std::optional<double> {
    NeuronState s = resting_state(p);
    for (long k = 0; k < 100000; ++k) {
      s = integrate_step(s, p, i, dt);
      if (check_fire(s, p) == FireDecision::Fire) return (k + 1) * dt;
    }
    return std::nullopt;
  };
  // continuous answer: v(t) = -i R (1 - exp(-t/tau)) hits v_thr
  const double t_exact = -p.tau_m() * std::log1p(p.v_thr / (i * p.r_leaky));
  for (double dt : {40e-9, 20e-9, 10e-9, 5e-9}) {
    const auto t = first_fire(dt);
    REQUIRE(t.has_value());
    CHECK(*t >= t_exact - 1e-15);
    CHECK(*t - t_exact < dt);
  }
}

TEST_CASE("parameter validation") {
  CHECK(validate_neuron_params(default_neuron_params()).empty());
  auto p = default_neuron_params();
  p.v_thr = 0.1;
  CHECK_FALSE(validate_neuron_params(p).empty());
  p = default_neuron_params();
  p.v_refr = 0.1;
  CHECK_FALSE(validate_neuron_params(p).empty());
  p.shape.v_refr = 0.1;
  CHECK(validate_neuron_params(p).empty());
  p.c_mem = 0.0;
  CHECK_FALSE(validate_neuron_params(p).empty());
}
