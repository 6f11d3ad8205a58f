#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "duallif/engine.hpp"
#include "duallif/scenarios.hpp"

namespace duallif::config {

using nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";

/// Every section with its defaults filled in. User documents are merged over this.
json default_config();

/// Merge `user` over the defaults, rejecting unknown keys and non-numeric values where
/// numbers are expected. Throws ValidationError.
json resolve(const json& user);

/// Apply "a.b.c=value"; value is parsed as JSON when possible, else taken as a string.
void apply_override(json& doc, std::string_view assignment);

/// 64-bit FNV-1a of the compact serialization, as 16 hex digits.
std::string config_hash(const json& resolved);

json to_json(const SpikeShape& s);
SpikeShape shape_from_json(const json& j);
json to_json(const PlasticityThresholds& t);

/// Typed views over a resolved document.
SpikeShape shape(const json& resolved);
PlasticityThresholds thresholds(const json& resolved);
NeuronParams neuron_params(const json& resolved);
SynapseParams synapse_params(const json& resolved);
SimConfig sim_config(const json& resolved);
Network network(const json& resolved);
Stimulus stimulus(const json& resolved);
scenarios::StdpSettings stdp_settings(const json& resolved);
scenarios::CalibrationTargets calibration_targets(const json& resolved);
scenarios::PavlovConfig pavlov_config(const json& resolved);

json to_json(const scenarios::PavlovReport& r);
json to_json(const scenarios::EnergyReport& r);
json to_json(const scenarios::CalibrationReport& r);

}  // namespace duallif::config
