#pragma once

#include <filesystem>
#include <ostream>
#include <string>

#include "duallif/engine.hpp"

namespace duallif {

/// CSV number format shared by every writer: "%.12g", '.' decimal, LF line endings.
std::string format_number(double v);

/// Header: t_s, then per neuron v_mem_<id>,mode_<id>[,v_port_<id>], then per synapse
/// g_S_<id>,r_ohm_<id>. Mode is 0 for integration and 1 for firing.
void write_trace_csv(const Trace& trace, std::ostream& os);

/// Header: neuron_id,t_onset_s. Never decimated.
void write_fires_csv(const Trace& trace, std::ostream& os);

/// Writes <dir>/trace.csv and, if fires are recorded, <dir>/fires.csv. Throws IoError.
void write_trace_files(const Trace& trace, const std::filesystem::path& dir);

void write_text_file(const std::filesystem::path& path, const std::string& contents);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace duallif
