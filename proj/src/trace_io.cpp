#include "duallif/trace_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "duallif/error.hpp"

namespace duallif {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_trace_csv(const Trace& trace, std::ostream& os) {
  const auto& rec = trace.record;
  os << "t_s";
  if (rec.v_mem || rec.ports) {
    for (unsigned id : trace.neuron_ids) {
      if (rec.v_mem) os << ",v_mem_" << id << ",mode_" << id;
      if (rec.ports) os << ",v_port_" << id;
    }
  }
  if (rec.g)
    for (unsigned id : trace.synapse_ids) os << ",g_S_" << id << ",r_ohm_" << id;
  os << '\n';

  for (const auto& row : trace.rows) {
    os << format_number(row.t);
    for (std::size_t i = 0; i < trace.neuron_ids.size(); ++i) {
      if (rec.v_mem)
        os << ',' << format_number(row.v_mem[i]) << ',' << (row.mode[i] == Mode::Firing ? 1 : 0);
      if (rec.ports) os << ',' << format_number(row.port[i]);
    }
    if (rec.g)
      for (double g : row.g) os << ',' << format_number(g) << ',' << format_number(1.0 / g);
    os << '\n';
  }
}

void write_fires_csv(const Trace& trace, std::ostream& os) {
  os << "neuron_id,t_onset_s\n";
  for (const auto& f : trace.fires) os << f.neuron_id << ',' << format_number(f.t_onset) << '\n';
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << contents;
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_trace_files(const Trace& trace, const std::filesystem::path& dir) {
  std::ostringstream rows;
  write_trace_csv(trace, rows);
  write_text_file(dir / "trace.csv", rows.str());
  if (trace.record.fires) {
    std::ostringstream fires;
    write_fires_csv(trace, fires);
    write_text_file(dir / "fires.csv", fires.str());
  }
}

}  // namespace duallif
