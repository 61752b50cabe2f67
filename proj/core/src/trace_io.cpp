// SPDX-License-Identifier: Apache-2.0
#include "dcmg/trace_io.hpp"

#include <algorithm>
#include <charconv>
#include <ostream>

namespace dcmg {

std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string trace_csv_header(const StateLayout& layout) {
  std::string h = "time";
  auto cols = [&](const char* name, int count) {
    for (int i = 1; i <= count; ++i) {
      h += ',';
      h += name;
      h += std::to_string(i);
    }
  };
  cols("V_", layout.n);
  cols("It_", layout.n);
  cols("v_", layout.n);
  cols("I_", layout.m);
  if (layout.mode == ControlMode::secondary) cols("Omega_", layout.n);
  h += ",sharing_dispersion,balance_error";
  return h;
}

void write_trace_csv(std::ostream& out, const SimulationTrace& trace) {
  out << trace_csv_header(trace.layout) << '\n';
  std::string line;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    line = format_double(trace.time[k]);
    const Vector& x = trace.states[k];
    for (Index j = 0; j < x.size(); ++j) {
      line += ',';
      line += format_double(x[j]);
    }
    line += ',';
    line += format_double(trace.sharing_dispersion[k]);
    line += ',';
    line += format_double(trace.balance_error[k]);
    line += '\n';
    out << line;
  }
}

void write_plot_tsv(std::ostream& out, const SimulationTrace& trace, const PlotOptions& opts) {
  const StateLayout& s = trace.layout;
  const int every = std::max(1, opts.every);
  out << "time";
  for (int i = 1; i <= s.n; ++i) out << "\tV_" << i;
  for (int i = 1; i <= s.n; ++i) out << (opts.per_unit ? "\tIt_pu_" : "\tIt_") << i;
  out << "\tweighted_V\tweighted_ref\n";
  for (std::size_t k = 0; k < trace.size(); k += every) {
    const MicrogridConfig& cfg = trace.config_at(trace.time[k]);
    const Vector& x = trace.states[k];
    out << format_double(trace.time[k]);
    for (int i = 0; i < s.n; ++i) out << '\t' << format_double(x[s.V() + i]);
    for (int i = 0; i < s.n; ++i) {
      const double I = x[s.It() + i];
      out << '\t' << format_double(opts.per_unit ? I / cfg.dgus[i].params.rated_current : I);
    }
    // Weighted sums over the DGUs that take part in voltage balancing.
    double wv = 0.0;
    double wref = 0.0;
    for (int i = 0; i < s.n; ++i) {
      const DguUnit& d = cfg.dgus[i];
      if (!d.online || !d.secondary) continue;
      wv += d.params.rated_current * x[s.V() + i];
      wref += d.params.rated_current * d.params.v_ref;
    }
    out << '\t' << format_double(wv) << '\t' << format_double(wref) << '\n';
  }
}

}  // namespace dcmg
