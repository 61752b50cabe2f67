// SPDX-License-Identifier: Apache-2.0
#include "dcmg/microgrid.hpp"

#include <cmath>
#include <set>
#include <string>
#include <utility>

namespace dcmg {
namespace {

template <class F>
Vector per_dgu(const MicrogridConfig& c, F f) {
  Vector out(c.n());
  for (int i = 0; i < c.n(); ++i) out[i] = f(c.dgus[i]);
  return out;
}

template <class F>
Vector per_line(const MicrogridConfig& c, F f) {
  Vector out(c.m());
  for (int l = 0; l < c.m(); ++l) out[l] = f(c.lines[l]);
  return out;
}

std::string at(const char* list, int i, const char* field) {
  return std::string(list) + "[" + std::to_string(i) + "]." + field;
}

void require_pos(double x, const std::string& path) {
  if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError(path + ": must be positive and finite");
}

}  // namespace

Vector MicrogridConfig::ratings() const {
  return per_dgu(*this, [](const DguUnit& d) { return d.params.rated_current; });
}
Vector MicrogridConfig::v_ref() const {
  return per_dgu(*this, [](const DguUnit& d) { return d.params.v_ref; });
}
Vector MicrogridConfig::capacitances() const {
  return per_dgu(*this, [](const DguUnit& d) { return d.params.C_t; });
}
Vector MicrogridConfig::conductances() const {
  return per_dgu(*this, [](const DguUnit& d) { return d.load.conductance; });
}
Vector MicrogridConfig::constant_currents() const {
  return per_dgu(*this, [](const DguUnit& d) { return d.load.constant_current; });
}
Vector MicrogridConfig::powers() const {
  return per_dgu(*this, [](const DguUnit& d) { return d.load.power; });
}
Vector MicrogridConfig::exponents() const {
  return per_dgu(*this, [](const DguUnit& d) { return d.load.exponent; });
}
Vector MicrogridConfig::line_resistances() const {
  return per_line(*this, [](const LineUnit& l) { return l.params.resistance; });
}
Vector MicrogridConfig::line_inductances() const {
  return per_line(*this, [](const LineUnit& l) { return l.params.inductance; });
}

std::vector<DguParams> MicrogridConfig::dgu_params() const {
  std::vector<DguParams> out;
  out.reserve(dgus.size());
  for (const auto& d : dgus) out.push_back(d.params);
  return out;
}

std::vector<Edge> MicrogridConfig::closed_edges() const {
  std::vector<Edge> out;
  for (const auto& l : lines) {
    if (l.closed) out.push_back(l.ends);
  }
  return out;
}

Matrix MicrogridConfig::incidence() const {
  std::vector<Edge> ends;
  ends.reserve(lines.size());
  for (const auto& l : lines) ends.push_back(l.ends);
  Matrix B = incidence_matrix(n(), ends);
  for (int l = 0; l < m(); ++l) {
    if (!lines[l].closed) B.col(l).setZero();
  }
  return B;
}

Matrix MicrogridConfig::electrical_laplacian() const {
  return dcmg::electrical_laplacian(incidence(), line_resistances());
}

Matrix MicrogridConfig::comm_weights() const {
  Matrix W = Matrix::Zero(n(), n());
  for (const auto& c : comm) {
    W(c.a, c.b) = c.weight;
    W(c.b, c.a) = c.weight;
  }
  return W;
}

Matrix MicrogridConfig::effective_comm_weights() const {
  Matrix W = comm_weights();
  for (int i = 0; i < n(); ++i) {
    if (!dgus[i].online || !dgus[i].secondary) {
      W.row(i).setZero();
      W.col(i).setZero();
    }
  }
  return W;
}

Matrix MicrogridConfig::effective_comm_laplacian() const {
  return laplacian_from_weights(effective_comm_weights());
}

MicrogridTopology MicrogridConfig::topology() const {
  return {n(), closed_edges(), comm_weights()};
}

bool MicrogridConfig::all_zip() const {
  for (const auto& d : dgus) {
    if (!d.load.is_zip()) return false;
  }
  return true;
}

void validate(const MicrogridConfig& config) {
  if (config.n() == 0) throw ConfigError("dgus: at least one DGU is required");
  for (int i = 0; i < config.n(); ++i) {
    const DguUnit& d = config.dgus[i];
    require_pos(d.params.R_t, at("dgus", i, "R_t"));
    require_pos(d.params.L_t, at("dgus", i, "L_t"));
    require_pos(d.params.C_t, at("dgus", i, "C_t"));
    require_pos(d.params.rated_current, at("dgus", i, "rated_current"));
    require_pos(d.params.v_ref, at("dgus", i, "V_ref"));
    require_pos(d.params.v_source, at("dgus", i, "V_s"));
    if (!(d.load.conductance >= 0.0) || !std::isfinite(d.load.conductance)) {
      throw ConfigError(at("dgus", i, "load.Y") + ": must be nonnegative and finite");
    }
    if (!std::isfinite(d.load.constant_current)) {
      throw ConfigError(at("dgus", i, "load.I") + ": must be finite");
    }
    if (!std::isfinite(d.load.power)) throw ConfigError(at("dgus", i, "load.P") + ": must be finite");
    if (!std::isfinite(d.load.exponent)) {
      throw ConfigError(at("dgus", i, "load.r") + ": must be finite");
    }
    if (d.gains) {
      const PrimaryGains& k = *d.gains;
      if (!std::isfinite(k.k1) || !std::isfinite(k.k2) || !std::isfinite(k.k3) ||
          !std::isfinite(k.k4)) {
        throw ConfigError(at("dgus", i, "gains") + ": must be finite");
      }
    }
  }
  std::set<std::pair<int, int>> seen;
  for (int l = 0; l < config.m(); ++l) {
    const LineUnit& line = config.lines[l];
    const auto bad = [&](int v) { return v < 0 || v >= config.n(); };
    if (bad(line.ends.source)) throw ConfigError(at("lines", l, "from") + ": no such DGU");
    if (bad(line.ends.sink)) throw ConfigError(at("lines", l, "to") + ": no such DGU");
    if (line.ends.source == line.ends.sink) {
      throw ConfigError(at("lines", l, "to") + ": self-loop");
    }
    const auto key = std::minmax(line.ends.source, line.ends.sink);
    if (!seen.insert(key).second) throw ConfigError(at("lines", l, "to") + ": parallel line");
    require_pos(line.params.resistance, at("lines", l, "R"));
    require_pos(line.params.inductance, at("lines", l, "L"));
  }
  seen.clear();
  for (int c = 0; c < static_cast<int>(config.comm.size()); ++c) {
    const CommLink& link = config.comm[c];
    if (link.a < 0 || link.a >= config.n()) throw ConfigError(at("comm", c, "a") + ": no such DGU");
    if (link.b < 0 || link.b >= config.n()) throw ConfigError(at("comm", c, "b") + ": no such DGU");
    if (link.a == link.b) throw ConfigError(at("comm", c, "b") + ": self-loop");
    if (!(link.weight >= 0.0) || !std::isfinite(link.weight)) {
      throw ConfigError(at("comm", c, "weight") + ": must be nonnegative and finite");
    }
    if (!seen.insert(std::minmax(link.a, link.b)).second) {
      throw ConfigError(at("comm", c, "b") + ": duplicate link");
    }
  }
}

void require_analysis_ready(const MicrogridConfig& config) {
  validate(config);
  for (int i = 0; i < config.n(); ++i) {
    if (!config.dgus[i].online) throw ConfigError(at("dgus", i, "online") + ": must be true");
    if (!config.dgus[i].secondary) {
      throw ConfigError(at("dgus", i, "secondary") + ": must be true");
    }
  }
  for (int l = 0; l < config.m(); ++l) {
    if (!config.lines[l].closed) throw ConfigError(at("lines", l, "closed") + ": must be true");
  }
  const auto edges = config.closed_edges();
  if (!is_connected(config.n(), edges)) throw ConfigError("lines: electrical graph disconnected");
  if (!is_connected(config.comm_weights())) {
    throw ConfigError("comm: communication graph disconnected");
  }
}

GainSet resolve_gains(const MicrogridConfig& config, double margin) {
  std::vector<PrimaryGains> k;
  k.reserve(config.dgus.size());
  for (const auto& d : config.dgus) {
    k.push_back(d.gains ? *d.gains
                        : sample_stabilizing_gains(d.params.R_t, d.params.L_t, margin));
  }
  const auto params = config.dgu_params();
  return make_gain_set(k, params);
}

}  // namespace dcmg
