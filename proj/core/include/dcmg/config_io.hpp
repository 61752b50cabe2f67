// SPDX-License-Identifier: Apache-2.0
#pragma once

// JSON config documents.
//
//   {
//     "schema_version": 1,
//     "dgus":  [{"R_t", "L_t", "C_t", "rated_current", "V_ref", "V_s",
//                "load": {"Y", "I", "P", "r"},
//                "gains": {"k1", "k2", "k3", "k4"},      (optional)
//                "secondary", "online"}],               (optional, default true)
//     "lines": [{"from", "to", "R", "L", "closed"}],    (0-based node indices)
//     "comm":  [{"a", "b", "weight"}],
//     "scenario": {"t_end", "dt", "record_every", "events": [...]},   (optional)
//     "solver": {"fixed_point_tol", "newton_tol", "max_iter", "gain_margin"}
//   }

#include "dcmg/equilibrium.hpp"
#include "dcmg/simulator.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dcmg {

inline constexpr int kSchemaVersion = 1;

struct ScenarioSettings {
  double t_end = 1.0;
  double dt = 1e-5;
  int record_every = 0;  // 0: choose automatically
  std::vector<ScenarioEvent> events;

  friend bool operator==(const ScenarioSettings&, const ScenarioSettings&);
};

struct SolverSettings {
  double fixed_point_tol = kFixedPointTol;
  double newton_tol = kNewtonTol;
  int max_iter = kMaxIterations;
  double gain_margin = 0.5;

  friend bool operator==(const SolverSettings&, const SolverSettings&) = default;
};

struct ConfigDocument {
  int schema_version = kSchemaVersion;
  MicrogridConfig config;
  std::optional<ScenarioSettings> scenario;
  SolverSettings solver;
};

/// Parses and validates; failures throw ConfigError with a path such as
/// "dgus[1].load.Y: expected a number".
ConfigDocument parse_config(const std::string& text);
ConfigDocument load_config(const std::filesystem::path& path);

std::string serialize_config(const ConfigDocument& doc);
void save_config(const ConfigDocument& doc, const std::filesystem::path& path);

bool operator==(const MicrogridConfig& a, const MicrogridConfig& b);
bool operator==(const ScenarioEvent& a, const ScenarioEvent& b);

}  // namespace dcmg
