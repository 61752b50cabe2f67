// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dcmg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNegative = 1;  // infeasible, uncertified, collapse
inline constexpr int kExitUsage = 2;     // bad flags or config

/// Entry point shared by the executable and the tests; `args` excludes argv[0].
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct SimulateOptions {
  std::string config;
  std::string out;
  std::string plot;
  double dt = 0.0;     // 0: take from the config's scenario block
  double t_end = 0.0;  // same
  int stride = 0;      // 0: config value, else one sample per millisecond
  int plot_every = 1;
  bool per_unit = false;
  bool expect_stable = false;
};

int cmd_certify(const std::string& config, std::ostream& out, std::ostream& err);
int cmd_equilibrium(const std::string& config, bool newton, bool fixed_point, std::ostream& out,
                    std::ostream& err);
int cmd_stability(const std::string& config, std::ostream& out, std::ostream& err);
int cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err);
int cmd_template(const std::string& name, const std::string& out_path, std::ostream& out,
                 std::ostream& err);

}  // namespace dcmg::cli
