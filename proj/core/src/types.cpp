// SPDX-License-Identifier: Apache-2.0
#include "dcmg/types.hpp"

#include <cmath>
#include <sstream>

namespace dcmg {
namespace {

std::string collapse_message(int node, double voltage, double time) {
  std::ostringstream os;
  os << "voltage collapse at DGU " << node << " (V = " << voltage << " V";
  if (!std::isnan(time)) os << ", t = " << time << " s";
  os << ")";
  return os.str();
}

}  // namespace

VoltageCollapse::VoltageCollapse(int node, double voltage, double time)
    : std::domain_error(collapse_message(node, voltage, time)),
      node_(node),
      voltage_(voltage),
      time_(time) {}

}  // namespace dcmg
