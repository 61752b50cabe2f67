// SPDX-License-Identifier: Apache-2.0
#include "dcmg/config_io.hpp"

#include <json.hpp>

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace dcmg {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path + ": " + msg);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

void require_object(const json& j, const std::string& path,
                    std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (!keys.count(item.key())) fail(join(path, item.key()), "unknown field");
  }
}

const json& member(const json& j, const char* key, const std::string& path) {
  const auto it = j.find(key);
  if (it == j.end()) fail(join(path, key), "missing required field");
  return *it;
}

double number(const json& j, const char* key, const std::string& path) {
  const json& v = member(j, key, path);
  if (!v.is_number()) fail(join(path, key), "expected a number");
  return v.get<double>();
}

double number_or(const json& j, const char* key, const std::string& path, double fallback) {
  return j.contains(key) ? number(j, key, path) : fallback;
}

int integer(const json& j, const char* key, const std::string& path) {
  const json& v = member(j, key, path);
  if (!v.is_number_integer()) fail(join(path, key), "expected an integer");
  return v.get<int>();
}

bool boolean_or(const json& j, const char* key, const std::string& path, bool fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_boolean()) fail(join(path, key), "expected true or false");
  return v.get<bool>();
}

const json& array(const json& j, const char* key, const std::string& path) {
  const json& v = member(j, key, path);
  if (!v.is_array()) fail(join(path, key), "expected an array");
  return v;
}

ZieLoad parse_load(const json& j, const std::string& path) {
  require_object(j, path, {"Y", "I", "P", "r"});
  return {number_or(j, "Y", path, 0.0), number_or(j, "I", path, 0.0),
          number_or(j, "P", path, 0.0), number_or(j, "r", path, 1.0)};
}

json dump_load(const ZieLoad& l) {
  return {{"Y", l.conductance}, {"I", l.constant_current}, {"P", l.power}, {"r", l.exponent}};
}

ScenarioEvent parse_event(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  const json& kind_v = member(j, "kind", path);
  if (!kind_v.is_string()) fail(join(path, "kind"), "expected a string");
  const std::string kind = kind_v.get<std::string>();
  ScenarioEvent ev;
  if (kind == "close_line" || kind == "open_line") {
    require_object(j, path, {"time", "kind", "line"});
    const int l = integer(j, "line", path);
    ev.action = kind == "close_line" ? EventAction{CloseLine{l}} : EventAction{OpenLine{l}};
  } else if (kind == "set_load") {
    require_object(j, path, {"time", "kind", "node", "load"});
    ev.action = SetLoad{integer(j, "node", path),
                        parse_load(member(j, "load", path), join(path, "load"))};
  } else if (kind == "plug_in_dgu") {
    require_object(j, path, {"time", "kind", "node", "lines"});
    PlugInDgu p{integer(j, "node", path), {}};
    if (j.contains("lines")) {
      const json& ls = array(j, "lines", path);
      for (std::size_t k = 0; k < ls.size(); ++k) {
        if (!ls[k].is_number_integer()) fail(index(join(path, "lines"), k), "expected an integer");
        p.lines.push_back(ls[k].get<int>());
      }
    }
    ev.action = p;
  } else if (kind == "unplug_dgu" || kind == "enable_secondary" ||
             kind == "disable_secondary") {
    require_object(j, path, {"time", "kind", "node"});
    const int i = integer(j, "node", path);
    if (kind == "unplug_dgu") ev.action = UnplugDgu{i};
    if (kind == "enable_secondary") ev.action = EnableSecondary{i};
    if (kind == "disable_secondary") ev.action = DisableSecondary{i};
  } else if (kind == "set_comm_link") {
    require_object(j, path, {"time", "kind", "a", "b", "weight"});
    ev.action = SetCommLink{integer(j, "a", path), integer(j, "b", path),
                            number(j, "weight", path)};
  } else {
    fail(join(path, "kind"), "unknown event kind '" + kind + "'");
  }
  ev.time = number(j, "time", path);
  if (!(ev.time >= 0.0)) fail(join(path, "time"), "must be nonnegative");
  return ev;
}

json dump_event(const ScenarioEvent& ev) {
  json j{{"time", ev.time}, {"kind", to_string(ev.kind())}};
  std::visit(
      [&](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, CloseLine> || std::is_same_v<T, OpenLine>) {
          j["line"] = a.line;
        } else if constexpr (std::is_same_v<T, SetLoad>) {
          j["node"] = a.node;
          j["load"] = dump_load(a.load);
        } else if constexpr (std::is_same_v<T, PlugInDgu>) {
          j["node"] = a.node;
          j["lines"] = a.lines;
        } else if constexpr (std::is_same_v<T, SetCommLink>) {
          j["a"] = a.a;
          j["b"] = a.b;
          j["weight"] = a.weight;
        } else {
          j["node"] = a.node;
        }
      },
      ev.action);
  return j;
}

bool same_action(const EventAction& x, const EventAction& y) {
  if (x.index() != y.index()) return false;
  return std::visit(
      [&](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        const T& b = std::get<T>(y);
        if constexpr (std::is_same_v<T, CloseLine> || std::is_same_v<T, OpenLine>) {
          return a.line == b.line;
        } else if constexpr (std::is_same_v<T, SetLoad>) {
          return a.node == b.node && a.load == b.load;
        } else if constexpr (std::is_same_v<T, PlugInDgu>) {
          return a.node == b.node && a.lines == b.lines;
        } else if constexpr (std::is_same_v<T, SetCommLink>) {
          return a.a == b.a && a.b == b.b && a.weight == b.weight;
        } else {
          return a.node == b.node;
        }
      },
      x);
}

}  // namespace

bool operator==(const ScenarioEvent& a, const ScenarioEvent& b) {
  return a.time == b.time && same_action(a.action, b.action);
}

bool operator==(const ScenarioSettings& a, const ScenarioSettings& b) {
  return a.t_end == b.t_end && a.dt == b.dt && a.record_every == b.record_every &&
         a.events == b.events;
}

bool operator==(const MicrogridConfig& a, const MicrogridConfig& b) {
  if (a.n() != b.n() || a.m() != b.m() || a.comm.size() != b.comm.size()) return false;
  for (int i = 0; i < a.n(); ++i) {
    const DguUnit& x = a.dgus[i];
    const DguUnit& y = b.dgus[i];
    const DguParams& p = x.params;
    const DguParams& q = y.params;
    if (p.R_t != q.R_t || p.L_t != q.L_t || p.C_t != q.C_t || p.rated_current != q.rated_current ||
        p.v_ref != q.v_ref || p.v_source != q.v_source || !(x.load == y.load) ||
        x.gains != y.gains || x.secondary != y.secondary || x.online != y.online) {
      return false;
    }
  }
  for (int l = 0; l < a.m(); ++l) {
    const LineUnit& x = a.lines[l];
    const LineUnit& y = b.lines[l];
    if (x.ends.source != y.ends.source || x.ends.sink != y.ends.sink ||
        x.params.resistance != y.params.resistance ||
        x.params.inductance != y.params.inductance || x.closed != y.closed) {
      return false;
    }
  }
  for (std::size_t c = 0; c < a.comm.size(); ++c) {
    if (a.comm[c].a != b.comm[c].a || a.comm[c].b != b.comm[c].b ||
        a.comm[c].weight != b.comm[c].weight) {
      return false;
    }
  }
  return true;
}

ConfigDocument parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("<root>: invalid JSON: ") + e.what());
  }
  require_object(root, "", {"schema_version", "dgus", "lines", "comm", "scenario", "solver"});
  ConfigDocument doc;
  doc.schema_version = integer(root, "schema_version", "");
  if (doc.schema_version != kSchemaVersion) {
    fail("schema_version", "unsupported version " + std::to_string(doc.schema_version) +
                               " (expected " + std::to_string(kSchemaVersion) + ")");
  }

  const json& dgus = array(root, "dgus", "");
  for (std::size_t i = 0; i < dgus.size(); ++i) {
    const std::string path = index("dgus", i);
    const json& d = dgus[i];
    require_object(d, path, {"R_t", "L_t", "C_t", "rated_current", "V_ref", "V_s", "load",
                             "gains", "secondary", "online"});
    DguUnit u;
    u.params = {number(d, "R_t", path),           number(d, "L_t", path),
                number(d, "C_t", path),           number(d, "rated_current", path),
                number(d, "V_ref", path),         number(d, "V_s", path)};
    if (d.contains("load")) u.load = parse_load(d.at("load"), join(path, "load"));
    if (d.contains("gains")) {
      const std::string gp = join(path, "gains");
      const json& g = d.at("gains");
      require_object(g, gp, {"k1", "k2", "k3", "k4"});
      u.gains = PrimaryGains{number(g, "k1", gp), number(g, "k2", gp), number(g, "k3", gp),
                             number(g, "k4", gp)};
    }
    u.secondary = boolean_or(d, "secondary", path, true);
    u.online = boolean_or(d, "online", path, true);
    doc.config.dgus.push_back(u);
  }

  if (root.contains("lines")) {
    const json& lines = array(root, "lines", "");
    for (std::size_t l = 0; l < lines.size(); ++l) {
      const std::string path = index("lines", l);
      const json& j = lines[l];
      require_object(j, path, {"from", "to", "R", "L", "closed"});
      doc.config.lines.push_back({{integer(j, "from", path), integer(j, "to", path)},
                                  {number(j, "R", path), number(j, "L", path)},
                                  boolean_or(j, "closed", path, true)});
    }
  }
  if (root.contains("comm")) {
    const json& comm = array(root, "comm", "");
    for (std::size_t c = 0; c < comm.size(); ++c) {
      const std::string path = index("comm", c);
      const json& j = comm[c];
      require_object(j, path, {"a", "b", "weight"});
      doc.config.comm.push_back(
          {integer(j, "a", path), integer(j, "b", path), number_or(j, "weight", path, 1.0)});
    }
  }

  if (root.contains("scenario")) {
    const json& s = root.at("scenario");
    require_object(s, "scenario", {"t_end", "dt", "record_every", "events"});
    ScenarioSettings sc;
    sc.t_end = number_or(s, "t_end", "scenario", sc.t_end);
    sc.dt = number_or(s, "dt", "scenario", sc.dt);
    if (s.contains("record_every")) sc.record_every = integer(s, "record_every", "scenario");
    if (!(sc.t_end > 0.0)) fail("scenario.t_end", "must be positive");
    if (!(sc.dt > 0.0)) fail("scenario.dt", "must be positive");
    if (sc.record_every < 0) fail("scenario.record_every", "must be nonnegative");
    if (s.contains("events")) {
      const json& evs = array(s, "events", "scenario");
      for (std::size_t e = 0; e < evs.size(); ++e) {
        sc.events.push_back(parse_event(evs[e], index("scenario.events", e)));
        if (e > 0 && sc.events[e].time < sc.events[e - 1].time) {
          fail(index("scenario.events", e) + ".time", "events must be sorted by time");
        }
      }
    }
    doc.scenario = std::move(sc);
  }

  if (root.contains("solver")) {
    const json& s = root.at("solver");
    require_object(s, "solver", {"fixed_point_tol", "newton_tol", "max_iter", "gain_margin"});
    SolverSettings& sv = doc.solver;
    sv.fixed_point_tol = number_or(s, "fixed_point_tol", "solver", sv.fixed_point_tol);
    sv.newton_tol = number_or(s, "newton_tol", "solver", sv.newton_tol);
    if (s.contains("max_iter")) sv.max_iter = integer(s, "max_iter", "solver");
    sv.gain_margin = number_or(s, "gain_margin", "solver", sv.gain_margin);
    if (!(sv.fixed_point_tol > 0.0)) fail("solver.fixed_point_tol", "must be positive");
    if (!(sv.newton_tol > 0.0)) fail("solver.newton_tol", "must be positive");
    if (sv.max_iter < 1) fail("solver.max_iter", "must be at least 1");
    if (!(sv.gain_margin > 0.0 && sv.gain_margin < 1.0)) {
      fail("solver.gain_margin", "must lie in (0, 1)");
    }
  }

  validate(doc.config);
  return doc;
}

ConfigDocument load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string serialize_config(const ConfigDocument& doc) {
  json root;
  root["schema_version"] = doc.schema_version;
  json dgus = json::array();
  for (const DguUnit& d : doc.config.dgus) {
    json j{{"R_t", d.params.R_t},
           {"L_t", d.params.L_t},
           {"C_t", d.params.C_t},
           {"rated_current", d.params.rated_current},
           {"V_ref", d.params.v_ref},
           {"V_s", d.params.v_source},
           {"load", dump_load(d.load)},
           {"secondary", d.secondary},
           {"online", d.online}};
    if (d.gains) {
      j["gains"] = {{"k1", d.gains->k1}, {"k2", d.gains->k2}, {"k3", d.gains->k3},
                    {"k4", d.gains->k4}};
    }
    dgus.push_back(std::move(j));
  }
  root["dgus"] = std::move(dgus);
  json lines = json::array();
  for (const LineUnit& l : doc.config.lines) {
    lines.push_back({{"from", l.ends.source},
                     {"to", l.ends.sink},
                     {"R", l.params.resistance},
                     {"L", l.params.inductance},
                     {"closed", l.closed}});
  }
  root["lines"] = std::move(lines);
  json comm = json::array();
  for (const CommLink& c : doc.config.comm) {
    comm.push_back({{"a", c.a}, {"b", c.b}, {"weight", c.weight}});
  }
  root["comm"] = std::move(comm);
  if (doc.scenario) {
    json events = json::array();
    for (const auto& ev : doc.scenario->events) events.push_back(dump_event(ev));
    root["scenario"] = {{"t_end", doc.scenario->t_end},
                        {"dt", doc.scenario->dt},
                        {"record_every", doc.scenario->record_every},
                        {"events", std::move(events)}};
  }
  root["solver"] = {{"fixed_point_tol", doc.solver.fixed_point_tol},
                    {"newton_tol", doc.solver.newton_tol},
                    {"max_iter", doc.solver.max_iter},
                    {"gain_margin", doc.solver.gain_margin}};
  return root.dump(2) + "\n";
}

void save_config(const ConfigDocument& doc, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError(path.string() + ": cannot open for writing");
  out << serialize_config(doc);
  if (!out) throw ConfigError(path.string() + ": write failed");
}

}  // namespace dcmg
