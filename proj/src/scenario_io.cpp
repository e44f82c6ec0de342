#include "oscgrid/scenario_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "oscgrid/errors.hpp"

namespace oscgrid::io {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw InputError("schema error at " + path + ": " + what);
}

void allow_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) schema_error(path, "expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) schema_error(path, "unknown key \"" + key + "\"");
  }
}

const json& require(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) schema_error(path, std::string("missing key \"") + key + "\"");
  return obj.at(key);
}

double number(const json& obj, const std::string& path, const char* key) {
  const json& v = require(obj, path, key);
  if (!v.is_number()) schema_error(path + "/" + key, "expected a number");
  return v.get<double>();
}

std::optional<double> optional_number(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) return std::nullopt;
  return number(obj, path, key);
}

long integer(const json& obj, const std::string& path, const char* key) {
  const json& v = require(obj, path, key);
  if (!v.is_number_integer()) schema_error(path + "/" + key, "expected an integer");
  return v.get<long>();
}

std::string unit(const json& obj, const std::string& path, std::initializer_list<const char*> options) {
  const json& v = require(obj, path, "unit");
  if (!v.is_string()) schema_error(path + "/unit", "expected a string");
  const auto s = v.get<std::string>();
  for (const char* o : options) {
    if (s == o) return s;
  }
  schema_error(path + "/unit", "unsupported unit \"" + s + "\"");
}

Vec number_array(const json& obj, const std::string& path, const char* key, Index expected) {
  const json& v = require(obj, path, key);
  if (!v.is_array() || static_cast<Index>(v.size()) != expected) {
    schema_error(path + "/" + key, "expected an array of " + std::to_string(expected) + " numbers");
  }
  Vec out(expected);
  for (Index i = 0; i < expected; ++i) {
    const json& x = v.at(static_cast<std::size_t>(i));
    if (!x.is_number()) schema_error(path + "/" + key, "expected numbers");
    out(i) = x.get<double>();
  }
  return out;
}

Index node_index(const json& obj, const std::string& path, const char* key, Index n) {
  const long k = integer(obj, path, key);
  if (k < 1 || k > n) schema_error(path + "/" + key, "node index out of range 1.." + std::to_string(n));
  return static_cast<Index>(k - 1);
}

Bases parse_bases(const json& j) {
  Bases b;
  if (!j.contains("bases")) return b;
  const json& o = j.at("bases");
  allow_keys(o, "/bases", {"power_va", "voltage_v", "frequency_hz"});
  if (auto v = optional_number(o, "/bases", "power_va")) b.power_va = *v;
  if (auto v = optional_number(o, "/bases", "voltage_v")) b.voltage_v = *v;
  if (auto v = optional_number(o, "/bases", "frequency_hz")) b.frequency_hz = *v;
  if (!(b.power_va > 0.0) || !(b.voltage_v > 0.0) || !(b.frequency_hz > 0.0)) {
    schema_error("/bases", "base quantities must be positive");
  }
  return b;
}

NetworkSpec parse_network(const json& j) {
  NetworkSpec net;
  net.bases = parse_bases(j);
  const json& o = require(j, "", "network");
  allow_keys(o, "/network", {"nodes", "omega0_rad_s", "lines"});
  const long n = integer(o, "/network", "nodes");
  if (n < 1) schema_error("/network/nodes", "expected a positive integer");
  net.n_nodes = static_cast<Index>(n);
  net.omega0 = optional_number(o, "/network", "omega0_rad_s").value_or(net.bases.angular_frequency());

  const json& lines = require(o, "/network", "lines");
  if (!lines.is_array()) schema_error("/network/lines", "expected an array");
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string path = "/network/lines/" + std::to_string(i);
    const json& l = lines.at(i);
    allow_keys(l, path, {"from", "to", "r", "x", "ell", "unit"});
    const std::string u = unit(l, path, {"pu", "si"});
    const Index a = node_index(l, path, "from", net.n_nodes);
    const Index b = node_index(l, path, "to", net.n_nodes);
    const double scale = u == "si" ? 1.0 / net.bases.impedance_ohm() : 1.0;
    const double r = number(l, path, "r") * scale;
    double ell = 0.0;
    if (l.contains("x") == l.contains("ell")) schema_error(path, "give exactly one of \"x\" or \"ell\"");
    if (l.contains("x")) {
      ell = units::inductance_from_reactance(number(l, path, "x") * scale, net.omega0);
    } else {
      ell = number(l, path, "ell") * scale;  // henry -> per-unit seconds
    }
    net.lines.push_back(Line{a, b, LineParams{r, ell}});
  }
  validate(net);
  return net;
}

GainSet parse_gains(const json& o, const NetworkSpec& net) {
  allow_keys(o, "/gains", {"eta", "alpha", "unit"});
  const std::string u = unit(o, "/gains", {"pu", "si"});
  if (o.contains("eta") && o.at("eta").is_array()) schema_error("/gains/eta", "per-node gains are not supported");
  if (o.contains("alpha") && o.at("alpha").is_array()) schema_error("/gains/alpha", "per-node gains are not supported");
  const double scale = u == "pu" ? net.bases.angular_frequency() : 1.0;
  GainSet g{number(o, "/gains", "eta") * scale, number(o, "/gains", "alpha") * scale, net.omega0};
  validate(g);
  return g;
}

Vec parse_initial_state(const json& o, const NetworkSpec& net) {
  allow_keys(o, "/initial_state", {"v", "unit"});
  const std::string u = unit(o, "/initial_state", {"pu", "si"});
  const json& v = require(o, "/initial_state", "v");
  if (!v.is_array() || static_cast<Index>(v.size()) != net.n_nodes) {
    schema_error("/initial_state/v", "expected one [alpha, beta] pair per node");
  }
  const double scale = u == "si" ? 1.0 / net.bases.voltage_v : 1.0;
  Vec out(2 * net.n_nodes);
  for (Index k = 0; k < net.n_nodes; ++k) {
    const json& pair = v.at(static_cast<std::size_t>(k));
    if (!pair.is_array() || pair.size() != 2 || !pair.at(0).is_number() || !pair.at(1).is_number()) {
      schema_error("/initial_state/v/" + std::to_string(k), "expected [alpha, beta]");
    }
    out(2 * k) = pair.at(0).get<double>() * scale;
    out(2 * k + 1) = pair.at(1).get<double>() * scale;
  }
  return out;
}

std::vector<SetpointEvent> parse_events(const json& arr, const NetworkSpec& net) {
  if (!arr.is_array()) schema_error("/events", "expected an array");
  std::vector<SetpointEvent> events;
  for (std::size_t e = 0; e < arr.size(); ++e) {
    const std::string path = "/events/" + std::to_string(e);
    const json& o = arr.at(e);
    allow_keys(o, path, {"time_s", "unit", "setpoints"});
    const std::string u = unit(o, path, {"pu", "si"});
    const double ps = u == "si" ? 1.0 / net.bases.power_va : 1.0;
    const double vs = u == "si" ? 1.0 / net.bases.voltage_v : 1.0;
    SetpointEvent ev;
    ev.time = number(o, path, "time_s");
    const json& sps = require(o, path, "setpoints");
    if (!sps.is_array()) schema_error(path + "/setpoints", "expected an array");
    for (std::size_t i = 0; i < sps.size(); ++i) {
      const std::string sp_path = path + "/setpoints/" + std::to_string(i);
      const json& s = sps.at(i);
      allow_keys(s, sp_path, {"node", "p", "q", "v"});
      NodeUpdate upd;
      upd.node = node_index(s, sp_path, "node", net.n_nodes);
      if (auto p = optional_number(s, sp_path, "p")) upd.p = *p * ps;
      if (auto q = optional_number(s, sp_path, "q")) upd.q = *q * ps;
      if (auto v = optional_number(s, sp_path, "v")) upd.v = *v * vs;
      ev.updates.push_back(upd);
    }
    events.push_back(std::move(ev));
  }
  return events;
}

IntegratorConfig parse_integrator(const json& o) {
  allow_keys(o, "/integrator", {"t_end_s", "dt_s", "frame", "field", "record_every"});
  IntegratorConfig cfg;
  cfg.t_end = number(o, "/integrator", "t_end_s");
  if (o.contains("frame")) {
    const auto f = o.at("frame").is_string() ? o.at("frame").get<std::string>() : "";
    if (f == "static") cfg.frame = Frame::Static;
    else if (f == "rotating") cfg.frame = Frame::Rotating;
    else schema_error("/integrator/frame", "expected \"static\" or \"rotating\"");
  }
  if (o.contains("field")) {
    const auto f = o.at("field").is_string() ? o.at("field").get<std::string>() : "";
    if (f == "cartesian") cfg.field = FieldKind::Cartesian;
    else if (f == "projected") cfg.field = FieldKind::Projected;
    else if (f == "polar_droop") cfg.field = FieldKind::PolarDroop;
    else schema_error("/integrator/field", "expected \"cartesian\", \"projected\" or \"polar_droop\"");
  }
  cfg.dt = optional_number(o, "/integrator", "dt_s").value_or(cfg.frame == Frame::Rotating ? 1e-3 : 1e-5);
  if (o.contains("record_every")) cfg.record_every = static_cast<int>(integer(o, "/integrator", "record_every"));
  return cfg;
}

SetpointBundle parse_setpoints(const json& o, const NetworkSpec& net) {
  allow_keys(o, "/setpoints", {"p", "q", "v", "theta_deg", "unit"});
  const std::string u = unit(o, "/setpoints", {"pu", "si"});
  const double ps = u == "si" ? 1.0 / net.bases.power_va : 1.0;
  const double vs = u == "si" ? 1.0 / net.bases.voltage_v : 1.0;
  SetpointBundle sp;
  sp.p = number_array(o, "/setpoints", "p", net.n_nodes) * ps;
  sp.q = number_array(o, "/setpoints", "q", net.n_nodes) * ps;
  sp.v = number_array(o, "/setpoints", "v", net.n_nodes) * vs;
  if (o.contains("theta_deg")) {
    sp.theta = number_array(o, "/setpoints", "theta_deg", net.n_nodes - 1).unaryExpr([](double d) { return rad(d); });
  }
  validate(sp, net.n_nodes);
  return sp;
}

std::string locate(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

Document parse_document(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError("JSON syntax error at " + locate(text, e.byte) + ": " + e.what());
  }
  allow_keys(j, "/", {"bases", "network", "controller_kappa_deg", "gains", "initial_state", "events",
                      "integrator", "setpoints"});
  Document d;
  d.net = parse_network(j);
  if (auto k = optional_number(j, "", "controller_kappa_deg")) d.controller_kappa = rad(*k);
  if (j.contains("gains")) d.gains = parse_gains(j.at("gains"), d.net);
  if (j.contains("initial_state")) d.initial_state = parse_initial_state(j.at("initial_state"), d.net);
  if (j.contains("events")) d.events = parse_events(j.at("events"), d.net);
  if (j.contains("integrator")) d.integrator = parse_integrator(j.at("integrator"));
  if (j.contains("setpoints")) d.setpoints = parse_setpoints(j.at("setpoints"), d.net);
  return d;
}

Document load_document(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_document(buf.str());
}

std::string serialize(const Document& d) {
  json j;
  j["bases"] = {{"power_va", d.net.bases.power_va},
                {"voltage_v", d.net.bases.voltage_v},
                {"frequency_hz", d.net.bases.frequency_hz}};
  json lines = json::array();
  for (const auto& l : d.net.lines) {
    lines.push_back({{"from", l.a + 1}, {"to", l.b + 1}, {"r", l.params.r}, {"ell", l.params.ell}, {"unit", "pu"}});
  }
  j["network"] = {{"nodes", d.net.n_nodes}, {"omega0_rad_s", d.net.omega0}, {"lines", lines}};
  if (d.controller_kappa) j["controller_kappa_deg"] = deg(*d.controller_kappa);
  if (d.gains) j["gains"] = {{"eta", d.gains->eta}, {"alpha", d.gains->alpha}, {"unit", "si"}};
  if (d.initial_state) {
    json v = json::array();
    for (Index k = 0; k < d.initial_state->size() / 2; ++k) {
      v.push_back({(*d.initial_state)(2 * k), (*d.initial_state)(2 * k + 1)});
    }
    j["initial_state"] = {{"v", v}, {"unit", "pu"}};
  }
  if (!d.events.empty()) {
    json events = json::array();
    for (const auto& ev : d.events) {
      json sps = json::array();
      for (const auto& u : ev.updates) {
        json s = {{"node", u.node + 1}};
        if (u.p) s["p"] = *u.p;
        if (u.q) s["q"] = *u.q;
        if (u.v) s["v"] = *u.v;
        sps.push_back(s);
      }
      events.push_back({{"time_s", ev.time}, {"unit", "pu"}, {"setpoints", sps}});
    }
    j["events"] = events;
  }
  if (d.integrator) {
    const auto& c = *d.integrator;
    j["integrator"] = {{"t_end_s", c.t_end},
                       {"dt_s", c.dt},
                       {"frame", c.frame == Frame::Static ? "static" : "rotating"},
                       {"field", c.field == FieldKind::Cartesian   ? "cartesian"
                                 : c.field == FieldKind::Projected ? "projected"
                                                                   : "polar_droop"},
                       {"record_every", c.record_every}};
  }
  if (d.setpoints) {
    const auto& s = *d.setpoints;
    auto arr = [](const Vec& x) { return std::vector<double>(x.data(), x.data() + x.size()); };
    j["setpoints"] = {{"p", arr(s.p)}, {"q", arr(s.q)}, {"v", arr(s.v)}, {"unit", "pu"}};
    if (s.theta) j["setpoints"]["theta_deg"] = arr(s.theta->unaryExpr([](double r) { return deg(r); }));
  }
  return j.dump(2) + "\n";
}

Scenario to_scenario(const Document& d) {
  if (!d.gains) throw InputError("schema error at /: missing key \"gains\"");
  if (!d.initial_state) throw InputError("schema error at /: missing key \"initial_state\"");
  if (d.events.empty()) throw InputError("schema error at /: missing key \"events\"");
  if (!d.integrator) throw InputError("schema error at /: missing key \"integrator\"");
  Scenario s{d.net, *d.gains, *d.initial_state, d.events, *d.integrator, d.controller_kappa};
  validate(s);
  return s;
}

Document from_scenario(const Scenario& s) {
  Document d;
  d.net = s.net;
  d.controller_kappa = s.controller_kappa;
  d.gains = s.gains;
  d.initial_state = s.initial_state;
  d.events = s.events;
  d.integrator = s.integrator;
  return d;
}

namespace {

bool same_vec(const Vec& a, const Vec& b) { return a.size() == b.size() && a == b; }

}  // namespace

bool same_document(const Document& a, const Document& b) {
  if (a.net.n_nodes != b.net.n_nodes || a.net.omega0 != b.net.omega0 || a.net.lines.size() != b.net.lines.size()) {
    return false;
  }
  if (a.net.bases.power_va != b.net.bases.power_va || a.net.bases.voltage_v != b.net.bases.voltage_v ||
      a.net.bases.frequency_hz != b.net.bases.frequency_hz) {
    return false;
  }
  for (std::size_t i = 0; i < a.net.lines.size(); ++i) {
    const auto& x = a.net.lines[i];
    const auto& y = b.net.lines[i];
    if (x.a != y.a || x.b != y.b || x.params.r != y.params.r || x.params.ell != y.params.ell) return false;
  }
  if (a.controller_kappa.has_value() != b.controller_kappa.has_value()) return false;
  if (a.controller_kappa && std::abs(*a.controller_kappa - *b.controller_kappa) > 1e-15) return false;
  if (a.gains.has_value() != b.gains.has_value()) return false;
  if (a.gains && (a.gains->eta != b.gains->eta || a.gains->alpha != b.gains->alpha ||
                  a.gains->omega0 != b.gains->omega0)) {
    return false;
  }
  if (a.initial_state.has_value() != b.initial_state.has_value()) return false;
  if (a.initial_state && !same_vec(*a.initial_state, *b.initial_state)) return false;
  if (a.events.size() != b.events.size()) return false;
  for (std::size_t e = 0; e < a.events.size(); ++e) {
    const auto& x = a.events[e];
    const auto& y = b.events[e];
    if (x.time != y.time || x.updates.size() != y.updates.size()) return false;
    for (std::size_t i = 0; i < x.updates.size(); ++i) {
      const auto& u = x.updates[i];
      const auto& w = y.updates[i];
      if (u.node != w.node || u.p != w.p || u.q != w.q || u.v != w.v) return false;
    }
  }
  if (a.integrator.has_value() != b.integrator.has_value()) return false;
  if (a.integrator) {
    const auto& x = *a.integrator;
    const auto& y = *b.integrator;
    if (x.t_end != y.t_end || x.dt != y.dt || x.frame != y.frame || x.field != y.field ||
        x.record_every != y.record_every) {
      return false;
    }
  }
  if (a.setpoints.has_value() != b.setpoints.has_value()) return false;
  if (a.setpoints) {
    const auto& x = *a.setpoints;
    const auto& y = *b.setpoints;
    if (!same_vec(x.p, y.p) || !same_vec(x.q, y.q) || !same_vec(x.v, y.v)) return false;
    if (x.theta.has_value() != y.theta.has_value()) return false;
    if (x.theta && !x.theta->isApprox(*y.theta, 1e-15)) return false;
  }
  return true;
}

}  // namespace oscgrid::io
