#include "antipt/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace antipt {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where,
                const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where, "expected an object");
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError(where + "/" + item.key(), "unknown key");
    }
  }
}

double number(const json& obj, const std::string& key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(where + "/" + key, "missing required number");
  if (!it->is_number()) throw ConfigError(where + "/" + key, "expected a number");
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw ConfigError(where + "/" + key, "non-finite value");
  return v;
}

std::optional<double> maybe_number(const json& obj, const std::string& key,
                                   const std::string& where) {
  if (!obj.contains(key)) return std::nullopt;
  return number(obj, key, where);
}

struct ModeRead {
  ModeParams mode;
  std::vector<std::optional<double>> phases;
};

ModeRead read_mode(const json& doc, const std::string& name, std::optional<double> default_omega,
                   std::optional<double> frame_center_GHz) {
  const std::string where = "/" + name;
  if (!doc.contains(name)) throw ConfigError(where, "missing section");
  const json& obj = doc.at(name);
  check_keys(obj, where, {"omega_MHz", "omega_GHz", "bias", "gamma_int_MHz", "ports"});

  ModeRead out;
  out.mode.label = name;
  const int given = int(obj.contains("omega_MHz")) + int(obj.contains("omega_GHz")) +
                    int(obj.contains("bias"));
  if (given > 1) {
    throw ConfigError(where, "give only one of omega_MHz, omega_GHz, bias");
  }
  if (obj.contains("omega_MHz")) {
    out.mode.omega = number(obj, "omega_MHz", where);
  } else if (obj.contains("omega_GHz") || obj.contains("bias")) {
    if (!frame_center_GHz) {
      throw ConfigError(where, "absolute frequencies need top-level frame_center_GHz");
    }
    double ghz = 0.0;
    if (obj.contains("omega_GHz")) {
      ghz = number(obj, "omega_GHz", where);
    } else {
      const json& b = obj.at("bias");
      const std::string bw = where + "/bias";
      check_keys(b, bw, {"B_T", "gamma0_GHz_per_T", "omega_m0_GHz"});
      BiasField field;
      field.B = number(b, "B_T", bw);
      field.gamma0 = maybe_number(b, "gamma0_GHz_per_T", bw).value_or(field.gamma0);
      field.omega_m0 = maybe_number(b, "omega_m0_GHz", bw).value_or(0.0);
      try {
        ghz = kittel_frequency(field);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(bw, e.what());
      }
    }
    out.mode.omega = (ghz - *frame_center_GHz) * 1000.0;
  } else if (default_omega) {
    out.mode.omega = *default_omega;
  } else {
    throw ConfigError(where + "/omega_MHz", "missing (and no top-level Omega_MHz)");
  }

  out.mode.gamma_int = number(obj, "gamma_int_MHz", where);
  if (obj.contains("ports")) {
    const json& ports = obj.at("ports");
    if (!ports.is_array()) throw ConfigError(where + "/ports", "expected an array");
    for (std::size_t k = 0; k < ports.size(); ++k) {
      const std::string pw = where + "/ports/" + std::to_string(k);
      check_keys(ports[k], pw, {"rate_MHz", "phase_rad"});
      out.mode.gamma_ports.push_back(number(ports[k], "rate_MHz", pw));
      out.phases.push_back(maybe_number(ports[k], "phase_rad", pw));
    }
  }
  return out;
}

json mode_to_json(const ModeParams& m, const std::vector<double>& phases) {
  json ports = json::array();
  for (std::size_t k = 0; k < m.gamma_ports.size(); ++k) {
    json port{{"rate_MHz", m.gamma_ports[k]}};
    if (k < phases.size()) port["phase_rad"] = phases[k];
    ports.push_back(port);
  }
  return json{{"omega_MHz", m.omega}, {"gamma_int_MHz", m.gamma_int}, {"ports", ports}};
}

}  // namespace

KappaControl kappa_control_from_string(const std::string& text) {
  if (text == "antenna3") return KappaControl::antenna3;
  if (text == "critical") return KappaControl::critical;
  if (text == "intrinsic") return KappaControl::intrinsic;
  throw std::invalid_argument("unknown kappa_control '" + text +
                              "' (antenna3, critical, intrinsic)");
}

SystemParams params_from_json(const json& doc) {
  check_keys(doc, "",
             {"name", "description", "magnon1", "magnon2", "cavity", "g13_MHz", "g23_MHz",
              "Phi13_rad", "Phi23_rad", "Omega_MHz", "frame_center_GHz", "kappa_MHz",
              "kappa_control"});

  const auto Omega = maybe_number(doc, "Omega_MHz", "");
  const auto center = maybe_number(doc, "frame_center_GHz", "");
  if (center && *center <= 0.0) throw ConfigError("/frame_center_GHz", "must be > 0");

  SystemParams p;
  p.frame_center_MHz = center ? *center * 1000.0 : 0.0;
  ModeRead m1 = read_mode(doc, "magnon1", Omega ? std::optional<double>(*Omega) : std::nullopt,
                          center);
  ModeRead m2 = read_mode(doc, "magnon2", Omega ? std::optional<double>(-*Omega) : std::nullopt,
                          center);
  ModeRead cav = read_mode(doc, "cavity", 0.0, center);

  for (const auto* mr : {&m1, &m2}) {
    for (std::size_t k = 0; k < mr->phases.size(); ++k) {
      if (mr->phases[k]) {
        throw ConfigError("/" + mr->mode.label + "/ports/" + std::to_string(k) + "/phase_rad",
                          "drive phases live on the cavity ports 0 and 1");
      }
    }
  }
  for (std::size_t k = 2; k < cav.phases.size(); ++k) {
    if (cav.phases[k]) {
      throw ConfigError("/cavity/ports/" + std::to_string(k) + "/phase_rad",
                        "only cavity ports 0 and 1 carry a drive phase");
    }
  }

  p.magnon1 = m1.mode;
  p.magnon2 = m2.mode;
  p.cavity = cav.mode;
  p.phi13 = cav.phases.size() > 0 && cav.phases[0] ? *cav.phases[0] : 0.0;
  p.phi23 = cav.phases.size() > 1 && cav.phases[1] ? *cav.phases[1] : 0.0;
  p.g13 = number(doc, "g13_MHz", "");
  p.g23 = number(doc, "g23_MHz", "");
  p.Phi13 = maybe_number(doc, "Phi13_rad", "").value_or(0.0);
  p.Phi23 = maybe_number(doc, "Phi23_rad", "").value_or(0.0);

  if (doc.contains("kappa_control")) {
    if (!doc.at("kappa_control").is_string()) {
      throw ConfigError("/kappa_control", "expected a string");
    }
    try {
      p.kappa_control = kappa_control_from_string(doc.at("kappa_control").get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError("/kappa_control", e.what());
    }
  }
  // a snapshot carries kappa_MHz alongside the ports; leave those untouched
  if (const auto kappa = maybe_number(doc, "kappa_MHz", "");
      kappa && std::abs(*kappa - p.kappa()) > 1e-12 * std::max(1.0, std::abs(*kappa))) {
    try {
      p = with_total_kappa(p, *kappa);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("/kappa_MHz", e.what());
    }
  }
  return p;
}

json params_to_json(const SystemParams& p) {
  json doc;
  doc["magnon1"] = mode_to_json(p.magnon1, {});
  doc["magnon2"] = mode_to_json(p.magnon2, {});
  doc["cavity"] = mode_to_json(p.cavity, {p.phi13, p.phi23});
  // A phase needs a port entry to live on.
  auto& ports = doc["cavity"]["ports"];
  while (ports.size() < 2 && (p.phi13 != 0.0 || p.phi23 != 0.0)) {
    ports.push_back(json{{"rate_MHz", 0.0}, {"phase_rad", ports.empty() ? p.phi13 : p.phi23}});
  }
  doc["g13_MHz"] = p.g13;
  doc["g23_MHz"] = p.g23;
  doc["Phi13_rad"] = p.Phi13;
  doc["Phi23_rad"] = p.Phi23;
  doc["kappa_control"] = to_string(p.kappa_control);
  if (p.frame_center_MHz > 0.0) doc["frame_center_GHz"] = p.frame_center_MHz / 1000.0;
  return doc;
}

SystemParams load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  SystemParams p = params_from_json(doc);
  try {
    return validate(p);
  } catch (const ValidationError& e) {
    throw ConfigError("", std::string("invalid parameters: ") + e.what());
  }
}

}  // namespace antipt
