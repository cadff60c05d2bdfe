#include "antipt/model.hpp"

#include <cmath>
#include <cstring>
#include <numeric>
#include <utility>

namespace antipt {

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += "; ";
    out += p;
  }
  return out;
}

void check_mode(const ModeParams& mode, double frame_center,
                std::vector<std::string>& issues) {
  if (!std::isfinite(mode.omega)) {
    issues.push_back(mode.label + ": non-finite frequency");
  } else if (frame_center > 0.0 && frame_center + mode.omega <= 0.0) {
    issues.push_back(mode.label + ": non-positive frequency");
  }
  if (!(mode.gamma_int >= 0.0)) {
    issues.push_back(mode.label + ": negative rate (gamma_int)");
  }
  for (std::size_t i = 0; i < mode.gamma_ports.size(); ++i) {
    if (!(mode.gamma_ports[i] >= 0.0)) {
      issues.push_back(mode.label + ": negative rate (port " +
                       std::to_string(i) + ")");
    }
  }
  if (!(mode.total_rate() > 0.0)) {
    issues.push_back(mode.label + ": mode has zero total decay");
  }
}

}  // namespace

std::string to_string(Port port) {
  switch (port) {
    case Port::magnon1: return "magnon1";
    case Port::magnon2: return "magnon2";
    case Port::cavity: return "cavity";
    case Port::combined: return "combined";
  }
  return "unknown";
}

std::string to_string(KappaControl control) {
  switch (control) {
    case KappaControl::antenna3: return "antenna3";
    case KappaControl::critical: return "critical";
    case KappaControl::intrinsic: return "intrinsic";
  }
  return "unknown";
}

double ModeParams::total_rate() const {
  return std::accumulate(gamma_ports.begin(), gamma_ports.end(), gamma_int);
}

double ModeParams::port_rate(std::size_t index) const {
  return index < gamma_ports.size() ? gamma_ports[index] : 0.0;
}

ValidationError::ValidationError(std::vector<std::string> issues)
    : std::invalid_argument(join(issues)), issues_(std::move(issues)) {}

SystemParams validate(const SystemParams& params, std::optional<Port> probe) {
  std::vector<std::string> issues;
  check_mode(params.magnon1, params.frame_center_MHz, issues);
  check_mode(params.magnon2, params.frame_center_MHz, issues);
  check_mode(params.cavity, params.frame_center_MHz, issues);

  if (!(params.g13 >= 0.0)) issues.push_back("g13: negative coupling rate");
  if (!(params.g23 >= 0.0)) issues.push_back("g23: negative coupling rate");
  for (double phase : {params.phi13, params.phi23, params.Phi13, params.Phi23}) {
    if (!std::isfinite(phase)) {
      issues.push_back("non-finite phase");
      break;
    }
  }
  if (params.cavity.gamma_ports.size() > 3) {
    issues.push_back("cavity: at most three antenna ports are modelled");
  }

  if (probe) {
    bool has_port = false;
    switch (*probe) {
      case Port::magnon1: has_port = params.gamma11() > 0.0; break;
      case Port::magnon2: has_port = params.gamma21() > 0.0; break;
      case Port::cavity: has_port = params.kappa3() > 0.0; break;
      case Port::combined:
        has_port = params.gamma11() > 0.0 && params.gamma21() > 0.0;
        break;
    }
    if (!has_port) {
      issues.push_back(to_string(*probe) + ": probe port has no external coupling");
    }
  }

  if (!issues.empty()) throw ValidationError(std::move(issues));
  return params;
}

double kittel_frequency(const BiasField& field) {
  if (!(field.B >= 0.0)) throw std::invalid_argument("bias field must be >= 0");
  if (!(field.gamma0 > 0.0)) {
    throw std::invalid_argument("gyromagnetic ratio must be > 0");
  }
  return field.gamma0 * field.B + field.omega_m0;
}

DynamicalMatrix build_dynamical_matrix(const SystemParams& p) {
  const cplx i{0.0, 1.0};
  const cplx g13_ac = p.g13 * std::polar(1.0, p.Phi13);
  const cplx g23_bc = p.g23 * std::polar(1.0, p.Phi23);

  DynamicalMatrix dm;
  dm.M << -(i * p.magnon1.omega + p.gamma1()), 0.0, -i * g13_ac,
          0.0, -(i * p.magnon2.omega + p.gamma2()), -i * g23_bc,
          -i * p.g13, -i * p.g23, -(i * p.cavity.omega + p.kappa());
  return dm;
}

SystemParams with_total_kappa(const SystemParams& params, double kappa) {
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be > 0");
  SystemParams out = params;
  auto& cav = out.cavity;
  if (cav.gamma_ports.size() < 3 && params.kappa_control != KappaControl::intrinsic) {
    cav.gamma_ports.resize(3, 0.0);
  }
  const double k1 = cav.port_rate(0);
  const double k2 = cav.port_rate(1);

  switch (params.kappa_control) {
    case KappaControl::antenna3: {
      const double k3 = kappa - cav.gamma_int - k1 - k2;
      if (k3 < 0.0) {
        throw std::invalid_argument(
            "kappa below the fixed cavity losses; antenna 3 rate would be negative");
      }
      cav.gamma_ports[2] = k3;
      break;
    }
    case KappaControl::critical: {
      const double half = 0.5 * (kappa - k1 - k2);
      if (half < 0.0) {
        throw std::invalid_argument("kappa below the antenna 1/2 cavity losses");
      }
      cav.gamma_int = half;
      cav.gamma_ports[2] = half;
      break;
    }
    case KappaControl::intrinsic: {
      double ports = 0.0;
      for (double r : cav.gamma_ports) ports += r;
      if (kappa - ports < 0.0) {
        throw std::invalid_argument("kappa below the cavity port losses");
      }
      cav.gamma_int = kappa - ports;
      break;
    }
  }
  return out;
}

SystemParams swap_magnons(const SystemParams& params) {
  SystemParams out = params;
  std::swap(out.magnon1, out.magnon2);
  std::swap(out.magnon1.label, out.magnon2.label);
  std::swap(out.g13, out.g23);
  std::swap(out.phi13, out.phi23);
  std::swap(out.Phi13, out.Phi23);
  auto& ports = out.cavity.gamma_ports;
  if (ports.size() < 2) ports.resize(2, 0.0);
  std::swap(ports[0], ports[1]);
  return out;
}

double passivity_margin(const SystemParams& p, Port port) {
  switch (port) {
    case Port::magnon1:
      return (p.gamma1() - p.gamma11()) * (p.kappa() - p.kappa1()) -
             p.gamma11() * p.kappa1();
    case Port::magnon2:
      return (p.gamma2() - p.gamma21()) * (p.kappa() - p.kappa2()) -
             p.gamma21() * p.kappa2();
    case Port::cavity:
      return p.kappa() - p.kappa3();
    case Port::combined:
      return std::min(passivity_margin(p, Port::magnon1),
                      passivity_margin(p, Port::magnon2));
  }
  return 0.0;
}

std::uint64_t params_hash(const SystemParams& p) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](double v) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof bits);
    for (int k = 0; k < 8; ++k) {
      h ^= (bits >> (8 * k)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  for (const ModeParams* m : {&p.magnon1, &p.magnon2, &p.cavity}) {
    mix(m->omega);
    mix(m->gamma_int);
    mix(static_cast<double>(m->gamma_ports.size()));
    for (double r : m->gamma_ports) mix(r);
  }
  for (double v : {p.g13, p.g23, p.phi13, p.phi23, p.Phi13, p.Phi23,
                   p.frame_center_MHz}) {
    mix(v);
  }
  return h;
}

}  // namespace antipt
