#pragma once

// Domain types for the magnon-cavity-magnon network.
//
// Units: every frequency and rate is a plain double in MHz, read as an
// angular quantity (2pi x MHz). The equations are homogeneous in frequency,
// so the 2pi is never materialised. Rates are amplitude (half-width) decay
// rates entering as -(i*Delta + gamma) in the Langevin equations.
//
// Mode order is fixed everywhere: (magnon1, magnon2, cavity).

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace antipt {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat3 = Eigen::Matrix3cd;
using Vec3 = Eigen::Vector3cd;

inline constexpr double kPi = 3.14159265358979323846;

enum class Port { magnon1, magnon2, cavity, combined };

std::string to_string(Port port);

struct ModeParams {
  std::string label;
  double omega = 0.0;                // MHz, relative to the frame centre
  double gamma_int = 0.0;            // MHz
  std::vector<double> gamma_ports;   // MHz, one entry per attached antenna

  double total_rate() const;
  double port_rate(std::size_t index) const;  // 0 if the port is absent
};

// How a requested total cavity rate is distributed over the cavity's loss
// channels. antenna3 tunes the pin of antenna 3 (magnon readout), critical
// keeps kappa_int == kappa_3 (cavity readout), intrinsic tunes kappa_int.
enum class KappaControl { antenna3, critical, intrinsic };

std::string to_string(KappaControl control);

// Cavity port indices: 0 and 1 are the cavity couplings of antennae 1 and 2
// (kappa_1, kappa_2); 2 is antenna 3 (kappa_3).
struct SystemParams {
  ModeParams magnon1{"magnon1", 0.0, 0.0, {}};
  ModeParams magnon2{"magnon2", 0.0, 0.0, {}};
  ModeParams cavity{"cavity", 0.0, 0.0, {}};
  double g13 = 0.0;
  double g23 = 0.0;
  double phi13 = 0.0;  // drive phase of antenna 1 into the cavity [rad]
  double phi23 = 0.0;  // drive phase of antenna 2 into the cavity [rad]
  double Phi13 = 0.0;  // optional coupling phase on a^dagger c [rad]
  double Phi23 = 0.0;  // optional coupling phase on b^dagger c [rad]
  double frame_center_MHz = 0.0;  // absolute frame centre; 0 = relative only
  KappaControl kappa_control = KappaControl::antenna3;

  double gamma1() const { return magnon1.total_rate(); }
  double gamma2() const { return magnon2.total_rate(); }
  double kappa() const { return cavity.total_rate(); }

  double gamma11() const { return magnon1.port_rate(0); }
  double gamma21() const { return magnon2.port_rate(0); }
  double kappa1() const { return cavity.port_rate(0); }
  double kappa2() const { return cavity.port_rate(1); }
  double kappa3() const { return cavity.port_rate(2); }
};

struct BiasField {
  double B = 0.0;             // T
  double gamma0 = 28.0;       // GHz/T
  double omega_m0 = 0.0;      // GHz
};

struct DynamicalMatrix {
  Mat3 M;  // d/dt (a, b, c)^T = M (a, b, c)^T
};

// Collects every violated invariant rather than stopping at the first.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  std::vector<std::string> issues_;
};

// Returns params unchanged when valid; throws ValidationError listing every
// violation otherwise. With a probe port, that port must have an antenna.
SystemParams validate(const SystemParams& params,
                      std::optional<Port> probe = std::nullopt);

double kittel_frequency(const BiasField& field);

DynamicalMatrix build_dynamical_matrix(const SystemParams& params);

// Returns a copy whose cavity total rate equals kappa, redistributed per
// params.kappa_control. Throws std::invalid_argument if no non-negative
// split exists.
SystemParams with_total_kappa(const SystemParams& params, double kappa);

// Relabels magnon1 <-> magnon2 together with their couplings, phases and
// the paired cavity ports.
SystemParams swap_magnons(const SystemParams& params);

// (gamma_1 - gamma_11)(kappa - kappa_1) - gamma_11 kappa_1 for port 1 and
// the mirror expression for port 2. Reflection from a shared antenna is
// passive (|t| <= 1) when this is non-negative; the model carries no
// port-induced cross damping between magnon and cavity.
double passivity_margin(const SystemParams& params, Port port);

// Stable FNV-1a digest of every numeric field, used to tag spectra.
std::uint64_t params_hash(const SystemParams& params);

}  // namespace antipt
