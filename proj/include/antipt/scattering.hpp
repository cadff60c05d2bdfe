#pragma once

// Steady-state input-output theory for the three probe ports.
//
// A shared antenna k (k = 1, 2) drives its magnon with sqrt(2 gamma_k1) s
// and the cavity with sqrt(2 kappa_k) s exp(-i phi_k3). The outgoing wave is
//   s_out = -s + sqrt(2 gamma_k1) m + sqrt(2 kappa_k) exp(i phi_k3) c,
// and antenna 3 couples to the cavity alone. Reflection is t = s_out / s.
//
// Each reflection is available twice: as the nested continued-fraction
// closed form and as a direct 3x3 linear solve of the Langevin steady state.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "antipt/model.hpp"

namespace antipt {

struct ProbeSpec {
  Port port = Port::magnon1;
  std::vector<double> grid;  // probe frequencies omega_p [MHz], increasing
  double drive = 1.0;        // s; cancels in every reflection
};

void validate_probe(const ProbeSpec& probe);

// Evenly spaced inclusive grid.
std::vector<double> linear_grid(double lo, double hi, std::size_t points);

struct SpectrumPoint {
  double omega_p = 0.0;
  cplx t;
  double magnitude = 0.0;
};

struct Spectrum {
  Port port = Port::magnon1;
  std::vector<SpectrumPoint> points;
  std::uint64_t params_hash = 0;
};

enum class SpectrumModel { full, general_effective, antipt };

// Intracavity amplitudes (a, b, c) for a drive of amplitude probe.drive
// entering through probe.port.
Vec3 steady_state(const SystemParams& params, const ProbeSpec& probe, double omega_p);

// Input coupling vector of a port (magnon1, magnon2 or cavity).
Vec3 drive_vector(const SystemParams& params, Port port);

cplx reflection_magnon1(const SystemParams& params, double omega_p);
cplx reflection_magnon2(const SystemParams& params, double omega_p);
cplx reflection_cavity(const SystemParams& params, double omega_p);

// Closed-form reflection for a physical port.
cplx reflection(const SystemParams& params, Port port, double omega_p);

// t = -1 + (output coupling) . x / s with x from the 3x3 linear solve.
cplx reflection_linear_solve(const SystemParams& params, Port port, double omega_p);

// Reflection of a port computed from a 2x2 effective Hamiltonian; the
// cavity no longer appears, so only the magnon antenna terms survive.
// omega_p must be expressed in the frame H is written in.
cplx reflection_effective(const Mat2& H, Port port, double gamma_ext, double omega_p);

Spectrum spectrum(const SystemParams& params, const ProbeSpec& probe,
                  SpectrumModel model = SpectrumModel::full);

// Pointwise mean of |S11| and |S22| in magnitude. The complex t of each
// point holds (t1 + t2)/2, so magnitude != |t| unless the two traces agree.
Spectrum combined_spectrum(const Spectrum& s11, const Spectrum& s22);

// 20 log10 |t|
double to_db(double magnitude);
double from_db(double db);

struct DipOptions {
  double depth_threshold = 0.05;   // fraction of the baseline
  double baseline_fraction = 0.10; // share of the grid (both ends) used
  // Only minima inside [first, second] are reported when set.
  std::optional<std::pair<double, double>> window;
};

struct Dip {
  double frequency = 0.0;
  double magnitude = 0.0;  // |t| at the minimum
  double depth = 0.0;      // baseline - magnitude
};

struct DipReport {
  std::vector<Dip> dips;     // sorted by frequency
  std::vector<double> fwhm;  // one per dip [MHz]
  double baseline = 0.0;
  double separation = 0.0;   // between the two deepest dips [MHz]
  double mean_fwhm = 0.0;    // over the two deepest dips
  bool resolvable = false;
};

class NoDipError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

DipReport dip_analysis(const Spectrum& spec, const DipOptions& options = {});

}  // namespace antipt
