#include "antipt/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "antipt/effective.hpp"

namespace antipt {

namespace {

constexpr cplx kI{0.0, 1.0};

// Bare response denominators D_k = i Delta_k + rate_k with Delta_k = omega_k - omega_p.
struct Denominators {
  cplx d1, d2, d3;
};

Denominators denominators(const SystemParams& p, double omega_p) {
  return {kI * (p.magnon1.omega - omega_p) + p.gamma1(),
          kI * (p.magnon2.omega - omega_p) + p.gamma2(),
          kI * (p.cavity.omega - omega_p) + p.kappa()};
}

void require_physical_port(Port port) {
  if (port == Port::combined) {
    throw std::invalid_argument("combined is not a physical port");
  }
}

}  // namespace

void validate_probe(const ProbeSpec& probe) {
  require_physical_port(probe.port);
  if (probe.grid.empty()) throw std::invalid_argument("probe grid is empty");
  for (std::size_t k = 1; k < probe.grid.size(); ++k) {
    if (!(probe.grid[k] > probe.grid[k - 1])) {
      throw std::invalid_argument("probe grid must be strictly increasing");
    }
  }
  if (!(probe.drive > 0.0)) throw std::invalid_argument("drive amplitude must be > 0");
}

std::vector<double> linear_grid(double lo, double hi, std::size_t points) {
  if (points == 0) throw std::invalid_argument("grid needs at least one point");
  if (points == 1) return {lo};
  if (!(hi > lo)) throw std::invalid_argument("grid upper bound must exceed lower bound");
  std::vector<double> grid(points);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t k = 0; k < points; ++k) grid[k] = lo + step * static_cast<double>(k);
  grid.back() = hi;
  return grid;
}

Vec3 drive_vector(const SystemParams& p, Port port) {
  Vec3 d = Vec3::Zero();
  switch (port) {
    case Port::magnon1:
      d(0) = std::sqrt(2.0 * p.gamma11());
      d(2) = std::sqrt(2.0 * p.kappa1()) * std::polar(1.0, -p.phi13);
      break;
    case Port::magnon2:
      d(1) = std::sqrt(2.0 * p.gamma21());
      d(2) = std::sqrt(2.0 * p.kappa2()) * std::polar(1.0, -p.phi23);
      break;
    case Port::cavity:
      d(2) = std::sqrt(2.0 * p.kappa3());
      break;
    case Port::combined:
      require_physical_port(port);
  }
  return d;
}

Vec3 steady_state(const SystemParams& params, const ProbeSpec& probe, double omega_p) {
  require_physical_port(probe.port);
  // x(t) = x exp(-i omega_p t) in d/dt x = M x + drive gives (-M - i omega_p) x = drive.
  const Mat3 A = -build_dynamical_matrix(params).M - kI * omega_p * Mat3::Identity();
  const Vec3 rhs = drive_vector(params, probe.port) * probe.drive;
  Eigen::PartialPivLU<Mat3> lu(A);
  if (!(std::abs(lu.determinant()) > 0.0)) {
    throw std::runtime_error("steady-state system is singular");
  }
  return lu.solve(rhs);
}

cplx reflection_linear_solve(const SystemParams& params, Port port, double omega_p) {
  ProbeSpec probe{port, {}, 1.0};
  const Vec3 x = steady_state(params, probe, omega_p);
  // The output coupling is the conjugate of the input coupling; dot() conjugates.
  return -1.0 + drive_vector(params, port).dot(x);
}

cplx reflection_magnon1(const SystemParams& p, double omega_p) {
  const auto [d1, d2, d3] = denominators(p, omega_p);
  const cplx p13 = p.g13 * p.g13 * std::polar(1.0, p.Phi13);
  const cplx p23 = p.g23 * p.g23 * std::polar(1.0, p.Phi23);
  const double g11 = p.gamma11();
  const double k1 = p.kappa1();
  const double cross = 2.0 * p.g13 * std::sqrt(g11 * k1);
  const cplx e_minus = std::polar(1.0, -p.phi13);
  const cplx e_plus = std::polar(1.0, p.phi13);

  // Cavity dressed by magnon 2, then magnon 1 dressed by that cavity.
  const cplx cavity_b = d3 + p23 / d2;
  const cplx magnon_a = d1 + p13 / cavity_b;
  const cplx cavity_ab = d3 + p13 / d1 + p23 / d2;

  return -1.0
         + 2.0 * g11 / magnon_a
         - (kI * cross * std::polar(1.0, p.Phi13) * e_minus / cavity_b) / magnon_a
         + (2.0 * k1 * e_minus - kI * cross / d1) / cavity_ab * e_plus;
}

cplx reflection_magnon2(const SystemParams& p, double omega_p) {
  const auto [d1, d2, d3] = denominators(p, omega_p);
  const cplx p13 = p.g13 * p.g13 * std::polar(1.0, p.Phi13);
  const cplx p23 = p.g23 * p.g23 * std::polar(1.0, p.Phi23);
  const double g21 = p.gamma21();
  const double k2 = p.kappa2();
  const double cross = 2.0 * p.g23 * std::sqrt(g21 * k2);
  const cplx e_minus = std::polar(1.0, -p.phi23);
  const cplx e_plus = std::polar(1.0, p.phi23);

  const cplx cavity_a = d3 + p13 / d1;
  const cplx magnon_b = d2 + p23 / cavity_a;
  const cplx cavity_ab = d3 + p13 / d1 + p23 / d2;

  return -1.0
         + 2.0 * g21 / magnon_b
         - (kI * cross * std::polar(1.0, p.Phi23) * e_minus / cavity_a) / magnon_b
         + (2.0 * k2 * e_minus - kI * cross / d2) / cavity_ab * e_plus;
}

cplx reflection_cavity(const SystemParams& p, double omega_p) {
  const auto [d1, d2, d3] = denominators(p, omega_p);
  const cplx p13 = p.g13 * p.g13 * std::polar(1.0, p.Phi13);
  const cplx p23 = p.g23 * p.g23 * std::polar(1.0, p.Phi23);
  return -1.0 + 2.0 * p.kappa3() / (d3 + p13 / d1 + p23 / d2);
}

cplx reflection(const SystemParams& params, Port port, double omega_p) {
  switch (port) {
    case Port::magnon1: return reflection_magnon1(params, omega_p);
    case Port::magnon2: return reflection_magnon2(params, omega_p);
    case Port::cavity: return reflection_cavity(params, omega_p);
    case Port::combined: break;
  }
  require_physical_port(port);
  return {};
}

cplx reflection_effective(const Mat2& H, Port port, double gamma_ext, double omega_p) {
  int index = 0;
  if (port == Port::magnon1) {
    index = 0;
  } else if (port == Port::magnon2) {
    index = 1;
  } else {
    throw std::invalid_argument("effective models only expose the magnon ports");
  }
  const Mat2 A = kI * (H - omega_p * Mat2::Identity());
  const Mat2 inv = A.inverse();
  return -1.0 + 2.0 * gamma_ext * inv(index, index);
}

Spectrum spectrum(const SystemParams& params, const ProbeSpec& probe, SpectrumModel model) {
  validate_probe(probe);
  Spectrum out;
  out.port = probe.port;
  out.params_hash = params_hash(params);
  out.points.reserve(probe.grid.size());

  std::function<cplx(double)> eval;
  switch (model) {
    case SpectrumModel::full:
      eval = [&](double w) { return reflection(params, probe.port, w); };
      break;
    case SpectrumModel::general_effective:
    case SpectrumModel::antipt: {
      const bool anti = model == SpectrumModel::antipt;
      const Mat2 H = anti ? reduce_to_antipt(params).H : eliminate_cavity(params).H;
      const double shift = anti ? frame_center(params) : 0.0;
      const double ext = probe.port == Port::magnon1 ? params.gamma11() : params.gamma21();
      eval = [H, shift, ext, port = probe.port](double w) {
        return reflection_effective(H, port, ext, w - shift);
      };
      break;
    }
  }

  for (double w : probe.grid) {
    const cplx t = eval(w);
    out.points.push_back({w, t, std::abs(t)});
  }
  return out;
}

Spectrum combined_spectrum(const Spectrum& s11, const Spectrum& s22) {
  if (s11.points.size() != s22.points.size()) {
    throw std::invalid_argument("combined spectrum: grid mismatch (length)");
  }
  if (s11.params_hash != s22.params_hash) {
    throw std::invalid_argument("combined spectrum: spectra come from different parameters");
  }
  Spectrum out;
  out.port = Port::combined;
  out.params_hash = s11.params_hash;
  out.points.reserve(s11.points.size());
  for (std::size_t k = 0; k < s11.points.size(); ++k) {
    const auto& a = s11.points[k];
    const auto& b = s22.points[k];
    if (a.omega_p != b.omega_p) {
      throw std::invalid_argument("combined spectrum: grid mismatch at index " +
                                  std::to_string(k));
    }
    out.points.push_back({a.omega_p, 0.5 * (a.t + b.t), 0.5 * (a.magnitude + b.magnitude)});
  }
  return out;
}

double to_db(double magnitude) { return 20.0 * std::log10(magnitude); }

double from_db(double db) { return std::pow(10.0, db / 20.0); }

DipReport dip_analysis(const Spectrum& spec, const DipOptions& options) {
  const auto& pts = spec.points;
  const std::size_t n = pts.size();
  if (n < 3) throw std::invalid_argument("dip analysis needs at least three points");

  std::vector<double> w(n), m(n);
  for (std::size_t k = 0; k < n; ++k) {
    w[k] = pts[k].omega_p;
    m[k] = pts[k].magnitude;
  }

  // Baseline: median over the outer share of the grid, split between both ends.
  const auto edge = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(0.5 * options.baseline_fraction * n)));
  std::vector<double> outer;
  for (std::size_t k = 0; k < edge && k < n; ++k) {
    outer.push_back(m[k]);
    outer.push_back(m[n - 1 - k]);
  }
  std::sort(outer.begin(), outer.end());
  const std::size_t mid = outer.size() / 2;
  const double baseline = outer.size() % 2 ? outer[mid] : 0.5 * (outer[mid - 1] + outer[mid]);

  DipReport report;
  report.baseline = baseline;

  std::vector<std::size_t> minima;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (!(m[k] < m[k - 1] && m[k] <= m[k + 1])) continue;
    if (!(baseline - m[k] > options.depth_threshold * baseline)) continue;
    if (options.window && (w[k] < options.window->first || w[k] > options.window->second)) {
      continue;
    }
    minima.push_back(k);
  }
  if (minima.empty()) throw NoDipError("no dip deeper than the threshold");

  for (std::size_t i : minima) {
    const double level = 0.5 * (baseline + m[i]);

    // Walk outwards until the half-depth level is crossed. If the curve
    // turns down again first, the side runs into a neighbouring dip.
    bool left_blocked = false;
    double left = w.front();
    for (std::size_t j = i; j > 0; --j) {
      if (m[j - 1] >= level) {
        left = w[j] + (level - m[j]) / (m[j - 1] - m[j]) * (w[j - 1] - w[j]);
        break;
      }
      if (m[j - 1] < m[j]) {
        left_blocked = true;
        left = w[j];
        break;
      }
    }
    bool right_blocked = false;
    double right = w.back();
    for (std::size_t j = i; j + 1 < n; ++j) {
      if (m[j + 1] >= level) {
        right = w[j] + (level - m[j]) / (m[j + 1] - m[j]) * (w[j + 1] - w[j]);
        break;
      }
      if (m[j + 1] < m[j]) {
        right_blocked = true;
        right = w[j];
        break;
      }
    }

    double half_left = w[i] - left;
    double half_right = right - w[i];
    // Blended dip: mirror the free side.
    if (left_blocked && !right_blocked) half_left = half_right;
    if (right_blocked && !left_blocked) half_right = half_left;

    report.dips.push_back({w[i], m[i], baseline - m[i]});
    report.fwhm.push_back(half_left + half_right);
  }

  if (report.dips.size() == 1) {
    report.separation = 0.0;
    report.mean_fwhm = report.fwhm.front();
    report.resolvable = false;
    return report;
  }

  std::vector<std::size_t> order(report.dips.size());
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + 2, order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return report.dips[a].magnitude < report.dips[b].magnitude;
                    });
  const std::size_t a = order[0];
  const std::size_t b = order[1];
  report.separation = std::abs(report.dips[a].frequency - report.dips[b].frequency);
  report.mean_fwhm = 0.5 * (report.fwhm[a] + report.fwhm[b]);
  report.resolvable = report.separation > report.mean_fwhm;
  return report;
}

}  // namespace antipt
