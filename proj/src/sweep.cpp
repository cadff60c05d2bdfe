#include "antipt/sweep.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace antipt {

namespace {

constexpr cplx kI{0.0, 1.0};

void require_monotone(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("sweep needs at least one kappa value");
  if (v.size() < 2) return;
  const bool up = v[1] > v[0];
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (up ? !(v[k] > v[k - 1]) : !(v[k] < v[k - 1])) {
      throw std::invalid_argument("kappa values must be strictly monotone");
    }
  }
}

double discriminant_of(const EigenPair& e) {
  const cplx half = 0.5 * (e.plus - e.minus);
  return (half * half).real();
}

}  // namespace

std::string to_string(Pipeline pipeline) {
  switch (pipeline) {
    case Pipeline::antipt: return "antipt";
    case Pipeline::general_effective: return "effective";
    case Pipeline::full: return "full";
  }
  return "unknown";
}

EigenPair magnon_branch_eigvals(const SystemParams& params) {
  const Mat3 M = build_dynamical_matrix(params).M;
  Eigen::ComplexEigenSolver<Mat3> solver(M, true);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigen decomposition of the dynamical matrix failed");
  }
  std::array<int, 3> idx{0, 1, 2};
  std::array<double, 3> weight{};
  for (int k = 0; k < 3; ++k) {
    const Vec3 v = solver.eigenvectors().col(k);
    weight[static_cast<std::size_t>(k)] = std::abs(v(2)) / v.norm();
  }
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return weight[static_cast<std::size_t>(a)] < weight[static_cast<std::size_t>(b)];
  });
  const cplx a = kI * solver.eigenvalues()(idx[0]);
  const cplx b = kI * solver.eigenvalues()(idx[1]);
  return canonical_order(a, b);
}

EigenPair pipeline_eigvals(const SystemParams& params, Pipeline pipeline) {
  switch (pipeline) {
    case Pipeline::antipt: {
      const double Gamma = effective_coupling(mean_coupling(params), params.kappa());
      const EigenPair e = eigvals_antipt(mean_detuning(params), Gamma, mean_magnon_rate(params));
      return canonical_order(e.plus, e.minus);
    }
    case Pipeline::general_effective:
    case Pipeline::full: {
      const EigenPair e = pipeline == Pipeline::full
                              ? magnon_branch_eigvals(params)
                              : eigvals_general(eliminate_cavity(params));
      const double c = frame_center(params);
      return canonical_order(e.plus - c, e.minus - c);
    }
  }
  throw std::invalid_argument("unknown pipeline");
}

double pipeline_discriminant(const SystemParams& params, Pipeline pipeline) {
  if (pipeline == Pipeline::antipt) {
    const double Omega = mean_detuning(params);
    const double Gamma = effective_coupling(mean_coupling(params), params.kappa());
    return Omega * Omega - Gamma * Gamma;
  }
  return discriminant_of(pipeline_eigvals(params, pipeline));
}

PhaseRegime pipeline_regime(const SystemParams& params, Pipeline pipeline, double tol) {
  if (pipeline == Pipeline::antipt) {
    return classify_phase(mean_detuning(params),
                          effective_coupling(mean_coupling(params), params.kappa()), tol);
  }
  if (tol < 0.0) throw std::invalid_argument("tolerance must be >= 0");
  PhaseRegime out;
  out.discriminant = pipeline_discriminant(params, pipeline);
  const double Omega = mean_detuning(params);
  const double margin = tol * std::max(Omega * Omega, 1e-300);
  if (out.discriminant > margin) {
    out.regime = Regime::broken;
  } else if (out.discriminant < -margin) {
    out.regime = Regime::symmetric;
  } else {
    out.regime = Regime::exceptional;
  }
  return out;
}

EigenTrajectory run_sweep(const SweepPlan& plan) {
  require_monotone(plan.kappa);
  validate(plan.base);
  EigenTrajectory out;
  out.pipeline = plan.pipeline;
  std::vector<double> disc;
  for (double kappa : plan.kappa) {
    const SystemParams p = with_total_kappa(plan.base, kappa);
    EigenPair e = pipeline_eigvals(p, plan.pipeline);
    if (!out.branches.empty()) {
      const EigenPair& prev = out.branches.back();
      const double straight = std::abs(prev.plus - e.plus) + std::abs(prev.minus - e.minus);
      const double swapped = std::abs(prev.plus - e.minus) + std::abs(prev.minus - e.plus);
      if (swapped < straight) std::swap(e.plus, e.minus);
    }
    out.kappa.push_back(kappa);
    out.branches.push_back(e);
    out.regimes.push_back(pipeline_regime(p, plan.pipeline, plan.phase_tol));
    disc.push_back(out.regimes.back().discriminant);
  }

  for (std::size_t k = 0; k + 1 < disc.size(); ++k) {
    if (disc[k] == 0.0) {
      out.ep = EpEstimate{out.kappa[k], out.kappa[k], out.kappa[k]};
      break;
    }
    if ((disc[k] > 0.0) != (disc[k + 1] > 0.0) && disc[k + 1] != 0.0) {
      const double lo = std::min(out.kappa[k], out.kappa[k + 1]);
      const double hi = std::max(out.kappa[k], out.kappa[k + 1]);
      out.ep = locate_ep(plan.base, lo, hi, 1e-10 * hi, plan.pipeline);
      break;
    }
  }
  return out;
}

EpEstimate locate_ep(const SystemParams& base, double lo, double hi, double tol,
                     Pipeline pipeline) {
  if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("need 0 < lo < hi");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be > 0");
  auto f = [&](double kappa) {
    return pipeline_discriminant(with_total_kappa(base, kappa), pipeline);
  };
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return {lo, lo, lo};
  if (fhi == 0.0) return {hi, hi, hi};
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw NoSignChangeError("discriminant does not change sign on [" + std::to_string(lo) +
                            ", " + std::to_string(hi) + "]");
  }
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return {mid, mid, mid};
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return {0.5 * (lo + hi), lo, hi};
}

Spectrum attraction_spectrum(const SystemParams& params, const std::vector<double>& grid,
                             SpectrumModel model) {
  const Spectrum s11 = spectrum(params, {Port::magnon1, grid, 1.0}, model);
  const Spectrum s22 = spectrum(params, {Port::magnon2, grid, 1.0}, model);
  return combined_spectrum(s11, s22);
}

std::vector<AttractionRow> level_attraction_report(const SystemParams& base,
                                                   const std::vector<double>& kappas,
                                                   const AttractionOptions& options) {
  validate(base, Port::combined);
  const double center = frame_center(base);
  const std::vector<double> grid =
      options.grid.empty() ? linear_grid(center - 25.0, center + 25.0, 2001) : options.grid;
  const double Omega = std::abs(mean_detuning(base));
  const double half = options.window_half_width.value_or(
      Omega > 0.0 ? 2.0 * Omega : 2.0 * mean_magnon_rate(base));

  DipOptions dips = options.dips;
  if (!dips.window) dips.window = std::make_pair(center - half, center + half);

  std::vector<AttractionRow> rows;
  for (double kappa : kappas) {
    const SystemParams p = with_total_kappa(base, kappa);
    const DipReport rep = dip_analysis(attraction_spectrum(p, grid, options.model), dips);
    AttractionRow row;
    row.kappa = kappa;
    row.separation = rep.separation;
    row.mean_fwhm = rep.mean_fwhm;
    row.resolvable = rep.resolvable;
    row.dip_count = rep.dips.size();
    row.regime = classify_phase(mean_detuning(p),
                                effective_coupling(mean_coupling(p), p.kappa()))
                     .regime;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace antipt
