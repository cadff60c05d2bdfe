#pragma once

// Parameter sweeps over the cavity decay rate: eigenvalue trajectories,
// exceptional-point location and the level-attraction report.

#include <optional>
#include <stdexcept>
#include <vector>

#include "antipt/effective.hpp"
#include "antipt/model.hpp"
#include "antipt/scattering.hpp"

namespace antipt {

enum class Pipeline { antipt, general_effective, full };

std::string to_string(Pipeline pipeline);

struct SweepPlan {
  SystemParams base;
  std::vector<double> kappa;  // strictly monotone
  Pipeline pipeline = Pipeline::antipt;
  double phase_tol = kDefaultPhaseTol;
};

struct EpEstimate {
  double kappa0 = 0.0;
  double lo = 0.0;  // final bracket
  double hi = 0.0;
};

struct EigenTrajectory {
  Pipeline pipeline = Pipeline::antipt;
  std::vector<double> kappa;
  std::vector<EigenPair> branches;  // continuity-matched, not re-sorted
  std::vector<PhaseRegime> regimes;
  std::optional<EpEstimate> ep;     // first sign change of the discriminant
};

class NoSignChangeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The two magnon-like eigenvalues of the full 3x3 problem, as complex
// frequencies lambda = i mu (mu eigenvalues of M), in the lab frame. The
// cavity-like root is the one with the largest cavity weight.
EigenPair magnon_branch_eigvals(const SystemParams& params);

// Eigenvalues of a pipeline in the frame rotating at frame_center, canonical order.
EigenPair pipeline_eigvals(const SystemParams& params, Pipeline pipeline);

// Omega^2 - Gamma^2 for antipt; Re(((lambda+ - lambda-)/2)^2) otherwise.
// Positive in the broken phase, negative in the symmetric one.
double pipeline_discriminant(const SystemParams& params, Pipeline pipeline);

PhaseRegime pipeline_regime(const SystemParams& params, Pipeline pipeline,
                            double tol = kDefaultPhaseTol);

EigenTrajectory run_sweep(const SweepPlan& plan);

// Bisection on the discriminant over kappa in [lo, hi].
EpEstimate locate_ep(const SystemParams& base, double lo, double hi, double tol = 1e-10,
                     Pipeline pipeline = Pipeline::antipt);

struct AttractionOptions {
  SpectrumModel model = SpectrumModel::full;
  // Defaults to frame_center +/- 25 MHz with 2001 points.
  std::vector<double> grid;
  DipOptions dips;
  // Dips are searched within frame_center +/- this width; defaults to
  // 2|Omega| (or 2 gamma when Omega = 0). Keeps the cavity polariton,
  // which reappears at small kappa, out of the magnon pair.
  std::optional<double> window_half_width;
};

struct AttractionRow {
  double kappa = 0.0;
  double separation = 0.0;
  double mean_fwhm = 0.0;
  bool resolvable = false;
  Regime regime = Regime::broken;
  std::size_t dip_count = 0;
};

std::vector<AttractionRow> level_attraction_report(const SystemParams& base,
                                                   const std::vector<double>& kappas,
                                                   const AttractionOptions& options = {});

// Combined |S11|,|S22| spectrum at one kappa, as used by the report.
Spectrum attraction_spectrum(const SystemParams& params, const std::vector<double>& grid,
                             SpectrumModel model = SpectrumModel::full);

}  // namespace antipt
