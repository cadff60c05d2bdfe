#pragma once

// Least-squares fitting of reflection magnitudes and the fitted-parameters
// to eigenvalues pipeline.

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "antipt/effective.hpp"
#include "antipt/model.hpp"

namespace antipt {

enum class MagnitudeScale { linear, dB };

struct MeasuredSpectrum {
  Port port = Port::magnon1;
  std::vector<double> freq;  // MHz, strictly increasing
  std::vector<double> mag;   // |t| or 20 log10 |t|
  MagnitudeScale scale = MagnitudeScale::linear;
};

void validate_measured(const MeasuredSpectrum& m);

// dB traces are converted; linear traces are returned as they are.
MeasuredSpectrum to_linear(const MeasuredSpectrum& m);

enum class ParamId {
  omega1, omega2, omega3,
  gamma1, gamma1_int, gamma1_ext,
  gamma2, gamma2_int, gamma2_ext,
  kappa, kappa_int, kappa1, kappa2, kappa3,
  g13, g23, phi13, phi23,
};

std::string param_name(ParamId id);
std::optional<ParamId> param_from_name(std::string_view name);

double get_param(const SystemParams& params, ParamId id);
// Totals (gamma1, gamma2, kappa) are applied by moving the intrinsic or
// tunable share, so port rates stay as configured.
SystemParams set_param(SystemParams params, ParamId id, double value);

struct Bounds {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

Bounds default_bounds(const SystemParams& params, ParamId id);

struct FitOptions {
  int max_iterations = 200;
  double gradient_tol = 1e-8;
  double relative_tol = 1e-10;
  double initial_damping = 1e-3;
  double damping_factor = 3.0;
  double fd_relative_step = 1e-6;
  int phase_grid = 32;
};

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<double> sensitivity;  // sqrt(diag((J^T J)^-1) * sigma^2)
  std::vector<bool> pinned;         // ended on a bound
  double residual = 0.0;            // RMS misfit, linear magnitude units
  int iterations = 0;
  bool converged = false;
  std::string message;
  std::vector<double> cost_history; // 0.5 * sum r^2 after each accepted step
  SystemParams params;              // initial params with fitted values applied
};

// Model magnitudes minus measured (linear) magnitudes, concatenated.
std::vector<double> residuals(const std::vector<MeasuredSpectrum>& measured,
                              const SystemParams& params);

// Fits phi13 (magnon1 trace) or phi23 (magnon2 trace) with every other
// parameter held fixed: coarse grid over the circle, then local refinement.
// t1 is unchanged under phi13 -> Phi13 - phi13 (t2 likewise with phi23, Phi23),
// so only the distance from the mirror centre Phi/2 is identifiable. The
// result is folded onto centre + [0, pi] and wrapped into (-pi, pi].
FitResult fit_phase(const MeasuredSpectrum& measured, const SystemParams& params,
                    const FitOptions& options = {});

// Damped Gauss-Newton (Levenberg-Marquardt) over the free parameters with
// central-difference Jacobians. Accepted steps never increase the cost.
FitResult fit_params(const std::vector<MeasuredSpectrum>& measured,
                     const std::vector<ParamId>& free, const SystemParams& initial,
                     const std::map<ParamId, Bounds>& bounds = {},
                     const FitOptions& options = {});

// eliminate_cavity followed by eigvals_general.
EigenPair eigvals_from_fit(const SystemParams& params);

double wrap_phase(double phase);

// Phi13/2 for magnon1, Phi23/2 for magnon2.
double phase_mirror_center(const SystemParams& params, Port port);

// Representative of {phi, 2 centre - phi} that fit_phase reports.
double fold_phase(double phase, double center);

}  // namespace antipt
