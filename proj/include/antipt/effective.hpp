#pragma once

// Adiabatic elimination of the cavity and the resulting 2x2 effective
// Hamiltonians, with closed-form spectra and phase classification.
//
// Convention: i d/dt (a, b)^T = H (a, b)^T, so eigenvalues are complex
// frequencies whose imaginary parts are minus the decay rates.

#include <string>
#include <utility>
#include <vector>

#include "antipt/model.hpp"

namespace antipt {

enum class HamiltonianForm { general, antiPT };
enum class Frame { lab, rotating };

struct EffectiveHamiltonian {
  Mat2 H;
  HamiltonianForm form = HamiltonianForm::general;
  Frame frame = Frame::lab;
  // Approximation-regime warnings raised while constructing H.
  std::vector<std::string> warnings;
};

enum class Regime { symmetric, broken, exceptional };

std::string to_string(Regime regime);

struct PhaseRegime {
  Regime regime = Regime::broken;
  double discriminant = 0.0;  // Omega^2 - Gamma^2 [MHz^2]
};

// lambda_plus is the larger real part; ties go to the larger imaginary part.
struct EigenPair {
  cplx plus;
  cplx minus;
};

// Ratio below which "kappa >> x" is reported as doubtful.
inline constexpr double kEliminationRatio = 10.0;

EffectiveHamiltonian eliminate_cavity(const SystemParams& params);

// Symmetrised anti-PT form in the frame rotating at (omega1 + omega2)/2,
// using gamma = (gamma1 + gamma2)/2 and g = (g13 + g23)/2.
EffectiveHamiltonian reduce_to_antipt(const SystemParams& params);

// Anti-PT matrix built directly from (Omega, Gamma, gamma).
Mat2 antipt_matrix(double Omega, double Gamma, double gamma);

double effective_coupling(double g, double kappa);

EigenPair eigvals_antipt(double Omega, double Gamma, double gamma);

EigenPair eigvals_general(const Mat2& H);
inline EigenPair eigvals_general(const EffectiveHamiltonian& h) {
  return eigvals_general(h.H);
}

// Puts two eigenvalues into the canonical (plus, minus) order.
EigenPair canonical_order(cplx a, cplx b);

inline constexpr double kDefaultPhaseTol = 1e-9;

PhaseRegime classify_phase(double Omega, double Gamma,
                           double tol = kDefaultPhaseTol);

// kappa_0 = g^2 / |Omega|; throws std::domain_error for Omega == 0.
double ep_kappa(double g, double Omega);

// max-norm of sigma_x H^* sigma_x + H after removing tr(H)/2.
double antipt_residual(const Mat2& H);

// Symmetrised quantities used by the anti-PT reduction.
double mean_detuning(const SystemParams& params);      // Omega
double mean_magnon_rate(const SystemParams& params);   // gamma
double mean_coupling(const SystemParams& params);      // g
double frame_center(const SystemParams& params);       // (omega1 + omega2)/2

}  // namespace antipt
