#include "antipt/effective.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace antipt {

namespace {

constexpr cplx kI{0.0, 1.0};

void require_kappa(double kappa) {
  if (!(kappa > 0.0)) {
    throw std::invalid_argument("cavity decay rate kappa must be > 0");
  }
}

std::string ratio_warning(const char* what, double ratio) {
  return std::string(what) + " ratio " + std::to_string(ratio) +
         " is below " + std::to_string(kEliminationRatio);
}

}  // namespace

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::symmetric: return "symmetric";
    case Regime::broken: return "broken";
    case Regime::exceptional: return "exceptional";
  }
  return "unknown";
}

double mean_detuning(const SystemParams& p) {
  return 0.5 * (p.magnon1.omega - p.magnon2.omega);
}

double mean_magnon_rate(const SystemParams& p) {
  return 0.5 * (p.gamma1() + p.gamma2());
}

double mean_coupling(const SystemParams& p) { return 0.5 * (p.g13 + p.g23); }

double frame_center(const SystemParams& p) {
  return 0.5 * (p.magnon1.omega + p.magnon2.omega);
}

EffectiveHamiltonian eliminate_cavity(const SystemParams& p) {
  const double kappa = p.kappa();
  require_kappa(kappa);

  const double d13 = p.cavity.omega - p.magnon1.omega;
  const double d23 = p.cavity.omega - p.magnon2.omega;
  const cplx den13 = kappa - kI * d13;
  const cplx den23 = kappa - kI * d23;
  // With nonzero coupling phases the a<-c and b<-c legs carry exp(i Phi).
  const cplx ph13 = std::polar(1.0, p.Phi13);
  const cplx ph23 = std::polar(1.0, p.Phi23);
  const double g2 = p.g13 * p.g23;

  EffectiveHamiltonian h;
  h.form = HamiltonianForm::general;
  h.frame = Frame::lab;
  h.H(0, 0) = p.magnon1.omega - kI * (p.gamma1() + p.g13 * p.g13 * ph13 / den13);
  h.H(0, 1) = -kI * g2 * ph13 / den23;
  h.H(1, 0) = -kI * g2 * ph23 / den13;
  h.H(1, 1) = p.magnon2.omega - kI * (p.gamma2() + p.g23 * p.g23 * ph23 / den23);

  const double gmax = std::max(p.gamma1(), p.gamma2());
  if (kappa < kEliminationRatio * gmax) {
    h.warnings.push_back(ratio_warning("kappa/gamma", kappa / gmax));
  }
  return h;
}

Mat2 antipt_matrix(double Omega, double Gamma, double gamma) {
  Mat2 H;
  const cplx diag = -kI * (gamma + Gamma);
  H << Omega + diag, -kI * Gamma,
       -kI * Gamma, -Omega + diag;
  return H;
}

EffectiveHamiltonian reduce_to_antipt(const SystemParams& p) {
  const double kappa = p.kappa();
  require_kappa(kappa);

  EffectiveHamiltonian h;
  h.form = HamiltonianForm::antiPT;
  h.frame = Frame::rotating;
  const double Gamma = effective_coupling(mean_coupling(p), kappa);
  h.H = antipt_matrix(mean_detuning(p), Gamma, mean_magnon_rate(p));

  const double dmax = std::max(std::abs(p.cavity.omega - p.magnon1.omega),
                               std::abs(p.cavity.omega - p.magnon2.omega));
  if (dmax > 0.0 && kappa < kEliminationRatio * dmax) {
    h.warnings.push_back(ratio_warning("kappa/|Delta|", kappa / dmax));
  }
  const double gmax = std::max(p.gamma1(), p.gamma2());
  if (kappa < kEliminationRatio * gmax) {
    h.warnings.push_back(ratio_warning("kappa/gamma", kappa / gmax));
  }
  return h;
}

double effective_coupling(double g, double kappa) {
  require_kappa(kappa);
  return g * g / kappa;
}

EigenPair canonical_order(cplx a, cplx b) {
  const double scale = std::abs(a) + std::abs(b) + 1.0;
  const double tie = 1e-13 * scale;
  if (std::abs(a.real() - b.real()) <= tie) {
    return a.imag() >= b.imag() ? EigenPair{a, b} : EigenPair{b, a};
  }
  return a.real() > b.real() ? EigenPair{a, b} : EigenPair{b, a};
}

EigenPair eigvals_antipt(double Omega, double Gamma, double gamma) {
  const cplx center = -kI * (gamma + Gamma);
  const cplx root = std::sqrt(cplx(Omega * Omega - Gamma * Gamma, 0.0));
  return {center + root, center - root};
}

EigenPair eigvals_general(const Mat2& H) {
  const cplx half_trace = 0.5 * (H(0, 0) + H(1, 1));
  const cplx half_diff = 0.5 * (H(0, 0) - H(1, 1));
  const cplx root = std::sqrt(half_diff * half_diff + H(0, 1) * H(1, 0));
  return canonical_order(half_trace + root, half_trace - root);
}

PhaseRegime classify_phase(double Omega, double Gamma, double tol) {
  if (tol < 0.0) throw std::invalid_argument("tolerance must be >= 0");
  const double om = std::abs(Omega);
  const double gm = std::abs(Gamma);
  const double margin = tol * std::max(om, gm);
  PhaseRegime out;
  out.discriminant = Omega * Omega - Gamma * Gamma;
  if (gm - om > margin) {
    out.regime = Regime::symmetric;
  } else if (om - gm > margin) {
    out.regime = Regime::broken;
  } else {
    out.regime = Regime::exceptional;
  }
  return out;
}

double ep_kappa(double g, double Omega) {
  if (Omega == 0.0) {
    throw std::domain_error("Omega = 0: the exceptional point lies at infinite kappa");
  }
  return g * g / std::abs(Omega);
}

double antipt_residual(const Mat2& H) {
  const cplx half_trace = 0.5 * (H(0, 0) + H(1, 1));
  Mat2 shifted = H;
  shifted(0, 0) -= half_trace;
  shifted(1, 1) -= half_trace;
  Mat2 swapped;
  swapped << std::conj(shifted(1, 1)), std::conj(shifted(1, 0)),
             std::conj(shifted(0, 1)), std::conj(shifted(0, 0));
  return (swapped + shifted).cwiseAbs().maxCoeff();
}

}  // namespace antipt
