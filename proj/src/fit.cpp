#include "antipt/fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "antipt/scattering.hpp"

namespace antipt {

namespace {

struct NamedParam {
  ParamId id;
  const char* name;
};

constexpr std::array<NamedParam, 18> kNames{{
    {ParamId::omega1, "omega1"},         {ParamId::omega2, "omega2"},
    {ParamId::omega3, "omega3"},         {ParamId::gamma1, "gamma1"},
    {ParamId::gamma1_int, "gamma1_int"}, {ParamId::gamma1_ext, "gamma1_ext"},
    {ParamId::gamma2, "gamma2"},         {ParamId::gamma2_int, "gamma2_int"},
    {ParamId::gamma2_ext, "gamma2_ext"}, {ParamId::kappa, "kappa"},
    {ParamId::kappa_int, "kappa_int"},   {ParamId::kappa1, "kappa1"},
    {ParamId::kappa2, "kappa2"},         {ParamId::kappa3, "kappa3"},
    {ParamId::g13, "g13"},               {ParamId::g23, "g23"},
    {ParamId::phi13, "phi13"},           {ParamId::phi23, "phi23"},
}};

double ports_sum(const ModeParams& m) {
  double s = 0.0;
  for (double r : m.gamma_ports) s += r;
  return s;
}

void set_port(ModeParams& m, std::size_t index, double value) {
  if (m.gamma_ports.size() <= index) m.gamma_ports.resize(index + 1, 0.0);
  m.gamma_ports[index] = value;
}

// Share of kappa that with_total_kappa does not touch.
double fixed_cavity_loss(const SystemParams& p) {
  switch (p.kappa_control) {
    case KappaControl::antenna3: return p.kappa() - p.kappa3();
    case KappaControl::critical: return p.kappa1() + p.kappa2();
    case KappaControl::intrinsic: return ports_sum(p.cavity);
  }
  return 0.0;
}

double model_magnitude(const SystemParams& p, Port port, double w) {
  if (port == Port::combined) {
    return 0.5 * (std::abs(reflection(p, Port::magnon1, w)) +
                  std::abs(reflection(p, Port::magnon2, w)));
  }
  return std::abs(reflection(p, port, w));
}

double half_sq(const Eigen::VectorXd& r) { return 0.5 * r.squaredNorm(); }

struct Problem {
  std::vector<MeasuredSpectrum> data;  // linear
  std::vector<ParamId> free;
  std::vector<Bounds> bounds;
  SystemParams base;

  SystemParams apply(const Eigen::VectorXd& x) const {
    SystemParams p = base;
    for (std::size_t j = 0; j < free.size(); ++j) {
      p = set_param(std::move(p), free[j], x[static_cast<Eigen::Index>(j)]);
    }
    return p;
  }

  Eigen::VectorXd residual(const Eigen::VectorXd& x) const {
    const auto r = residuals(data, apply(x));
    return Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size()));
  }

  Eigen::VectorXd clamp(Eigen::VectorXd x) const {
    for (std::size_t j = 0; j < free.size(); ++j) {
      auto& v = x[static_cast<Eigen::Index>(j)];
      v = std::clamp(v, bounds[j].lo, bounds[j].hi);
    }
    return x;
  }
};

// Central differences; steps are shrunk onto the feasible side near a bound.
Eigen::MatrixXd jacobian(const Problem& prob, const Eigen::VectorXd& x, double rel_step,
                         Eigen::Index rows) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd J(rows, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = rel_step * std::max(std::abs(x[j]), 1.0);
    const auto& b = prob.bounds[static_cast<std::size_t>(j)];
    Eigen::VectorXd xp = x, xm = x;
    xp[j] = std::min(x[j] + h, b.hi);
    xm[j] = std::max(x[j] - h, b.lo);
    const double span = xp[j] - xm[j];
    if (span <= 0.0) {
      J.col(j).setZero();
      continue;
    }
    J.col(j) = (prob.residual(xp) - prob.residual(xm)) / span;
  }
  return J;
}

FitResult levenberg_marquardt(const Problem& prob, Eigen::VectorXd x, const FitOptions& opt) {
  const auto n = static_cast<Eigen::Index>(prob.free.size());
  FitResult out;
  for (ParamId id : prob.free) out.names.push_back(param_name(id));

  x = prob.clamp(std::move(x));
  Eigen::VectorXd r = prob.residual(x);
  double cost = half_sq(r);
  if (!std::isfinite(cost)) throw std::runtime_error("fit: non-finite residual at the start");
  out.cost_history.push_back(cost);

  Eigen::MatrixXd J;
  double lambda = opt.initial_damping;
  bool converged = n == 0;
  out.message = n == 0 ? "no free parameters" : "iteration limit reached";

  int iter = 0;
  while (!converged && iter < opt.max_iterations) {
    ++iter;
    J = jacobian(prob, x, opt.fd_relative_step, r.size());
    const Eigen::VectorXd grad = J.transpose() * r;
    if (grad.lpNorm<Eigen::Infinity>() <= opt.gradient_tol * std::max(1.0, cost)) {
      converged = true;
      out.message = "gradient below tolerance";
      break;
    }
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    Eigen::VectorXd diag = JtJ.diagonal();
    for (Eigen::Index j = 0; j < n; ++j) diag[j] = std::max(diag[j], 1e-12);

    bool accepted = false;
    while (!accepted) {
      Eigen::MatrixXd A = JtJ;
      A.diagonal() += lambda * diag;
      const Eigen::VectorXd step = A.ldlt().solve(-grad);
      const Eigen::VectorXd trial = prob.clamp(x + step);
      const Eigen::VectorXd rt = prob.residual(trial);
      const double ct = half_sq(rt);
      if (std::isfinite(ct) && ct <= cost) {
        const double drop = cost - ct;
        x = trial;
        r = rt;
        cost = ct;
        out.cost_history.push_back(cost);
        lambda = std::max(lambda / opt.damping_factor, 1e-12);
        accepted = true;
        if (drop <= opt.relative_tol * std::max(cost, 1e-300)) {
          converged = true;
          out.message = "relative cost change below tolerance";
        }
      } else {
        lambda *= opt.damping_factor;
        if (lambda > 1e16) {
          // No descent left along any damped direction: a numerical minimum.
          converged = true;
          out.message = "no further decrease possible";
          break;
        }
      }
    }
  }
  out.iterations = iter;
  out.converged = converged;

  const auto m = r.size();
  out.residual = m > 0 ? std::sqrt(r.squaredNorm() / static_cast<double>(m)) : 0.0;
  out.params = prob.apply(x);
  out.values.assign(x.data(), x.data() + n);

  if (n > 0) {
    J = jacobian(prob, x, opt.fd_relative_step, m);
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const double sigma2 = 2.0 * cost / static_cast<double>(std::max<Eigen::Index>(m - n, 1));
    Eigen::FullPivLU<Eigen::MatrixXd> lu(JtJ);
    const bool invertible = lu.isInvertible();
    Eigen::MatrixXd cov;
    if (invertible) cov = lu.inverse();
    for (Eigen::Index j = 0; j < n; ++j) {
      out.sensitivity.push_back(invertible ? std::sqrt(std::max(cov(j, j), 0.0) * sigma2)
                                           : std::numeric_limits<double>::infinity());
      const auto& b = prob.bounds[static_cast<std::size_t>(j)];
      auto at = [&](double bound) {
        return std::isfinite(bound) &&
               std::abs(x[j] - bound) <= 1e-12 * std::max(1.0, std::abs(bound));
      };
      out.pinned.push_back(at(b.lo) || at(b.hi));
    }
  }
  return out;
}

}  // namespace

void validate_measured(const MeasuredSpectrum& m) {
  if (m.freq.empty()) throw std::invalid_argument("measured spectrum is empty");
  if (m.freq.size() != m.mag.size()) {
    throw std::invalid_argument("measured spectrum: frequency and magnitude lengths differ");
  }
  for (std::size_t k = 0; k < m.freq.size(); ++k) {
    if (!std::isfinite(m.freq[k]) || !std::isfinite(m.mag[k])) {
      throw std::invalid_argument("measured spectrum: non-finite value at row " +
                                  std::to_string(k));
    }
    if (k > 0 && !(m.freq[k] > m.freq[k - 1])) {
      throw std::invalid_argument("measured spectrum: frequencies not increasing at row " +
                                  std::to_string(k));
    }
    if (m.scale == MagnitudeScale::linear && m.mag[k] < 0.0) {
      throw std::invalid_argument("measured spectrum: negative magnitude at row " +
                                  std::to_string(k));
    }
  }
}

MeasuredSpectrum to_linear(const MeasuredSpectrum& m) {
  if (m.scale == MagnitudeScale::linear) return m;
  MeasuredSpectrum out = m;
  out.scale = MagnitudeScale::linear;
  for (double& v : out.mag) v = from_db(v);
  return out;
}

std::string param_name(ParamId id) {
  for (const auto& n : kNames) {
    if (n.id == id) return n.name;
  }
  return "unknown";
}

std::optional<ParamId> param_from_name(std::string_view name) {
  for (const auto& n : kNames) {
    if (name == n.name) return n.id;
  }
  return std::nullopt;
}

double get_param(const SystemParams& p, ParamId id) {
  switch (id) {
    case ParamId::omega1: return p.magnon1.omega;
    case ParamId::omega2: return p.magnon2.omega;
    case ParamId::omega3: return p.cavity.omega;
    case ParamId::gamma1: return p.gamma1();
    case ParamId::gamma1_int: return p.magnon1.gamma_int;
    case ParamId::gamma1_ext: return p.gamma11();
    case ParamId::gamma2: return p.gamma2();
    case ParamId::gamma2_int: return p.magnon2.gamma_int;
    case ParamId::gamma2_ext: return p.gamma21();
    case ParamId::kappa: return p.kappa();
    case ParamId::kappa_int: return p.cavity.gamma_int;
    case ParamId::kappa1: return p.kappa1();
    case ParamId::kappa2: return p.kappa2();
    case ParamId::kappa3: return p.kappa3();
    case ParamId::g13: return p.g13;
    case ParamId::g23: return p.g23;
    case ParamId::phi13: return p.phi13;
    case ParamId::phi23: return p.phi23;
  }
  throw std::invalid_argument("unknown parameter");
}

SystemParams set_param(SystemParams p, ParamId id, double v) {
  switch (id) {
    case ParamId::omega1: p.magnon1.omega = v; break;
    case ParamId::omega2: p.magnon2.omega = v; break;
    case ParamId::omega3: p.cavity.omega = v; break;
    case ParamId::gamma1: p.magnon1.gamma_int = v - ports_sum(p.magnon1); break;
    case ParamId::gamma1_int: p.magnon1.gamma_int = v; break;
    case ParamId::gamma1_ext: set_port(p.magnon1, 0, v); break;
    case ParamId::gamma2: p.magnon2.gamma_int = v - ports_sum(p.magnon2); break;
    case ParamId::gamma2_int: p.magnon2.gamma_int = v; break;
    case ParamId::gamma2_ext: set_port(p.magnon2, 0, v); break;
    case ParamId::kappa: return with_total_kappa(p, v);
    case ParamId::kappa_int: p.cavity.gamma_int = v; break;
    case ParamId::kappa1: set_port(p.cavity, 0, v); break;
    case ParamId::kappa2: set_port(p.cavity, 1, v); break;
    case ParamId::kappa3: set_port(p.cavity, 2, v); break;
    case ParamId::g13: p.g13 = v; break;
    case ParamId::g23: p.g23 = v; break;
    case ParamId::phi13: p.phi13 = v; break;
    case ParamId::phi23: p.phi23 = v; break;
  }
  return p;
}

Bounds default_bounds(const SystemParams& p, ParamId id) {
  Bounds b;
  switch (id) {
    case ParamId::omega1:
    case ParamId::omega2:
    case ParamId::omega3:
    case ParamId::phi13:
    case ParamId::phi23:
      break;
    case ParamId::gamma1: b.lo = ports_sum(p.magnon1); break;
    case ParamId::gamma2: b.lo = ports_sum(p.magnon2); break;
    case ParamId::kappa: b.lo = std::max(fixed_cavity_loss(p), 1e-9); break;
    default: b.lo = 0.0; break;
  }
  return b;
}

std::vector<double> residuals(const std::vector<MeasuredSpectrum>& measured,
                              const SystemParams& params) {
  std::vector<double> out;
  for (const auto& m : measured) {
    const MeasuredSpectrum lin = to_linear(m);
    for (std::size_t k = 0; k < lin.freq.size(); ++k) {
      out.push_back(model_magnitude(params, lin.port, lin.freq[k]) - lin.mag[k]);
    }
  }
  return out;
}

FitResult fit_params(const std::vector<MeasuredSpectrum>& measured,
                     const std::vector<ParamId>& free, const SystemParams& initial,
                     const std::map<ParamId, Bounds>& bounds, const FitOptions& options) {
  if (measured.empty()) throw std::invalid_argument("fit needs at least one spectrum");
  for (std::size_t i = 0; i < free.size(); ++i) {
    for (std::size_t j = i + 1; j < free.size(); ++j) {
      if (free[i] == free[j]) {
        throw std::invalid_argument("parameter listed twice: " + param_name(free[i]));
      }
    }
  }
  Problem prob;
  prob.base = initial;
  prob.free = free;
  for (const auto& m : measured) {
    validate_measured(m);
    validate(initial, m.port == Port::combined ? std::optional<Port>{} : m.port);
    prob.data.push_back(to_linear(m));
  }
  Eigen::VectorXd x(static_cast<Eigen::Index>(free.size()));
  for (std::size_t j = 0; j < free.size(); ++j) {
    const auto it = bounds.find(free[j]);
    prob.bounds.push_back(it != bounds.end() ? it->second : default_bounds(initial, free[j]));
    if (prob.bounds.back().lo > prob.bounds.back().hi) {
      throw std::invalid_argument("empty bounds for " + param_name(free[j]));
    }
    x[static_cast<Eigen::Index>(j)] = get_param(initial, free[j]);
  }
  return levenberg_marquardt(prob, x, options);
}

double wrap_phase(double phase) {
  const double two_pi = 2.0 * kPi;
  double w = phase - two_pi * std::ceil((phase - kPi) / two_pi);
  if (w <= -kPi) w += two_pi;
  return w;
}

FitResult fit_phase(const MeasuredSpectrum& measured, const SystemParams& params,
                    const FitOptions& options) {
  ParamId id;
  if (measured.port == Port::magnon1) {
    id = ParamId::phi13;
  } else if (measured.port == Port::magnon2) {
    id = ParamId::phi23;
  } else {
    throw std::invalid_argument("phase fit needs a magnon1 or magnon2 trace");
  }
  if (options.phase_grid < 1) throw std::invalid_argument("phase grid must be >= 1");
  validate_measured(measured);
  validate(params, measured.port);
  const std::vector<MeasuredSpectrum> data{to_linear(measured)};

  double best_phase = 0.0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int k = 0; k < options.phase_grid; ++k) {
    const double phase = -kPi + 2.0 * kPi * (k + 1) / options.phase_grid;
    const auto r = residuals(data, set_param(params, id, phase));
    double c = 0.0;
    for (double v : r) c += v * v;
    if (c < best_cost) {
      best_cost = c;
      best_phase = phase;
    }
  }

  FitResult out = fit_params(data, {id}, set_param(params, id, best_phase), {}, options);
  out.values[0] = wrap_phase(out.values[0]);
  out.values[0] = fold_phase(out.values[0], phase_mirror_center(params, measured.port));
  out.message += "; folded about the mirror centre (phi and Phi - phi fit equally)";
  out.params = set_param(out.params, id, out.values[0]);
  return out;
}

double phase_mirror_center(const SystemParams& params, Port port) {
  if (port == Port::magnon1) return 0.5 * params.Phi13;
  if (port == Port::magnon2) return 0.5 * params.Phi23;
  throw std::invalid_argument("mirror centre is defined for magnon ports only");
}

double fold_phase(double phase, double center) {
  return wrap_phase(center + std::abs(wrap_phase(phase - center)));
}

EigenPair eigvals_from_fit(const SystemParams& params) {
  return eigvals_general(eliminate_cavity(validate(params)));
}

}  // namespace antipt
