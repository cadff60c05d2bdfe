#include "antipt/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <optional>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "antipt/config.hpp"
#include "antipt/csv.hpp"
#include "antipt/effective.hpp"
#include "antipt/fit.hpp"
#include "antipt/scattering.hpp"
#include "antipt/sweep.hpp"

#ifndef ANTIPT_VERSION
#define ANTIPT_VERSION "dev"
#endif

namespace antipt::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Raised for flag values that parse but make no sense together.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config;
  std::string out;
  std::optional<double> kappa;
};

struct GridFlags {
  double lo = -25.0;
  double hi = 25.0;
  std::size_t points = 2001;
};

struct RangeFlags {
  std::optional<double> lo;
  std::optional<double> hi;
  std::size_t steps = 201;
};

Port parse_port(const std::string& s) {
  if (s == "m1") return Port::magnon1;
  if (s == "m2") return Port::magnon2;
  if (s == "cav") return Port::cavity;
  if (s == "combined") return Port::combined;
  throw UsageError("unknown port " + s);
}

Pipeline parse_pipeline(const std::string& s) {
  if (s == "antipt") return Pipeline::antipt;
  if (s == "effective") return Pipeline::general_effective;
  if (s == "full") return Pipeline::full;
  throw UsageError("unknown pipeline " + s);
}

SpectrumModel spectrum_model(Pipeline p) {
  switch (p) {
    case Pipeline::antipt: return SpectrumModel::antipt;
    case Pipeline::general_effective: return SpectrumModel::general_effective;
    case Pipeline::full: return SpectrumModel::full;
  }
  return SpectrumModel::full;
}

SystemParams load(const Common& c) {
  SystemParams p = load_config(c.config);
  if (c.kappa) {
    try {
      p = with_total_kappa(p, *c.kappa);
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("--kappa: ") + e.what());
    }
  }
  return p;
}

std::vector<double> kappa_values(const RangeFlags& r) {
  if (!r.lo || !r.hi) throw UsageError("--kappa-min and --kappa-max are required");
  if (!(*r.lo > 0.0)) throw UsageError("--kappa-min must be > 0");
  if (r.steps < 1) throw UsageError("--kappa-steps must be >= 1");
  if (*r.hi < *r.lo || (*r.hi == *r.lo && r.steps != 1)) {
    throw UsageError("empty kappa range");
  }
  if (r.steps == 1) return {*r.lo};
  return linear_grid(*r.lo, *r.hi, r.steps);
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const std::string& out, const std::string& subcommand,
                    const std::vector<std::string>& args, const Common& c,
                    const SystemParams& params, json extra = json::object()) {
  json m;
  m["tool"] = "antipt";
  m["version"] = ANTIPT_VERSION;
  m["subcommand"] = subcommand;
  m["arguments"] = args;
  m["config_path"] = c.config.empty() ? "" : fs::absolute(c.config).string();
  m["output"] = fs::absolute(out).string();
  m["output_directory"] = fs::absolute(out).parent_path().string();
  m["timestamp"] = utc_timestamp();
  m["params"] = params_to_json(params);
  m["params"]["kappa_MHz"] = params.kappa();
  for (const auto& item : extra.items()) m[item.key()] = item.value();
  atomic_write(out + ".manifest.json", m.dump(2) + "\n");
}

void apply_noise(Spectrum& spec, double level, std::uint64_t seed) {
  if (level <= 0.0) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, level);
  for (auto& p : spec.points) {
    const double factor = 1.0 + normal(rng);
    p.t *= factor;
    p.magnitude = std::abs(p.t);
  }
}

void print_diagnostics(const SystemParams& p, std::ostream& out) {
  for (const auto& d : diagnose(p)) {
    const char* rel = d.upper ? "<" : ">=";
    const std::string value =
        d.unit == "%" ? fmt::format("{:.1f}", d.value) : fmt::format("{:.4g}", d.value);
    out << fmt::format("{:<34} {:>10}{}  ({} {:g}{}: {})\n", d.name, value, d.unit, rel, d.limit,
                       d.unit, d.ok ? "ok" : "WARNING");
  }
  const EffectiveHamiltonian general = eliminate_cavity(p);
  const EffectiveHamiltonian anti = reduce_to_antipt(p);
  for (const auto& w : general.warnings) out << "WARNING: weak elimination, " << w << "\n";
  for (const auto& w : anti.warnings) {
    if (w.rfind("kappa/gamma", 0) != 0) out << "WARNING: weak elimination, " << w << "\n";
  }
  out << fmt::format("anti-PT residual (general H)       {:.4g} MHz\n",
                     antipt_residual(general.H));
  out << fmt::format("anti-PT residual (symmetrised H)   {:.4g} MHz\n", antipt_residual(anti.H));
  for (Port port : {Port::magnon1, Port::magnon2, Port::cavity}) {
    out << fmt::format("passivity margin {:<17} {:.6g} MHz^2\n", to_string(port),
                       passivity_margin(p, port));
  }
  const double Omega = mean_detuning(p);
  const double Gamma = effective_coupling(mean_coupling(p), p.kappa());
  out << fmt::format("Omega = {:.6g} MHz, Gamma = g^2/kappa = {:.6g} MHz, regime: {}\n", Omega,
                     Gamma, to_string(classify_phase(Omega, Gamma).regime));
  if (Omega != 0.0) {
    out << fmt::format("kappa0 = g^2/|Omega| = {:.6g} MHz\n", ep_kappa(mean_coupling(p), Omega));
  } else {
    out << "kappa0: none (Omega = 0)\n";
  }
}

json fit_report(const FitResult& r, Port port, const std::optional<EigenPair>& eig) {
  json j;
  j["port"] = to_string(port);
  j["names"] = r.names;
  j["values"] = r.values;
  j["sensitivity"] = r.sensitivity;
  j["pinned"] = r.pinned;
  j["residual"] = r.residual;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["message"] = r.message;
  if (eig) {
    j["eigenvalues"] = {{"plus", {eig->plus.real(), eig->plus.imag()}},
                        {"minus", {eig->minus.real(), eig->minus.imag()}}};
  }
  return j;
}

}  // namespace

double asymmetry_percent(double a, double b) {
  const double mean = 0.5 * (std::abs(a) + std::abs(b));
  if (mean == 0.0) return 0.0;
  return 100.0 * std::abs(a - b) / mean;
}

std::vector<Diagnostic> diagnose(const SystemParams& p) {
  std::vector<Diagnostic> out;
  auto ratio = [&](const std::string& name, double num, double den) {
    Diagnostic d;
    d.name = name;
    d.value = den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
    d.limit = kEliminationRatio;
    d.ok = d.value >= d.limit;
    out.push_back(d);
  };
  auto asym = [&](const std::string& name, double a, double b) {
    Diagnostic d;
    d.name = name;
    d.value = asymmetry_percent(a, b);
    d.limit = 5.0;
    d.upper = true;
    d.ok = d.value < d.limit;
    d.unit = "%";
    out.push_back(d);
  };
  const double kappa = p.kappa();
  ratio("kappa/gamma1", kappa, p.gamma1());
  ratio("kappa/gamma2", kappa, p.gamma2());
  ratio("kappa/|Delta13|", kappa, std::abs(p.cavity.omega - p.magnon1.omega));
  ratio("kappa/|Delta23|", kappa, std::abs(p.cavity.omega - p.magnon2.omega));
  asym("asymmetry g13 vs g23", p.g13, p.g23);
  asym("asymmetry gamma1 vs gamma2", p.gamma1(), p.gamma2());
  asym("asymmetry |Delta13| vs |Delta23|", std::abs(p.cavity.omega - p.magnon1.omega),
       std::abs(p.cavity.omega - p.magnon2.omega));
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Anti-PT magnon-cavity-magnon spectra, eigenvalues and fits", "antipt"};
  app.set_version_flag("--version", ANTIPT_VERSION);
  app.require_subcommand(1);

  Common common;
  GridFlags grid;
  RangeFlags range;
  std::string port_s = "m1";
  std::string pipeline_s;
  bool db = false;
  std::uint64_t seed = 1;
  double noise = 0.0;
  std::string data;
  std::string free_s;
  std::string kappa_list;
  double tol = 1e-6;

  const std::vector<std::string> ports{"m1", "m2", "cav", "combined"};
  const std::vector<std::string> pipelines{"antipt", "effective", "full"};

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "JSON config")->required();
    sub->add_option("--kappa", common.kappa, "override the total cavity rate [MHz]");
  };
  auto add_grid = [&](CLI::App* sub) {
    sub->add_option("--grid-min", grid.lo, "probe grid start [MHz]");
    sub->add_option("--grid-max", grid.hi, "probe grid end [MHz]");
    sub->add_option("--grid-points", grid.points, "probe grid size");
  };
  auto add_range = [&](CLI::App* sub) {
    sub->add_option("--kappa-min", range.lo, "smallest kappa [MHz]");
    sub->add_option("--kappa-max", range.hi, "largest kappa [MHz]");
    sub->add_option("--kappa-steps", range.steps, "number of kappa values");
  };

  auto* spec_cmd = app.add_subcommand("spectrum", "reflection spectrum CSV");
  add_config(spec_cmd);
  add_grid(spec_cmd);
  spec_cmd->add_option("--port", port_s, "m1, m2, cav or combined")
      ->check(CLI::IsMember(ports));
  spec_cmd->add_option("--pipeline", pipeline_s, "model: antipt, effective or full")
      ->check(CLI::IsMember(pipelines));
  spec_cmd->add_option("--out", common.out, "output CSV")->required();
  spec_cmd->add_option("--noise", noise, "relative Gaussian noise on |t| (synthetic data)");
  spec_cmd->add_option("--seed", seed, "noise seed");

  auto* sweep_cmd = app.add_subcommand("sweep", "eigenvalue trajectory over kappa");
  add_config(sweep_cmd);
  add_range(sweep_cmd);
  sweep_cmd->add_option("--pipeline", pipeline_s, "antipt, effective or full")
      ->check(CLI::IsMember(pipelines));
  sweep_cmd->add_option("--out", common.out, "output CSV")->required();

  auto* fit_cmd = app.add_subcommand("fit", "fit drive phase or parameters to a trace");
  add_config(fit_cmd);
  fit_cmd->add_option("--data", data, "CSV with freq_MHz and mag (or mag_dB)")->required();
  fit_cmd->add_option("--port", port_s, "m1, m2 or combined")->check(CLI::IsMember(ports));
  fit_cmd->add_option("--free", free_s, "comma-separated free parameters (default: phase)");
  fit_cmd->add_flag("--db", db, "magnitudes are in dB");
  fit_cmd->add_option("--out", common.out, "write the JSON report here as well");
  fit_cmd->add_option("--seed", seed, "recorded in the manifest; the fit is deterministic");

  auto* val_cmd = app.add_subcommand("validate", "approximation-regime diagnostics");
  add_config(val_cmd);

  auto* ep_cmd = app.add_subcommand("ep", "locate the exceptional point");
  add_config(ep_cmd);
  add_range(ep_cmd);
  ep_cmd->add_option("--pipeline", pipeline_s, "antipt, effective or full")
      ->check(CLI::IsMember(pipelines));
  ep_cmd->add_option("--tol", tol, "bracket width [MHz]");

  auto* att_cmd = app.add_subcommand("attraction", "level-attraction report over kappa");
  add_config(att_cmd);
  add_range(att_cmd);
  add_grid(att_cmd);
  att_cmd->add_option("--kappas", kappa_list, "comma-separated kappa values [MHz]");
  att_cmd->add_option("--pipeline", pipeline_s, "spectrum model")
      ->check(CLI::IsMember(pipelines));
  att_cmd->add_option("--out", common.out, "output CSV")->required();

  std::vector<std::string> argv_store{"antipt"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (spec_cmd->parsed()) {
      const SystemParams p = load(common);
      const Port port = parse_port(port_s);
      const Pipeline pipe = pipeline_s.empty() ? Pipeline::full : parse_pipeline(pipeline_s);
      if (grid.points < 2) throw UsageError("--grid-points must be >= 2");
      if (!(grid.hi > grid.lo)) throw UsageError("--grid-max must exceed --grid-min");
      if (noise < 0.0) throw UsageError("--noise must be >= 0");
      try {
        validate(p, port);
      } catch (const ValidationError& e) {
        throw ConfigError("", e.what());
      }
      const auto g = linear_grid(grid.lo, grid.hi, grid.points);
      Spectrum s = port == Port::combined
                       ? attraction_spectrum(p, g, spectrum_model(pipe))
                       : spectrum(p, {port, g, 1.0}, spectrum_model(pipe));
      apply_noise(s, noise, seed);
      atomic_write(common.out, spectrum_csv(s));
      write_manifest(common.out, "spectrum", args, common, p,
                     {{"port", port_s}, {"pipeline", to_string(pipe)}, {"noise", noise},
                      {"seed", seed},
                      {"grid", {{"min", grid.lo}, {"max", grid.hi}, {"points", grid.points}}}});
      out << "wrote " << s.points.size() << " points to " << common.out << "\n";
      return kOk;
    }

    if (sweep_cmd->parsed()) {
      const SystemParams p = load(common);
      SweepPlan plan;
      plan.base = p;
      plan.kappa = kappa_values(range);
      plan.pipeline = pipeline_s.empty() ? Pipeline::antipt : parse_pipeline(pipeline_s);
      const EigenTrajectory traj = run_sweep(plan);
      atomic_write(common.out, trajectory_csv(traj));
      json extra{{"pipeline", to_string(plan.pipeline)},
                 {"kappa_range", {{"min", *range.lo}, {"max", *range.hi}, {"steps", range.steps}}}};
      if (traj.ep) {
        extra["kappa0_MHz"] = traj.ep->kappa0;
        out << fmt::format("kappa0 = {:.6g} MHz (bracket [{:.9g}, {:.9g}])\n", traj.ep->kappa0,
                           traj.ep->lo, traj.ep->hi);
      } else {
        out << "kappa0: no exceptional point inside the swept range\n";
      }
      write_manifest(common.out, "sweep", args, common, p, extra);
      return kOk;
    }

    if (fit_cmd->parsed()) {
      const SystemParams p = load(common);
      const Port port = parse_port(port_s);
      if (port == Port::cavity) throw UsageError("fit supports m1, m2 and combined traces");
      MeasuredSpectrum m;
      try {
        m = read_measured_csv(fs::path(data), port, db);
      } catch (const IngestError& e) {
        throw ConfigError("", std::string("data: ") + e.what());
      }
      FitResult r;
      if (free_s.empty()) {
        if (port == Port::combined) throw UsageError("phase fit needs --port m1 or m2");
        r = fit_phase(m, p);
      } else {
        std::vector<ParamId> free;
        std::stringstream ss(free_s);
        std::string name;
        while (std::getline(ss, name, ',')) {
          const auto id = param_from_name(name);
          if (!id) throw UsageError("unknown parameter in --free: " + name);
          free.push_back(*id);
        }
        r = fit_params({m}, free, p);
      }
      std::optional<EigenPair> eig;
      try {
        eig = eigvals_from_fit(r.params);
      } catch (const std::exception&) {
        // eigenvalues are optional in the report
      }
      const json report = fit_report(r, port, eig);
      out << report.dump(2) << "\n";
      if (!common.out.empty()) {
        atomic_write(common.out, report.dump(2) + "\n");
        write_manifest(common.out, "fit", args, common, p,
                       {{"data", fs::absolute(data).string()}, {"db", db}, {"seed", seed}});
      }
      return r.converged ? kOk : kNumerical;
    }

    if (val_cmd->parsed()) {
      print_diagnostics(load(common), out);
      return kOk;
    }

    if (ep_cmd->parsed()) {
      const SystemParams p = load(common);
      const Pipeline pipe = pipeline_s.empty() ? Pipeline::antipt : parse_pipeline(pipeline_s);
      const double lo = range.lo.value_or(1.0);
      const double hi = range.hi.value_or(1000.0);
      if (!(lo > 0.0) || !(hi > lo)) throw UsageError("need 0 < --kappa-min < --kappa-max");
      if (!(tol > 0.0)) throw UsageError("--tol must be > 0");
      EpEstimate ep;
      try {
        ep = locate_ep(p, lo, hi, tol, pipe);
      } catch (const NoSignChangeError& e) {
        throw NumericalError(e.what());
      }
      out << fmt::format("kappa0 = {:.6g} MHz (bracket [{:.9g}, {:.9g}], pipeline {})\n",
                         ep.kappa0, ep.lo, ep.hi, to_string(pipe));
      const double Omega = mean_detuning(p);
      if (Omega != 0.0) {
        out << fmt::format("closed form g^2/|Omega| = {:.6g} MHz\n",
                           ep_kappa(mean_coupling(p), Omega));
      }
      return kOk;
    }

    if (att_cmd->parsed()) {
      const SystemParams p = load(common);
      std::vector<double> kappas;
      if (!kappa_list.empty()) {
        std::stringstream ss(kappa_list);
        std::string item;
        while (std::getline(ss, item, ',')) {
          try {
            kappas.push_back(std::stod(item));
          } catch (const std::exception&) {
            throw UsageError("bad value in --kappas: " + item);
          }
        }
      } else {
        kappas = kappa_values(range);
      }
      AttractionOptions opt;
      opt.model = spectrum_model(pipeline_s.empty() ? Pipeline::full : parse_pipeline(pipeline_s));
      if (grid.points < 2 || !(grid.hi > grid.lo)) throw UsageError("bad probe grid");
      const double c = frame_center(p);
      opt.grid = linear_grid(c + grid.lo, c + grid.hi, grid.points);
      const auto rows = level_attraction_report(p, kappas, opt);
      atomic_write(common.out, attraction_csv(rows));
      write_manifest(common.out, "attraction", args, common, p, {{"kappas", kappas}});
      out << "wrote " << rows.size() << " rows to " << common.out << "\n";
      return kOk;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const ValidationError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}

}  // namespace antipt::cli
