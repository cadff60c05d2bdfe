#include "doctest.h"

#include <numeric>

#include "antipt/sweep.hpp"
#include "oracles.hpp"

using namespace antipt;

namespace {

std::vector<double> range(double lo, double hi, double step) {
  std::vector<double> v;
  for (double x = lo; x <= hi + 1e-9; x += step) v.push_back(x);
  return v;
}

}  // namespace

TEST_SUITE("sweep") {

TEST_CASE("anti-PT trajectory across the exceptional point") {
  SweepPlan plan;
  plan.base = oracle::magnon_readout();
  plan.kappa = range(8.0, 105.0, 0.5);
  const EigenTrajectory t = run_sweep(plan);
  REQUIRE(t.kappa.size() == plan.kappa.size());
  REQUIRE(t.ep.has_value());
  CHECK(t.ep->kappa0 == doctest::Approx(6.53 * 6.53 / 2.7).epsilon(1e-8));
  double last_split = 0.0;
  for (std::size_t k = 0; k < t.kappa.size(); ++k) {
    const auto& e = t.branches[k];
    const double split = std::abs(e.plus.real() - e.minus.real());
    if (t.kappa[k] < 15.7) {
      CHECK(split == 0.0);
      CHECK(std::abs(e.plus.imag() - e.minus.imag()) > 0.0);
      CHECK(t.regimes[k].regime == Regime::symmetric);
    } else if (t.kappa[k] > 15.9) {
      CHECK(split > last_split);
      CHECK(e.plus.imag() == doctest::Approx(e.minus.imag()).epsilon(1e-12));
      CHECK(t.regimes[k].regime == Regime::broken);
      last_split = split;
    }
  }
  CHECK(last_split / 2 == doctest::Approx(2.7).epsilon(0.01));
}

TEST_CASE("single point sweep") {
  SweepPlan plan;
  plan.base = oracle::magnon_readout();
  plan.kappa = {40.0};
  const EigenTrajectory t = run_sweep(plan);
  CHECK(t.kappa.size() == 1);
  CHECK_FALSE(t.ep.has_value());
}

TEST_CASE("sweep plans must be monotone and positive") {
  SweepPlan plan;
  plan.base = oracle::magnon_readout();
  plan.kappa = {};
  CHECK_THROWS_AS(run_sweep(plan), std::invalid_argument);
  plan.kappa = {10.0, 20.0, 15.0};
  CHECK_THROWS_AS(run_sweep(plan), std::invalid_argument);
  plan.kappa = {30.0, 20.0, 10.0};
  CHECK(run_sweep(plan).ep.has_value());
}

TEST_CASE("locate_ep on both readout configurations") {
  const EpEstimate m = locate_ep(oracle::magnon_readout(), 5.0, 50.0, 0.01);
  CHECK(std::abs(m.kappa0 - 15.8) < 0.05);
  CHECK(m.hi - m.lo <= 0.01);
  CHECK(std::abs(m.kappa0 - ep_kappa(6.53, 2.7)) <= 0.01);
  const EpEstimate c = locate_ep(oracle::cavity_readout(), 10.0, 80.0, 0.01);
  CHECK(std::abs(c.kappa0 - 34.8) < 0.1);
  CHECK_THROWS_AS(locate_ep(oracle::magnon_readout(), 20.0, 50.0, 0.01), NoSignChangeError);
  CHECK_THROWS_AS(locate_ep(oracle::magnon_readout(), 50.0, 20.0, 0.01), std::invalid_argument);
}

TEST_CASE("exceptional point of the other pipelines lies nearby") {
  const EpEstimate g = locate_ep(oracle::magnon_readout(), 5.0, 50.0, 1e-6,
                                 Pipeline::general_effective);
  // detuning corrections in g^2/(kappa - i Delta) push it up by about 2 MHz
  CHECK(g.kappa0 > 15.79);
  CHECK(g.kappa0 < 20.0);
  // the full model hybridises with the cavity once kappa ~ 2g, so its magnon
  // pair has no clean crossing there; far above it is in the broken phase
  for (double kappa : {50.0, 105.0, 400.0}) {
    const SystemParams p = with_total_kappa(oracle::magnon_readout(), kappa);
    CHECK(pipeline_regime(p, Pipeline::full).regime == Regime::broken);
    CHECK(pipeline_regime(p, Pipeline::general_effective).regime == Regime::broken);
  }
}

TEST_CASE("branch continuity along fine sweeps") {
  for (Pipeline pipe : {Pipeline::antipt, Pipeline::general_effective, Pipeline::full}) {
    SweepPlan plan;
    plan.base = oracle::magnon_readout();
    plan.kappa = range(6.0, 120.0, 0.25);
    plan.pipeline = pipe;
    const EigenTrajectory t = run_sweep(plan);
    const double kappa0 = t.ep ? t.ep->kappa0 : 15.79;
    for (std::size_t k = 2; k < t.kappa.size(); ++k) {
      if (std::abs(t.kappa[k] - kappa0) < 0.5 || std::abs(t.kappa[k - 1] - kappa0) < 0.5 ||
          std::abs(t.kappa[k - 2] - kappa0) < 0.5) {
        continue;
      }
      for (int branch = 0; branch < 2; ++branch) {
        auto at = [&](std::size_t i) {
          return branch == 0 ? t.branches[i].plus : t.branches[i].minus;
        };
        const cplx predicted = 2.0 * at(k - 1) - at(k - 2);
        const double jump = std::abs(at(k) - at(k - 1));
        const double secant = std::abs(predicted - at(k - 1));
        CHECK(jump <= 5.0 * secant + 1e-9);
      }
    }
  }
}

TEST_CASE("square-root scaling near the exceptional point") {
  const double Omega = 2.7;
  std::vector<double> x, y;
  for (double r = 0.80; r <= 0.99 + 1e-12; r += 0.01) {
    const double Gamma = r * Omega;
    const EigenPair e = eigvals_antipt(Omega, Gamma, 2.22);
    const double split = e.plus.real() - e.minus.real();
    x.push_back(Gamma * Gamma);
    y.push_back(split * split);
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
  }
  const double r2 = sxy * sxy / (sxx * syy);
  CHECK(r2 > 0.999);
  CHECK(sxy / sxx == doctest::Approx(-4.0));
}

TEST_CASE("regime sequence is contiguous along a monotone sweep") {
  SweepPlan plan;
  plan.base = oracle::magnon_readout();
  plan.kappa = range(5.0, 100.0, 0.1);
  const EigenTrajectory t = run_sweep(plan);
  int changes = 0;
  for (std::size_t k = 1; k < t.regimes.size(); ++k) {
    const Regime a = t.regimes[k - 1].regime, b = t.regimes[k].regime;
    if (a != b) {
      ++changes;
      CHECK((a == Regime::symmetric || a == Regime::exceptional));
      CHECK((b == Regime::broken || b == Regime::exceptional));
    }
  }
  CHECK(changes >= 1);
  CHECK(changes <= 2);
  CHECK(t.regimes.front().regime == Regime::symmetric);
  CHECK(t.regimes.back().regime == Regime::broken);
}

TEST_CASE("anti-PT and general pipelines agree at large kappa") {
  double previous = 1.0;
  for (double kappa : {50.0, 70.0, 105.0, 150.0, 300.0}) {
    const SystemParams p = with_total_kappa(oracle::magnon_readout(), kappa);
    const EigenPair a = pipeline_eigvals(p, Pipeline::antipt);
    const EigenPair g = pipeline_eigvals(p, Pipeline::general_effective);
    const double err = std::max(std::abs(a.plus - g.plus) / std::abs(g.plus),
                                std::abs(a.minus - g.minus) / std::abs(g.minus));
    CHECK(err < 0.05);
    CHECK(err < previous);
    previous = err;
  }
}

TEST_CASE("magnon branches of the full model exclude the cavity root") {
  const SystemParams p = oracle::magnon_readout();
  const EigenPair e = magnon_branch_eigvals(p);
  const auto all = oracle::eig3_frequencies(oracle::flatten(p));
  // the dropped root is the strongly damped one, near -i kappa
  cplx dropped = all[0];
  for (const cplx& z : all) {
    if (z.imag() < dropped.imag()) dropped = z;
  }
  CHECK(dropped.imag() < -90.0);
  CHECK(std::abs(e.plus - dropped) > 50.0);
  CHECK(std::abs(e.minus - dropped) > 50.0);
}

TEST_CASE("level-attraction report on the magnon readout") {
  const std::vector<double> kappas{105.0, 52.0, 26.0, 16.0, 8.0};
  const auto rows = level_attraction_report(oracle::magnon_readout(), kappas);
  REQUIRE(rows.size() == kappas.size());
  for (std::size_t k = 1; k < rows.size(); ++k) {
    CHECK(rows[k].separation <= rows[k - 1].separation + 1e-12);
  }
  CHECK(rows.front().resolvable);
  CHECK(rows.front().regime == Regime::broken);
  CHECK_FALSE(rows.back().resolvable);
  CHECK(rows.back().regime == Regime::symmetric);
}

TEST_CASE("no attraction without coupling") {
  SystemParams p = oracle::magnon_readout();
  p.g13 = p.g23 = 0.0;
  p.cavity.gamma_ports[0] = p.cavity.gamma_ports[1] = 0.0;
  for (const auto& r : level_attraction_report(p, {105.0, 52.0, 26.0, 16.0, 8.0})) {
    CHECK(r.separation == doctest::Approx(5.4).epsilon(1e-9));
  }
  // the direct antenna-to-cavity path only adds a background that matters at small kappa
  p.cavity.gamma_ports[0] = 0.45;
  p.cavity.gamma_ports[1] = 0.92;
  for (const auto& r : level_attraction_report(p, {105.0, 52.0})) {
    CHECK(r.separation == doctest::Approx(5.4).epsilon(1e-9));
  }
}

TEST_CASE("full and effective spectra give matching separations") {
  AttractionOptions full, eff;
  eff.model = SpectrumModel::general_effective;
  const auto a = level_attraction_report(oracle::magnon_readout(), {105.0}, full);
  const auto b = level_attraction_report(oracle::magnon_readout(), {105.0}, eff);
  CHECK(std::abs(a[0].separation / b[0].separation - 1.0) < 0.03);
}

}  // TEST_SUITE
