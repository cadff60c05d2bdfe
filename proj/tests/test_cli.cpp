#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "antipt/cli.hpp"
#include "antipt/config.hpp"
#include "antipt/csv.hpp"
#include "antipt/scattering.hpp"
#include "json.hpp"
#include "oracles.hpp"

using namespace antipt;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(ANTIPT_SOURCE_DIR) / "configs";
const std::string kMagnon = (kConfigs / "magnon_readout.json").string();
const std::string kCavity = (kConfigs / "cavity_readout.json").string();

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  static std::mt19937_64 rng(std::random_device{}());
  const fs::path dir = fs::temp_directory_path() / ("antipt_test_" + std::to_string(rng()));
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

Spectrum parse_spectrum(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  Spectrum s;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    s.points.push_back({v[0], cplx(v[1], v[2]), v[3]});
  }
  return s;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("bundled configs match the reference parameters") {
  const SystemParams m = load_config(kMagnon);
  CHECK(m.magnon1.omega == 2.7);
  CHECK(m.magnon2.omega == -2.7);
  CHECK(m.cavity.omega == 0.0);
  CHECK(m.kappa() == doctest::Approx(105.0));
  CHECK(m.kappa1() == 0.45);
  CHECK(m.kappa2() == 0.92);
  CHECK(m.gamma11() == 1.11);
  CHECK(params_hash(m) == params_hash(oracle::magnon_readout()));
  const SystemParams c = load_config(kCavity);
  CHECK(c.kappa_control == KappaControl::critical);
  CHECK(c.cavity.gamma_int == doctest::Approx(52.5));
  CHECK(c.kappa3() == doctest::Approx(52.5));
  CHECK(c.g13 == 9.77);
}

TEST_CASE("config errors carry a pointer") {
  nlohmann::json doc = nlohmann::json::parse(slurp(kMagnon));
  doc["magnon1"]["gamma_int_MHz"] = "wide";
  CHECK_THROWS_WITH_AS(params_from_json(doc), doctest::Contains("/magnon1/gamma_int_MHz"),
                       ConfigError);
  doc = nlohmann::json::parse(slurp(kMagnon));
  doc["cavity"]["ports"][2]["phase_rad"] = 0.1;
  CHECK_THROWS_WITH_AS(params_from_json(doc), doctest::Contains("/cavity/ports/2/phase_rad"),
                       ConfigError);
  doc = nlohmann::json::parse(slurp(kMagnon));
  doc["g31_MHz"] = 1.0;
  CHECK_THROWS_WITH_AS(params_from_json(doc), doctest::Contains("/g31_MHz"), ConfigError);
  doc = nlohmann::json::parse(slurp(kMagnon));
  doc.erase("Omega_MHz");
  CHECK_THROWS_WITH_AS(params_from_json(doc), doctest::Contains("/magnon1/omega_MHz"),
                       ConfigError);
}

TEST_CASE("config snapshot round trip") {
  std::mt19937_64 rng(8);
  for (int k = 0; k < 20; ++k) {
    const SystemParams p = oracle::random_params(rng);
    const SystemParams q = params_from_json(params_to_json(p));
    CHECK(params_hash(q) == params_hash(p));
  }
}

TEST_CASE("absolute frequencies from a bias field") {
  nlohmann::json doc = nlohmann::json::parse(slurp(kMagnon));
  doc["frame_center_GHz"] = 8.4;
  doc["magnon1"]["bias"] = {{"B_T", 0.3}, {"gamma0_GHz_per_T", 28.0}};
  doc["magnon2"]["omega_GHz"] = 8.3973;
  const SystemParams p = params_from_json(doc);
  CHECK(p.magnon1.omega == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(p.magnon2.omega == doctest::Approx(-2.7).epsilon(1e-9));
  CHECK(p.frame_center_MHz == doctest::Approx(8400.0));
}

TEST_CASE("spectrum command writes the CSV and a manifest") {
  const fs::path out = scratch("m1.csv");
  const Run r = run({"spectrum", "--config", kMagnon, "--port", "m1", "--kappa", "105",
                     "--out", out.string()});
  REQUIRE(r.code == 0);
  const std::string text = slurp(out);
  CHECK(text.rfind("omega_p_MHz,re_t,im_t,mag,mag_dB\n", 0) == 0);
  const Spectrum s = parse_spectrum(out);
  CHECK(s.points.size() == 2001);
  const DipReport rep = dip_analysis(s);
  REQUIRE(!rep.dips.empty());
  CHECK(std::abs(rep.dips[0].frequency - 2.7) < 0.3);
  const auto manifest = nlohmann::json::parse(slurp(out.string() + ".manifest.json"));
  CHECK(manifest["subcommand"] == "spectrum");
  CHECK(manifest["params"]["kappa_MHz"].get<double>() == doctest::Approx(105.0));
  CHECK(manifest.contains("timestamp"));
  CHECK(manifest.contains("version"));
}

TEST_CASE("combined spectrum shows both magnon dips") {
  const fs::path out = scratch("comb.csv");
  REQUIRE(run({"spectrum", "--config", kMagnon, "--port", "combined", "--out", out.string()})
              .code == 0);
  DipOptions opt;
  opt.window = std::make_pair(-5.4, 5.4);
  const DipReport rep = dip_analysis(parse_spectrum(out), opt);
  REQUIRE(rep.dips.size() == 2);
  CHECK(std::abs(rep.dips[0].frequency + 2.7) < 0.5);
  CHECK(std::abs(rep.dips[1].frequency - 2.7) < 0.5);
}

TEST_CASE("combined equals m1 for a mirror-symmetric config") {
  nlohmann::json doc = nlohmann::json::parse(slurp(kMagnon));
  doc["Omega_MHz"] = 0.0;
  doc["g23_MHz"] = 6.65;
  doc["cavity"]["ports"][1]["rate_MHz"] = 0.45;
  const fs::path cfg = scratch("sym.json");
  write(cfg, doc.dump());
  const fs::path a = scratch("a.csv"), b = scratch("b.csv");
  REQUIRE(run({"spectrum", "--config", cfg.string(), "--port", "m1", "--out", a.string()})
              .code == 0);
  REQUIRE(run({"spectrum", "--config", cfg.string(), "--port", "combined", "--out",
               b.string()})
              .code == 0);
  CHECK(slurp(a) == slurp(b));
}

TEST_CASE("malformed config leaves no output behind") {
  const fs::path cfg = scratch("broken.json");
  write(cfg, "{\"magnon1\": {\"gamma_int_MHz\": 1.0,");
  const fs::path out = scratch("never.csv");
  const Run r = run({"spectrum", "--config", cfg.string(), "--out", out.string()});
  CHECK(r.code == cli::kConfig);
  CHECK(r.err.find("malformed JSON") != std::string::npos);
  CHECK_FALSE(fs::exists(out));
  CHECK_FALSE(fs::exists(out.string() + ".manifest.json"));

  write(cfg, R"({"Omega_MHz": 2.7, "magnon1": {"gamma_int_MHz": -1},
                 "magnon2": {"gamma_int_MHz": 1}, "cavity": {"gamma_int_MHz": 50},
                 "g13_MHz": 1, "g23_MHz": 1})");
  CHECK(run({"spectrum", "--config", cfg.string(), "--out", out.string()}).code ==
        cli::kConfig);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("outputs are byte-identical across runs") {
  const fs::path a = scratch("x.csv"), b = scratch("y.csv");
  for (const auto& p : {a, b}) {
    REQUIRE(run({"spectrum", "--config", kMagnon, "--port", "m2", "--noise", "0.01", "--seed",
                 "4", "--out", p.string()})
                .code == 0);
  }
  CHECK(slurp(a) == slurp(b));
  const fs::path c = scratch("s1.csv"), d = scratch("s2.csv");
  for (const auto& p : {c, d}) {
    REQUIRE(run({"sweep", "--config", kMagnon, "--kappa-min", "8", "--kappa-max", "105",
                 "--out", p.string()})
                .code == 0);
  }
  CHECK(slurp(c) == slurp(d));
}

TEST_CASE("a manifest reproduces its run") {
  const fs::path out = scratch("orig.csv");
  REQUIRE(run({"spectrum", "--config", kMagnon, "--port", "m2", "--kappa", "40", "--grid-min",
               "-10", "--grid-max", "10", "--grid-points", "301", "--out", out.string()})
              .code == 0);
  const auto m = nlohmann::json::parse(slurp(out.string() + ".manifest.json"));
  const fs::path cfg = scratch("snapshot.json");
  write(cfg, m["params"].dump());
  const fs::path again = scratch("again.csv");
  REQUIRE(run({"spectrum", "--config", cfg.string(), "--port", m["port"].get<std::string>(),
               "--grid-min", std::to_string(m["grid"]["min"].get<double>()), "--grid-max",
               std::to_string(m["grid"]["max"].get<double>()), "--grid-points",
               std::to_string(m["grid"]["points"].get<int>()), "--out", again.string()})
              .code == 0);
  CHECK(slurp(out) == slurp(again));
}

TEST_CASE("sweep prints the exceptional point") {
  const fs::path out = scratch("traj.csv");
  Run r = run({"sweep", "--config", kMagnon, "--kappa-min", "8", "--kappa-max", "105",
               "--kappa-steps", "98", "--out", out.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("kappa0 = 15.79") != std::string::npos);
  CHECK(slurp(out).rfind(
            "kappa_MHz,re_lambda_plus,im_lambda_plus,re_lambda_minus,im_lambda_minus,regime\n",
            0) == 0);
  r = run({"sweep", "--config", kCavity, "--kappa-min", "10", "--kappa-max", "105",
           "--out", out.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("kappa0 = 34.776") != std::string::npos);
  r = run({"sweep", "--config", kMagnon, "--kappa-min", "50", "--kappa-max", "20",
           "--out", scratch("none.csv").string()});
  CHECK(r.code == cli::kUsage);
}

TEST_CASE("ep command") {
  Run r = run({"ep", "--config", kMagnon, "--kappa-min", "5", "--kappa-max", "50"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("kappa0 = 15.79") != std::string::npos);
  r = run({"ep", "--config", kMagnon, "--kappa-min", "20", "--kappa-max", "50"});
  CHECK(r.code == cli::kNumerical);
}

TEST_CASE("fit round trip through files") {
  nlohmann::json doc = nlohmann::json::parse(slurp(kMagnon));
  doc["cavity"]["ports"][0]["phase_rad"] = 0.1 * kPi;
  const fs::path truth = scratch("truth.json");
  write(truth, doc.dump());
  const fs::path data = scratch("data.csv");
  REQUIRE(run({"spectrum", "--config", truth.string(), "--port", "m1", "--out", data.string()})
              .code == 0);

  const fs::path report = scratch("fit.json");
  Run r = run({"fit", "--config", kMagnon, "--data", data.string(), "--port", "m1", "--out",
               report.string()});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(slurp(report));
  CHECK(j["converged"].get<bool>());
  CHECK(j["values"][0].get<double>() == doctest::Approx(0.1 * kPi).epsilon(1e-6));

  // self-consistent data and start: residual at CSV rounding level
  r = run({"fit", "--config", truth.string(), "--data", data.string(), "--port", "m1",
           "--free", "phi13"});
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["residual"].get<double>() < 1e-10);

  // --db reads the dB column and lands on the same phase
  r = run({"fit", "--config", kMagnon, "--data", data.string(), "--port", "m1", "--db"});
  REQUIRE(r.code == 0);
  CHECK(std::abs(nlohmann::json::parse(r.out)["values"][0].get<double>() -
                 j["values"][0].get<double>()) < 1e-6);
}

TEST_CASE("fit ingestion names the offending row") {
  const fs::path data = scratch("bad.csv");
  write(data, "freq_MHz,mag\n-1.0,0.9\n0.0,0.5\n-0.5,0.8\n");
  const Run r = run({"fit", "--config", kMagnon, "--data", data.string()});
  CHECK(r.code == cli::kConfig);
  CHECK(r.err.find("row 3") != std::string::npos);
  write(data, "freq,mag\n0,1\n");
  CHECK(run({"fit", "--config", kMagnon, "--data", data.string()}).code == cli::kConfig);
  CHECK(run({"fit", "--config", kMagnon, "--data", data.string(), "--free", "nope"}).code ==
        cli::kConfig);
}

TEST_CASE("validate reports the approximation margins") {
  Run r = run({"validate", "--config", kMagnon});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("asymmetry g13 vs g23") != std::string::npos);
  CHECK(r.out.find("3.7%") != std::string::npos);
  CHECK(r.out.find("WARNING") == std::string::npos);
  CHECK(r.out.find("kappa0 = g^2/|Omega| = 15.79") != std::string::npos);

  nlohmann::json doc = nlohmann::json::parse(slurp(kMagnon));
  doc["g23_MHz"] = 6.65;
  doc["cavity"]["ports"][1]["rate_MHz"] = 0.45;
  const fs::path sym = scratch("sym.json");
  write(sym, doc.dump());
  for (const auto& d : cli::diagnose(load_config(sym))) {
    if (d.name.rfind("asymmetry", 0) == 0) CHECK(d.value == 0.0);
  }

  doc = nlohmann::json::parse(slurp(kMagnon));
  doc["kappa_MHz"] = 2 * 2.22;
  doc["cavity"]["gamma_int_MHz"] = 0.5;
  doc["cavity"]["ports"] = {{{"rate_MHz", 0.45}}, {{"rate_MHz", 0.92}}, {{"rate_MHz", 0.0}}};
  const fs::path weak = scratch("weak.json");
  write(weak, doc.dump());
  r = run({"validate", "--config", weak.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("WARNING: weak elimination") != std::string::npos);
}

TEST_CASE("attraction report command") {
  const fs::path out = scratch("att.csv");
  const Run r = run({"attraction", "--config", kMagnon, "--kappas", "105,52,26,16,8", "--out",
                     out.string()});
  REQUIRE(r.code == 0);
  const std::string text = slurp(out);
  CHECK(text.rfind("kappa_MHz,separation_MHz,mean_fwhm_MHz,resolvable,regime\n", 0) == 0);
  CHECK(text.find("105,") != std::string::npos);
}

TEST_CASE("usage errors") {
  CHECK(run({}).code == cli::kUsage);
  CHECK(run({"spectrum", "--config", kMagnon}).code == cli::kUsage);
  CHECK(run({"spectrum", "--config", kMagnon, "--port", "m3", "--out", "x.csv"}).code ==
        cli::kUsage);
  CHECK(run({"bogus"}).code == cli::kUsage);
  CHECK(run({"--help"}).code == cli::kOk);
  CHECK(run({"spectrum", "--config", kCavity, "--port", "m1", "--out",
             scratch("no.csv").string()})
            .code == cli::kConfig);
}

}  // TEST_SUITE
