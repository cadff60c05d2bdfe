#include "antipt/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace antipt {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    std::size_t start = 0;
    while (start < cell.size() && cell[start] == ' ') ++start;
    out.push_back(cell.substr(start));
  }
  return out;
}

int column(const std::vector<std::string>& header, std::initializer_list<const char*> names) {
  for (const char* n : names) {
    for (std::size_t k = 0; k < header.size(); ++k) {
      if (header[k] == n) return static_cast<int>(k);
    }
  }
  return -1;
}

}  // namespace

std::string format_number(double v) {
  if (v == 0.0) return "0";  // folds -0
  return fmt::format("{:.12g}", v);
}

std::string spectrum_csv(const Spectrum& spec) {
  std::string out = "omega_p_MHz,re_t,im_t,mag,mag_dB\n";
  for (const auto& p : spec.points) {
    out += fmt::format("{},{},{},{},{}\n", format_number(p.omega_p), format_number(p.t.real()),
                       format_number(p.t.imag()), format_number(p.magnitude),
                       format_number(to_db(p.magnitude)));
  }
  return out;
}

std::string trajectory_csv(const EigenTrajectory& traj) {
  std::string out =
      "kappa_MHz,re_lambda_plus,im_lambda_plus,re_lambda_minus,im_lambda_minus,regime\n";
  for (std::size_t k = 0; k < traj.kappa.size(); ++k) {
    const auto& e = traj.branches[k];
    out += fmt::format("{},{},{},{},{},{}\n", format_number(traj.kappa[k]),
                       format_number(e.plus.real()), format_number(e.plus.imag()),
                       format_number(e.minus.real()), format_number(e.minus.imag()),
                       to_string(traj.regimes[k].regime));
  }
  return out;
}

std::string attraction_csv(const std::vector<AttractionRow>& rows) {
  std::string out = "kappa_MHz,separation_MHz,mean_fwhm_MHz,resolvable,regime\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{}\n", format_number(r.kappa), format_number(r.separation),
                       format_number(r.mean_fwhm), r.resolvable ? "true" : "false",
                       to_string(r.regime));
  }
  return out;
}

MeasuredSpectrum read_measured_csv(std::istream& in, Port port, bool db) {
  std::string line;
  if (!std::getline(in, line)) throw IngestError("data file is empty");
  const auto header = split(line);
  const int fcol = column(header, {"freq_MHz", "omega_p_MHz"});
  const int mcol = db ? column(header, {"mag_dB", "mag"}) : column(header, {"mag"});
  if (fcol < 0) throw IngestError("header lacks a freq_MHz column");
  if (mcol < 0) throw IngestError(db ? "header lacks a mag_dB or mag column"
                                     : "header lacks a mag column");

  MeasuredSpectrum out;
  out.port = port;
  out.scale = db ? MagnitudeScale::dB : MagnitudeScale::linear;
  std::size_t row = 0;
  auto parse = [&](const std::string& text, const char* what) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) {
      throw IngestError(fmt::format("row {}: cannot parse {} '{}'", row, what, text));
    }
    return v;
  };
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++row;
    const auto cells = split(line);
    if (static_cast<int>(cells.size()) <= std::max(fcol, mcol)) {
      throw IngestError(fmt::format("row {}: too few columns", row));
    }
    const double f = parse(cells[static_cast<std::size_t>(fcol)], "frequency");
    const double m = parse(cells[static_cast<std::size_t>(mcol)], "magnitude");
    if (!out.freq.empty() && !(f > out.freq.back())) {
      throw IngestError(fmt::format("row {}: frequency {} is not above the previous row", row,
                                    format_number(f)));
    }
    if (!db && m < 0.0) throw IngestError(fmt::format("row {}: negative magnitude", row));
    out.freq.push_back(f);
    out.mag.push_back(m);
  }
  if (out.freq.empty()) throw IngestError("data file has no rows");
  return out;
}

MeasuredSpectrum read_measured_csv(const std::filesystem::path& path, Port port, bool db) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open data file " + path.string());
  return read_measured_csv(in, port, db);
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  std::filesystem::create_directories(dir);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw std::runtime_error("write failed for " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace antipt
