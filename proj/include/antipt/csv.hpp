#pragma once

// CSV emission (12 significant digits, fixed column order) and ingestion of
// measured reflection traces.

#include <filesystem>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

#include "antipt/fit.hpp"
#include "antipt/scattering.hpp"
#include "antipt/sweep.hpp"

namespace antipt {

class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string format_number(double v);

std::string spectrum_csv(const Spectrum& spec);
std::string trajectory_csv(const EigenTrajectory& traj);
std::string attraction_csv(const std::vector<AttractionRow>& rows);

// Header must contain freq_MHz (or omega_p_MHz) and mag (or mag_dB when
// db is set). Errors name the 1-based data row.
MeasuredSpectrum read_measured_csv(std::istream& in, Port port, bool db);
MeasuredSpectrum read_measured_csv(const std::filesystem::path& path, Port port, bool db);

// Writes to a sibling temporary file and renames it into place, so the
// target only ever holds complete content.
void atomic_write(const std::filesystem::path& path, const std::string& content);

}  // namespace antipt
