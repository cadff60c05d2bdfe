#pragma once

// JSON configuration files <-> SystemParams.
//
// Frequencies are relative to the rotating-frame centre unless the file sets
// frame_center_GHz, in which case omega_GHz (or a bias block) may be used for
// absolute mode frequencies. Top-level Omega_MHz supplies the default
// omega1 = +Omega, omega2 = -Omega, omega3 = 0.

#include <filesystem>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "antipt/model.hpp"

namespace antipt {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string pointer, const std::string& message)
      : std::runtime_error((pointer.empty() ? std::string("/") : pointer) + ": " + message),
        pointer_(std::move(pointer)) {}
  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

SystemParams params_from_json(const nlohmann::json& doc);

// Fully resolved snapshot; params_from_json(params_to_json(p)) reproduces p.
nlohmann::json params_to_json(const SystemParams& params);

// Reads, parses and validates a file; every failure is a ConfigError.
SystemParams load_config(const std::filesystem::path& path);

KappaControl kappa_control_from_string(const std::string& text);

}  // namespace antipt
