#pragma once

// Flat `key = value` run configuration.
//
//   # reference device
//   nu_a    = 5.5 GHz
//   gamma_a = 11 MHz
//   eps_over_ec = 0.1, 0.5, 0.9
//
// Frequencies accept Hz/kHz/MHz/GHz suffixes, times s/ms/us/ns. Unknown and
// duplicate keys are errors.

#include "pdc/dynamics.hpp"
#include "pdc/model.hpp"
#include "pdc/steady.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pdc {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& message)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

enum class Scenario { params, dynamics, scan, validate };
Scenario parse_scenario(std::string_view name);
const char* scenario_name(Scenario s);

struct RunConfig {
  SystemParams params;
  std::optional<Scenario> scenario;
  double factor = 10.0;
  std::uint64_t seed = 42;
  std::optional<std::string> output;

  // dynamics
  HilbertSpec cutoffs{1, 2};
  std::optional<double> t_end;  ///< seconds; default four transfer times
  Index n_samples = 2001;
  DynamicsMethod dynamics_method = DynamicsMethod::sector;

  // scan
  std::vector<double> eps;          ///< Hz
  std::vector<double> eps_over_ec;  ///< used when eps is empty
  std::vector<Method> methods{Method::linearized};
  Index n_traj = 10000;
  double sde_t_max = 0.0;
  double sde_dt = 0.0;
  bool sde_refine = false;
  std::optional<HilbertSpec> lindblad_cutoffs;
};

/// Parses and validates; throws ConfigError carrying the offending line.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

/// "5.5 GHz" -> 5.5e9. Throws invalid-argument on malformed input.
double parse_frequency(std::string_view token);
double parse_time(std::string_view token);

}  // namespace pdc
