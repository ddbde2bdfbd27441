#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ubound/antiperiodic.hpp"
#include "ubound/bounds.hpp"
#include "ubound/damping.hpp"
#include "ubound/forcing.hpp"
#include "ubound/integrator.hpp"
#include "ubound/properties.hpp"
#include "ubound/spectral_model.hpp"

namespace ubound {

enum class ExperimentKind { Simulate, Sweep, AntiPeriodic, Verify };

std::string_view to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(std::string_view name);

struct OperatorSpec {
  OperatorKind kind = OperatorKind::Wave1D;
  int num_modes = 8;
  double length = 3.14159265358979323846;
  std::optional<std::vector<double>> lambda;
  std::optional<int> num_quad;
};

struct ForcingSpec {
  ForcingKind kind = ForcingKind::Sinusoidal;
  ModalVector profile;  // resolved: always explicit
  double amplitude = 1.0;
  double omega = 0.0;
  double phase = 0.0;
  double beta = 1.0;
  std::optional<double> antiperiod;
  std::string csv;  // Sampled
  std::vector<ForcingSpec> parts;  // Sum
};

// Initial state of every sweep row and of a simulation.
//   rest    u = v = 0
//   static  u = amplitude * A^{-1} h(0), v = 0
//   given   (u0, v0) scaled by the amplitude
enum class InitialKind { Rest, Static, Given };

struct InitialSpec {
  InitialKind kind = InitialKind::Rest;
  ModalVector u0;
  ModalVector v0;
};

struct SimulateSpec {
  double T = 50.0;
  int observe_every = 1;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Simulate;
  OperatorSpec op;
  std::vector<DampingTerm> damping{DampingTerm{DampingFamily::AveragedH, 1.0, 2.0}};
  ForcingSpec forcing;
  // Replaces the forcing by the exact eigenmode family of the damping (anti-periodic runs).
  bool oracle_family = false;
  int oracle_mode = 1;
  InitialSpec initial;
  std::vector<double> amplitudes;
  NormKind norm_kind = NormKind::S2;
  std::vector<double> check_exponents;
  StepperConfig stepper;
  BoundConfig bound;
  ShootingConfig shooting;
  SimulateSpec simulate;
  PropertySuiteConfig properties;
  std::string output_dir = "out";
};

/// Parses and validates a config, filling every default so that the result is
/// fully resolved. Errors are ValidationError with the offending field path.
ExperimentConfig parse_config(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);

nlohmann::json load_config_file(const std::filesystem::path& path);
// Applies "a.b.c=value" to j; value is read as JSON when it parses, else as a string.
void apply_override(nlohmann::json& j, const std::string& assignment);

SpectralOperator build_operator(const OperatorSpec& spec);
DampingOp build_damping(const ExperimentConfig& cfg);
ForcingSignal build_forcing(const ForcingSpec& spec, int num_modes);

enum ExitCode { kExitOk = 0, kExitValidation = 1, kExitNumerical = 2, kExitPropertyFailure = 3 };

// Runs the configured experiment, writes its files into cfg.output_dir and a
// summary to log. Throws ValidationError / NumericalError on failure.
int run_experiment(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace ubound
