#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qbranch/asymptotics.hpp"
#include "qbranch/models.hpp"

namespace qbranch {

struct ModelConfig {
  std::string kind;  // measurement_chain | recoherence | random
  // measurement_chain / recoherence
  Complex alpha{1.0, 0.0};
  Complex beta{0.0, 0.0};
  int n_env = 1;
  double coupling = 1.0;
  std::vector<double> recording_times;
  double t_record = 0.0;
  double t_unrecord = 0.0;
  // random
  std::uint64_t model_seed = 0;
  int dim_a = 2;
  int dim_b = 2;
  double energy_scale = 1.0;
};

struct ConvergenceConfig {
  double eps_p = 1e-9;
  double eps_rho = 1e-9;
  int n_stable = 3;
};

// Parsed and validated run configuration; unknown keys are rejected during
// parsing, before any computation.
struct RunConfig {
  ModelConfig model;
  std::string decomposition_kind = "basis";
  double degeneracy_tol = 1e-8;
  std::vector<double> horizons;
  std::vector<double> sample_times;
  std::optional<std::uint64_t> seed;
  std::string output_dir = "out";
  Tolerances tolerances;
  ConvergenceConfig convergence;
};

// Parses UTF-8 JSON text; throws Error(ErrorKind::config) with a
// line-numbered message on syntax errors and a field-named message on
// semantic errors.
RunConfig parse_config(const std::string& json_text);

ModelSpec build_model(const ModelConfig& config);

// Decomposition spec for the configured kind; a basis kind inherits the
// model's recommended labels.
DecompositionSpec decomposition_from_config(const RunConfig& config, const ModelSpec& model);

struct RunOverrides {
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

struct RunResult {
  std::filesystem::path output_dir;
  std::vector<std::filesystem::path> files;
  bool converged = false;
  std::optional<std::string> realized_label;
};

// Executes the model -> branching -> asymptotics pipeline and writes
// branches.json, convergence.json, realstate_<label>.csv per final branch,
// realized.json when a seed is given, and run.log.
RunResult run(const RunConfig& config, const RunOverrides& overrides = {});

std::string library_version();

// convergence.json payload for a horizon report.
std::string horizon_report_json(const HorizonReport& report);

}  // namespace qbranch
