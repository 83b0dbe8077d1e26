#include "qbranch/runner.hpp"

#include <Eigen/Core>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include <json.hpp>

namespace qbranch {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void config_error(const std::string& message) {
  throw Error(ErrorKind::config, message);
}

void reject_unknown_keys(const json& obj, const std::string& where,
                         const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) {
      config_error(where + ": unknown key '" + key + "'");
    }
  }
}

double require_number(const json& obj, const std::string& where, const std::string& key) {
  if (!obj.contains(key)) config_error(where + ": missing required key '" + key + "'");
  if (!obj[key].is_number()) config_error(where + "." + key + ": expected a number");
  return obj[key].get<double>();
}

int require_int(const json& obj, const std::string& where, const std::string& key) {
  if (!obj.contains(key)) config_error(where + ": missing required key '" + key + "'");
  if (!obj[key].is_number_integer()) config_error(where + "." + key + ": expected an integer");
  return obj[key].get<int>();
}

Complex read_complex(const json& value, const std::string& where) {
  if (value.is_number()) return Complex(value.get<double>(), 0.0);
  if (value.is_array() && value.size() == 2 && value[0].is_number() && value[1].is_number()) {
    return Complex(value[0].get<double>(), value[1].get<double>());
  }
  config_error(where + ": expected a number or a [re, im] pair");
}

std::vector<double> read_number_list(const json& value, const std::string& where) {
  if (!value.is_array()) config_error(where + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& item : value) {
    if (!item.is_number()) config_error(where + ": expected an array of numbers");
    out.push_back(item.get<double>());
  }
  return out;
}

ModelConfig parse_model(const json& obj) {
  if (!obj.is_object()) config_error("model: expected an object");
  if (!obj.contains("kind") || !obj["kind"].is_string()) {
    config_error("model: missing string key 'kind'");
  }
  ModelConfig model;
  model.kind = obj["kind"].get<std::string>();
  if (model.kind == "measurement_chain") {
    reject_unknown_keys(obj, "model",
                        {"kind", "alpha", "beta", "n_env", "coupling", "recording_times"});
    if (!obj.contains("alpha") || !obj.contains("beta")) {
      config_error("model: measurement_chain requires 'alpha' and 'beta'");
    }
    model.alpha = read_complex(obj["alpha"], "model.alpha");
    model.beta = read_complex(obj["beta"], "model.beta");
    model.n_env = require_int(obj, "model", "n_env");
    model.coupling = require_number(obj, "model", "coupling");
    if (!obj.contains("recording_times")) {
      config_error("model: missing required key 'recording_times'");
    }
    model.recording_times = read_number_list(obj["recording_times"], "model.recording_times");
  } else if (model.kind == "recoherence") {
    reject_unknown_keys(obj, "model",
                        {"kind", "alpha", "beta", "coupling", "t_record", "t_unrecord"});
    if (!obj.contains("alpha") || !obj.contains("beta")) {
      config_error("model: recoherence requires 'alpha' and 'beta'");
    }
    model.alpha = read_complex(obj["alpha"], "model.alpha");
    model.beta = read_complex(obj["beta"], "model.beta");
    model.coupling = require_number(obj, "model", "coupling");
    model.t_record = require_number(obj, "model", "t_record");
    model.t_unrecord = require_number(obj, "model", "t_unrecord");
  } else if (model.kind == "random") {
    reject_unknown_keys(obj, "model", {"kind", "seed", "dim_a", "dim_b", "energy_scale"});
    if (!obj.contains("seed") || !obj["seed"].is_number_unsigned()) {
      config_error("model: random requires an unsigned 'seed'");
    }
    model.model_seed = obj["seed"].get<std::uint64_t>();
    model.dim_a = require_int(obj, "model", "dim_a");
    model.dim_b = require_int(obj, "model", "dim_b");
    model.energy_scale = require_number(obj, "model", "energy_scale");
  } else {
    config_error("model.kind: unknown kind '" + model.kind +
                 "' (allowed: measurement_chain, recoherence, random)");
  }
  return model;
}

Tolerances parse_tolerances(const json& obj) {
  if (!obj.is_object()) config_error("tolerances: expected an object");
  Tolerances tol;
  const std::set<std::string> allowed = {
      "hermiticity",     "projector",          "unit_norm",
      "density",         "unitarity",          "branch_floor",
      "schmidt_degeneracy", "schmidt_zero",    "matching_ambiguity",
      "sampling_norm"};
  reject_unknown_keys(obj, "tolerances", allowed);
  auto get = [&](const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) config_error(std::string("tolerances.") + key + ": expected a number");
    const double v = obj[key].get<double>();
    if (!(v > 0.0)) config_error(std::string("tolerances.") + key + ": must be > 0");
    return v;
  };
  tol.hermiticity = get("hermiticity", tol.hermiticity);
  tol.projector = get("projector", tol.projector);
  tol.unit_norm = get("unit_norm", tol.unit_norm);
  tol.density = get("density", tol.density);
  tol.unitarity = get("unitarity", tol.unitarity);
  tol.branch_floor = get("branch_floor", tol.branch_floor);
  tol.schmidt_degeneracy = get("schmidt_degeneracy", tol.schmidt_degeneracy);
  tol.schmidt_zero = get("schmidt_zero", tol.schmidt_zero);
  tol.matching_ambiguity = get("matching_ambiguity", tol.matching_ambiguity);
  tol.sampling_norm = get("sampling_norm", tol.sampling_norm);
  return tol;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    // nlohmann reports "parse error at line L, column C: ..."
    config_error(e.what());
  }
  if (!doc.is_object()) config_error("config: top level must be a JSON object");
  reject_unknown_keys(doc, "config",
                      {"schema_version", "model", "decomposition", "horizons",
                       "sample_times", "seed", "output_dir", "tolerances", "convergence"});

  if (doc.contains("schema_version")) {
    if (!doc["schema_version"].is_number_integer() || doc["schema_version"].get<int>() != 1) {
      config_error("schema_version: this build reads schema_version 1");
    }
  }

  RunConfig config;
  if (!doc.contains("model")) config_error("config: missing required key 'model'");
  config.model = parse_model(doc["model"]);

  if (!doc.contains("decomposition") || !doc["decomposition"].is_object()) {
    config_error("config: missing object key 'decomposition'");
  }
  const json& dec = doc["decomposition"];
  reject_unknown_keys(dec, "decomposition", {"kind", "degeneracy_tol"});
  if (!dec.contains("kind") || !dec["kind"].is_string()) {
    config_error("decomposition: missing string key 'kind'");
  }
  config.decomposition_kind = dec["kind"].get<std::string>();
  if (config.decomposition_kind != "basis" && config.decomposition_kind != "fourier" &&
      config.decomposition_kind != "schmidt") {
    config_error("decomposition.kind: unknown kind '" + config.decomposition_kind +
                 "' (allowed: basis, fourier, schmidt)");
  }
  if (dec.contains("degeneracy_tol")) {
    if (!dec["degeneracy_tol"].is_number()) {
      config_error("decomposition.degeneracy_tol: expected a number");
    }
    config.degeneracy_tol = dec["degeneracy_tol"].get<double>();
    if (!(config.degeneracy_tol > 0.0)) {
      config_error("decomposition.degeneracy_tol: must be > 0");
    }
  }

  if (!doc.contains("horizons")) config_error("config: missing required key 'horizons'");
  config.horizons = read_number_list(doc["horizons"], "horizons");
  if (config.horizons.empty()) config_error("horizons: must be nonempty");
  for (std::size_t i = 0; i < config.horizons.size(); ++i) {
    if (config.horizons[i] <= 0.0) config_error("horizons: entries must be > 0");
    if (i > 0 && config.horizons[i] <= config.horizons[i - 1]) {
      config_error("horizons: must be strictly increasing");
    }
  }

  if (!doc.contains("sample_times")) config_error("config: missing required key 'sample_times'");
  config.sample_times = read_number_list(doc["sample_times"], "sample_times");
  for (std::size_t i = 0; i < config.sample_times.size(); ++i) {
    if (config.sample_times[i] < 0.0 || config.sample_times[i] > config.horizons.front()) {
      config_error("sample_times: entries must lie in [0, min horizon]");
    }
    if (i > 0 && config.sample_times[i] <= config.sample_times[i - 1]) {
      config_error("sample_times: must be strictly increasing");
    }
  }

  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) config_error("seed: expected an unsigned integer");
    config.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("output_dir")) {
    if (!doc["output_dir"].is_string()) config_error("output_dir: expected a string");
    config.output_dir = doc["output_dir"].get<std::string>();
  }
  if (doc.contains("tolerances")) config.tolerances = parse_tolerances(doc["tolerances"]);
  if (doc.contains("convergence")) {
    const json& conv = doc["convergence"];
    if (!conv.is_object()) config_error("convergence: expected an object");
    reject_unknown_keys(conv, "convergence", {"eps_p", "eps_rho", "n_stable"});
    if (conv.contains("eps_p")) {
      config.convergence.eps_p = require_number(conv, "convergence", "eps_p");
      if (!(config.convergence.eps_p > 0.0)) config_error("convergence.eps_p: must be > 0");
    }
    if (conv.contains("eps_rho")) {
      config.convergence.eps_rho = require_number(conv, "convergence", "eps_rho");
      if (!(config.convergence.eps_rho > 0.0)) config_error("convergence.eps_rho: must be > 0");
    }
    if (conv.contains("n_stable")) {
      config.convergence.n_stable = require_int(conv, "convergence", "n_stable");
      if (config.convergence.n_stable < 1) config_error("convergence.n_stable: must be >= 1");
    }
  }
  return config;
}

ModelSpec build_model(const ModelConfig& config) {
  if (config.kind == "measurement_chain") {
    return measurement_chain(config.alpha, config.beta, config.n_env, config.coupling,
                             config.recording_times);
  }
  if (config.kind == "recoherence") {
    return recoherence_model(config.alpha, config.beta, config.t_record, config.t_unrecord,
                             config.coupling);
  }
  if (config.kind == "random") {
    return random_model(config.model_seed, config.dim_a, config.dim_b, config.energy_scale);
  }
  config_error("model.kind: unknown kind '" + config.kind + "'");
}

DecompositionSpec decomposition_from_config(const RunConfig& config, const ModelSpec& model) {
  DecompositionSpec spec;
  spec.degeneracy_tol = config.degeneracy_tol;
  if (config.decomposition_kind == "basis") {
    spec.kind = DecompKind::basis;
    if (model.recommended_decomposition.kind == DecompKind::basis) {
      spec.basis = model.recommended_decomposition.basis;
      spec.labels = model.recommended_decomposition.labels;
    }
  } else if (config.decomposition_kind == "fourier") {
    spec.kind = DecompKind::fourier;
  } else {
    spec.kind = DecompKind::schmidt;
  }
  return spec;
}

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json json_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

json series_to_json(const BranchSeries& s) {
  json out;
  out["label"] = s.label;
  out["probabilities"] = json::array();
  for (double p : s.probabilities) out["probabilities"].push_back(json_or_null(p));
  out["present"] = s.present;
  out["p_min"] = s.p_min;
  out["p_max"] = s.p_max;
  out["p_estimate"] = s.p_estimate;
  return out;
}

json density_to_json(const DensityMatrix& rho) {
  json rows = json::array();
  for (int i = 0; i < rho.dim(); ++i) {
    json row = json::array();
    for (int j = 0; j < rho.dim(); ++j) {
      row.push_back({rho.entries(i, j).real(), rho.entries(i, j).imag()});
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

json report_to_json(const HorizonReport& report) {
  json out;
  out["schema_version"] = 1;
  out["horizons"] = report.horizons;
  out["sample_times"] = report.sample_times;
  out["eps_p"] = report.eps_p;
  out["eps_rho"] = report.eps_rho;
  out["n_stable"] = report.n_stable;
  out["branch_counts"] = report.branch_counts;
  out["branch_count_stable"] = report.branch_count_stable;
  out["max_probability_step"] = report.max_probability_step;
  out["max_state_distance"] = report.max_state_distance;
  out["matched_probability_discrepancy"] = report.matched_probability_discrepancy;
  out["dropped_mass"] = report.dropped_mass;
  json distances = json::array();
  for (const auto& pair : report.state_distances) {
    json per_series = json::array();
    for (const auto& times : pair) {
      json row = json::array();
      for (double d : times) row.push_back(json_or_null(d));
      per_series.push_back(std::move(row));
    }
    distances.push_back(std::move(per_series));
  }
  out["state_distances"] = std::move(distances);
  out["series"] = json::array();
  for (const BranchSeries& s : report.series) out["series"].push_back(series_to_json(s));
  out["ambiguous_matching"] = report.ambiguous_matching;
  out["converged"] = report.converged;
  out["notes"] = report.notes;
  if (report.converged) {
    json limits = json::array();
    for (std::size_t c = 0; c < report.series.size(); ++c) {
      json entry;
      entry["label"] = report.series[c].label;
      entry["p_infinity"] = report.series[c].p_estimate;
      json states = json::array();
      for (const DensityMatrix& rho : report.limit_states[c]) {
        states.push_back(density_to_json(rho));
      }
      entry["real_states"] = std::move(states);
      limits.push_back(std::move(entry));
    }
    out["asymptotic_estimates"] = std::move(limits);
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream stream(path, std::ios::binary);
  if (!stream) {
    throw Error(ErrorKind::io, "cannot open '" + path.string() + "' for writing");
  }
  stream << text;
  if (!stream) {
    throw Error(ErrorKind::io, "write failed on '" + path.string() + "'");
  }
}

std::string sanitize_label(const std::string& label) {
  std::string out;
  for (char c : label) {
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  }
  return out.empty() ? "_" : out;
}

}  // namespace

std::string library_version() { return "0.1.0"; }

std::string horizon_report_json(const HorizonReport& report) {
  return report_to_json(report).dump(2) + "\n";
}

RunResult run(const RunConfig& config, const RunOverrides& overrides) {
  const ModelSpec model = build_model(config.model);
  BranchingProblem problem{model.initial_state, model.schedule,
                           decomposition_from_config(config, model), config.tolerances};

  const HorizonReport report =
      horizon_sweep(problem, config.horizons, config.sample_times, config.convergence.eps_p,
                    config.convergence.eps_rho, config.convergence.n_stable);
  const BranchSet final_set = final_branches(problem, config.horizons.back());

  RunResult result;
  result.converged = report.converged;
  result.output_dir = overrides.output_dir.value_or(config.output_dir);

  std::error_code ec;
  std::filesystem::create_directories(result.output_dir, ec);
  if (ec) {
    throw Error(ErrorKind::io, "cannot create output directory '" +
                                   result.output_dir.string() + "': " + ec.message());
  }

  std::vector<std::string> log_lines;
  log_lines.push_back("qbranch " + library_version() + " (eigen " +
                      std::to_string(EIGEN_WORLD_VERSION) + "." +
                      std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION) + ")");

  // branches.json: per-horizon branch data plus the matched series.
  {
    json out;
    out["schema_version"] = 1;
    out["model"] = model.name;
    out["decomposition"] = config.decomposition_kind;
    json per_horizon = json::array();
    for (std::size_t i = 0; i < config.horizons.size(); ++i) {
      const BranchSet set = final_branches(problem, config.horizons[i]);
      json entry;
      entry["horizon"] = config.horizons[i];
      entry["branch_count"] = set.branches.size();
      json branches = json::array();
      double sum = 0.0;
      for (const Branch& b : set.branches) {
        branches.push_back({{"label", b.label}, {"probability", b.probability}});
        sum += b.probability;
      }
      entry["branches"] = std::move(branches);
      entry["probability_sum"] = sum;
      entry["probability_residual"] = sum + set.dropped_mass - 1.0;
      entry["dropped_mass"] = set.dropped_mass;
      entry["dropped_count"] = set.dropped_count;
      per_horizon.push_back(std::move(entry));
    }
    out["per_horizon"] = std::move(per_horizon);
    out["matched_series"] = json::array();
    for (const BranchSeries& s : report.series) {
      out["matched_series"].push_back(series_to_json(s));
    }
    out["converged"] = report.converged;
    const auto path = result.output_dir / "branches.json";
    write_text_file(path, json(out).dump(2) + "\n");
    result.files.push_back(path);
  }

  // convergence.json: the full horizon report.
  {
    const auto path = result.output_dir / "convergence.json";
    write_text_file(path, report_to_json(report).dump(2) + "\n");
    result.files.push_back(path);
  }

  // realstate_<label>.csv per series present at the final horizon, states at
  // the final horizon.
  std::vector<std::pair<std::string, std::string>> trajectory_files;  // label -> file
  for (std::size_t c = 0; c < report.series.size(); ++c) {
    const BranchSeries& s = report.series[c];
    if (!s.present.back()) continue;
    const int dim = report.limit_states[c].empty() ? 0 : report.limit_states[c].front().dim();
    std::string csv = "t";
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) {
        csv += ",ρ_re_" + std::to_string(i) + "_" + std::to_string(j);
        csv += ",ρ_im_" + std::to_string(i) + "_" + std::to_string(j);
      }
    }
    csv += "\n";
    for (std::size_t ti = 0; ti < report.sample_times.size(); ++ti) {
      csv += format_double(report.sample_times[ti]);
      const Matrix& rho = report.limit_states[c][ti].entries;
      for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
          csv += "," + format_double(rho(i, j).real());
          csv += "," + format_double(rho(i, j).imag());
        }
      }
      csv += "\n";
    }
    const std::string filename = "realstate_" + sanitize_label(s.label) + ".csv";
    const auto path = result.output_dir / filename;
    write_text_file(path, csv);
    result.files.push_back(path);
    trajectory_files.emplace_back(s.label, filename);
  }

  // realized.json: Born-rule draw of the realized branch.
  if (overrides.seed || config.seed) {
    const std::uint64_t seed = overrides.seed ? *overrides.seed : *config.seed;
    double sum = 0.0;
    for (const Branch& b : final_set.branches) sum += b.probability;
    log_lines.push_back("sampling: probabilities sum to " + format_double(sum) +
                        "; renormalized for the draw");
    const std::string label = sample_branch(final_set, seed, config.tolerances);
    result.realized_label = label;
    json out;
    out["schema_version"] = 1;
    out["seed"] = seed;
    out["label"] = label;
    for (const Branch& b : final_set.branches) {
      if (b.label == label) out["probability"] = b.probability;
    }
    out["probability_sum_before_renormalization"] = sum;
    for (const auto& [lbl, file] : trajectory_files) {
      if (lbl == label) out["trajectory_file"] = file;
    }
    const auto path = result.output_dir / "realized.json";
    write_text_file(path, out.dump(2) + "\n");
    result.files.push_back(path);
  }

  // run.log: config echo, versions, free-form notes. The log is the one
  // output allowed to differ between identical runs (it carries a timestamp).
  {
    json echo;
    echo["model"] = {{"kind", config.model.kind}};
    echo["decomposition"] = {{"kind", config.decomposition_kind},
                             {"degeneracy_tol", config.degeneracy_tol}};
    echo["horizons"] = config.horizons;
    echo["sample_times"] = config.sample_times;
    if (config.seed) echo["seed"] = *config.seed;
    std::string log;
    for (const std::string& line : log_lines) log += line + "\n";
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    log += "unix_time_ms " +
           std::to_string(
               std::chrono::duration_cast<std::chrono::milliseconds>(now).count()) +
           "\n";
    log += "config " + echo.dump() + "\n";
    for (const std::string& note : report.notes) log += "note " + note + "\n";
    const auto path = result.output_dir / "run.log";
    write_text_file(path, log);
    result.files.push_back(path);
  }

  return result;
}

}  // namespace qbranch
