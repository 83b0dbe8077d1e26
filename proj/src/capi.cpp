#include "qbranch/qbranch.h"

#include <algorithm>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "qbranch/asymptotics.hpp"
#include "qbranch/branching.hpp"
#include "qbranch/models.hpp"
#include "qbranch/runner.hpp"

#include <json.hpp>

using namespace qbranch;

struct qb_model {
  ModelSpec spec;
};

struct qb_branch_set {
  BranchingProblem problem;
  BranchSet set;
};

struct qb_report {
  HorizonReport report;
};

namespace {

thread_local std::string g_last_error;

qb_status to_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return QB_ERR_INVALID_ARGUMENT;
    case ErrorKind::numeric: return QB_ERR_NUMERIC;
    case ErrorKind::config: return QB_ERR_CONFIG;
    case ErrorKind::io: return QB_ERR_IO;
  }
  return QB_ERR_NUMERIC;
}

qb_status fail(qb_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename Fn>
qb_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    return fail(to_status(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(QB_ERR_NUMERIC, "out of memory");
  } catch (const std::exception& e) {
    return fail(QB_ERR_NUMERIC, e.what());
  }
}

qb_status require(bool condition, const char* message) {
  return condition ? QB_OK : fail(QB_ERR_INVALID_ARGUMENT, message);
}

DecompositionSpec spec_from_kind(const ModelSpec& model, const char* kind,
                                 double degeneracy_tol) {
  std::string k = kind ? kind : "";
  DecompositionSpec spec;
  spec.degeneracy_tol = degeneracy_tol > 0.0 ? degeneracy_tol : 1e-8;
  if (k == "basis") {
    spec.kind = DecompKind::basis;
    if (model.recommended_decomposition.kind == DecompKind::basis) {
      spec.basis = model.recommended_decomposition.basis;
      spec.labels = model.recommended_decomposition.labels;
    }
  } else if (k == "fourier") {
    spec.kind = DecompKind::fourier;
  } else if (k == "schmidt") {
    spec.kind = DecompKind::schmidt;
  } else {
    throw Error(ErrorKind::invalid_argument,
                "unknown decomposition kind '" + k +
                    "' (allowed: basis, fourier, schmidt)");
  }
  return spec;
}

char* copy_string(const std::string& text) {
  char* out = new char[text.size() + 1];
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* qb_version(void) { return "0.1.0"; }

const char* qb_last_error(void) { return g_last_error.c_str(); }

qb_status qb_model_measurement_chain(double alpha_re, double alpha_im, double beta_re,
                                     double beta_im, int n_env, double coupling,
                                     const double* recording_times, int n_times,
                                     qb_model** out) {
  if (qb_status s = require(out && (recording_times || n_times == 0),
                            "null pointer argument")) {
    return s;
  }
  return guarded([&] {
    auto model = std::make_unique<qb_model>();
    model->spec = measurement_chain(Complex(alpha_re, alpha_im), Complex(beta_re, beta_im),
                                    n_env, coupling,
                                    std::span<const double>(recording_times,
                                                            static_cast<std::size_t>(
                                                                n_times > 0 ? n_times : 0)));
    *out = model.release();
    return QB_OK;
  });
}

qb_status qb_model_recoherence(double alpha_re, double alpha_im, double beta_re,
                               double beta_im, double t_record, double t_unrecord,
                               double coupling, qb_model** out) {
  if (qb_status s = require(out != nullptr, "null pointer argument")) return s;
  return guarded([&] {
    auto model = std::make_unique<qb_model>();
    model->spec = recoherence_model(Complex(alpha_re, alpha_im), Complex(beta_re, beta_im),
                                    t_record, t_unrecord, coupling);
    *out = model.release();
    return QB_OK;
  });
}

qb_status qb_model_random(uint64_t seed, int dim_a, int dim_b, double energy_scale,
                          qb_model** out) {
  if (qb_status s = require(out != nullptr, "null pointer argument")) return s;
  return guarded([&] {
    auto model = std::make_unique<qb_model>();
    model->spec = random_model(seed, dim_a, dim_b, energy_scale);
    *out = model.release();
    return QB_OK;
  });
}

void qb_model_free(qb_model* model) { delete model; }

int qb_model_dim_a(const qb_model* model) { return model ? model->spec.space.dim_a : 0; }
int qb_model_dim_b(const qb_model* model) { return model ? model->spec.space.dim_b : 0; }

qb_status qb_final_branches(const qb_model* model, const char* decomposition_kind,
                            double degeneracy_tol, double horizon, qb_branch_set** out) {
  if (qb_status s = require(model && out, "null pointer argument")) return s;
  return guarded([&] {
    BranchingProblem problem = model->spec.problem();
    problem.decomposition = spec_from_kind(model->spec, decomposition_kind, degeneracy_tol);
    auto set = std::make_unique<qb_branch_set>();
    set->set = final_branches(problem, horizon);
    set->problem = std::move(problem);
    *out = set.release();
    return QB_OK;
  });
}

void qb_branch_set_free(qb_branch_set* set) { delete set; }

int qb_branch_count(const qb_branch_set* set) {
  return set ? static_cast<int>(set->set.branches.size()) : 0;
}

const char* qb_branch_label(const qb_branch_set* set, int index) {
  if (!set || index < 0 || index >= qb_branch_count(set)) return nullptr;
  return set->set.branches[index].label.c_str();
}

double qb_branch_probability(const qb_branch_set* set, int index) {
  if (!set || index < 0 || index >= qb_branch_count(set)) return -1.0;
  return set->set.branches[index].probability;
}

double qb_branch_dropped_mass(const qb_branch_set* set) {
  return set ? set->set.dropped_mass : -1.0;
}

qb_status qb_real_state(const qb_branch_set* set, int index, double t, double* re,
                        double* im) {
  if (qb_status s = require(set && re && im, "null pointer argument")) return s;
  if (qb_status s = require(index >= 0 && index < qb_branch_count(set),
                            "branch index out of range")) {
    return s;
  }
  return guarded([&] {
    const DensityMatrix rho = real_state(set->problem, set->set.branches[index],
                                         set->set.horizon, t);
    for (int i = 0; i < rho.dim(); ++i) {
      for (int j = 0; j < rho.dim(); ++j) {
        re[i * rho.dim() + j] = rho.entries(i, j).real();
        im[i * rho.dim() + j] = rho.entries(i, j).imag();
      }
    }
    return QB_OK;
  });
}

qb_status qb_two_time_weights(const qb_branch_set* set, int index, double t,
                              double* weights, int capacity, int* count) {
  if (qb_status s = require(set && count, "null pointer argument")) return s;
  if (qb_status s = require(index >= 0 && index < qb_branch_count(set),
                            "branch index out of range")) {
    return s;
  }
  return guarded([&] {
    const TwoTimeWeights w = two_time_weights(set->problem, set->set.branches[index],
                                              set->set.horizon, t);
    *count = static_cast<int>(w.weights.size());
    if (weights) {
      const int n = std::min<int>(capacity, *count);
      for (int k = 0; k < n; ++k) weights[k] = w.weights[k];
    }
    return QB_OK;
  });
}

qb_status qb_sample_branch(const qb_branch_set* set, uint64_t seed, int* index_out) {
  if (qb_status s = require(set && index_out, "null pointer argument")) return s;
  return guarded([&] {
    const std::string label = sample_branch(set->set, seed, set->problem.tol);
    for (std::size_t l = 0; l < set->set.branches.size(); ++l) {
      if (set->set.branches[l].label == label) {
        *index_out = static_cast<int>(l);
        return QB_OK;
      }
    }
    throw Error(ErrorKind::numeric, "sampled label not found in branch set");
  });
}

qb_status qb_horizon_sweep(const qb_model* model, const char* decomposition_kind,
                           double degeneracy_tol, const double* horizons, int n_horizons,
                           const double* sample_times, int n_times, double eps_p,
                           double eps_rho, int n_stable, qb_report** out) {
  if (qb_status s = require(model && out && horizons && (sample_times || n_times == 0),
                            "null pointer argument")) {
    return s;
  }
  if (qb_status s = require(n_horizons > 0, "need at least one horizon")) return s;
  return guarded([&] {
    BranchingProblem problem = model->spec.problem();
    problem.decomposition = spec_from_kind(model->spec, decomposition_kind, degeneracy_tol);
    auto report = std::make_unique<qb_report>();
    report->report = horizon_sweep(
        problem, std::span<const double>(horizons, static_cast<std::size_t>(n_horizons)),
        std::span<const double>(sample_times, static_cast<std::size_t>(n_times > 0 ? n_times : 0)),
        eps_p, eps_rho, n_stable);
    *out = report.release();
    return QB_OK;
  });
}

void qb_report_free(qb_report* report) { delete report; }

int qb_report_converged(const qb_report* report) {
  return report && report->report.converged ? 1 : 0;
}

int qb_report_branch_count_stable(const qb_report* report) {
  return report && report->report.branch_count_stable ? 1 : 0;
}

int qb_report_series_count(const qb_report* report) {
  return report ? static_cast<int>(report->report.series.size()) : 0;
}

const char* qb_report_series_label(const qb_report* report, int series) {
  if (!report || series < 0 || series >= qb_report_series_count(report)) return nullptr;
  return report->report.series[series].label.c_str();
}

double qb_report_series_estimate(const qb_report* report, int series) {
  if (!report || series < 0 || series >= qb_report_series_count(report)) return -1.0;
  return report->report.series[series].p_estimate;
}

qb_status qb_report_to_json(const qb_report* report, char** json_out) {
  if (qb_status s = require(report && json_out, "null pointer argument")) return s;
  return guarded([&] {
    *json_out = copy_string(horizon_report_json(report->report));
    return QB_OK;
  });
}

void qb_string_free(char* text) { delete[] text; }

qb_status qb_validate_config(const char* config_json) {
  if (qb_status s = require(config_json != nullptr, "null pointer argument")) return s;
  return guarded([&] {
    parse_config(config_json);
    return QB_OK;
  });
}

qb_status qb_run_config(const char* config_json, const char* output_dir,
                        const uint64_t* seed, char** summary_json_out) {
  if (qb_status s = require(config_json != nullptr, "null pointer argument")) return s;
  return guarded([&] {
    const RunConfig config = parse_config(config_json);
    RunOverrides overrides;
    if (output_dir) overrides.output_dir = std::string(output_dir);
    if (seed) overrides.seed = *seed;
    const RunResult result = run(config, overrides);
    if (summary_json_out) {
      nlohmann::ordered_json summary;
      summary["output_dir"] = result.output_dir.string();
      summary["files"] = nlohmann::ordered_json::array();
      for (const auto& file : result.files) {
        summary["files"].push_back(file.filename().string());
      }
      summary["converged"] = result.converged;
      if (result.realized_label) summary["realized_label"] = *result.realized_label;
      *summary_json_out = copy_string(summary.dump(2) + "\n");
    }
    return QB_OK;
  });
}

}  // extern "C"
