#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fnncc/charts.hpp"
#include "fnncc/simgen.hpp"

namespace fnncc {

struct ArlEstimate {
  std::string chart;
  std::string scenario;
  double shift_multiple = 0.0;
  double covariate_delta = 0.0;
  int n_oc = 0;
  double p_hat = 0.0;
  double arl = 0.0;
  double se_arl = 0.0;
  bool censored = false;  // no signals observed; p_hat floored at 1/(n+1)
  bool failed = false;    // predictor training diverged for this cell
};

// Signal probability over an out-of-control set; the run length of a
// Shewhart chart on independent observations is geometric, so ARL = 1/p with
// delta-method standard error sqrt(p(1-p)/n) / p^2.
ArlEstimate estimate_arl(const ControlChart& chart, const ProfileSet& oc_x,
                         const Eigen::VectorXd& oc_y);

// Direct run-length simulation (resampling the OC pool) used to cross-check
// the geometric identity on small cases.
double simulate_run_length(const ControlChart& chart, const ProfileSet& oc_x,
                           const Eigen::VectorXd& oc_y, int n_runs,
                           std::uint64_t seed, int max_length = 100000);

struct StudyConfig {
  std::vector<ScenarioKind> scenarios = {ScenarioKind::linear};
  std::vector<double> shift_multiples = {0.5, 1.0, 1.5, 2.0};
  std::vector<double> covariate_deltas = {0.0};
  std::vector<PredictorKind> charts = {PredictorKind::scc, PredictorKind::sof_linear,
                                       PredictorKind::fnn};
  int n_train = 1000;
  int n_validation = 250;
  int n_tuning = 2000;
  int n_oc = 4000;
  double alpha = 0.05;
  std::uint64_t seed = 20240001ULL;
  GeneratorConfig generator;
  PipelineConfig pipeline;
  int workers = 1;
};

struct StudyResult {
  std::vector<ArlEstimate> estimates;
};

// Full cross product of scenarios, charts, shifts and deltas. Predictors are
// trained once per scenario and reused across shifts; per-cell OC draws come
// from streams derived from (seed, scenario, shift index), with the
// covariate delta applied as an offset so response charts see identical data
// across delta values.
StudyResult run_study(const StudyConfig& config);

}  // namespace fnncc
