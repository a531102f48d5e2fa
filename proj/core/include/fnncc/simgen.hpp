#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "fnncc/fpca.hpp"
#include "fnncc/grid.hpp"
#include "fnncc/smoothing.hpp"

namespace fnncc {

// Quadratic-plus-bumps mean curve: f(z) = a z^2 + b z + c + r * sum_i
// pdf(z; m_i, s_i), with a translation delta added to the constant term when
// the covariate mean is shifted.
struct MeanModel {
  double a = 0.5;
  double b = -0.3;
  double c = 0.2;
  struct Bump {
    double location;
    double scale;
  };
  std::vector<Bump> bumps = {{0.25, 0.05}, {0.75, 0.05}};
  double amplitude = 0.2;  // r
  double delta = 0.0;

  Eigen::VectorXd evaluate(const Grid& grid) const;
};

enum class ScenarioKind { linear, exponential, absolute, logarithmic, square };

const char* scenario_name(ScenarioKind kind);
ScenarioKind scenario_from_name(const std::string& name);

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::linear;
  double u = 2.0;            // offset inside the log map
  double target_r2 = 0.97;   // linear-scale determination coefficient
  double mu_y = 0.0;
  double v_y = 1.0;
  double noise_sd = 0.1;     // nonlinear-scenario noise
};

struct ShiftSpec {
  double response_multiple = 0.0;  // in units of s_{y*}
  double covariate_delta = 0.0;
};

struct GeneratorConfig {
  MeanModel mean_model;
  double bessel_length_scale = 0.25;
  double variance = 1.0;              // constant variance function
  double measurement_noise_sd = 0.05;
  int n_grid_points = 150;
  int smoothing_basis_size = 30;
  int n_calibration = 2000;
};

// A labeled simulated sample: raw observed profiles plus responses.
struct SimulatedSet {
  std::vector<std::string> sample_ids;
  Eigen::MatrixXd profiles;  // n x |grid|, raw (noisy) observations
  Eigen::VectorXd y;
  Eigen::VectorXd linear_predictor;   // L_i before the scenario map
  Eigen::VectorXd transformed_mean;   // G(L_i), noise-free
};

struct DatasetBundle {
  SimulatedSet train, validation, tuning, oc;
};

// Frozen data-generating process for one scenario. Construction draws a
// calibration sample, fits the generator's own standardization and MFPCA,
// builds the true coefficient function from the first three eigenfunctions,
// and rescales it so the linear predictor variance hits target_r2 * v_y.
class ScenarioGenerator {
 public:
  ScenarioGenerator(const ScenarioSpec& scenario, const GeneratorConfig& config,
                    std::uint64_t seed);

  const Grid& grid() const { return grid_; }
  const QuadratureRule& rule() const { return rule_; }
  const ScenarioSpec& scenario() const { return scenario_; }
  const GeneratorConfig& config() const { return config_; }
  double s_y_star() const { return s_y_star_; }
  Eigen::VectorXd beta_true(const Grid& grid) const;

  // Raw profiles from the reference process; stream_tag picks the
  // deterministic RNG stream.
  Eigen::MatrixXd draw_profiles(int n, std::uint64_t stream_tag) const;

  // Linear predictor of raw profiles through the frozen smoothing,
  // standardization, and coefficient function.
  Eigen::VectorXd linear_predictor(const Eigen::MatrixXd& raw_profiles) const;

  // Scenario map G applied to linear predictor values.
  Eigen::VectorXd transform(const Eigen::VectorXd& linear) const;

  // Draw a complete labeled set. The response shift adds
  // multiple * s_y_star to y; the covariate shift adds delta to the observed
  // profiles after the response is computed, so responses are unaffected.
  SimulatedSet make_set(int n, const ShiftSpec& shift, std::uint64_t stream_tag,
                        const std::string& id_prefix) const;

  DatasetBundle make_datasets(int n_train, int n_validation, int n_tuning, int n_oc,
                              const ShiftSpec& oc_shift) const;

 private:
  ScenarioSpec scenario_;
  GeneratorConfig config_;
  std::uint64_t seed_;
  Grid grid_;
  QuadratureRule rule_;
  BSplineBasis smoothing_basis_;
  Eigen::VectorXd mean_curve_;
  Eigen::MatrixXd sampling_matrix_;  // eigvecs * sqrt(clipped eigvals)
  StandardizationFns standardization_;
  Eigen::VectorXd beta_coeffs_;      // true coefficient on the smoothing basis
  Eigen::VectorXd beta_grid_;        // frozen true coefficient on grid_
  double alpha_true_ = 0.0;
  double linear_noise_sd_ = 0.0;     // scenario-A noise, sqrt((1 - R2) v_y)
  double s_y_star_ = 0.0;
};

}  // namespace fnncc
