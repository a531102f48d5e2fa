#include "fnncc/arl.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "fnncc/errors.hpp"
#include "fnncc/log.hpp"
#include "fnncc/rng.hpp"

namespace fnncc {

ArlEstimate estimate_arl(const ControlChart& chart, const ProfileSet& oc_x,
                         const Eigen::VectorXd& oc_y) {
  const std::vector<ChartPoint> points = monitor(chart, oc_x, oc_y);
  const auto n = static_cast<int>(points.size());
  if (n == 0) throw Error(ErrorCode::data, "estimate_arl needs observations");

  int signals = 0;
  for (const ChartPoint& point : points) signals += point.signal ? 1 : 0;

  ArlEstimate estimate;
  estimate.chart = predictor_kind_name(chart.predictor->kind());
  estimate.n_oc = n;
  if (signals == 0) {
    estimate.censored = true;
    estimate.p_hat = 1.0 / (static_cast<double>(n) + 1.0);
  } else {
    estimate.p_hat = static_cast<double>(signals) / n;
  }
  estimate.arl = 1.0 / estimate.p_hat;
  estimate.se_arl = std::sqrt(estimate.p_hat * (1.0 - estimate.p_hat) / n) /
                    (estimate.p_hat * estimate.p_hat);
  return estimate;
}

double simulate_run_length(const ControlChart& chart, const ProfileSet& oc_x,
                           const Eigen::VectorXd& oc_y, int n_runs,
                           std::uint64_t seed, int max_length) {
  // Signals are a fixed property of each pooled observation; compute once.
  const std::vector<ChartPoint> points = monitor(chart, oc_x, oc_y);
  Rng rng(seed);
  double total = 0.0;
  for (int run = 0; run < n_runs; ++run) {
    int length = 0;
    while (length < max_length) {
      ++length;
      const auto idx = static_cast<std::size_t>(
          rng.below(static_cast<std::uint64_t>(points.size())));
      if (points[idx].signal) break;
    }
    total += length;
  }
  return total / n_runs;
}

namespace {

struct Cell {
  std::size_t scenario_index;
  std::size_t shift_index;
  std::size_t delta_index;
};

}  // namespace

StudyResult run_study(const StudyConfig& config) {
  StudyResult result;

  for (std::size_t si = 0; si < config.scenarios.size(); ++si) {
    const ScenarioKind kind = config.scenarios[si];
    ScenarioSpec spec;
    spec.kind = kind;
    const std::uint64_t scenario_seed =
        derive_seed(config.seed, {0x5ce0ULL, static_cast<std::uint64_t>(si)});
    const ScenarioGenerator generator(spec, config.generator, scenario_seed);

    const SimulatedSet train = generator.make_set(config.n_train, ShiftSpec{},
                                                  0x11ULL, "train");
    const SimulatedSet validation =
        generator.make_set(config.n_validation, ShiftSpec{}, 0x22ULL, "val");
    const SimulatedSet tuning = generator.make_set(config.n_tuning, ShiftSpec{},
                                                   0x33ULL, "tune");

    auto as_profile_set = [&](const SimulatedSet& set) {
      return ProfileSet{generator.grid(), {"x1"}, {set.profiles}, set.sample_ids};
    };
    const ProfileSet train_x = as_profile_set(train);
    const ProfileSet val_x = as_profile_set(validation);
    const ProfileSet tuning_x = as_profile_set(tuning);

    // One trained predictor per (scenario, chart kind), reused across shifts.
    std::vector<ControlChart> charts;
    std::vector<bool> chart_failed(config.charts.size(), false);
    for (std::size_t ci = 0; ci < config.charts.size(); ++ci) {
      PipelineConfig pipeline = config.pipeline;
      pipeline.fnn.seed = derive_seed(
          scenario_seed, {0x7247ULL, static_cast<std::uint64_t>(ci)});
      std::shared_ptr<Predictor> predictor;
      try {
        switch (config.charts[ci]) {
          case PredictorKind::scc:
            predictor = make_scc_predictor();
            break;
          case PredictorKind::sof_linear:
            predictor = train_sof_predictor(train_x, train.y, pipeline);
            break;
          case PredictorKind::fnn:
            predictor =
                train_fnn_predictor(train_x, train.y, val_x, validation.y, pipeline);
            break;
          case PredictorKind::rawdata_mlp:
            predictor = make_rawdata_mlp_predictor(train_x, train.y, val_x,
                                                   validation.y, pipeline);
            break;
          case PredictorKind::bspline_mlp:
            predictor = make_bspline_mlp_predictor(train_x, train.y, val_x,
                                                   validation.y, pipeline);
            break;
        }
        charts.push_back(build_chart(std::move(predictor), tuning_x, tuning.y,
                                     config.alpha));
      } catch (const TrainingDivergedError& error) {
        log::warn("training diverged for chart ",
                  predictor_kind_name(config.charts[ci]), " in scenario ",
                  scenario_name(kind), ": ", error.what());
        chart_failed[ci] = true;
        charts.push_back(ControlChart{});
      }
    }

    // OC draws per shift multiple; the covariate delta enters as an offset
    // on the observed profiles only.
    std::vector<Cell> cells;
    for (std::size_t hi = 0; hi < config.shift_multiples.size(); ++hi) {
      for (std::size_t di = 0; di < config.covariate_deltas.size(); ++di) {
        cells.push_back(Cell{si, hi, di});
      }
    }

    std::vector<std::vector<ArlEstimate>> cell_estimates(cells.size());
    auto evaluate_cell = [&](std::size_t cell_index) {
      const Cell& cell = cells[cell_index];
      ShiftSpec shift;
      shift.response_multiple = config.shift_multiples[cell.shift_index];
      shift.covariate_delta = config.covariate_deltas[cell.delta_index];
      const std::uint64_t stream =
          derive_seed(0xa0cULL, {static_cast<std::uint64_t>(cell.shift_index)});
      const SimulatedSet oc =
          generator.make_set(config.n_oc, shift, stream, "oc");
      const ProfileSet oc_x = as_profile_set(oc);

      std::vector<ArlEstimate>& out = cell_estimates[cell_index];
      for (std::size_t ci = 0; ci < charts.size(); ++ci) {
        ArlEstimate estimate;
        if (chart_failed[ci]) {
          estimate.chart = predictor_kind_name(config.charts[ci]);
          estimate.failed = true;
          estimate.n_oc = config.n_oc;
        } else {
          estimate = estimate_arl(charts[ci], oc_x, oc.y);
        }
        estimate.scenario = scenario_name(kind);
        estimate.shift_multiple = shift.response_multiple;
        estimate.covariate_delta = shift.covariate_delta;
        out.push_back(std::move(estimate));
      }
    };

    const int workers = std::max(1, config.workers);
    if (workers == 1) {
      for (std::size_t i = 0; i < cells.size(); ++i) evaluate_cell(i);
    } else {
      std::vector<std::thread> pool;
      std::atomic<std::size_t> next{0};
      for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) break;
            evaluate_cell(i);
          }
        });
      }
      for (std::thread& t : pool) t.join();
    }

    for (std::vector<ArlEstimate>& block : cell_estimates) {
      for (ArlEstimate& estimate : block) {
        result.estimates.push_back(std::move(estimate));
      }
    }
  }
  return result;
}

}  // namespace fnncc
