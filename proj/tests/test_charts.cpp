#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "fnncc/charts.hpp"
#include "fnncc/errors.hpp"
#include "fnncc/rng.hpp"
#include "fnncc/simgen.hpp"
#include "helpers.hpp"

using namespace fnncc;

namespace {

ProfileSet as_profile_set(const ScenarioGenerator& generator,
                          const SimulatedSet& set) {
  return ProfileSet{generator.grid(), {"x1"}, {set.profiles}, set.sample_ids};
}

GeneratorConfig desk_config() {
  GeneratorConfig config;
  config.n_calibration = 1000;
  return config;
}

PipelineConfig fast_pipeline() {
  PipelineConfig config;
  config.fnn.max_epochs = 150;
  config.fnn.patience = 15;
  return config;
}

}  // namespace

TEST_CASE("empirical quantile rule: sort-and-index oracle") {
  std::vector<double> stats;
  for (int i = 1; i <= 1000; ++i) stats.push_back(static_cast<double>(i));
  // ceil(1000 * 0.025) = 25th order statistic, ceil(1000 * 0.975) = 975th
  CHECK(empirical_quantile(stats, 0.025) == 25.0);
  CHECK(empirical_quantile(stats, 0.975) == 975.0);
  CHECK(empirical_quantile(stats, 0.5) == 500.0);
  // permuting the sample does not change the quantiles
  Rng rng(3);
  std::vector<double> shuffled = stats;
  for (int i = 999; i > 0; --i) {
    std::swap(shuffled[static_cast<std::size_t>(i)],
              shuffled[rng.below(static_cast<std::uint64_t>(i + 1))]);
  }
  CHECK(empirical_quantile(shuffled, 0.025) == 25.0);
}

TEST_CASE("chart construction on raw responses") {
  const Grid grid = Grid::uniform(150);
  ProfileSet tuning{grid, {"x1"}, {Eigen::MatrixXd::Zero(1000, 150)}, {}};
  Rng rng(5);
  Eigen::VectorXd y(1000);
  for (int i = 0; i < 1000; ++i) y[i] = rng.normal();

  SUBCASE("limits are the alpha/2 tail order statistics") {
    const ControlChart chart = build_chart(make_scc_predictor(), tuning, y, 0.05);
    std::vector<double> sorted(y.data(), y.data() + 1000);
    std::sort(sorted.begin(), sorted.end());
    CHECK(chart.lcl == sorted[24]);
    CHECK(chart.ucl == sorted[974]);
    CHECK(chart.statistic == ChartStatistic::response);
  }

  SUBCASE("symmetric statistics give nearly symmetric limits") {
    const ControlChart chart = build_chart(make_scc_predictor(), tuning, y, 0.05);
    CHECK(std::abs(chart.lcl + chart.ucl) < 0.2);
  }

  SUBCASE("tuning sets below 2/alpha are refused") {
    Eigen::VectorXd tiny = y.head(30);
    ProfileSet tiny_x{grid, {"x1"}, {Eigen::MatrixXd::Zero(30, 150)}, {}};
    CHECK_THROWS_AS(build_chart(make_scc_predictor(), tiny_x, tiny, 0.05), Error);
  }

  SUBCASE("in-control coverage respects the empirical-quantile bound") {
    const ControlChart chart = build_chart(make_scc_predictor(), tuning, y, 0.05);
    const std::vector<ChartPoint> points = monitor(chart, tuning, y);
    int signals = 0;
    for (const ChartPoint& point : points) signals += point.signal;
    CHECK(static_cast<double>(signals) / 1000.0 <= 0.05 + 2.0 / 1000.0);
  }
}

TEST_CASE("monitoring semantics") {
  const Grid grid = Grid::uniform(150);
  ProfileSet tuning{grid, {"x1"}, {Eigen::MatrixXd::Zero(200, 150)}, {}};
  Rng rng(7);
  Eigen::VectorXd y(200);
  for (int i = 0; i < 200; ++i) y[i] = rng.normal();
  const ControlChart chart = build_chart(make_scc_predictor(), tuning, y, 0.05);

  SUBCASE("value exactly at a limit does not signal") {
    ProfileSet x{grid, {"x1"}, {Eigen::MatrixXd::Zero(3, 150)}, {"a", "b", "c"}};
    Eigen::VectorXd at_limits(3);
    at_limits << chart.ucl, chart.lcl, 0.5 * (chart.lcl + chart.ucl);
    const std::vector<ChartPoint> points = monitor(chart, x, at_limits);
    CHECK_FALSE(points[0].signal);
    CHECK_FALSE(points[1].signal);
    CHECK_FALSE(points[2].signal);
    CHECK(points[0].id == "a");
  }

  SUBCASE("monitoring is stateless: permutation permutes the points") {
    Eigen::VectorXd stream(6);
    stream << 0.1, 5.0, -4.0, 0.3, chart.ucl + 0.01, 0.0;
    ProfileSet x{grid, {"x1"}, {Eigen::MatrixXd::Zero(6, 150)}, {}};
    const std::vector<ChartPoint> forward = monitor(chart, x, stream);
    Eigen::VectorXd reversed = stream.reverse();
    const std::vector<ChartPoint> backward = monitor(chart, x, reversed);
    for (int i = 0; i < 6; ++i) {
      CHECK(forward[static_cast<std::size_t>(i)].value ==
            backward[static_cast<std::size_t>(5 - i)].value);
      CHECK(forward[static_cast<std::size_t>(i)].signal ==
            backward[static_cast<std::size_t>(5 - i)].signal);
    }
  }
}

TEST_CASE("SCC ignores covariates entirely") {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::absolute;
  const ScenarioGenerator generator(spec, desk_config(), 61);
  const SimulatedSet tuning = generator.make_set(400, ShiftSpec{}, 0x1, "t");
  const SimulatedSet fresh = generator.make_set(100, ShiftSpec{}, 0x2, "f");

  const ControlChart chart = build_chart(
      make_scc_predictor(), as_profile_set(generator, tuning), tuning.y, 0.05);

  ProfileSet x = as_profile_set(generator, fresh);
  const std::vector<ChartPoint> baseline = monitor(chart, x, fresh.y);
  // shift the covariates arbitrarily; the SCC output must be unchanged
  ProfileSet shifted = x;
  shifted.values.front().array() += 7.5;
  const std::vector<ChartPoint> perturbed = monitor(chart, shifted, fresh.y);
  for (std::size_t i = 0; i < baseline.size(); ++i) {
    CHECK(baseline[i].value == perturbed[i].value);
    CHECK(baseline[i].signal == perturbed[i].signal);
  }
}

TEST_CASE("residual charts share one code path") {
  ScenarioSpec spec;
  const ScenarioGenerator generator(spec, desk_config(), 62);
  const SimulatedSet train = generator.make_set(300, ShiftSpec{}, 0x1, "tr");
  const SimulatedSet val = generator.make_set(100, ShiftSpec{}, 0x2, "v");
  const SimulatedSet tuning = generator.make_set(400, ShiftSpec{}, 0x3, "tu");

  PipelineConfig pipeline = fast_pipeline();
  const ProfileSet train_x = as_profile_set(generator, train);
  const ProfileSet val_x = as_profile_set(generator, val);
  const ProfileSet tuning_x = as_profile_set(generator, tuning);

  const auto sof = train_sof_predictor(train_x, train.y, pipeline);
  const auto fnn =
      train_fnn_predictor(train_x, train.y, val_x, val.y, pipeline);
  const ControlChart frcc = build_chart(sof, tuning_x, tuning.y, 0.05);
  const ControlChart fnncc = build_chart(fnn, tuning_x, tuning.y, 0.05);
  CHECK(frcc.statistic == ChartStatistic::residual);
  CHECK(fnncc.statistic == ChartStatistic::residual);
  CHECK(frcc.lcl < frcc.ucl);
  CHECK(fnncc.lcl < fnncc.ucl);

  // a perfect prediction yields statistic 0 and no signal
  const SimulatedSet fresh = generator.make_set(5, ShiftSpec{}, 0x4, "f");
  const ProfileSet fresh_x = as_profile_set(generator, fresh);
  const Eigen::VectorXd perfect = sof->predict(fresh_x);
  const std::vector<ChartPoint> points = monitor(frcc, fresh_x, perfect);
  for (const ChartPoint& point : points) {
    CHECK(point.value == 0.0);
    CHECK_FALSE(point.signal);
  }
}

TEST_CASE("rawdata MLP predictor") {
  ScenarioSpec spec;
  const ScenarioGenerator generator(spec, desk_config(), 63);
  const SimulatedSet train = generator.make_set(200, ShiftSpec{}, 0x1, "tr");
  const SimulatedSet val = generator.make_set(80, ShiftSpec{}, 0x2, "v");
  const ProfileSet train_x = as_profile_set(generator, train);
  const ProfileSet val_x = as_profile_set(generator, val);

  SUBCASE("first-layer parameter count is (C + 1) * n1") {
    PipelineConfig pipeline = fast_pipeline();
    pipeline.fnn.max_epochs = 5;
    const auto predictor = make_rawdata_mlp_predictor(train_x, train.y, val_x,
                                                      val.y, pipeline);
    const auto& mlp = static_cast<const RawdataMlpPredictor&>(*predictor);
    CHECK(mlp.net.weights[0].size() + mlp.net.biases[0].size() ==
          (150 + 1) * 8);
  }

  SUBCASE("linear activations collapse to least squares on grid values") {
    PipelineConfig pipeline;
    pipeline.fnn.layer_widths = {1};
    pipeline.fnn.activations = {Activation::linear};
    pipeline.fnn.batch_size = 200;
    pipeline.fnn.max_epochs = 20000;
    pipeline.fnn.patience = 20000;
    pipeline.fnn.learning_rate = 0.01;

    // noiseless linear target in the standardized grid values
    Eigen::MatrixXd standardized = train_x.values.front();
    const Eigen::VectorXd mean = standardized.colwise().mean();
    standardized.rowwise() -= mean.transpose();
    Eigen::VectorXd weights(150);
    for (int j = 0; j < 150; ++j) weights[j] = std::sin(2.0 * j / 149.0);
    const Eigen::VectorXd target = standardized * weights / 150.0;

    auto predictor =
        make_rawdata_mlp_predictor(train_x, target, train_x, target, pipeline);
    const Eigen::VectorXd fitted = predictor->predict(train_x);
    const double mse = (fitted - target).squaredNorm() / target.size();
    // least-squares floor is 0: the target is realizable
    CHECK(mse < 1e-6 * (target.squaredNorm() / target.size() + 1.0));
  }
}

TEST_CASE("bspline MLP predictor") {
  ScenarioSpec spec;
  const ScenarioGenerator generator(spec, desk_config(), 64);
  const SimulatedSet train = generator.make_set(200, ShiftSpec{}, 0x1, "tr");
  const SimulatedSet val = generator.make_set(80, ShiftSpec{}, 0x2, "v");
  const ProfileSet train_x = as_profile_set(generator, train);
  const ProfileSet val_x = as_profile_set(generator, val);

  PipelineConfig pipeline = fast_pipeline();
  pipeline.fnn.max_epochs = 5;
  const auto predictor =
      make_bspline_mlp_predictor(train_x, train.y, val_x, val.y, pipeline);
  const auto& mlp = static_cast<const BsplineMlpPredictor&>(*predictor);

  SUBCASE("input dimension is n_basis per covariate") {
    CHECK(mlp.net.weights[0].cols() == 30);
  }

  SUBCASE("mean-coefficient input rides the bias path") {
    // standardized input of zero = training-mean coefficients
    ProfileSet x = train_x;
    x.values.front() = mlp.coeff_mean.transpose().replicate(3, 1) *
                       mlp.smoothing.basis.evaluate(x.grid).transpose();
    // evaluate through the net directly with zero inputs as the reference
    Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(3, 30);
    const Eigen::VectorXd reference = net_predict(mlp.net, zero);
    const Eigen::VectorXd got = predictor->predict(x);
    CHECK((got - reference).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("phase II replay: one fault voyage signals once") {
  // synthetic surrogate with the case-study schema: 41 voyages, a single
  // faulty one at position 32
  ScenarioSpec spec;
  spec.kind = ScenarioKind::linear;
  const ScenarioGenerator generator(spec, desk_config(), 65);
  const SimulatedSet train = generator.make_set(400, ShiftSpec{}, 0x1, "tr");
  const SimulatedSet val = generator.make_set(120, ShiftSpec{}, 0x2, "v");
  const SimulatedSet tuning = generator.make_set(600, ShiftSpec{}, 0x3, "tu");

  PipelineConfig pipeline = fast_pipeline();
  const auto fnn = train_fnn_predictor(as_profile_set(generator, train), train.y,
                                       as_profile_set(generator, val), val.y,
                                       pipeline);
  const ControlChart chart =
      build_chart(fnn, as_profile_set(generator, tuning), tuning.y, 0.05);

  SimulatedSet voyages = generator.make_set(41, ShiftSpec{}, 0x77, "voyage");
  // keep the replay clean: pull pre-fault residuals toward the predictions
  ProfileSet x = as_profile_set(generator, voyages);
  Eigen::VectorXd y = fnn->predict(x);
  Rng noise(9);
  const double half_width = 0.25 * (chart.ucl - chart.lcl);
  for (int i = 0; i < 41; ++i) y[i] += half_width * std::tanh(noise.normal());
  y[31] += 4.0 * (chart.ucl - chart.lcl);  // the compressor fault

  const std::vector<ChartPoint> points = monitor(chart, x, y);
  int signals = 0;
  for (const ChartPoint& point : points) signals += point.signal;
  CHECK(signals == 1);
  CHECK(points[31].signal);
  for (int i = 32; i < 41; ++i) CHECK_FALSE(points[static_cast<std::size_t>(i)].signal);
}
