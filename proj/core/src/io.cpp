#include "fnncc/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "fnncc/errors.hpp"

namespace fnncc {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Low-level helpers
// ---------------------------------------------------------------------------

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::io, "cannot open '" + path.string() + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  fields.push_back(field);
  return fields;
}

double parse_double(const std::string& text, const std::filesystem::path& path,
                    std::size_t line_no) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc{} || result.ptr != end) {
    throw Error(ErrorCode::parse, "'" + path.string() + "' line " +
                                      std::to_string(line_no) +
                                      ": bad number '" + text + "'");
  }
  return value;
}

void check_header(const std::string& line, const std::string& expected,
                  const std::filesystem::path& path) {
  std::string trimmed = line;
  trimmed.erase(std::remove(trimmed.begin(), trimmed.end(), '\r'), trimmed.end());
  if (trimmed != expected) {
    throw Error(ErrorCode::schema, "'" + path.string() + "': expected header '" +
                                       expected + "', got '" + trimmed + "'");
  }
}

// ---------------------------------------------------------------------------
// JSON <-> linear algebra
// ---------------------------------------------------------------------------

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i];
  return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const json& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw Error(ErrorCode::schema, "matrix data length does not match rows*cols");
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[k++];
  }
  return m;
}

json basis_to_json(const BSplineBasis& basis) {
  return json{{"order", basis.order()}, {"n_basis", basis.n_basis()}};
}

BSplineBasis basis_from_json(const json& j) {
  return BSplineBasis(j.at("order").get<int>(), j.at("n_basis").get<int>());
}

json grid_to_json(const Grid& grid) { return vector_to_json(grid.points()); }

Grid grid_from_json(const json& j) { return Grid(vector_from_json(j)); }

json rule_to_json(const QuadratureRule& rule) {
  return json{{"grid", grid_to_json(rule.grid)},
              {"weights", vector_to_json(rule.weights)}};
}

QuadratureRule rule_from_json(const json& j) {
  return QuadratureRule{grid_from_json(j.at("grid")),
                        vector_from_json(j.at("weights"))};
}

json standardization_to_json(const StandardizationFns& fns) {
  json mean = json::array();
  json sd = json::array();
  for (std::size_t p = 0; p < fns.mean.size(); ++p) {
    mean.push_back(vector_to_json(fns.mean[p]));
    sd.push_back(vector_to_json(fns.sd[p]));
  }
  return json{{"grid", grid_to_json(fns.grid)},
              {"mean", std::move(mean)},
              {"sd", std::move(sd)}};
}

StandardizationFns standardization_from_json(const json& j) {
  StandardizationFns fns{grid_from_json(j.at("grid")), {}, {}};
  for (const json& v : j.at("mean")) fns.mean.push_back(vector_from_json(v));
  for (const json& v : j.at("sd")) fns.sd.push_back(vector_from_json(v));
  return fns;
}

json smoothing_to_json(const SmoothingRecipe& recipe) {
  return json{{"basis", basis_to_json(recipe.basis)}, {"lambda", recipe.lambda}};
}

SmoothingRecipe smoothing_from_json(const json& j) {
  return SmoothingRecipe{basis_from_json(j.at("basis")),
                         j.at("lambda").get<double>()};
}

json net_to_json(const Net& net) {
  json layers = json::array();
  for (int l = 0; l < net.n_layers(); ++l) {
    layers.push_back(json{{"activation", activation_name(net.activations[l])},
                          {"weights", matrix_to_json(net.weights[l])},
                          {"bias", vector_to_json(net.biases[l])}});
  }
  return json{{"layers", std::move(layers)}};
}

Net net_from_json(const json& j) {
  Net net;
  for (const json& layer : j.at("layers")) {
    net.activations.push_back(
        activation_from_name(layer.at("activation").get<std::string>()));
    net.weights.push_back(matrix_from_json(layer.at("weights")));
    net.biases.push_back(vector_from_json(layer.at("bias")));
  }
  if (net.weights.empty()) {
    throw Error(ErrorCode::schema, "network document has no layers");
  }
  return net;
}

json fnn_config_to_json(const FnnConfig& config) {
  json activations = json::array();
  for (Activation a : config.activations) activations.push_back(activation_name(a));
  return json{{"layer_widths", config.layer_widths},
              {"activations", std::move(activations)},
              {"weight_basis_order", config.weight_basis_order},
              {"weight_basis_size", config.weight_basis_size},
              {"learning_rate", config.learning_rate},
              {"batch_size", config.batch_size},
              {"max_epochs", config.max_epochs},
              {"patience", config.patience},
              {"seed", config.seed}};
}

FnnConfig fnn_config_from_json(const json& j) {
  FnnConfig config;
  config.layer_widths = j.at("layer_widths").get<std::vector<int>>();
  config.activations.clear();
  for (const json& name : j.at("activations")) {
    config.activations.push_back(activation_from_name(name.get<std::string>()));
  }
  config.weight_basis_order = j.at("weight_basis_order").get<int>();
  config.weight_basis_size = j.at("weight_basis_size").get<int>();
  config.learning_rate = j.at("learning_rate").get<double>();
  config.batch_size = j.at("batch_size").get<int>();
  config.max_epochs = j.at("max_epochs").get<int>();
  config.patience = j.at("patience").get<int>();
  config.seed = j.at("seed").get<std::uint64_t>();
  return config;
}

json mfpca_to_json(const MfpcaModel& model) {
  json bases = json::array();
  json coeffs = json::array();
  for (int p = 0; p < model.n_covariates(); ++p) {
    bases.push_back(basis_to_json(model.bases[static_cast<std::size_t>(p)]));
    coeffs.push_back(
        matrix_to_json(model.eigenfunction_coeffs[static_cast<std::size_t>(p)]));
  }
  return json{{"eigenvalues", vector_to_json(model.eigenvalues)},
              {"bases", std::move(bases)},
              {"eigenfunction_coeffs", std::move(coeffs)},
              {"standardization", standardization_to_json(model.standardization)},
              {"rule", rule_to_json(model.rule)}};
}

std::shared_ptr<MfpcaModel> mfpca_from_json(const json& j) {
  auto model = std::make_shared<MfpcaModel>(MfpcaModel{
      vector_from_json(j.at("eigenvalues")),
      {},
      {},
      {},
      standardization_from_json(j.at("standardization")),
      rule_from_json(j.at("rule"))});
  const json& bases = j.at("bases");
  const json& coeffs = j.at("eigenfunction_coeffs");
  for (std::size_t p = 0; p < bases.size(); ++p) {
    BSplineBasis basis = basis_from_json(bases[p]);
    Eigen::MatrixXd c = matrix_from_json(coeffs[p]);
    // Same synthesis as fit_mfpca, so reloaded scores match bit-for-bit.
    model->eigenfunction_values.push_back(
        c * basis.evaluate(model->rule.grid).transpose());
    model->eigenfunction_coeffs.push_back(std::move(c));
    model->bases.push_back(std::move(basis));
  }
  return model;
}

json predictor_to_json(const Predictor& predictor) {
  json doc{{"format_version", 1},
           {"type", "predictor"},
           {"kind", predictor_kind_name(predictor.kind())}};
  switch (predictor.kind()) {
    case PredictorKind::scc:
      break;
    case PredictorKind::sof_linear: {
      const auto& p = static_cast<const SofPredictor&>(predictor);
      doc["smoothing"] = smoothing_to_json(p.smoothing);
      doc["mfpca"] = mfpca_to_json(*p.mfpca);
      doc["alpha_hat"] = p.model.alpha;
      doc["b_hat"] = vector_to_json(p.model.b);
      break;
    }
    case PredictorKind::fnn: {
      const auto& p = static_cast<const FnnPredictor&>(predictor);
      doc["smoothing"] = smoothing_to_json(p.smoothing);
      doc["standardization"] = standardization_to_json(p.standardization);
      doc["config"] = fnn_config_to_json(p.model.config);
      doc["weight_basis"] = basis_to_json(p.model.weight_basis);
      doc["rule"] = rule_to_json(p.model.rule);
      doc["n_functional_covariates"] = p.model.n_functional_covariates;
      doc["n_scalar_covariates"] = p.model.n_scalar_covariates;
      doc["net"] = net_to_json(p.model.net);
      break;
    }
    case PredictorKind::rawdata_mlp: {
      const auto& p = static_cast<const RawdataMlpPredictor&>(predictor);
      doc["grid"] = grid_to_json(p.grid);
      json mean = json::array();
      json sd = json::array();
      for (std::size_t i = 0; i < p.mean.size(); ++i) {
        mean.push_back(vector_to_json(p.mean[i]));
        sd.push_back(vector_to_json(p.sd[i]));
      }
      doc["mean"] = std::move(mean);
      doc["sd"] = std::move(sd);
      doc["config"] = fnn_config_to_json(p.config);
      doc["net"] = net_to_json(p.net);
      break;
    }
    case PredictorKind::bspline_mlp: {
      const auto& p = static_cast<const BsplineMlpPredictor&>(predictor);
      doc["smoothing"] = smoothing_to_json(p.smoothing);
      doc["coeff_mean"] = vector_to_json(p.coeff_mean);
      doc["coeff_sd"] = vector_to_json(p.coeff_sd);
      doc["config"] = fnn_config_to_json(p.config);
      doc["net"] = net_to_json(p.net);
      break;
    }
  }
  return doc;
}

std::shared_ptr<Predictor> predictor_from_json(const json& doc) {
  const int version = doc.at("format_version").get<int>();
  if (version != 1) {
    throw Error(ErrorCode::version_mismatch,
                "predictor document format_version " + std::to_string(version) +
                    " is not supported (expected 1); no migration available");
  }
  const PredictorKind kind =
      predictor_kind_from_name(doc.at("kind").get<std::string>());
  switch (kind) {
    case PredictorKind::scc:
      return std::make_shared<SccPredictor>();
    case PredictorKind::sof_linear: {
      auto p = std::make_shared<SofPredictor>();
      p->smoothing = smoothing_from_json(doc.at("smoothing"));
      p->mfpca = mfpca_from_json(doc.at("mfpca"));
      p->model.alpha = doc.at("alpha_hat").get<double>();
      p->model.b = vector_from_json(doc.at("b_hat"));
      p->model.mfpca = p->mfpca;
      return p;
    }
    case PredictorKind::fnn: {
      auto p = std::make_shared<FnnPredictor>();
      p->smoothing = smoothing_from_json(doc.at("smoothing"));
      p->standardization = standardization_from_json(doc.at("standardization"));
      p->model.config = fnn_config_from_json(doc.at("config"));
      p->model.weight_basis = basis_from_json(doc.at("weight_basis"));
      p->model.rule = rule_from_json(doc.at("rule"));
      p->model.n_functional_covariates =
          doc.at("n_functional_covariates").get<int>();
      p->model.n_scalar_covariates = doc.at("n_scalar_covariates").get<int>();
      p->model.net = net_from_json(doc.at("net"));
      return p;
    }
    case PredictorKind::rawdata_mlp: {
      auto p = std::make_shared<RawdataMlpPredictor>();
      p->grid = grid_from_json(doc.at("grid"));
      for (const json& v : doc.at("mean")) p->mean.push_back(vector_from_json(v));
      for (const json& v : doc.at("sd")) p->sd.push_back(vector_from_json(v));
      p->config = fnn_config_from_json(doc.at("config"));
      p->net = net_from_json(doc.at("net"));
      return p;
    }
    case PredictorKind::bspline_mlp: {
      auto p = std::make_shared<BsplineMlpPredictor>();
      p->smoothing = smoothing_from_json(doc.at("smoothing"));
      p->coeff_mean = vector_from_json(doc.at("coeff_mean"));
      p->coeff_sd = vector_from_json(doc.at("coeff_sd"));
      p->config = fnn_config_from_json(doc.at("config"));
      p->net = net_from_json(doc.at("net"));
      return p;
    }
  }
  throw Error(ErrorCode::internal, "unreachable predictor kind");
}

json parse_json_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& error) {
    throw Error(ErrorCode::parse, "'" + path.string() + "': JSON parse error at byte " +
                                      std::to_string(error.byte) + ": " +
                                      error.what());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Public helpers
// ---------------------------------------------------------------------------

Eigen::VectorXd align_responses(const ProfileSet& profiles,
                                const std::vector<std::string>& response_ids,
                                const Eigen::VectorXd& responses) {
  if (static_cast<Eigen::Index>(response_ids.size()) != responses.size()) {
    throw Error(ErrorCode::schema, "response ids and values differ in length");
  }
  std::map<std::string, double> by_id;
  for (std::size_t i = 0; i < response_ids.size(); ++i) {
    if (!by_id.emplace(response_ids[i], responses[static_cast<Eigen::Index>(i)])
             .second) {
      throw Error(ErrorCode::schema,
                  "duplicate sample_id '" + response_ids[i] + "' in responses");
    }
  }
  if (by_id.size() != profiles.sample_ids.size()) {
    throw Error(ErrorCode::schema,
                "responses and profiles list different sample counts");
  }
  Eigen::VectorXd y(profiles.n_samples());
  for (int i = 0; i < profiles.n_samples(); ++i) {
    const auto it = by_id.find(profiles.sample_ids[static_cast<std::size_t>(i)]);
    if (it == by_id.end()) {
      throw Error(ErrorCode::schema,
                  "orphan sample_id '" +
                      profiles.sample_ids[static_cast<std::size_t>(i)] +
                      "' has no response");
    }
    y[i] = it->second;
  }
  return y;
}

std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

void atomic_write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::io, "cannot write '" + tmp.string() + "'");
    }
    out << text;
    out.flush();
    if (!out) {
      throw Error(ErrorCode::io, "write failed for '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw Error(ErrorCode::io, "cannot rename '" + tmp.string() + "' to '" +
                                   path.string() + "': " + ec.message());
  }
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

ProfileSet read_profiles_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::parse, "'" + path.string() + "': empty file");
  }
  check_header(line, "sample_id,covariate_id,t,value", path);

  // (covariate -> sample -> sorted (t, value)); insertion order is preserved
  // separately so output ordering is deterministic.
  std::map<std::string, std::map<std::string, std::map<double, double>>> table;
  std::vector<std::string> covariate_order;
  std::vector<std::string> sample_order;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != 4) {
      throw Error(ErrorCode::parse, "'" + path.string() + "' line " +
                                        std::to_string(line_no) +
                                        ": expected 4 fields");
    }
    const std::string& sample = fields[0];
    const std::string& covariate = fields[1];
    const double t = parse_double(fields[2], path, line_no);
    const double value = parse_double(fields[3], path, line_no);
    auto& samples = table[covariate];
    if (samples.empty()) covariate_order.push_back(covariate);
    auto& series = samples[sample];
    if (series.empty() &&
        std::find(sample_order.begin(), sample_order.end(), sample) ==
            sample_order.end()) {
      sample_order.push_back(sample);
    }
    if (!series.emplace(t, value).second) {
      throw Error(ErrorCode::schema, "'" + path.string() + "' line " +
                                         std::to_string(line_no) +
                                         ": duplicate (sample_id, covariate_id, t)");
    }
  }
  if (table.empty()) {
    throw Error(ErrorCode::schema, "'" + path.string() + "': no profile rows");
  }

  // All samples of all covariates must share one grid.
  const auto& first_series = table[covariate_order.front()].begin()->second;
  Eigen::VectorXd t_points(first_series.size());
  {
    Eigen::Index i = 0;
    for (const auto& [t, value] : first_series) t_points[i++] = t;
  }

  ProfileSet set{Grid(t_points), {}, {}, sample_order};
  for (const std::string& covariate : covariate_order) {
    auto& samples = table[covariate];
    Eigen::MatrixXd values(sample_order.size(), t_points.size());
    for (std::size_t si = 0; si < sample_order.size(); ++si) {
      auto it = samples.find(sample_order[si]);
      if (it == samples.end() ||
          static_cast<Eigen::Index>(it->second.size()) != t_points.size()) {
        throw Error(ErrorCode::schema,
                    "'" + path.string() + "': sample '" + sample_order[si] +
                        "' does not cover the full grid of covariate '" +
                        covariate + "'");
      }
      Eigen::Index j = 0;
      for (const auto& [t, value] : it->second) {
        if (t != t_points[j]) {
          throw Error(ErrorCode::schema,
                      "'" + path.string() + "': sample '" + sample_order[si] +
                          "' observed at off-grid t");
        }
        values(si, j++) = value;
      }
    }
    set.covariate_ids.push_back(covariate);
    set.values.push_back(std::move(values));
  }
  return set;
}

void write_profiles_csv(const std::filesystem::path& path, const ProfileSet& profiles) {
  std::string text = "sample_id,covariate_id,t,value\n";
  for (std::size_t p = 0; p < profiles.values.size(); ++p) {
    const Eigen::MatrixXd& values = profiles.values[p];
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      const std::string& sample =
          i < static_cast<Eigen::Index>(profiles.sample_ids.size())
              ? profiles.sample_ids[static_cast<std::size_t>(i)]
              : std::to_string(i + 1);
      for (int j = 0; j < profiles.grid.size(); ++j) {
        text += sample;
        text += ',';
        text += profiles.covariate_ids[p];
        text += ',';
        text += format_double(profiles.grid[j]);
        text += ',';
        text += format_double(values(i, j));
        text += '\n';
      }
    }
  }
  atomic_write_text(path, text);
}

std::pair<std::vector<std::string>, Eigen::VectorXd> read_responses_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::parse, "'" + path.string() + "': empty file");
  }
  check_header(line, "sample_id,y", path);

  std::vector<std::string> ids;
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != 2) {
      throw Error(ErrorCode::parse, "'" + path.string() + "' line " +
                                        std::to_string(line_no) +
                                        ": expected 2 fields");
    }
    ids.push_back(fields[0]);
    values.push_back(parse_double(fields[1], path, line_no));
  }
  Eigen::VectorXd y(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    y[static_cast<Eigen::Index>(i)] = values[i];
  }
  return {std::move(ids), std::move(y)};
}

void write_responses_csv(const std::filesystem::path& path,
                         const std::vector<std::string>& sample_ids,
                         const Eigen::VectorXd& y) {
  std::string text = "sample_id,y\n";
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    text += i < static_cast<Eigen::Index>(sample_ids.size())
                ? sample_ids[static_cast<std::size_t>(i)]
                : std::to_string(i + 1);
    text += ',';
    text += format_double(y[i]);
    text += '\n';
  }
  atomic_write_text(path, text);
}

void write_chart_points_csv(const std::filesystem::path& path,
                            const std::vector<ChartPoint>& points,
                            const ControlChart& chart) {
  std::string text = "id,statistic,lcl,ucl,signal\n";
  for (const ChartPoint& point : points) {
    text += point.id;
    text += ',';
    text += format_double(point.value);
    text += ',';
    text += format_double(chart.lcl);
    text += ',';
    text += format_double(chart.ucl);
    text += ',';
    text += point.signal ? "true" : "false";
    text += '\n';
  }
  atomic_write_text(path, text);
}

void write_arl_table_csv(const std::filesystem::path& path,
                         const std::vector<ArlEstimate>& estimates) {
  std::string text =
      "scenario,chart,shift_multiple,covariate_delta,n_oc,p_hat,arl,se_arl\n";
  for (const ArlEstimate& e : estimates) {
    text += e.scenario;
    text += ',';
    text += e.chart;
    text += ',';
    text += format_double(e.shift_multiple);
    text += ',';
    text += format_double(e.covariate_delta);
    text += ',';
    text += std::to_string(e.n_oc);
    text += ',';
    text += e.failed ? "nan" : format_double(e.p_hat);
    text += ',';
    text += e.failed ? "nan" : format_double(e.arl);
    text += ',';
    text += e.failed ? "nan" : format_double(e.se_arl);
    text += '\n';
  }
  atomic_write_text(path, text);
}

// ---------------------------------------------------------------------------
// Documents
// ---------------------------------------------------------------------------

void save_predictor(const std::filesystem::path& path, const Predictor& predictor) {
  atomic_write_text(path, predictor_to_json(predictor).dump(2) + "\n");
}

std::shared_ptr<Predictor> load_predictor(const std::filesystem::path& path) {
  const json doc = parse_json_file(path);
  try {
    if (doc.at("type").get<std::string>() != "predictor") {
      throw Error(ErrorCode::schema,
                  "'" + path.string() + "' is not a predictor document");
    }
    return predictor_from_json(doc);
  } catch (const json::exception& error) {
    throw Error(ErrorCode::schema,
                "'" + path.string() + "': " + std::string(error.what()));
  }
}

void save_chart(const std::filesystem::path& path, const ControlChart& chart) {
  json doc{{"format_version", 1},
           {"type", "chart"},
           {"lcl", chart.lcl},
           {"ucl", chart.ucl},
           {"alpha", chart.alpha},
           {"statistic", chart.statistic == ChartStatistic::response ? "response"
                                                                     : "residual"},
           {"predictor", predictor_to_json(*chart.predictor)}};
  atomic_write_text(path, doc.dump(2) + "\n");
}

ControlChart load_chart(const std::filesystem::path& path) {
  const json doc = parse_json_file(path);
  try {
    const int version = doc.at("format_version").get<int>();
    if (version != 1) {
      throw Error(ErrorCode::version_mismatch,
                  "chart document format_version " + std::to_string(version) +
                      " is not supported (expected 1); no migration available");
    }
    if (doc.at("type").get<std::string>() != "chart") {
      throw Error(ErrorCode::schema, "'" + path.string() + "' is not a chart document");
    }
    ControlChart chart;
    chart.lcl = doc.at("lcl").get<double>();
    chart.ucl = doc.at("ucl").get<double>();
    chart.alpha = doc.at("alpha").get<double>();
    chart.statistic = doc.at("statistic").get<std::string>() == "response"
                          ? ChartStatistic::response
                          : ChartStatistic::residual;
    chart.predictor = predictor_from_json(doc.at("predictor"));
    return chart;
  } catch (const json::exception& error) {
    throw Error(ErrorCode::schema,
                "'" + path.string() + "': " + std::string(error.what()));
  }
}

// ---------------------------------------------------------------------------
// Ingest
// ---------------------------------------------------------------------------

IngestResult ingest(const ProfileSet& profiles,
                    const std::vector<std::string>& response_ids,
                    const Eigen::VectorXd& responses, const IngestSpec& spec) {
  if (spec.trim_fraction < 0.0 || spec.trim_fraction >= 1.0) {
    throw Error(ErrorCode::config, "trim_fraction must lie in [0, 1)");
  }

  // Trim the leading fraction of the observed domain, then re-map the
  // retained interval onto [0, 1].
  const Eigen::VectorXd& t = profiles.grid.points();
  const double t_min = t[0];
  const double t_max = t[t.size() - 1];
  const double cut = t_min + spec.trim_fraction * (t_max - t_min);
  std::vector<int> keep;
  for (int j = 0; j < profiles.grid.size(); ++j) {
    if (t[j] >= cut - 1e-12) keep.push_back(j);
  }
  if (keep.size() < 4) {
    throw Error(ErrorCode::data, "trimming leaves fewer than 4 grid points");
  }

  Eigen::VectorXd new_t(keep.size());
  const double lo = t[keep.front()];
  const double hi = t[keep.back()];
  for (std::size_t j = 0; j < keep.size(); ++j) {
    new_t[static_cast<Eigen::Index>(j)] = (t[keep[j]] - lo) / (hi - lo);
  }
  new_t[0] = 0.0;
  new_t[new_t.size() - 1] = 1.0;

  IngestResult result{
      ProfileSet{Grid(new_t), profiles.covariate_ids, {}, profiles.sample_ids},
      {},
      {},
      Eigen::VectorXd()};
  for (const Eigen::MatrixXd& values : profiles.values) {
    Eigen::MatrixXd trimmed(values.rows(), keep.size());
    for (std::size_t j = 0; j < keep.size(); ++j) {
      trimmed.col(static_cast<Eigen::Index>(j)) = values.col(keep[j]);
    }
    result.canonical.values.push_back(std::move(trimmed));
  }

  // Responses: derived RMS of a covariate difference, or aligned from the
  // response table by sample_id.
  const int n = result.canonical.n_samples();
  if (spec.rms_response.has_value()) {
    const auto find_covariate = [&](const std::string& id) {
      for (std::size_t p = 0; p < result.canonical.covariate_ids.size(); ++p) {
        if (result.canonical.covariate_ids[p] == id) return p;
      }
      throw Error(ErrorCode::schema,
                  "rms_response covariate '" + id + "' not found in profiles");
    };
    const Eigen::MatrixXd diff =
        result.canonical.values[find_covariate(spec.rms_response->minuend)] -
        result.canonical.values[find_covariate(spec.rms_response->subtrahend)];
    result.y = (diff.array().square().rowwise().mean()).sqrt();
  } else {
    if (static_cast<int>(response_ids.size()) != responses.size()) {
      throw Error(ErrorCode::schema, "response ids and values differ in length");
    }
    std::map<std::string, double> by_id;
    for (std::size_t i = 0; i < response_ids.size(); ++i) {
      if (!by_id.emplace(response_ids[i], responses[static_cast<Eigen::Index>(i)])
               .second) {
        throw Error(ErrorCode::schema, "duplicate sample_id '" + response_ids[i] +
                                           "' in responses");
      }
    }
    if (by_id.size() != result.canonical.sample_ids.size()) {
      throw Error(ErrorCode::schema,
                  "responses and profiles list different sample counts");
    }
    result.y.resize(n);
    for (int i = 0; i < n; ++i) {
      const auto it = by_id.find(result.canonical.sample_ids[static_cast<std::size_t>(i)]);
      if (it == by_id.end()) {
        throw Error(ErrorCode::schema,
                    "orphan sample_id '" +
                        result.canonical.sample_ids[static_cast<std::size_t>(i)] +
                        "' has no response");
      }
      result.y[i] = it->second;
    }
  }

  for (std::size_t p = 0; p < result.canonical.values.size(); ++p) {
    const BSplineBasis basis(spec.basis_order, spec.basis_size);
    SmoothResult smooth =
        smooth_profiles(result.canonical.values[p], result.canonical.grid, basis,
                        spec.penalty, result.canonical.covariate_ids[p]);
    result.lambdas.push_back(smooth.lambda);
    result.fd.push_back(std::move(smooth.fd));
  }
  return result;
}

}  // namespace fnncc
