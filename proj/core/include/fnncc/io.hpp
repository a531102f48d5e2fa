#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fnncc/arl.hpp"
#include "fnncc/charts.hpp"

namespace fnncc {

// ---------------------------------------------------------------------------
// CSV formats. All files are self-describing (header row) and written
// atomically (temp file + rename).
// ---------------------------------------------------------------------------

// Long-format profile file: sample_id,covariate_id,t,value. Every sample must
// cover the full grid of its covariate; rows may appear in any order.
ProfileSet read_profiles_csv(const std::filesystem::path& path);
void write_profiles_csv(const std::filesystem::path& path, const ProfileSet& profiles);

// sample_id,y
std::pair<std::vector<std::string>, Eigen::VectorXd> read_responses_csv(
    const std::filesystem::path& path);
void write_responses_csv(const std::filesystem::path& path,
                         const std::vector<std::string>& sample_ids,
                         const Eigen::VectorXd& y);

// id,statistic,lcl,ucl,signal
void write_chart_points_csv(const std::filesystem::path& path,
                            const std::vector<ChartPoint>& points,
                            const ControlChart& chart);

// scenario,chart,shift_multiple,covariate_delta,n_oc,p_hat,arl,se_arl
void write_arl_table_csv(const std::filesystem::path& path,
                         const std::vector<ArlEstimate>& estimates);

// ---------------------------------------------------------------------------
// Model and chart documents (JSON, format_version field, atomic writes).
// Doubles are serialized losslessly, so a reload reproduces forward outputs
// bit-for-bit.
// ---------------------------------------------------------------------------

void save_predictor(const std::filesystem::path& path, const Predictor& predictor);
std::shared_ptr<Predictor> load_predictor(const std::filesystem::path& path);

void save_chart(const std::filesystem::path& path, const ControlChart& chart);
ControlChart load_chart(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Ingestion of external profile data.
// ---------------------------------------------------------------------------

struct IngestSpec {
  // Leading fraction of the domain to discard before re-mapping the retained
  // interval onto [0, 1].
  double trim_fraction = 0.0;
  int basis_order = 4;
  int basis_size = 70;
  PenaltySpec penalty = PenaltySpec::gcv();
  // When set, the response is derived as the RMS over the retained domain of
  // (minuend - subtrahend) between the two named covariates.
  struct RmsResponse {
    std::string minuend;
    std::string subtrahend;
  };
  std::optional<RmsResponse> rms_response;
};

struct IngestResult {
  ProfileSet canonical;        // trimmed, re-mapped raw values
  MultiFunctionalData fd;      // smoothed representation
  std::vector<double> lambdas; // selected smoothing parameter per covariate
  Eigen::VectorXd y;           // aligned with canonical.sample_ids
};

// Aligns profiles with responses by sample_id (orphans on either side are
// schema errors), trims and re-maps the domain, then smooths per spec. When
// rms_response is set the responses argument may be empty.
IngestResult ingest(const ProfileSet& profiles,
                    const std::vector<std::string>& response_ids,
                    const Eigen::VectorXd& responses, const IngestSpec& spec);

// ---------------------------------------------------------------------------
// Misc helpers shared by the CLI.
// ---------------------------------------------------------------------------

// Reorder a response table onto the profile sample order; missing or surplus
// sample_ids are schema errors.
Eigen::VectorXd align_responses(const ProfileSet& profiles,
                                const std::vector<std::string>& response_ids,
                                const Eigen::VectorXd& responses);

void atomic_write_text(const std::filesystem::path& path, const std::string& text);
std::string format_double(double value);  // shortest round-trip decimal

}  // namespace fnncc
