#pragma once

#include <optional>
#include <string>

#include "postprocess.hpp"
#include "sampler.hpp"
#include "types.hpp"

namespace lsirm {

std::string to_string(ItemParams v);
std::string to_string(ResponseFamily v);
std::string to_string(GammaMode v);
std::string to_string(MissingMode v);
ItemParams parse_item_params(const std::string& s);
ResponseFamily parse_family(const std::string& s);
GammaMode parse_gamma_mode(const std::string& s);
MissingMode parse_missing_mode(const std::string& s);

struct CsvOptions {
  std::string missing_code = "NA";
  bool has_header = false;
};

// Comma-separated numeric matrix; cells equal to the missing code (textually
// or numerically) become unobserved. Ragged rows, non-numeric cells, binary
// domain violations and fully missing rows/columns are rejected.
ResponseMatrix read_response_csv(const std::string& path, const CsvOptions& opts,
                                 ResponseFamily family);

// Drops every respondent with at least one missing cell.
ResponseMatrix complete_cases(const ResponseMatrix& data);

void write_response_csv(const std::string& path, const ResponseMatrix& data,
                        const std::string& missing_code = "NA");

// Columnar text blocks (one file per parameter block, draw-major rows, full
// decimal precision) plus manifest.json. Aligned draws are stored alongside
// when provided; the manifest records the Procrustes reference index.
void write_samples(const PosteriorSamples& samples, const std::string& dir,
                   const AlignedSamples* aligned = nullptr);

// Lossless inverse of write_samples; shape mismatches raise IntegrityError.
PosteriorSamples read_samples(const std::string& dir, AlignedSamples* aligned_out = nullptr);

std::string summary_json_string(const FitSummary& summary, const ModelSpec& spec);
void write_summary_json(const FitSummary& summary, const ModelSpec& spec, const std::string& path);

// Coordinates as CSV with columns kind,index,dim1..dimD (1-based index).
void write_map_csv(const std::string& path, const Matrix& z_est, const Matrix& w_est);

// Generating parameters of a synthetic dataset, including the pre-masking
// values of masked cells for held-out evaluation of imputation.
struct TruthRecord {
  ModelSpec spec;
  double gamma = 0.0;
  ChainState state;
  std::vector<int> item_cluster; // empty unless a clustered layout was used
  std::vector<std::tuple<int, int, double>> masked_cells; // (k, i, true value)
  std::uint64_t seed = 0;
};

void write_truth_json(const TruthRecord& truth, const std::string& path);
TruthRecord read_truth_json(const std::string& path);

}  // namespace lsirm
