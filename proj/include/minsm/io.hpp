#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "minsm/dataset.hpp"
#include "minsm/mcmc_engine.hpp"
#include "minsm/mixture_model.hpp"

namespace minsm {

/// Thrown for unreadable input and malformed files; messages carry row and
/// column numbers (1-based).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Headerless numeric CSV, one point per row. With `has_labels`, the final
/// column is an integer ground-truth label.
Dataset load_csv(const std::filesystem::path& path, bool has_labels = false);
Dataset parse_csv(std::istream& in, bool has_labels = false);

/// Values printed with 17 significant digits; labels appended when present.
void write_csv(const Dataset& data, const std::filesystem::path& path);
void write_csv(const Dataset& data, std::ostream& out);

struct SyntheticSpec {
  std::size_t k = 10;
  std::size_t n = 100;
  std::size_t dim = 25;
  std::uint64_t seed = 1;
  double mean_low = -10.0;
  double mean_high = 10.0;
  double var_low = 0.5;
  double var_high = 2.0;

  void validate() const;
};

/// k diagonal Gaussians with uniform means and per-dimension variances.
/// Points are split evenly and the remainder goes to the first clusters.
Dataset generate_synthetic(const SyntheticSpec& spec);

inline constexpr const char* kTraceHeader =
    "iteration,wall_time_ms,log_likelihood,n_clusters,move_type,accepted";

void write_trace(const std::vector<TraceRecord>& trace, const std::filesystem::path& path);
void write_trace(const std::vector<TraceRecord>& trace, std::ostream& out);
std::vector<TraceRecord> read_trace(const std::filesystem::path& path);
std::vector<TraceRecord> parse_trace(std::istream& in);

using Metrics = std::map<std::string, std::string>;
void write_metrics(const Metrics& metrics, const std::filesystem::path& path);
Metrics read_metrics(const std::filesystem::path& path);

/// `point,cluster` rows with canonical (first-appearance) cluster indices.
void write_state(const PartitionState& state, const std::filesystem::path& path);
Labeling read_state(const std::filesystem::path& path);

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double x);

}  // namespace minsm
