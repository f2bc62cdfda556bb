#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "minsm/dataset.hpp"
#include "minsm/mcmc_engine.hpp"
#include "minsm/mixture_model.hpp"

namespace minsm {

/// I(C;C') / sqrt(H(C) H(C')). When either entropy is zero: 1 if the two
/// labelings induce the same partition, else 0.
double nmi(std::span<const long> predicted, std::span<const long> truth);

/// Fraction of points on the diagonal of the contingency table after the
/// optimal one-to-one cluster matching.
double accuracy(std::span<const long> predicted, std::span<const long> truth);

/// Restricted-growth string of a labeling, e.g. "0,0,1,0,2".
std::string partition_key(std::span<const long> labels);

using PartitionDistribution = std::map<std::string, double>;

/// Every set partition of the dataset scored by state_log_likelihood under a
/// uniform partition prior. Throws std::invalid_argument for n > 10.
PartitionDistribution exact_partition_posterior(const Dataset& data, const Hyperparams& hyper);

/// (1/2) sum |p - q| over the union of supports.
double total_variation(const PartitionDistribution& p, const PartitionDistribution& q);

struct ConvergenceSummary {
  double plateau = 0.0;
  double initial = 0.0;
  double time_to_plateau_ms = 0.0;
  bool reached = true;
  double acceptance_rate = 0.0;
  std::size_t records = 0;
};

/// Plateau is the mean log-likelihood of the final 10% of records (at least
/// one). Time-to-plateau is the first wall time whose log-likelihood covers 99%
/// of the gap from the initial record to `reference`, which defaults to the
/// trace's own plateau; `reached` is false and the time is the last record's
/// when no record gets there. The initial record is excluded from the
/// acceptance rate.
ConvergenceSummary convergence_summary(std::span<const TraceRecord> trace,
                                       std::optional<double> reference = std::nullopt);

}  // namespace minsm
