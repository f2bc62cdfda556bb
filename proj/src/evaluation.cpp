#include "minsm/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace minsm {

namespace {

void check_lengths(std::span<const long> a, std::span<const long> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("labelings differ in length (" + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()) + ")");
  }
  if (a.empty()) {
    throw std::invalid_argument("labelings are empty");
  }
}

// Dense 0..k-1 relabeling in first-appearance order.
std::vector<std::size_t> densify(std::span<const long> labels, std::size_t& k) {
  std::unordered_map<long, std::size_t> ids;
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (long l : labels) {
    out.push_back(ids.try_emplace(l, ids.size()).first->second);
  }
  k = ids.size();
  return out;
}

std::vector<std::vector<double>> contingency(std::span<const long> a, std::span<const long> b,
                                             std::size_t& ka, std::size_t& kb) {
  const auto da = densify(a, ka);
  const auto db = densify(b, kb);
  std::vector<std::vector<double>> table(ka, std::vector<double>(kb, 0.0));
  for (std::size_t i = 0; i < da.size(); ++i) {
    table[da[i]][db[i]] += 1.0;
  }
  return table;
}

double entropy(const std::vector<double>& counts, double n) {
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) {
      h -= (c / n) * std::log(c / n);
    }
  }
  return h;
}

// Minimum-cost assignment on a square matrix (Kuhn-Munkres with potentials).
std::vector<std::size_t> min_cost_assignment(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<bool> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= n; ++j) {
    row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

double nmi(std::span<const long> predicted, std::span<const long> truth) {
  check_lengths(predicted, truth);
  std::size_t ka = 0, kb = 0;
  const auto table = contingency(predicted, truth, ka, kb);
  const double n = static_cast<double>(predicted.size());
  std::vector<double> ra(ka, 0.0), rb(kb, 0.0);
  for (std::size_t i = 0; i < ka; ++i) {
    for (std::size_t j = 0; j < kb; ++j) {
      ra[i] += table[i][j];
      rb[j] += table[i][j];
    }
  }
  const double ha = entropy(ra, n);
  const double hb = entropy(rb, n);
  if (ha == 0.0 || hb == 0.0) {
    return partition_key(predicted) == partition_key(truth) ? 1.0 : 0.0;
  }
  double mi = 0.0;
  for (std::size_t i = 0; i < ka; ++i) {
    for (std::size_t j = 0; j < kb; ++j) {
      const double c = table[i][j];
      if (c > 0.0) {
        mi += (c / n) * std::log(c * n / (ra[i] * rb[j]));
      }
    }
  }
  return std::clamp(mi / std::sqrt(ha * hb), 0.0, 1.0);
}

double accuracy(std::span<const long> predicted, std::span<const long> truth) {
  check_lengths(predicted, truth);
  std::size_t ka = 0, kb = 0;
  const auto table = contingency(predicted, truth, ka, kb);
  const std::size_t k = std::max(ka, kb);
  std::vector<std::vector<double>> cost(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < ka; ++i) {
    for (std::size_t j = 0; j < kb; ++j) {
      cost[i][j] = -table[i][j];
    }
  }
  const auto match = min_cost_assignment(cost);
  double hits = 0.0;
  for (std::size_t i = 0; i < ka; ++i) {
    if (match[i] < kb) {
      hits += table[i][match[i]];
    }
  }
  return hits / static_cast<double>(predicted.size());
}

std::string partition_key(std::span<const long> labels) {
  std::size_t k = 0;
  const auto dense = densify(labels, k);
  std::string key;
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (i > 0) key += ',';
    key += std::to_string(dense[i]);
  }
  return key;
}

PartitionDistribution exact_partition_posterior(const Dataset& data, const Hyperparams& hyper) {
  const std::size_t n = data.size();
  if (n > 10) {
    throw std::invalid_argument("exact enumeration supports at most 10 points (got " +
                                std::to_string(n) + ")");
  }
  std::vector<std::pair<std::string, double>> scored;
  std::vector<long> rgs(n, 0);
  std::vector<long> prefix_max(n, 0);
  // Iterate restricted-growth strings: rgs[i] <= 1 + max(rgs[0..i-1]).
  while (true) {
    scored.emplace_back(partition_key(rgs),
                        state_log_likelihood(PartitionState(data, rgs), hyper));
    std::size_t i = n - 1;
    while (i > 0 && rgs[i] > prefix_max[i - 1]) {
      --i;
    }
    if (i == 0) {
      break;
    }
    ++rgs[i];
    prefix_max[i] = std::max(prefix_max[i - 1], rgs[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      rgs[j] = 0;
      prefix_max[j] = prefix_max[i];
    }
  }
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& [key, logp] : scored) {
    top = std::max(top, logp);
  }
  double total = 0.0;
  for (const auto& [key, logp] : scored) {
    total += std::exp(logp - top);
  }
  PartitionDistribution out;
  for (const auto& [key, logp] : scored) {
    out[key] = std::exp(logp - top) / total;
  }
  return out;
}

double total_variation(const PartitionDistribution& p, const PartitionDistribution& q) {
  double sum = 0.0;
  for (const auto& [key, pv] : p) {
    const auto it = q.find(key);
    sum += std::abs(pv - (it == q.end() ? 0.0 : it->second));
  }
  for (const auto& [key, qv] : q) {
    if (!p.contains(key)) {
      sum += std::abs(qv);
    }
  }
  return 0.5 * sum;
}

ConvergenceSummary convergence_summary(std::span<const TraceRecord> trace,
                                       std::optional<double> reference) {
  if (trace.empty()) {
    throw std::invalid_argument("convergence summary of an empty trace");
  }
  ConvergenceSummary s;
  s.records = trace.size();
  const std::size_t tail = std::max<std::size_t>(1, trace.size() / 10);
  double sum = 0.0;
  for (std::size_t i = trace.size() - tail; i < trace.size(); ++i) {
    sum += trace[i].log_likelihood;
  }
  s.plateau = sum / static_cast<double>(tail);
  s.initial = trace.front().log_likelihood;
  const double target_plateau = reference.value_or(s.plateau);
  const double threshold = s.initial + 0.99 * (target_plateau - s.initial);
  const bool rising = target_plateau >= s.initial;
  s.reached = false;
  s.time_to_plateau_ms = trace.back().wall_time_ms;
  for (const TraceRecord& r : trace) {
    if (rising ? r.log_likelihood >= threshold : r.log_likelihood <= threshold) {
      s.reached = true;
      s.time_to_plateau_ms = r.wall_time_ms;
      break;
    }
  }
  std::size_t moves = 0, accepted = 0;
  for (const TraceRecord& r : trace) {
    if (r.move_type == MoveKind::Init) continue;
    ++moves;
    accepted += r.accepted ? 1 : 0;
  }
  s.acceptance_rate = moves == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(moves);
  return s;
}

}  // namespace minsm
