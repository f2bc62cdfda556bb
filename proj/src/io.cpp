#include "minsm/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

namespace minsm {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    fields.emplace_back();
  }
  return fields;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string where(std::size_t row, std::size_t column) {
  return "row " + std::to_string(row) + ", column " + std::to_string(column);
}

double parse_real(const std::string& raw, std::size_t row, std::size_t column) {
  const std::string s = trim(raw);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || end != s.data() + s.size()) {
    throw IoError("non-numeric cell '" + s + "' at " + where(row, column));
  }
  return value;
}

long parse_integer(const std::string& raw, std::size_t row, std::size_t column) {
  const std::string s = trim(raw);
  long value = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || end != s.data() + s.size()) {
    throw IoError("non-integer label '" + s + "' at " + where(row, column));
  }
  return value;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "' for reading");
  }
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  return out;
}

void finish(std::ostream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) {
    throw IoError("write to '" + path.string() + "' failed");
  }
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf, static_cast<std::size_t>(len));
}

Dataset parse_csv(std::istream& in, bool has_labels) {
  std::vector<double> values;
  Labeling labels;
  std::size_t dim = 0;
  std::size_t row = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) {
      continue;
    }
    const auto fields = split_fields(line);
    const std::size_t width = fields.size() - (has_labels ? 1 : 0);
    if (has_labels && fields.size() < 2) {
      throw IoError("row " + std::to_string(row) + " needs at least one value and a label");
    }
    if (dim == 0) {
      dim = width;
    } else if (width != dim) {
      throw IoError("row " + std::to_string(row) + " has " + std::to_string(width) +
                    " values, expected " + std::to_string(dim));
    }
    for (std::size_t c = 0; c < width; ++c) {
      const double v = parse_real(fields[c], row, c + 1);
      if (!std::isfinite(v)) {
        throw IoError("non-finite value at " + where(row, c + 1));
      }
      values.push_back(v);
    }
    if (has_labels) {
      labels.push_back(parse_integer(fields.back(), row, fields.size()));
    }
  }
  if (values.empty()) {
    throw IoError("no data rows");
  }
  std::optional<Labeling> truth;
  if (has_labels) {
    truth = std::move(labels);
  }
  return Dataset(dim, std::move(values), std::move(truth));
}

Dataset load_csv(const std::filesystem::path& path, bool has_labels) {
  auto in = open_in(path);
  try {
    return parse_csv(in, has_labels);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_csv(const Dataset& data, std::ostream& out) {
  for (PointId i = 0; i < data.size(); ++i) {
    const VectorView p = data.point(i);
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (j > 0) out << ',';
      out << format_double(p[j]);
    }
    if (data.labels()) {
      out << ',' << (*data.labels())[i];
    }
    out << '\n';
  }
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_csv(data, out);
  finish(out, path);
}

void SyntheticSpec::validate() const {
  if (k == 0 || n == 0 || dim == 0) {
    throw std::invalid_argument("k, n and dimensionality must be positive");
  }
  if (k > n) {
    throw std::invalid_argument("more clusters (" + std::to_string(k) + ") than points (" +
                                std::to_string(n) + ")");
  }
  if (!(mean_low <= mean_high) || !(var_low > 0.0 && var_low <= var_high)) {
    throw std::invalid_argument("invalid mean or variance range");
  }
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> mean_dist(spec.mean_low, spec.mean_high);
  std::uniform_real_distribution<double> var_dist(spec.var_low, spec.var_high);
  std::vector<double> means(spec.k * spec.dim);
  std::vector<double> sds(spec.k * spec.dim);
  for (std::size_t i = 0; i < means.size(); ++i) {
    means[i] = mean_dist(rng);
    sds[i] = std::sqrt(var_dist(rng));
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> values;
  values.reserve(spec.n * spec.dim);
  Labeling labels;
  labels.reserve(spec.n);
  const std::size_t base = spec.n / spec.k;
  const std::size_t extra = spec.n % spec.k;
  for (std::size_t c = 0; c < spec.k; ++c) {
    const std::size_t count = base + (c < extra ? 1 : 0);
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t j = 0; j < spec.dim; ++j) {
        values.push_back(means[c * spec.dim + j] + sds[c * spec.dim + j] * normal(rng));
      }
      labels.push_back(static_cast<long>(c));
    }
  }
  return Dataset(spec.dim, std::move(values), std::move(labels));
}

void write_trace(const std::vector<TraceRecord>& trace, std::ostream& out) {
  out << kTraceHeader << '\n';
  for (const TraceRecord& r : trace) {
    out << r.iteration << ',' << format_double(r.wall_time_ms) << ','
        << format_double(r.log_likelihood) << ',' << r.n_clusters << ',' << to_string(r.move_type)
        << ',' << (r.accepted ? 1 : 0) << '\n';
  }
}

void write_trace(const std::vector<TraceRecord>& trace, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_trace(trace, out);
  finish(out, path);
}

std::vector<TraceRecord> parse_trace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kTraceHeader) {
    throw IoError("trace header mismatch, expected '" + std::string(kTraceHeader) + "'");
  }
  std::vector<TraceRecord> trace;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) {
      continue;
    }
    const auto f = split_fields(line);
    if (f.size() != 6) {
      throw IoError("row " + std::to_string(row) + " has " + std::to_string(f.size()) +
                    " fields, expected 6");
    }
    TraceRecord r;
    r.iteration = static_cast<std::size_t>(parse_integer(f[0], row, 1));
    r.wall_time_ms = parse_real(f[1], row, 2);
    r.log_likelihood = parse_real(f[2], row, 3);
    r.n_clusters = static_cast<std::size_t>(parse_integer(f[3], row, 4));
    try {
      r.move_type = move_kind_from_string(trim(f[4]));
    } catch (const std::invalid_argument&) {
      throw IoError("unknown move type '" + f[4] + "' at " + where(row, 5));
    }
    const long accepted = parse_integer(f[5], row, 6);
    if (accepted != 0 && accepted != 1) {
      throw IoError("accepted flag must be 0 or 1 at " + where(row, 6));
    }
    r.accepted = accepted == 1;
    trace.push_back(r);
  }
  return trace;
}

std::vector<TraceRecord> read_trace(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_trace(in);
}

void write_metrics(const Metrics& metrics, const std::filesystem::path& path) {
  auto out = open_out(path);
  for (const auto& [key, value] : metrics) {
    out << key << '=' << value << '\n';
  }
  finish(out, path);
}

Metrics read_metrics(const std::filesystem::path& path) {
  auto in = open_in(path);
  Metrics metrics;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw IoError("row " + std::to_string(row) + " is not key=value");
    }
    metrics[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return metrics;
}

void write_state(const PartitionState& state, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "point,cluster\n";
  const Labeling labels = state.canonical_labels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out << i << ',' << labels[i] << '\n';
  }
  finish(out, path);
}

Labeling read_state(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "point,cluster") {
    throw IoError(path.string() + ": state header mismatch, expected 'point,cluster'");
  }
  Labeling labels;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 2) {
      throw IoError(path.string() + ": row " + std::to_string(row) + " needs 2 fields");
    }
    const long point = parse_integer(f[0], row, 1);
    if (point != static_cast<long>(labels.size())) {
      throw IoError(path.string() + ": points out of order at row " + std::to_string(row));
    }
    labels.push_back(parse_integer(f[1], row, 2));
  }
  if (labels.empty()) {
    throw IoError(path.string() + ": no state rows");
  }
  return labels;
}

}  // namespace minsm
