#include "semval/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "semval/errors.hpp"
#include "semval/fingerprint.hpp"
#include "semval/rng.hpp"
#include "semval/simd/kernels.hpp"

namespace semval {

std::string Dataset::fingerprint() const {
  std::uint64_t h = fnv1a64("dataset");
  h = fnv1a64_bytes(h, &dim, sizeof(dim));
  for (double v : features) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    h = fnv1a64_bytes(h, &bits, sizeof(bits));
  }
  for (double v : labels) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    h = fnv1a64_bytes(h, &bits, sizeof(bits));
  }
  return hex64(h);
}

namespace {

double parse_field(const std::string& field, const std::string& path, int line_no) {
  double out = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc{} || ptr != end) {
    throw InvalidArgument("csv " + path + " line " + std::to_string(line_no) +
                          ": non-numeric field '" + field + "'");
  }
  return out;
}

}  // namespace

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open csv: " + path);
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("csv missing header row: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  Dataset ds;
  {
    std::stringstream header(line);
    std::string col;
    while (std::getline(header, col, ',')) ds.columns.push_back(col);
  }
  if (ds.columns.size() < 2) {
    throw InvalidArgument("csv needs at least one feature column and a label column: " + path);
  }
  ds.dim = static_cast<int>(ds.columns.size()) - 1;

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string field;
    std::vector<double> values;
    while (std::getline(row, field, ',')) values.push_back(parse_field(field, path, line_no));
    if (values.size() != ds.columns.size()) {
      throw InvalidArgument("csv " + path + " line " + std::to_string(line_no) +
                            ": expected " + std::to_string(ds.columns.size()) + " fields, got " +
                            std::to_string(values.size()));
    }
    ds.features.insert(ds.features.end(), values.begin(), values.end() - 1);
    ds.labels.push_back(values.back());
  }
  return ds;
}

void save_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write csv: " + path);
  std::vector<std::string> cols = ds.columns;
  if (cols.empty()) {
    for (int j = 0; j < ds.dim; ++j) cols.push_back("f" + std::to_string(j));
    cols.push_back("label");
  }
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (j) out << ',';
    out << cols[j];
  }
  out << '\n';
  char buf[64];
  for (int i = 0; i < ds.num_rows(); ++i) {
    for (int j = 0; j < ds.dim; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", ds.row(i)[j]);
      out << buf << ',';
    }
    std::snprintf(buf, sizeof(buf), "%.17g", ds.labels[static_cast<std::size_t>(i)]);
    out << buf << '\n';
  }
}

Dataset make_blobs(int n, int dim, double spread, double flip_fraction, std::uint64_t seed) {
  if (n < 2 || dim < 1) throw InvalidArgument("make_blobs: need n >= 2 and dim >= 1");
  if (spread <= 0.0) throw InvalidArgument("make_blobs: spread must be positive");
  if (flip_fraction < 0.0 || flip_fraction > 0.5) {
    throw InvalidArgument("make_blobs: flip_fraction must lie in [0, 0.5]");
  }
  Dataset ds;
  ds.dim = dim;
  ds.features.resize(static_cast<std::size_t>(n) * dim);
  ds.labels.resize(static_cast<std::size_t>(n));
  ds.flipped.assign(static_cast<std::size_t>(n), 0);
  for (int j = 0; j < dim; ++j) ds.columns.push_back("f" + std::to_string(j));
  ds.columns.push_back("label");

  const double offset = 1.5 / std::sqrt(static_cast<double>(dim));
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    const int cls = (i < n / 2) ? 0 : 1;
    const double center = (cls == 0) ? -offset : offset;
    double* row = ds.features.data() + static_cast<std::size_t>(i) * dim;
    for (int j = 0; j < dim; ++j) row[j] = center + spread * rng.gauss();
    ds.labels[static_cast<std::size_t>(i)] = cls;
  }
  const int flips = static_cast<int>(std::lround(flip_fraction * n));
  if (flips > 0) {
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    rng.shuffle(order.data(), order.size());
    for (int j = 0; j < flips; ++j) {
      const auto i = static_cast<std::size_t>(order[static_cast<std::size_t>(j)]);
      ds.labels[i] = 1.0 - ds.labels[i];
      ds.flipped[i] = 1;
    }
  }
  return ds;
}

std::vector<double> feature_means(const Dataset& ds) {
  std::vector<double> mu(static_cast<std::size_t>(ds.dim), 0.0);
  const int n = ds.num_rows();
  if (n == 0) return mu;
  for (int i = 0; i < n; ++i) {
    simd::axpy(1.0, ds.row(i), mu.data(), mu.size());
  }
  simd::scal(1.0 / n, mu.data(), mu.size());
  return mu;
}

}  // namespace semval
