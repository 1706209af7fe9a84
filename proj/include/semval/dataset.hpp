#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace semval {

struct LabeledPoint {
  std::vector<double> x;
  double y = 0.0;
};

// Tabular dataset, row-major features, one numeric label per row. `flipped`
// marks rows whose label was deliberately corrupted by a generator; empty when
// unknown.
struct Dataset {
  int dim = 0;
  std::vector<double> features;
  std::vector<double> labels;
  std::vector<std::uint8_t> flipped;
  std::vector<std::string> columns;

  int num_rows() const { return dim == 0 ? 0 : static_cast<int>(labels.size()); }
  const double* row(int i) const { return features.data() + static_cast<std::size_t>(i) * dim; }
  LabeledPoint point(int i) const {
    return LabeledPoint{{row(i), row(i) + dim}, labels[static_cast<std::size_t>(i)]};
  }
  std::string fingerprint() const;
};

// CSV with a header row; every column numeric; last column is the label.
Dataset load_csv(const std::string& path);
void save_csv(const Dataset& ds, const std::string& path);

// Two Gaussian blobs with binary labels (0 = first half, 1 = second half),
// centers at -+1.5/sqrt(dim) per coordinate. A round(flip_fraction * n) subset
// of rows gets its label inverted and its `flipped` flag set.
Dataset make_blobs(int n, int dim, double spread, double flip_fraction, std::uint64_t seed);

std::vector<double> feature_means(const Dataset& ds);

}  // namespace semval
