#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cdda/domain.hpp"

namespace cdda {

enum class DatasetFormat { Csv, Binary };

/// A feature file as stored: one column per sample, labels 1-based as written.
/// A labels-only file has zero feature rows.
struct Dataset {
  Matrix features;                        // m x n
  std::optional<std::vector<int>> labels;  // length n, each >= 1

  Eigen::Index dim() const { return features.rows(); }
  Eigen::Index size() const;
};

/// .csv -> Csv, .cdda -> Binary; anything else is a Config error.
DatasetFormat format_from_path(const std::string& path);

// CSV: first line "m,n,has_labels", then n lines of m features and, when
// has_labels is 1, a trailing integer label.
Dataset read_csv(std::istream& in, const std::string& source_name = "<stream>");
void write_csv(std::ostream& out, const Dataset& data);

// Binary: "CDDA1", u32 m, u32 n, u8 label flag, m*n f64 column-major, n i32
// labels. All little-endian.
Dataset read_binary(std::istream& in, const std::string& source_name = "<stream>");
void write_binary(std::ostream& out, const Dataset& data);

Dataset load_dataset(const std::string& path);
void save_dataset(const std::string& path, const Dataset& data);

enum class NormalizePolicy { UnitLengthColumns, ZscoreRows, None };

NormalizePolicy parse_normalize_policy(const std::string& name);
std::string to_string(NormalizePolicy policy);

struct Normalized {
  Matrix data;
  std::vector<Eigen::Index> flagged;  // zero columns or zero-variance rows
};

/// unit_length_columns leaves zero columns as they are; zscore_rows only
/// centers zero-variance rows (population standard deviation).
Normalized normalize(const Matrix& x, NormalizePolicy policy);
FeatureMatrix normalize(const FeatureMatrix& x, NormalizePolicy policy);

/// Gaussian class clusters; the target domain applies a rotation in the plane
/// of the first two coordinates followed by a translation.
struct SynthTaskSpec {
  int classes = 2;
  int dim = 10;
  std::vector<Vector> means;       // empty: separation * e_(c mod dim)
  std::vector<Matrix> covariances; // empty: noise^2 * I for every class
  double separation = 3.0;
  double noise = 1.0;
  Vector translation;   // empty: shift * (1,...,1)/sqrt(dim)
  double shift = 1.0;
  double rotation = 0.0;  // radians
  int source_per_class = 50;
  int target_per_class = 50;
  std::uint64_t seed = 1;

  /// Throws InvalidSpec, including for covariances that are not positive definite.
  void validate() const;
};

struct SynthTask {
  FeatureMatrix x;
  Labels source_labels;  // 0-based
  Labels target_truth;   // 0-based, evaluation only
};

SynthTask generate_synth(const SynthTaskSpec& spec);

}  // namespace cdda
