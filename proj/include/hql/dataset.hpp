#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hql::data {

/// Row-major feature matrix with one integer label per row. Labels are either
/// binary {-1, +1} or class ids 0..k-1.
struct LabeledDataset {
  std::vector<std::string> columns;  // optional; empty or n_features names
  std::size_t n_features = 0;
  std::vector<double> features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * n_features, n_features};
  }
  /// Sorted distinct labels.
  std::vector<int> classes() const;
  std::size_t class_count() const { return classes().size(); }

  LabeledDataset subset(std::span<const std::size_t> indices) const;
  void append(std::span<const double> row_values, int label);
  /// Throws std::invalid_argument if the matrix and label sizes disagree.
  void validate() const;
};

enum class DatasetName { Parity, Cancer, Wines, Mnist };

/// Expected shape of each dataset; every loader output is checked against it.
struct DatasetSpec {
  DatasetName name;
  std::size_t samples;
  std::size_t features;
  std::size_t classes;
};

DatasetSpec spec_for(DatasetName name);
DatasetName parse_dataset_name(const std::string& name);
std::string to_string(DatasetName name);

/// Throws DataError naming expected and actual counts on mismatch.
void check_against_spec(const LabeledDataset& ds, const DatasetSpec& spec);

/// All 2^n bit strings; label +1 iff the number of ones is odd.
LabeledDataset gen_parity(int n_bits);

/// Reads a canonical CSV: header row of column names with the label in a
/// column named "label". When `spec` is given the result must match it.
LabeledDataset load_csv(const std::filesystem::path& path,
                        const std::optional<DatasetSpec>& spec = std::nullopt);

/// Writes the canonical CSV form read by load_csv.
void write_csv(const std::filesystem::path& path, const LabeledDataset& ds);
std::string to_csv(const LabeledDataset& ds);

enum class ColumnCrop { Left, Right };

/// Loads the 8x8 digit corpus (64 pixel columns + label), rescales
/// intensities to [0, 1] by the corpus maximum and removes one column,
/// giving 8x7 images stored row-major (56 features).
LabeledDataset load_digits(const std::filesystem::path& path,
                           ColumnCrop crop = ColumnCrop::Right);

/// Convenience loader by dataset name: parity is generated, the rest read
/// <data_dir>/{cancer,wines,digits}.csv.
LabeledDataset load_named(DatasetName name, const std::filesystem::path& data_dir,
                          ColumnCrop crop = ColumnCrop::Right);

/// Relabels class `positive` as +1 and everything else as -1.
LabeledDataset one_vs_rest(const LabeledDataset& ds, int positive);

/// Stratified split. `train_fraction` is the share of each class assigned to
/// the training side (2/3 for a 2:1 split); per-class counts are rounded to
/// the nearest integer and clamped so both sides are non-empty.
std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& ds,
                                                double train_fraction,
                                                std::uint64_t seed);

/// Index form of split, returning (train_indices, test_indices) sorted.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    const LabeledDataset& ds, double train_fraction, std::uint64_t seed);

/// Parses "2:1" style ratios into a training fraction.
double parse_ratio(const std::string& text);

}  // namespace hql::data
