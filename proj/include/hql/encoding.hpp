#pragma once

// Feature-to-angle encodings: arctan of standardized tabular features, and
// convolutional local-receptive-field (LRF) encoding of small images.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hql/dataset.hpp"
#include "hql/rng.hpp"

namespace hql::enc {

// ---------------------------------------------------------------------------
// Tabular features

/// Either an explicit list of column names or the top-k decision stumps.
struct FeatureSelector {
  enum class Mode { NamedColumns, StumpTopK };
  Mode mode = Mode::NamedColumns;
  std::vector<std::string> names;  // resolved column names, in selection order
  std::vector<std::size_t> indices;

  std::size_t size() const { return indices.size(); }
};

/// Resolves column names against a dataset; throws ConfigError for unknown names.
FeatureSelector select_named(const data::LabeledDataset& ds,
                             const std::vector<std::string>& names);

/// Column names used for the cancer and wines datasets.
std::vector<std::string> default_columns(data::DatasetName name);

/// Ranks features by the training accuracy of their best single-threshold
/// classifier (either orientation), ties to the lower index, and keeps k.
FeatureSelector stump_importance(const data::LabeledDataset& ds, std::size_t k);

/// Per-column z-score fitted on a training split. Zero-variance columns keep
/// unit scale so they are only centered.
struct Standardizer {
  std::vector<double> means;
  std::vector<double> scales;

  static Standardizer fit(const data::LabeledDataset& ds, const FeatureSelector& sel);
};

/// arctan of the standardized selected features; every angle is in (-pi/2, pi/2).
std::vector<double> preprocess_simple(std::span<const double> raw,
                                      const FeatureSelector& sel,
                                      const Standardizer& standardizer);

/// Maps a raw dataset to encoded rows. Tabular data passes through
/// selection/standardization/arctan; images (no selector) pass through as is.
struct Preprocessor {
  std::optional<FeatureSelector> selector;
  std::optional<Standardizer> standardizer;

  static Preprocessor fit(const data::LabeledDataset& train,
                          std::optional<FeatureSelector> selector);
  data::LabeledDataset transform(const data::LabeledDataset& ds) const;
};

// ---------------------------------------------------------------------------
// Convolutional LRF encoding

/// Geometry of the LRF tiling. The image is padded with zero rows at the
/// bottom and zero columns at the right; placements follow
/// ceil((padded - lrf) / stride) + 1 per axis and any pixel read beyond the
/// padded grid is zero. Each pass reuses the geometry with its own kernels.
struct ConvSpec {
  int image_rows = 8;
  int image_cols = 7;
  int pad_bottom_rows = 1;
  int pad_right_cols = 0;
  int lrf_rows = 3;
  int lrf_cols = 3;
  int stride = 2;
  int passes = 2;

  int padded_rows() const { return image_rows + pad_bottom_rows; }
  int padded_cols() const { return image_cols + pad_right_cols; }
  int row_placements() const;
  int col_placements() const;
  int placements_per_pass() const { return row_placements() * col_placements(); }
  int kernel_count() const { return placements_per_pass() * passes; }
  int patch_size() const { return lrf_rows * lrf_cols; }
  int image_size() const { return image_rows * image_cols; }

  /// Throws std::invalid_argument on non-positive sizes or an LRF larger
  /// than the padded grid.
  void validate() const;

  bool operator==(const ConvSpec&) const = default;
};

/// "3x3/2 pad=1,0 passes=2"
std::string describe(const ConvSpec& spec);
ConvSpec parse_conv_spec(const std::string& text);

struct Patch {
  int pass;
  int row;  // top-left corner in the padded grid
  int col;
  std::vector<double> pixels;  // row-major lrf_rows x lrf_cols
};

/// Patches ordered row-major by (row start, col start), pass 1 then pass 2.
std::vector<Patch> pad_and_tile(std::span<const double> image, const ConvSpec& spec);

/// Independent kernels: kernel i has patch_size weights and one bias.
struct KernelSet {
  int patch_size = 0;
  std::vector<double> weights;  // kernel-major, kernel_count x patch_size
  std::vector<double> biases;

  std::size_t kernel_count() const { return biases.size(); }
  std::size_t scalar_count() const { return weights.size() + biases.size(); }
  std::span<const double> kernel(std::size_t i) const {
    return {weights.data() + i * patch_size, static_cast<std::size_t>(patch_size)};
  }

  static KernelSet zeros(const ConvSpec& spec);
  static KernelSet uniform(const ConvSpec& spec, double half_width, RandomStream& stream);
};

/// angle_i = bias_i + dot(kernel_i, patch_i), in pad_and_tile order.
std::vector<double> conv_encode(std::span<const double> image, const ConvSpec& spec,
                                const KernelSet& kernels);

}  // namespace hql::enc
