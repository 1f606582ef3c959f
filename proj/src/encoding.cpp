#include "hql/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <regex>
#include <sstream>
#include <stdexcept>

#include "hql/errors.hpp"

namespace hql::enc {

FeatureSelector select_named(const data::LabeledDataset& ds,
                             const std::vector<std::string>& names) {
  FeatureSelector sel;
  sel.mode = FeatureSelector::Mode::NamedColumns;
  for (const auto& name : names) {
    const auto it = std::find(ds.columns.begin(), ds.columns.end(), name);
    if (it == ds.columns.end()) throw ConfigError("unknown feature column '" + name + "'");
    sel.names.push_back(name);
    sel.indices.push_back(static_cast<std::size_t>(it - ds.columns.begin()));
  }
  return sel;
}

std::vector<std::string> default_columns(data::DatasetName name) {
  switch (name) {
    case data::DatasetName::Cancer:
      return {"worst radius", "worst concave points", "worst texture", "mean texture"};
    case data::DatasetName::Wines:
      return {"proline", "flavanoids", "color intensity", "alcohol"};
    case data::DatasetName::Parity:
      return {"b0", "b1", "b2", "b3"};
    case data::DatasetName::Mnist:
      break;
  }
  return {};
}

namespace {

// Best accuracy of a one-threshold rule that predicts the majority class on
// each side of the threshold.
double stump_accuracy(const data::LabeledDataset& ds, std::size_t feature,
                      const std::vector<int>& classes) {
  const std::size_t n = ds.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ds.row(a)[feature] < ds.row(b)[feature];
  });
  std::map<int, std::size_t> class_pos;
  for (std::size_t c = 0; c < classes.size(); ++c) class_pos[classes[c]] = c;

  std::vector<std::size_t> left(classes.size(), 0), right(classes.size(), 0);
  for (int y : ds.labels) ++right[class_pos[y]];
  auto score = [&] {
    return *std::max_element(left.begin(), left.end()) +
           *std::max_element(right.begin(), right.end());
  };
  std::size_t best = score();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto c = class_pos[ds.labels[order[i]]];
    ++left[c];
    --right[c];
    if (ds.row(order[i])[feature] == ds.row(order[i + 1])[feature]) continue;
    best = std::max(best, score());
  }
  return static_cast<double>(best) / static_cast<double>(n);
}

}  // namespace

FeatureSelector stump_importance(const data::LabeledDataset& ds, std::size_t k) {
  if (k == 0 || k > ds.n_features)
    throw std::invalid_argument("stump_importance: k must be in [1, feature count]");
  const auto classes = ds.classes();
  if (classes.size() < 2) throw std::invalid_argument("stump_importance: need >= 2 classes");

  std::vector<double> acc(ds.n_features);
  for (std::size_t f = 0; f < ds.n_features; ++f) acc[f] = stump_accuracy(ds, f, classes);
  std::vector<std::size_t> order(ds.n_features);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return acc[a] > acc[b]; });

  FeatureSelector sel;
  sel.mode = FeatureSelector::Mode::StumpTopK;
  for (std::size_t i = 0; i < k; ++i) {
    sel.indices.push_back(order[i]);
    sel.names.push_back(ds.columns.empty() ? "x" + std::to_string(order[i])
                                           : ds.columns[order[i]]);
  }
  return sel;
}

Standardizer Standardizer::fit(const data::LabeledDataset& ds, const FeatureSelector& sel) {
  if (ds.empty()) throw std::invalid_argument("cannot standardize an empty dataset");
  Standardizer s;
  const double n = static_cast<double>(ds.size());
  for (std::size_t col : sel.indices) {
    if (col >= ds.n_features) throw std::invalid_argument("selector index out of range");
    double mean = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) mean += ds.row(i)[col];
    mean /= n;
    double var = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const double d = ds.row(i)[col] - mean;
      var += d * d;
    }
    const double sd = std::sqrt(var / n);
    s.means.push_back(mean);
    s.scales.push_back(sd > 0.0 ? sd : 1.0);
  }
  return s;
}

std::vector<double> preprocess_simple(std::span<const double> raw, const FeatureSelector& sel,
                                      const Standardizer& standardizer) {
  if (standardizer.means.size() != sel.size())
    throw std::invalid_argument("standardizer does not match selector");
  std::vector<double> angles(sel.size());
  for (std::size_t i = 0; i < sel.size(); ++i) {
    if (sel.indices[i] >= raw.size())
      throw std::invalid_argument("selector index out of range for sample");
    angles[i] = std::atan((raw[sel.indices[i]] - standardizer.means[i]) / standardizer.scales[i]);
  }
  return angles;
}

Preprocessor Preprocessor::fit(const data::LabeledDataset& train,
                               std::optional<FeatureSelector> selector) {
  Preprocessor p;
  if (selector) {
    p.standardizer = Standardizer::fit(train, *selector);
    p.selector = std::move(selector);
  }
  return p;
}

data::LabeledDataset Preprocessor::transform(const data::LabeledDataset& ds) const {
  if (!selector) return ds;
  data::LabeledDataset out;
  out.n_features = selector->size();
  out.columns = selector->names;
  for (std::size_t i = 0; i < ds.size(); ++i)
    out.append(preprocess_simple(ds.row(i), *selector, *standardizer), ds.labels[i]);
  return out;
}

// ---------------------------------------------------------------------------

namespace {
int placements(int padded, int lrf, int stride) {
  return (padded - lrf + stride - 1) / stride + 1;
}
}  // namespace

int ConvSpec::row_placements() const { return placements(padded_rows(), lrf_rows, stride); }
int ConvSpec::col_placements() const { return placements(padded_cols(), lrf_cols, stride); }

void ConvSpec::validate() const {
  if (image_rows < 1 || image_cols < 1 || lrf_rows < 1 || lrf_cols < 1 || stride < 1 ||
      passes < 1 || pad_bottom_rows < 0 || pad_right_cols < 0)
    throw std::invalid_argument("conv spec: sizes must be positive");
  if (lrf_rows > padded_rows() || lrf_cols > padded_cols())
    throw std::invalid_argument("conv spec: LRF larger than the padded image");
}

std::string describe(const ConvSpec& s) {
  std::ostringstream out;
  out << s.lrf_rows << 'x' << s.lrf_cols << '/' << s.stride << " pad=" << s.pad_bottom_rows
      << ',' << s.pad_right_cols << " passes=" << s.passes << " image=" << s.image_rows
      << 'x' << s.image_cols;
  return out.str();
}

ConvSpec parse_conv_spec(const std::string& text) {
  static const std::regex re(
      R"(^\s*(\d+)x(\d+)/(\d+)(?:\s+pad=(\d+),(\d+))?(?:\s+passes=(\d+))?(?:\s+image=(\d+)x(\d+))?\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, re)) throw ConfigError("malformed conv spec '" + text + "'");
  ConvSpec s;
  s.lrf_rows = std::stoi(m[1]);
  s.lrf_cols = std::stoi(m[2]);
  s.stride = std::stoi(m[3]);
  if (m[4].matched) {
    s.pad_bottom_rows = std::stoi(m[4]);
    s.pad_right_cols = std::stoi(m[5]);
  }
  if (m[6].matched) s.passes = std::stoi(m[6]);
  if (m[7].matched) {
    s.image_rows = std::stoi(m[7]);
    s.image_cols = std::stoi(m[8]);
  }
  s.validate();
  return s;
}

std::vector<Patch> pad_and_tile(std::span<const double> image, const ConvSpec& spec) {
  spec.validate();
  if (image.size() != static_cast<std::size_t>(spec.image_size()))
    throw std::invalid_argument("image has " + std::to_string(image.size()) +
                                " pixels, conv spec expects " +
                                std::to_string(spec.image_size()));
  auto pixel = [&](int r, int c) {
    return (r < spec.image_rows && c < spec.image_cols) ? image[r * spec.image_cols + c] : 0.0;
  };
  std::vector<Patch> patches;
  patches.reserve(spec.kernel_count());
  for (int pass = 0; pass < spec.passes; ++pass)
    for (int pr = 0; pr < spec.row_placements(); ++pr)
      for (int pc = 0; pc < spec.col_placements(); ++pc) {
        Patch p{pass, pr * spec.stride, pc * spec.stride, {}};
        p.pixels.reserve(spec.patch_size());
        for (int dr = 0; dr < spec.lrf_rows; ++dr)
          for (int dc = 0; dc < spec.lrf_cols; ++dc) p.pixels.push_back(pixel(p.row + dr, p.col + dc));
        patches.push_back(std::move(p));
      }
  return patches;
}

KernelSet KernelSet::zeros(const ConvSpec& spec) {
  KernelSet k;
  k.patch_size = spec.patch_size();
  k.weights.assign(static_cast<std::size_t>(spec.kernel_count() * spec.patch_size()), 0.0);
  k.biases.assign(static_cast<std::size_t>(spec.kernel_count()), 0.0);
  return k;
}

KernelSet KernelSet::uniform(const ConvSpec& spec, double half_width, RandomStream& stream) {
  KernelSet k = zeros(spec);
  for (double& w : k.weights) w = stream.uniform(-half_width, half_width);
  return k;
}

std::vector<double> conv_encode(std::span<const double> image, const ConvSpec& spec,
                                const KernelSet& kernels) {
  if (kernels.kernel_count() != static_cast<std::size_t>(spec.kernel_count()) ||
      kernels.patch_size != spec.patch_size())
    throw std::invalid_argument("kernel set does not match conv spec");
  const auto patches = pad_and_tile(image, spec);
  std::vector<double> angles(patches.size());
  for (std::size_t i = 0; i < patches.size(); ++i) {
    const auto w = kernels.kernel(i);
    angles[i] = kernels.biases[i] +
                std::inner_product(w.begin(), w.end(), patches[i].pixels.begin(), 0.0);
  }
  return angles;
}

}  // namespace hql::enc
