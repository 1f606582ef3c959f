#include "hql/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "hql/csv_format.hpp"
#include "hql/errors.hpp"
#include "hql/rng.hpp"

namespace hql::data {
namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  for (auto& c : cells)
    if (!c.empty() && c.back() == '\r') c.pop_back();
  return cells;
}

}  // namespace

std::vector<int> LabeledDataset::classes() const {
  std::set<int> s(labels.begin(), labels.end());
  return {s.begin(), s.end()};
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  LabeledDataset out;
  out.columns = columns;
  out.n_features = n_features;
  out.features.reserve(indices.size() * n_features);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= size()) throw std::out_of_range("subset index out of range");
    out.append(row(i), labels[i]);
  }
  return out;
}

void LabeledDataset::append(std::span<const double> row_values, int label) {
  if (row_values.size() != n_features)
    throw std::invalid_argument("row width does not match dataset");
  features.insert(features.end(), row_values.begin(), row_values.end());
  labels.push_back(label);
}

void LabeledDataset::validate() const {
  if (features.size() != labels.size() * n_features)
    throw std::invalid_argument("feature matrix size does not match label count");
  if (!columns.empty() && columns.size() != n_features)
    throw std::invalid_argument("column name count does not match feature count");
}

DatasetSpec spec_for(DatasetName name) {
  switch (name) {
    case DatasetName::Parity: return {name, 16, 4, 2};
    case DatasetName::Cancer: return {name, 569, 30, 2};
    case DatasetName::Wines: return {name, 178, 13, 3};
    case DatasetName::Mnist: return {name, 1797, 56, 10};
  }
  throw std::invalid_argument("unknown dataset");
}

DatasetName parse_dataset_name(const std::string& name) {
  if (name == "parity") return DatasetName::Parity;
  if (name == "cancer") return DatasetName::Cancer;
  if (name == "wines") return DatasetName::Wines;
  if (name == "mnist" || name == "digits") return DatasetName::Mnist;
  throw ConfigError("unknown dataset '" + name + "' (expected parity, cancer, wines, mnist)");
}

std::string to_string(DatasetName name) {
  switch (name) {
    case DatasetName::Parity: return "parity";
    case DatasetName::Cancer: return "cancer";
    case DatasetName::Wines: return "wines";
    case DatasetName::Mnist: return "mnist";
  }
  return "?";
}

void check_against_spec(const LabeledDataset& ds, const DatasetSpec& spec) {
  auto mismatch = [&](const char* what, std::size_t expected, std::size_t actual) {
    throw DataError(to_string(spec.name) + ": " + what + " count mismatch, expected " +
                    std::to_string(expected) + ", got " + std::to_string(actual));
  };
  if (ds.size() != spec.samples) mismatch("sample", spec.samples, ds.size());
  if (ds.n_features != spec.features) mismatch("feature", spec.features, ds.n_features);
  if (ds.class_count() != spec.classes) mismatch("class", spec.classes, ds.class_count());
}

LabeledDataset gen_parity(int n_bits) {
  if (n_bits < 1 || n_bits > 16)
    throw std::invalid_argument("parity bit count must be in [1, 16]");
  LabeledDataset ds;
  ds.n_features = static_cast<std::size_t>(n_bits);
  for (int b = 0; b < n_bits; ++b) ds.columns.push_back("b" + std::to_string(b));
  std::vector<double> row(ds.n_features);
  for (unsigned v = 0; v < (1u << n_bits); ++v) {
    // Column 0 holds the most significant bit so rows read as binary numbers.
    for (int b = 0; b < n_bits; ++b) row[b] = (v >> (n_bits - 1 - b)) & 1u;
    ds.append(row, (std::popcount(v) % 2 == 1) ? +1 : -1);
  }
  return ds;
}

LabeledDataset load_csv(const std::filesystem::path& path,
                        const std::optional<DatasetSpec>& spec) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty data file: " + path.string());
  const auto header = split_line(line);
  const auto label_it = std::find(header.begin(), header.end(), "label");
  if (label_it == header.end())
    throw DataError(path.string() + ": header has no 'label' column");
  const std::size_t label_col = static_cast<std::size_t>(label_it - header.begin());

  LabeledDataset ds;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != label_col) ds.columns.push_back(header[c]);
  ds.n_features = ds.columns.size();

  std::vector<double> row(ds.n_features);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size())
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " cells, got " +
                      std::to_string(cells.size()));
    int label = 0;
    for (std::size_t c = 0, f = 0; c < cells.size(); ++c) {
      double v;
      try {
        v = parse_double(cells[c]);
      } catch (const std::invalid_argument&) {
        throw DataError(path.string() + ": malformed number '" + cells[c] + "' at row " +
                        std::to_string(line_no) + ", column '" + header[c] + "'");
      }
      if (c == label_col) {
        if (v != std::floor(v))
          throw DataError(path.string() + ": non-integer label at row " +
                          std::to_string(line_no));
        label = static_cast<int>(v);
      } else {
        row[f++] = v;
      }
    }
    ds.append(row, label);
  }
  if (spec) check_against_spec(ds, *spec);
  return ds;
}

std::string to_csv(const LabeledDataset& ds) {
  std::ostringstream out;
  for (std::size_t c = 0; c < ds.n_features; ++c)
    out << (ds.columns.empty() ? "x" + std::to_string(c) : ds.columns[c]) << ',';
  out << "label\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.row(i)) out << format_double(v) << ',';
    out << ds.labels[i] << '\n';
  }
  return out.str();
}

void write_csv(const std::filesystem::path& path, const LabeledDataset& ds) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_csv(ds);
}

LabeledDataset load_digits(const std::filesystem::path& path, ColumnCrop crop) {
  const LabeledDataset raw = load_csv(path);
  if (raw.n_features != 64)
    throw DataError(path.string() + ": expected 64 pixel columns per row, got " +
                    std::to_string(raw.n_features));
  double peak = 0.0;
  for (double v : raw.features) peak = std::max(peak, v);
  if (peak <= 0.0) throw DataError(path.string() + ": all pixel intensities are zero");

  const int dropped = crop == ColumnCrop::Right ? 7 : 0;
  LabeledDataset ds;
  ds.n_features = 56;
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c)
      if (c != dropped) ds.columns.push_back(raw.columns[r * 8 + c]);
  std::vector<double> row;
  row.reserve(56);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    row.clear();
    const auto src = raw.row(i);
    for (int r = 0; r < 8; ++r)
      for (int c = 0; c < 8; ++c)
        if (c != dropped) row.push_back(src[r * 8 + c] / peak);
    ds.append(row, raw.labels[i]);
  }
  return ds;
}

LabeledDataset load_named(DatasetName name, const std::filesystem::path& data_dir,
                          ColumnCrop crop) {
  LabeledDataset ds;
  switch (name) {
    case DatasetName::Parity: ds = gen_parity(4); break;
    case DatasetName::Cancer: ds = load_csv(data_dir / "cancer.csv"); break;
    case DatasetName::Wines: ds = load_csv(data_dir / "wines.csv"); break;
    case DatasetName::Mnist: ds = load_digits(data_dir / "digits.csv", crop); break;
  }
  check_against_spec(ds, spec_for(name));
  if (name == DatasetName::Cancer) ds = one_vs_rest(ds, 1);
  return ds;
}

LabeledDataset one_vs_rest(const LabeledDataset& ds, int positive) {
  LabeledDataset out = ds;
  for (int& y : out.labels) y = (y == positive) ? +1 : -1;
  return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    const LabeledDataset& ds, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("train fraction must lie strictly between 0 and 1");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < ds.size(); ++i) by_class[ds.labels[i]].push_back(i);

  RandomStream stream(seed);
  std::vector<std::size_t> train, test;
  for (auto& [label, idx] : by_class) {
    stream.shuffle(std::span<std::size_t>(idx));
    const auto n = idx.size();
    auto n_train = static_cast<std::size_t>(std::llround(n * train_fraction));
    if (n >= 2) n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    else n_train = n;
    train.insert(train.end(), idx.begin(), idx.begin() + n_train);
    test.insert(test.end(), idx.begin() + n_train, idx.end());
  }
  if (train.empty() || test.empty())
    throw DataError("dataset too small to split (" + std::to_string(ds.size()) + " samples)");
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& ds,
                                                double train_fraction, std::uint64_t seed) {
  const auto [train, test] = split_indices(ds, train_fraction, seed);
  return {ds.subset(train), ds.subset(test)};
}

double parse_ratio(const std::string& text) {
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) {
      const double f = parse_double(text);
      if (f > 0.0 && f < 1.0) return f;
    } else {
      const double a = parse_double(text.substr(0, colon));
      const double b = parse_double(text.substr(colon + 1));
      if (a > 0 && b > 0) return a / (a + b);
    }
  } catch (const std::invalid_argument&) {
  }
  throw ConfigError("invalid split ratio '" + text + "' (use e.g. 2:1 or 0.5)");
}

}  // namespace hql::data
