#pragma once

// One-vs-others ensembles, class balancing, confusion matrices and the
// split / cross-validation pipeline shared by the CLI and the analyses.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hql/circuits.hpp"
#include "hql/dataset.hpp"
#include "hql/encoding.hpp"
#include "hql/training.hpp"

namespace hql::mc {

/// +1 for g >= 0, -1 otherwise.
int binary_predict(double g);

/// Upsamples the minority class of a {-1, +1} dataset with noisy copies
/// (per-feature Gaussian noise of width sigma) until both classes have the
/// same size. Originals keep their order and come first. Throws
/// std::invalid_argument unless both classes are present.
data::LabeledDataset balance(const data::LabeledDataset& ds, double sigma, RandomStream& stream);

/// k structurally identical binary models, models[i] scoring class classes[i].
struct Ensemble {
  std::vector<int> classes;
  std::vector<train::ModelParams> models;

  std::size_t size() const { return models.size(); }
};

struct EnsembleConfig {
  train::TrainConfig train;
  bool balance = false;
  double balance_sigma = 0.05;
};

struct EnsembleResult {
  Ensemble ensemble;
  std::vector<train::TrainHistory> histories;  // one per class
};

/// Trains one model per class on the relabeled (and optionally balanced)
/// training set. Class i uses master seed derive_seed(master, "class", i).
/// A failure in one class is rethrown with the class id in the message.
EnsembleResult train_ensemble(const pqc::CircuitTemplate& tmpl,
                              const data::LabeledDataset& train_set,
                              const data::LabeledDataset& test_set,
                              const EnsembleConfig& config);

std::vector<double> ensemble_scores(const pqc::CircuitTemplate& tmpl, const Ensemble& ens,
                                    std::span<const double> sample);

/// Index of the largest score; ties go to the lowest index.
std::size_t argmax(std::span<const double> scores);

/// Class id with the largest score.
int ensemble_predict(const pqc::CircuitTemplate& tmpl, const Ensemble& ens,
                     std::span<const double> sample);

/// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
  std::vector<int> classes;
  std::vector<std::size_t> counts;  // row-major k x k

  std::size_t k() const { return classes.size(); }
  std::size_t at(std::size_t truth, std::size_t predicted) const {
    return counts[truth * k() + predicted];
  }
  std::size_t total() const;
  double accuracy() const;
  /// Row-normalized percentages; empty rows stay zero.
  std::vector<double> percentages() const;
  /// true,predicted,count,percent
  std::string to_csv() const;
};

/// Builds a matrix from paired labels. Labels outside `classes` throw
/// std::invalid_argument.
ConfusionMatrix confusion_from(std::span<const int> truth, std::span<const int> predicted,
                               std::vector<int> classes);

ConfusionMatrix confusion(const pqc::CircuitTemplate& tmpl, const Ensemble& ens,
                          const data::LabeledDataset& test_set, int threads = 1);

// ---------------------------------------------------------------------------
// Pipeline

enum class SelectorMode { Named, StumpTopK, None };

/// Everything needed to turn a raw dataset into trained models.
struct TaskConfig {
  SelectorMode selector = SelectorMode::Named;
  std::vector<std::string> columns;  // Named mode; empty means the dataset default
  std::size_t top_k = 4;             // StumpTopK mode
  double train_fraction = 2.0 / 3.0;
  EnsembleConfig ensemble;
};

/// Result of one split. For binary ({-1, +1}) data there is a single model
/// and no per-class breakdown.
struct SplitOutcome {
  std::size_t index = 0;
  std::uint64_t split_seed = 0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::vector<double> class_test_accuracy;  // one-vs-others accuracy per class
  std::optional<ConfusionMatrix> confusion;
  enc::Preprocessor preprocessor;
  Ensemble ensemble;
  std::vector<train::TrainHistory> histories;
};

/// Per-dataset defaults: parity uses an equal split with full-batch steps
/// at lr 0.5 and gamma 0.001; cancer and wines lr 0.1; digits lr 0.02, gamma 0.001, 100
/// iterations and balanced training sets.
TaskConfig default_task_config(data::DatasetName name);

bool is_binary(const data::LabeledDataset& ds);

/// Split i uses split seed derive_seed(master, "split", i) and training
/// master seed derive_seed(master, "cv", i). The preprocessor is fitted on
/// the training side only.
SplitOutcome run_split(const data::LabeledDataset& raw, data::DatasetName name,
                       const pqc::CircuitTemplate& tmpl, const TaskConfig& config,
                       std::size_t index);

enc::Preprocessor fit_preprocessor(const data::LabeledDataset& raw_train, data::DatasetName name,
                                   const TaskConfig& config);

/// Scores one preprocessed dataset with a fitted ensemble (binary or
/// multiclass): returns the plain accuracy.
double ensemble_accuracy(const pqc::CircuitTemplate& tmpl, const Ensemble& ens,
                         const data::LabeledDataset& encoded, int threads = 1);

struct CrossValResult {
  std::vector<SplitOutcome> splits;
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation over splits

  /// split,split_seed,train_accuracy,test_accuracy[,class_<id>...]
  std::string to_csv() const;
};

CrossValResult cross_validate(const data::LabeledDataset& raw, data::DatasetName name,
                              const pqc::CircuitTemplate& tmpl, const TaskConfig& config,
                              std::size_t n_splits);

}  // namespace hql::mc
