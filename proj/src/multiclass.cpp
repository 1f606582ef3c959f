#include "hql/multiclass.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "hql/csv_format.hpp"
#include "hql/errors.hpp"
#include "hql/parallel.hpp"

namespace hql::mc {

int binary_predict(double g) { return g >= 0.0 ? 1 : -1; }

data::LabeledDataset balance(const data::LabeledDataset& ds, double sigma, RandomStream& stream) {
  if (sigma < 0.0) throw std::invalid_argument("balance: sigma must be >= 0");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.labels[i] == 1)
      pos.push_back(i);
    else if (ds.labels[i] == -1)
      neg.push_back(i);
    else
      throw std::invalid_argument("balance: labels must be -1 or +1");
  }
  if (pos.empty() || neg.empty()) throw std::invalid_argument("balance: need both classes");

  data::LabeledDataset out = ds;
  auto& minority = pos.size() < neg.size() ? pos : neg;
  const std::size_t target = std::max(pos.size(), neg.size());
  // Copies cycle through a shuffled order of the minority samples.
  std::vector<std::size_t> order = minority;
  stream.shuffle(std::span<std::size_t>(order));
  std::vector<double> row(ds.n_features);
  for (std::size_t made = 0; minority.size() + made < target; ++made) {
    const std::size_t src = order[made % order.size()];
    const auto orig = ds.row(src);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = orig[j] + sigma * stream.normal();
    out.append(row, ds.labels[src]);
  }
  return out;
}

EnsembleResult train_ensemble(const pqc::CircuitTemplate& tmpl,
                              const data::LabeledDataset& train_set,
                              const data::LabeledDataset& test_set,
                              const EnsembleConfig& config) {
  const auto classes = train_set.classes();
  if (classes.size() < 2) throw DataError("ensemble training needs at least 2 classes");

  EnsembleResult result;
  result.ensemble.classes = classes;
  result.ensemble.models.resize(classes.size());
  result.histories.resize(classes.size());

  // Parallelize over classes when threads are available; each class then
  // trains single-threaded. Either way the numbers are identical.
  const bool outer = config.train.threads > 1 && classes.size() > 1;
  parallel_for(classes.size(), outer ? config.train.threads : 1, [&](std::size_t i) {
    const int c = classes[i];
    try {
      train::TrainConfig tc = config.train;
      tc.master_seed = derive_seed(config.train.master_seed, "class", i);
      if (outer) tc.threads = 1;
      auto tr = data::one_vs_rest(train_set, c);
      if (config.balance) {
        RandomStream stream(config.train.master_seed, "balance", i);
        tr = balance(tr, config.balance_sigma, stream);
      }
      const auto te = data::one_vs_rest(test_set, c);
      auto res = train::train(tmpl, tr, te, tc);
      result.ensemble.models[i] = std::move(res.params);
      result.histories[i] = std::move(res.history);
    } catch (const NumericError& e) {
      throw NumericError("class " + std::to_string(c) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("class " + std::to_string(c) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("class " + std::to_string(c) + ": " + e.what());
    }
  });
  return result;
}

std::vector<double> ensemble_scores(const pqc::CircuitTemplate& tmpl, const Ensemble& ens,
                                    std::span<const double> sample) {
  std::vector<double> scores;
  scores.reserve(ens.size());
  for (const auto& m : ens.models) scores.push_back(train::predict(tmpl, m, sample));
  return scores;
}

std::size_t argmax(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("argmax of an empty score vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

int ensemble_predict(const pqc::CircuitTemplate& tmpl, const Ensemble& ens,
                     std::span<const double> sample) {
  if (ens.size() == 0) throw std::invalid_argument("empty ensemble");
  return ens.classes[argmax(ensemble_scores(tmpl, ens, sample))];
}

std::size_t ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

double ConfusionMatrix::accuracy() const {
  std::size_t diag = 0;
  for (std::size_t i = 0; i < k(); ++i) diag += at(i, i);
  const auto n = total();
  return n == 0 ? 0.0 : static_cast<double>(diag) / static_cast<double>(n);
}

std::vector<double> ConfusionMatrix::percentages() const {
  std::vector<double> pct(counts.size(), 0.0);
  for (std::size_t i = 0; i < k(); ++i) {
    std::size_t row = 0;
    for (std::size_t j = 0; j < k(); ++j) row += at(i, j);
    if (row == 0) continue;
    for (std::size_t j = 0; j < k(); ++j)
      pct[i * k() + j] = 100.0 * static_cast<double>(at(i, j)) / static_cast<double>(row);
  }
  return pct;
}

std::string ConfusionMatrix::to_csv() const {
  const auto pct = percentages();
  std::ostringstream out;
  out << "true,predicted,count,percent\n";
  for (std::size_t i = 0; i < k(); ++i)
    for (std::size_t j = 0; j < k(); ++j)
      out << classes[i] << ',' << classes[j] << ',' << at(i, j) << ','
          << format_double(pct[i * k() + j]) << '\n';
  return out.str();
}

ConfusionMatrix confusion_from(std::span<const int> truth, std::span<const int> predicted,
                               std::vector<int> classes) {
  if (truth.size() != predicted.size())
    throw std::invalid_argument("confusion: label vectors differ in length");
  ConfusionMatrix cm;
  cm.classes = std::move(classes);
  cm.counts.assign(cm.k() * cm.k(), 0);
  auto pos = [&](int label) {
    const auto it = std::find(cm.classes.begin(), cm.classes.end(), label);
    if (it == cm.classes.end())
      throw std::invalid_argument("confusion: unknown label " + std::to_string(label));
    return static_cast<std::size_t>(it - cm.classes.begin());
  };
  for (std::size_t i = 0; i < truth.size(); ++i) ++cm.counts[pos(truth[i]) * cm.k() + pos(predicted[i])];
  return cm;
}

ConfusionMatrix confusion(const pqc::CircuitTemplate& tmpl, const Ensemble& ens,
                          const data::LabeledDataset& test_set, int threads) {
  std::vector<int> pred(test_set.size());
  parallel_for(test_set.size(), threads,
               [&](std::size_t i) { pred[i] = ensemble_predict(tmpl, ens, test_set.row(i)); });
  return confusion_from(test_set.labels, pred, ens.classes);
}

// ---------------------------------------------------------------------------

TaskConfig default_task_config(data::DatasetName name) {
  TaskConfig tc;
  auto& t = tc.ensemble.train;
  switch (name) {
    case data::DatasetName::Parity:
      tc.train_fraction = 0.5;
      t.learning_rate = 0.5;
      t.cost_gamma = 0.001;
      t.batch_size = 8;
      t.iterations = 200;
      break;
    case data::DatasetName::Cancer:
    case data::DatasetName::Wines:
      t.learning_rate = 0.1;
      t.iterations = 30;
      break;
    case data::DatasetName::Mnist:
      tc.selector = SelectorMode::None;
      t.learning_rate = 0.02;
      t.cost_gamma = 0.001;
      t.iterations = 100;
      tc.ensemble.balance = true;
      break;
  }
  return tc;
}

bool is_binary(const data::LabeledDataset& ds) {
  const auto cls = ds.classes();
  return std::all_of(cls.begin(), cls.end(), [](int c) { return c == 1 || c == -1; });
}

enc::Preprocessor fit_preprocessor(const data::LabeledDataset& raw_train, data::DatasetName name,
                                   const TaskConfig& config) {
  std::optional<enc::FeatureSelector> sel;
  switch (config.selector) {
    case SelectorMode::Named:
      sel = enc::select_named(raw_train, config.columns.empty() ? enc::default_columns(name)
                                                                : config.columns);
      break;
    case SelectorMode::StumpTopK:
      sel = enc::stump_importance(raw_train, config.top_k);
      break;
    case SelectorMode::None:
      break;
  }
  return enc::Preprocessor::fit(raw_train, std::move(sel));
}

double ensemble_accuracy(const pqc::CircuitTemplate& tmpl, const Ensemble& ens,
                         const data::LabeledDataset& encoded, int threads) {
  if (encoded.empty()) return 0.0;
  std::vector<int> hit(encoded.size(), 0);
  const bool binary = ens.size() == 1;
  parallel_for(encoded.size(), threads, [&](std::size_t i) {
    const int pred = binary ? binary_predict(train::predict(tmpl, ens.models[0], encoded.row(i)))
                            : ensemble_predict(tmpl, ens, encoded.row(i));
    hit[i] = pred == encoded.labels[i];
  });
  return static_cast<double>(std::accumulate(hit.begin(), hit.end(), 0)) /
         static_cast<double>(encoded.size());
}

SplitOutcome run_split(const data::LabeledDataset& raw, data::DatasetName name,
                       const pqc::CircuitTemplate& tmpl, const TaskConfig& config,
                       std::size_t index) {
  const std::uint64_t master = config.ensemble.train.master_seed;
  SplitOutcome out;
  out.index = index;
  out.split_seed = derive_seed(master, "split", index);
  const auto [raw_train, raw_test] = data::split(raw, config.train_fraction, out.split_seed);
  out.preprocessor = fit_preprocessor(raw_train, name, config);
  const auto tr = out.preprocessor.transform(raw_train);
  const auto te = out.preprocessor.transform(raw_test);

  EnsembleConfig ec = config.ensemble;
  ec.train.master_seed = derive_seed(master, "cv", index);
  const int threads = ec.train.threads;

  if (is_binary(raw)) {
    auto train_set = tr;
    if (ec.balance) {
      RandomStream stream(ec.train.master_seed, "balance");
      train_set = balance(tr, ec.balance_sigma, stream);
    }
    auto res = train::train(tmpl, train_set, te, ec.train);
    out.ensemble.classes = {1};
    out.ensemble.models.push_back(std::move(res.params));
    out.histories.push_back(std::move(res.history));
  } else {
    auto res = train_ensemble(tmpl, tr, te, ec);
    out.ensemble = std::move(res.ensemble);
    out.histories = std::move(res.histories);
    out.confusion = confusion(tmpl, out.ensemble, te, threads);
    for (std::size_t i = 0; i < out.ensemble.size(); ++i) {
      const auto ovr = data::one_vs_rest(te, out.ensemble.classes[i]);
      out.class_test_accuracy.push_back(
          train::evaluate(tmpl, out.ensemble.models[i], ovr, ec.train.cost_beta,
                          ec.train.cost_gamma, threads)
              .accuracy);
    }
  }
  out.train_accuracy = ensemble_accuracy(tmpl, out.ensemble, tr, threads);
  out.test_accuracy = ensemble_accuracy(tmpl, out.ensemble, te, threads);
  return out;
}

CrossValResult cross_validate(const data::LabeledDataset& raw, data::DatasetName name,
                              const pqc::CircuitTemplate& tmpl, const TaskConfig& config,
                              std::size_t n_splits) {
  if (n_splits < 1) throw std::invalid_argument("cross_validate: n_splits must be >= 1");
  CrossValResult cv;
  for (std::size_t i = 0; i < n_splits; ++i) cv.splits.push_back(run_split(raw, name, tmpl, config, i));
  double sum = 0.0;
  for (const auto& s : cv.splits) sum += s.test_accuracy;
  cv.mean = sum / static_cast<double>(n_splits);
  double ss = 0.0;
  for (const auto& s : cv.splits) ss += (s.test_accuracy - cv.mean) * (s.test_accuracy - cv.mean);
  cv.stddev = std::sqrt(ss / static_cast<double>(n_splits));
  return cv;
}

std::string CrossValResult::to_csv() const {
  std::ostringstream out;
  out << "split,split_seed,train_accuracy,test_accuracy";
  if (!splits.empty())
    for (int c : splits.front().ensemble.classes)
      if (!splits.front().class_test_accuracy.empty()) out << ",class_" << c;
  out << '\n';
  for (const auto& s : splits) {
    out << s.index << ',' << s.split_seed << ',' << format_double(s.train_accuracy) << ','
        << format_double(s.test_accuracy);
    for (double a : s.class_test_accuracy) out << ',' << format_double(a);
    out << '\n';
  }
  return out.str();
}

}  // namespace hql::mc
