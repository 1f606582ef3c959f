#pragma once

// Cost, gradients and Nesterov mini-batch SGD for circuit classifiers.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hql/circuits.hpp"
#include "hql/dataset.hpp"
#include "hql/encoding.hpp"

namespace hql::train {

struct TrainConfig {
  double learning_rate = 0.5;
  double momentum = 0.9;
  int batch_size = 64;
  double cost_beta = 10.0;
  double cost_gamma = 0.0;
  int iterations = 30;
  std::uint32_t shots = 0;  // 0 selects exact expectation values
  std::uint64_t master_seed = 1;
  int threads = 1;
  bool record_history = true;

  /// Throws std::invalid_argument on b < 1, beta <= 0, gamma < 0, etc.
  void validate() const;
};

/// Trainable state of one classifier. For angle-encoded templates
/// `circuit_theta` holds every circuit angle and there is no output bias.
/// For convolutional templates the leading circuit angles are produced by
/// `kernels` and `circuit_theta` holds only the remaining free angles.
struct ModelParams {
  std::vector<double> circuit_theta;
  std::optional<enc::KernelSet> kernels;
  double output_bias = 0.0;

  std::size_t size() const;

  /// Flat order: per kernel its weights then its bias, then circuit_theta,
  /// then the output bias (convolutional models only).
  std::vector<double> flatten() const;
  static ModelParams unflatten(const pqc::CircuitTemplate& tmpl, std::span<const double> flat);

  static ModelParams zeros(const pqc::CircuitTemplate& tmpl);
  /// Circuit angles 0, kernel weights uniform in [-0.1, 0.1], biases 0.
  static ModelParams initial(const pqc::CircuitTemplate& tmpl, RandomStream& stream);
};

/// Full circuit angle vector for one encoded sample.
std::vector<double> circuit_angles(const pqc::CircuitTemplate& tmpl, const ModelParams& params,
                                   std::span<const double> sample);

/// g = <sigma_z> + output bias.
double predict(const pqc::CircuitTemplate& tmpl, const ModelParams& params,
               std::span<const double> sample,
               const qsim::MeasurementMode& mode = qsim::Exact{});

/// log2(1 + exp(-y g beta)) evaluated without overflow.
double log_cost(double g, int y, double beta);
/// d log_cost / d g.
double log_cost_slope(double g, int y, double beta);
/// log_cost + gamma * |theta|^2 over the full trainable vector.
double per_sample_cost(double g, int y, std::span<const double> trainables, double beta,
                       double gamma);
double quadratic_cost(double g, int y);

/// dL/dtheta over all circuit angles: chain rule through the log cost of the
/// parameter-shift dg/dtheta, plus 2 gamma theta on angles that are trained
/// directly (all of them for angle-encoded templates, the free ones otherwise).
std::vector<double> grad_circuit_angles(const pqc::CircuitTemplate& tmpl,
                                        const ModelParams& params, std::span<const double> sample,
                                        int y, double beta, double gamma,
                                        const qsim::MeasurementMode& mode = qsim::Exact{});

struct ConvGradient {
  std::vector<double> weights;  // kernel-major like KernelSet::weights
  std::vector<double> biases;
  double output_bias = 0.0;
};

/// Chain rule from angle gradients into the kernels:
/// dL/dw_ij = dL/dtheta_i * x_j, dL/dbeta_i = dL/dtheta_i, dL/dbeta_0 = dL/dg.
ConvGradient grad_conv_weights(std::span<const double> angle_grads,
                               const std::vector<enc::Patch>& patches, double dcost_dg);

struct SampleGradient {
  double g = 0.0;
  double cost = 0.0;
  std::vector<double> flat;  // dL/d(trainables) in ModelParams::flatten order
};

/// Cost and gradient of one sample with respect to every trainable scalar.
SampleGradient sample_gradient(const pqc::CircuitTemplate& tmpl, const ModelParams& params,
                               std::span<const double> sample, int y, double beta, double gamma,
                               const qsim::MeasurementMode& mode = qsim::Exact{});

/// Point at which the Nesterov gradient is evaluated: params + momentum * velocity.
std::vector<double> lookahead(std::span<const double> params, std::span<const double> velocity,
                              double momentum);

/// v <- momentum v - lr * grad (grad taken at the look-ahead point);
/// params <- params + v.
void sgd_step(std::vector<double>& params, std::span<const double> grads,
              std::vector<double>& velocity, const TrainConfig& config);

struct Metrics {
  double cost = 0.0;
  double accuracy = 0.0;
};

/// Mean per-sample cost and sign-threshold accuracy in exact mode.
Metrics evaluate(const pqc::CircuitTemplate& tmpl, const ModelParams& params,
                 const data::LabeledDataset& ds, double beta, double gamma, int threads = 1);

struct HistoryRecord {
  int iteration = 0;
  double cost_train = 0.0;
  double cost_test = 0.0;
  double acc_train = 0.0;
  double acc_test = 0.0;
  double wall_seconds = 0.0;
};

struct TrainHistory {
  std::vector<HistoryRecord> records;

  /// iteration,cost_train,cost_test,acc_train,acc_test (wall time omitted so
  /// that replays are byte-identical).
  std::string to_csv() const;
};

struct TrainResult {
  ModelParams params;
  TrainHistory history;
};

/// Mini-batch training with labels in {-1, +1}. Batches are drawn from
/// epoch-wise shuffles of the training set; when fewer than b samples remain
/// a new epoch starts. History is recorded after every step on both splits.
TrainResult train(const pqc::CircuitTemplate& tmpl, const data::LabeledDataset& train_set,
                  const data::LabeledDataset& test_set, const TrainConfig& config,
                  std::optional<ModelParams> initial = std::nullopt);

}  // namespace hql::train
