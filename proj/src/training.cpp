#include "hql/training.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "hql/csv_format.hpp"
#include "hql/errors.hpp"
#include "hql/parallel.hpp"

namespace hql::train {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must be in [0, 1)");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (!(cost_beta > 0.0)) throw std::invalid_argument("cost beta must be positive");
  if (!(cost_gamma >= 0.0)) throw std::invalid_argument("cost gamma must be non-negative");
  if (iterations < 0) throw std::invalid_argument("iteration count must be non-negative");
  if (threads < 1) throw std::invalid_argument("thread count must be >= 1");
}

// ---------------------------------------------------------------------------

std::size_t ModelParams::size() const {
  std::size_t n = circuit_theta.size();
  if (kernels) n += kernels->scalar_count() + 1;
  return n;
}

std::vector<double> ModelParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(size());
  if (kernels) {
    for (std::size_t i = 0; i < kernels->kernel_count(); ++i) {
      const auto w = kernels->kernel(i);
      flat.insert(flat.end(), w.begin(), w.end());
      flat.push_back(kernels->biases[i]);
    }
  }
  flat.insert(flat.end(), circuit_theta.begin(), circuit_theta.end());
  if (kernels) flat.push_back(output_bias);
  return flat;
}

ModelParams ModelParams::zeros(const pqc::CircuitTemplate& tmpl) {
  ModelParams p;
  p.circuit_theta.assign(static_cast<std::size_t>(tmpl.free_weight_count()), 0.0);
  if (tmpl.conv()) p.kernels = enc::KernelSet::zeros(*tmpl.conv());
  return p;
}

ModelParams ModelParams::unflatten(const pqc::CircuitTemplate& tmpl, std::span<const double> flat) {
  if (flat.size() != static_cast<std::size_t>(tmpl.trainable_count()))
    throw std::invalid_argument("flat parameter count " + std::to_string(flat.size()) +
                                " does not match template (" +
                                std::to_string(tmpl.trainable_count()) + ")");
  ModelParams p = zeros(tmpl);
  std::size_t pos = 0;
  if (p.kernels) {
    const auto L = static_cast<std::size_t>(p.kernels->patch_size);
    for (std::size_t i = 0; i < p.kernels->kernel_count(); ++i) {
      for (std::size_t j = 0; j < L; ++j) p.kernels->weights[i * L + j] = flat[pos++];
      p.kernels->biases[i] = flat[pos++];
    }
  }
  for (double& t : p.circuit_theta) t = flat[pos++];
  if (p.kernels) p.output_bias = flat[pos++];
  return p;
}

ModelParams ModelParams::initial(const pqc::CircuitTemplate& tmpl, RandomStream& stream) {
  ModelParams p = zeros(tmpl);
  if (tmpl.conv()) p.kernels = enc::KernelSet::uniform(*tmpl.conv(), 0.1, stream);
  return p;
}

std::vector<double> circuit_angles(const pqc::CircuitTemplate& tmpl, const ModelParams& params,
                                   std::span<const double> sample) {
  if (params.circuit_theta.size() != static_cast<std::size_t>(tmpl.free_weight_count()))
    throw std::invalid_argument("model has " + std::to_string(params.circuit_theta.size()) +
                                " circuit angles, template expects " +
                                std::to_string(tmpl.free_weight_count()));
  if (!tmpl.conv()) return params.circuit_theta;
  if (!params.kernels) throw std::invalid_argument("convolutional template needs kernels");
  std::vector<double> angles = enc::conv_encode(sample, *tmpl.conv(), *params.kernels);
  angles.insert(angles.end(), params.circuit_theta.begin(), params.circuit_theta.end());
  return angles;
}

namespace {
std::span<const double> circuit_features(const pqc::CircuitTemplate& tmpl,
                                         std::span<const double> sample) {
  return tmpl.conv() ? std::span<const double>{} : sample;
}
}  // namespace

double predict(const pqc::CircuitTemplate& tmpl, const ModelParams& params,
               std::span<const double> sample, const qsim::MeasurementMode& mode) {
  const auto angles = circuit_angles(tmpl, params, sample);
  return pqc::bind_and_run(tmpl, circuit_features(tmpl, sample), angles, mode) +
         params.output_bias;
}

// ---------------------------------------------------------------------------

double log_cost(double g, int y, double beta) {
  const double z = -y * g * beta;
  // log(1 + e^z) = max(z, 0) + log1p(e^{-|z|})
  return (std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)))) / std::numbers::ln2;
}

double log_cost_slope(double g, int y, double beta) {
  const double z = -y * g * beta;
  const double sigmoid = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  return -y * beta * sigmoid / std::numbers::ln2;
}

double per_sample_cost(double g, int y, std::span<const double> trainables, double beta,
                       double gamma) {
  if (y != 1 && y != -1) throw std::invalid_argument("binary label must be -1 or +1");
  const double norm2 = std::inner_product(trainables.begin(), trainables.end(), trainables.begin(), 0.0);
  return log_cost(g, y, beta) + gamma * norm2;
}

double quadratic_cost(double g, int y) { return (g - y) * (g - y); }

std::vector<double> grad_circuit_angles(const pqc::CircuitTemplate& tmpl,
                                        const ModelParams& params, std::span<const double> sample,
                                        int y, double beta, double gamma,
                                        const qsim::MeasurementMode& mode) {
  const auto angles = circuit_angles(tmpl, params, sample);
  const auto sg = pqc::shift_gradient(tmpl, circuit_features(tmpl, sample), angles, mode);
  const double slope = log_cost_slope(sg.value + params.output_bias, y, beta);
  std::vector<double> grad(sg.d_theta.size());
  const auto first_free = static_cast<std::size_t>(tmpl.conv_slot_count());
  for (std::size_t j = 0; j < grad.size(); ++j) {
    grad[j] = slope * sg.d_theta[j];
    if (j >= first_free) grad[j] += 2.0 * gamma * angles[j];
  }
  return grad;
}

ConvGradient grad_conv_weights(std::span<const double> angle_grads,
                               const std::vector<enc::Patch>& patches, double dcost_dg) {
  if (angle_grads.size() != patches.size())
    throw std::invalid_argument("angle gradients (" + std::to_string(angle_grads.size()) +
                                ") do not align with patches (" +
                                std::to_string(patches.size()) + ")");
  ConvGradient out;
  out.biases.assign(angle_grads.begin(), angle_grads.end());
  for (std::size_t i = 0; i < patches.size(); ++i)
    for (double x : patches[i].pixels) out.weights.push_back(angle_grads[i] * x);
  out.output_bias = dcost_dg;
  return out;
}

SampleGradient sample_gradient(const pqc::CircuitTemplate& tmpl, const ModelParams& params,
                               std::span<const double> sample, int y, double beta, double gamma,
                               const qsim::MeasurementMode& mode) {
  const auto angles = circuit_angles(tmpl, params, sample);
  const auto sg = pqc::shift_gradient(tmpl, circuit_features(tmpl, sample), angles, mode);
  const auto flat_params = params.flatten();

  SampleGradient out;
  out.g = sg.value + params.output_bias;
  out.cost = per_sample_cost(out.g, y, flat_params, beta, gamma);
  const double slope = log_cost_slope(out.g, y, beta);

  out.flat.reserve(flat_params.size());
  const auto conv_slots = static_cast<std::size_t>(tmpl.conv_slot_count());
  if (tmpl.conv()) {
    std::vector<double> conv_grads(conv_slots);
    for (std::size_t j = 0; j < conv_slots; ++j) conv_grads[j] = slope * sg.d_theta[j];
    const auto cg = grad_conv_weights(conv_grads, enc::pad_and_tile(sample, *tmpl.conv()), slope);
    const auto L = static_cast<std::size_t>(tmpl.conv()->patch_size());
    for (std::size_t i = 0; i < conv_slots; ++i) {
      out.flat.insert(out.flat.end(), cg.weights.begin() + i * L, cg.weights.begin() + (i + 1) * L);
      out.flat.push_back(cg.biases[i]);
    }
  }
  for (std::size_t j = conv_slots; j < sg.d_theta.size(); ++j) out.flat.push_back(slope * sg.d_theta[j]);
  if (tmpl.conv()) out.flat.push_back(slope);

  for (std::size_t k = 0; k < out.flat.size(); ++k) out.flat[k] += 2.0 * gamma * flat_params[k];
  return out;
}

std::vector<double> lookahead(std::span<const double> params, std::span<const double> velocity,
                              double momentum) {
  if (params.size() != velocity.size()) throw std::invalid_argument("velocity shape mismatch");
  std::vector<double> out(params.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = params[i] + momentum * velocity[i];
  return out;
}

void sgd_step(std::vector<double>& params, std::span<const double> grads,
              std::vector<double>& velocity, const TrainConfig& config) {
  if (params.size() != grads.size() || params.size() != velocity.size())
    throw std::invalid_argument("sgd_step: shape mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    velocity[i] = config.momentum * velocity[i] - config.learning_rate * grads[i];
    params[i] += velocity[i];
  }
}

Metrics evaluate(const pqc::CircuitTemplate& tmpl, const ModelParams& params,
                 const data::LabeledDataset& ds, double beta, double gamma, int threads) {
  if (ds.empty()) throw std::invalid_argument("cannot evaluate on an empty dataset");
  std::vector<double> g(ds.size());
  parallel_for(ds.size(), threads, [&](std::size_t i) { g[i] = predict(tmpl, params, ds.row(i)); });
  const auto flat = params.flatten();
  const double reg = gamma * std::inner_product(flat.begin(), flat.end(), flat.begin(), 0.0);
  Metrics m;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    m.cost += log_cost(g[i], ds.labels[i], beta);
    correct += ((g[i] >= 0.0 ? 1 : -1) == ds.labels[i]);
  }
  m.cost = m.cost / static_cast<double>(ds.size()) + reg;
  m.accuracy = static_cast<double>(correct) / static_cast<double>(ds.size());
  return m;
}

std::string TrainHistory::to_csv() const {
  std::ostringstream out;
  out << "iteration,cost_train,cost_test,acc_train,acc_test\n";
  for (const auto& r : records)
    out << r.iteration << ',' << format_double(r.cost_train) << ',' << format_double(r.cost_test)
        << ',' << format_double(r.acc_train) << ',' << format_double(r.acc_test) << '\n';
  return out.str();
}

namespace {
void check_binary(const data::LabeledDataset& ds, const char* which) {
  if (ds.empty()) throw DataError(std::string(which) + " set is empty");
  for (int y : ds.labels)
    if (y != 1 && y != -1)
      throw DataError(std::string(which) + " set labels must be -1 or +1, found " + std::to_string(y));
}
}  // namespace

TrainResult train(const pqc::CircuitTemplate& tmpl, const data::LabeledDataset& train_set,
                  const data::LabeledDataset& test_set, const TrainConfig& config,
                  std::optional<ModelParams> initial) {
  config.validate();
  check_binary(train_set, "training");
  check_binary(test_set, "test");

  TrainResult result;
  if (initial) {
    result.params = std::move(*initial);
  } else {
    RandomStream init(config.master_seed, "init");
    result.params = ModelParams::initial(tmpl, init);
  }
  std::vector<double> flat = result.params.flatten();
  std::vector<double> velocity(flat.size(), 0.0);

  const std::size_t n = train_set.size();
  const std::size_t b = std::min<std::size_t>(static_cast<std::size_t>(config.batch_size), n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  RandomStream batch_stream(config.master_seed, "batch");
  batch_stream.shuffle(std::span<std::size_t>(order));
  std::size_t cursor = 0;

  const auto start = std::chrono::steady_clock::now();
  std::vector<SampleGradient> per_sample(b);
  for (int it = 0; it < config.iterations; ++it) {
    if (cursor + b > n) {
      batch_stream.shuffle(std::span<std::size_t>(order));
      cursor = 0;
    }
    const ModelParams ahead = ModelParams::unflatten(tmpl, lookahead(flat, velocity, config.momentum));
    parallel_for(b, config.threads, [&](std::size_t k) {
      const std::size_t idx = order[cursor + k];
      if (config.shots > 0) {
        RandomStream shots(config.master_seed, "shots",
                           static_cast<std::uint64_t>(it) * n + k);
        per_sample[k] = sample_gradient(tmpl, ahead, train_set.row(idx), train_set.labels[idx],
                                        config.cost_beta, config.cost_gamma,
                                        qsim::Shots{config.shots, &shots});
      } else {
        per_sample[k] = sample_gradient(tmpl, ahead, train_set.row(idx), train_set.labels[idx],
                                        config.cost_beta, config.cost_gamma);
      }
    });
    cursor += b;

    std::vector<double> grad(flat.size(), 0.0);
    double batch_cost = 0.0;
    for (const auto& s : per_sample) {
      batch_cost += s.cost;
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += s.flat[i];
    }
    for (double& gi : grad) gi /= static_cast<double>(b);
    batch_cost /= static_cast<double>(b);
    if (!std::isfinite(batch_cost) ||
        !std::all_of(grad.begin(), grad.end(), [](double v) { return std::isfinite(v); }))
      throw NumericError("non-finite cost or gradient at iteration " + std::to_string(it + 1) +
                         " (batch cost " + format_double(batch_cost) + ")");
    sgd_step(flat, grad, velocity, config);

    if (config.record_history) {
      const ModelParams now = ModelParams::unflatten(tmpl, flat);
      const auto tr = evaluate(tmpl, now, train_set, config.cost_beta, config.cost_gamma, config.threads);
      const auto te = evaluate(tmpl, now, test_set, config.cost_beta, config.cost_gamma, config.threads);
      const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;
      result.history.records.push_back({it + 1, tr.cost, te.cost, tr.accuracy, te.accuracy, wall.count()});
    }
  }
  result.params = ModelParams::unflatten(tmpl, flat);
  return result;
}

}  // namespace hql::train
