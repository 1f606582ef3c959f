#pragma once

// Diagnostics: cost landscapes, harmonic scans, gate-imperfection sweeps,
// architecture comparison and hardware timing estimates.

#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hql/circuits.hpp"
#include "hql/dataset.hpp"
#include "hql/multiclass.hpp"
#include "hql/training.hpp"

namespace hql::analysis {

// ---------------------------------------------------------------------------
// Landscapes

struct LocalMinimum {
  int i = 0;  // index along the first direction
  int j = 0;
  double a = 0.0;
  double b = 0.0;
  double cost = 0.0;
  double accuracy = 0.0;
};

struct LandscapeGrid {
  std::vector<double> dir_a;  // unit vectors in flat parameter space
  std::vector<double> dir_b;
  std::vector<double> offsets;  // shared axis values for both directions
  std::vector<double> costs;    // row-major, costs[i * n + j] at (offsets[i], offsets[j])
  std::vector<LocalMinimum> minima;

  int resolution() const { return static_cast<int>(offsets.size()); }
  double at(int i, int j) const { return costs[static_cast<std::size_t>(i) * offsets.size() + j]; }

  /// a,b,cost
  std::string to_csv() const;
  /// a,b,cost,accuracy
  std::string minima_csv() const;
};

struct LandscapeConfig {
  double half_range = 3.141592653589793;
  int resolution = 41;
  double beta = 10.0;
  double gamma = 0.0;
  std::uint64_t seed = 1;  // directions come from stream "landscape-dirs"
  int threads = 1;
};

/// Two orthonormal directions from Gram-Schmidt on Gaussian draws.
std::pair<std::vector<double>, std::vector<double>> random_orthonormal_pair(std::size_t dim,
                                                                            RandomStream& stream);

/// Mean cost over `data` at params + a * dir_a + b * dir_b.
double cost_at(const pqc::CircuitTemplate& tmpl, std::span<const double> center,
               std::span<const double> dir_a, double a, std::span<const double> dir_b, double b,
               const data::LabeledDataset& data, double beta, double gamma);

/// Cost over a square grid around `params`; grid points that are strictly
/// lower than all 8 neighbours are reported as minima with their accuracy.
LandscapeGrid landscape_2d(const pqc::CircuitTemplate& tmpl, const train::ModelParams& params,
                           const data::LabeledDataset& data, const LandscapeConfig& config);

/// Cost along one direction, at the same offsets landscape_2d would use.
std::vector<double> slice_1d(const pqc::CircuitTemplate& tmpl, const train::ModelParams& params,
                             const data::LabeledDataset& data, std::span<const double> direction,
                             const LandscapeConfig& config);

std::vector<double> grid_offsets(double half_range, int resolution);

// ---------------------------------------------------------------------------
// Harmonic scans

struct SinusoidFit {
  double amplitude = 0.0;  // A >= 0
  double phase = 0.0;      // phi0
  double offset = 0.0;     // C
  double max_residual = 0.0;
};

/// Least-squares fit of y = A cos(x - phi0) + C.
SinusoidFit fit_sinusoid(std::span<const double> x, std::span<const double> y);

struct HarmonicScan {
  int param_index = 0;
  std::vector<double> angles;
  std::vector<double> values;
  SinusoidFit fit;

  /// angle,g,fit
  std::string to_csv() const;
};

/// g over circuit angle `param_index` swept through [0, 2 pi) in n_points
/// steps, every other angle and every feature at zero.
HarmonicScan harmonic_scan(const pqc::CircuitTemplate& tmpl, int param_index, int n_points);

// ---------------------------------------------------------------------------
// Gate-imperfection sweep

struct RobustnessCell {
  double theta = 0.0;
  double phi = 0.0;
  double accuracy = 0.0;  // mean cross-validated test accuracy
  double stddev = 0.0;
};

struct RobustnessGrid {
  std::vector<RobustnessCell> cells;  // theta-major
  RobustnessCell nominal;

  /// theta_over_pi,phi_over_pi,theta,phi,accuracy,stddev with the nominal run first
  std::string to_csv() const;
};

struct RobustnessConfig {
  std::vector<double> thetas;
  std::vector<double> phis;
  std::size_t n_splits = 6;
  pqc::FSimParams nominal{};
  /// Allows cells outside theta in [0.2 pi, 0.8 pi], phi in [-0.5 pi, 0.5 pi].
  bool allow_outside = false;
  int threads = 1;
};

/// The grid over which entangler imperfections are stated to be harmless.
RobustnessConfig default_robustness_grid();

/// Retrains from scratch in every (theta, phi) cell with the same seeds as
/// the nominal run.
RobustnessGrid robustness_sweep(const data::LabeledDataset& raw, data::DatasetName name,
                                pqc::ArchId arch, const mc::TaskConfig& task,
                                const RobustnessConfig& config);

// ---------------------------------------------------------------------------
// Architecture comparison

struct ArchRow {
  pqc::ArchId arch;
  enc::ConvSpec conv;
  int params = 0;
  int layers = 0;
  double accuracy = 0.0;
  std::vector<double> class_accuracy;
};

/// arch,lrf,stride,passes,params,layers,learning_rate,accuracy
std::string arch_table_csv(const std::vector<ArchRow>& rows, double learning_rate);

/// Counts every configuration and, when `train` is set, trains it on split 0
/// and records the test accuracy.
std::vector<ArchRow> arch_compare(const data::LabeledDataset& raw, data::DatasetName name,
                                  const std::vector<pqc::ImageConfig>& configs,
                                  const mc::TaskConfig& task, bool train = true);

// ---------------------------------------------------------------------------
// Hardware timing

using Micros = std::chrono::microseconds;
using Nanos = std::chrono::nanoseconds;

inline constexpr Nanos kLayerTime{80};
inline constexpr Nanos kReadoutTime{500};

/// Duration of one circuit execution: layers * 80 ns + 500 ns readout.
Nanos pqc_execution_time(int layers);

struct TimingInputs {
  int m = 15;
  std::int64_t shots = 1000;
  Micros t_rep{50};
  Micros t_rewrite{1'450'000};
  int batch = 64;
  int iterations = 1;
};

struct TimingReport {
  TimingInputs inputs;
  Micros t_grad{0};        // (2m + 1) * shots * t_rep
  Micros t_per_sample{0};  // t_grad + t_rewrite
  Micros t_iteration{0};   // batch * t_per_sample
  Micros t_total{0};       // iterations * t_iteration

  /// quantity,microseconds,seconds
  std::string to_csv() const;
};

/// Throws std::invalid_argument unless every input is positive.
TimingReport hardware_time_estimate(const TimingInputs& inputs);

/// Exact decimal seconds for an integer microsecond count, e.g. "1.55".
std::string seconds_text(Micros t);

}  // namespace hql::analysis
