#pragma once

// Declarative parameterized-circuit templates and their evaluation.
//
// A template is a list of layers; each layer is a set of gates acting on
// disjoint qubits, so layer_count() is the circuit depth in time steps.
// Rotation angles come from parameter slots; two-qubit gates are fixed FSim
// entanglers sharing the template's (theta, phi).

#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hql/encoding.hpp"
#include "hql/qsim.hpp"

namespace hql::pqc {

enum class ArchId { SimpleA, SimpleB, SimpleC, SimpleD, MnistA, MnistB, MnistC };

std::string to_string(ArchId id);
/// Accepts "simple-a" ... "mnist-c"; throws ConfigError otherwise.
ArchId parse_arch(const std::string& text);
bool is_image_arch(ArchId id);

struct FSimParams {
  double theta = std::numbers::pi / 2;
  double phi = 0.1 * std::numbers::pi;
  bool operator==(const FSimParams&) const = default;
};

struct FeatureSlot {
  int feature;
};
struct WeightSlot {
  int weight;
};
/// angle = feature angle + weight
struct MergedSlot {
  int feature;
  int weight;
};
struct FixedAngle {
  double value;
};
using ParamSlot = std::variant<FeatureSlot, WeightSlot, MergedSlot, FixedAngle>;

enum class Axis { X, Y };

struct Rotation {
  Axis axis;
  int qubit;
  ParamSlot slot;
};

struct Entangler {
  int qubit_a;
  int qubit_b;
};

using Step = std::variant<Rotation, Entangler>;
using Layer = std::vector<Step>;

class CircuitTemplate {
 public:
  /// Validates the layout: qubits in range and disjoint within each layer,
  /// weight indices 0..m-1 each used exactly once, feature indices dense.
  /// `conv_slots` leading weights are produced by the convolutional encoder.
  CircuitTemplate(ArchId arch, int n_qubits, FSimParams fsim,
                  std::optional<enc::ConvSpec> conv, std::vector<Layer> layers,
                  int conv_slots = 0);

  ArchId arch() const { return arch_; }
  int n_qubits() const { return n_qubits_; }
  int readout_qubit() const { return 0; }
  const FSimParams& fsim() const { return fsim_; }
  const std::optional<enc::ConvSpec>& conv() const { return conv_; }
  std::span<const Layer> layers() const { return layers_; }
  int layer_count() const { return static_cast<int>(layers_.size()); }

  /// Gates in execution order.
  std::span<const Step> steps() const { return steps_; }
  /// Position in steps() of the rotation carrying weight j.
  int step_of_weight(int j) const { return weight_step_[j]; }

  /// Number of circuit angles (distinct weight indices).
  int weight_count() const { return static_cast<int>(weight_step_.size()); }
  int feature_count() const { return feature_count_; }
  int conv_slot_count() const { return conv_slots_; }
  /// Circuit angles trained directly (not produced by the encoder).
  int free_weight_count() const { return weight_count() - conv_slots_; }

  /// Scalar count of the full trainable model built on this template:
  /// weight_count() for angle-encoded circuits; kernels, biases, free
  /// angles and the output bias for convolutional ones.
  int trainable_count() const;

  /// Versioned one-line text form, e.g.
  /// "arch=mnist-c fsim=1.5707963267948966,0.3141592653589793 conv=3x3/2 pad=1,0 passes=2 image=8x7"
  std::string describe() const;

 private:
  ArchId arch_;
  int n_qubits_;
  FSimParams fsim_;
  std::optional<enc::ConvSpec> conv_;
  std::vector<Layer> layers_;
  std::vector<Step> steps_;
  std::vector<int> weight_step_;
  int feature_count_ = 0;
  int conv_slots_ = 0;
};

/// Builds a catalog architecture. Image architectures require a conv spec;
/// simple ones reject it.
CircuitTemplate build_template(ArchId arch, const std::optional<enc::ConvSpec>& conv = std::nullopt,
                               FSimParams fsim = {});

/// Inverse of CircuitTemplate::describe().
CircuitTemplate parse_template(const std::string& description);

int param_count(const CircuitTemplate& tmpl);

/// Default LRF geometry for an image architecture (the 3x3/2 tiling for mnist-c).
enc::ConvSpec default_conv_spec(ArchId arch);

/// The image-architecture configurations compared in the architecture table.
struct ImageConfig {
  ArchId arch;
  enc::ConvSpec conv;
};
std::vector<ImageConfig> image_config_catalog();

/// Resolves the angle of one slot.
double slot_angle(const ParamSlot& slot, std::span<const double> features,
                  std::span<const double> theta);

/// Final state of the circuit on |0...0>.
qsim::StateVector run_state(const CircuitTemplate& tmpl, std::span<const double> features,
                            std::span<const double> theta);

/// g = <sigma_z> on the readout qubit, exact or shot-estimated. Throws
/// std::invalid_argument if the feature or weight vectors have the wrong length.
double bind_and_run(const CircuitTemplate& tmpl, std::span<const double> features,
                    std::span<const double> theta, const qsim::MeasurementMode& mode = qsim::Exact{});

struct ShiftGradient {
  double value = 0.0;            // g at the unshifted point
  std::vector<double> d_theta;   // dg/dtheta_j
};

/// Parameter-shift gradient: dg/dtheta_j = [g(theta_j + pi/2) - g(theta_j - pi/2)] / 2.
/// The prefix state before each shifted gate is cached, so only the suffix
/// is re-simulated. In shot mode every evaluation draws from the stream in a
/// fixed order (value, then j = 0.. with + before -).
ShiftGradient shift_gradient(const CircuitTemplate& tmpl, std::span<const double> features,
                             std::span<const double> theta,
                             const qsim::MeasurementMode& mode = qsim::Exact{});

}  // namespace hql::pqc
