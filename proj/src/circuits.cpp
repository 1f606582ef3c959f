#include "hql/circuits.hpp"

#include <algorithm>
#include <stdexcept>

#include "hql/csv_format.hpp"
#include "hql/errors.hpp"

namespace hql::pqc {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

constexpr int kQubits = 4;

Layer rotation_layer(Axis axis, auto slot_for) {
  Layer layer;
  for (int q = 0; q < kQubits; ++q) layer.push_back(Rotation{axis, q, slot_for(q)});
  return layer;
}

Layer pair(int a, int b) { return {Entangler{a, b}}; }
Layer outer_pairs() { return {Entangler{0, 1}, Entangler{2, 3}}; }

void append_euler(std::vector<Layer>& layers, int first_weight) {
  layers.push_back({Rotation{Axis::Y, 0, WeightSlot{first_weight}}});
  layers.push_back({Rotation{Axis::X, 0, WeightSlot{first_weight + 1}}});
  layers.push_back({Rotation{Axis::Y, 0, WeightSlot{first_weight + 2}}});
}

// Angle-encoded 15-parameter circuits. Layer 0 writes feature i plus weight i
// on qubit i, the two single-qubit layers (weights 4..11) sit at the vertex
// of the entangler sequence, and weights 12..14 form the Y-X-Y readout
// rotation on qubit 0.
CircuitTemplate build_simple(ArchId arch, FSimParams fsim) {
  std::vector<Layer> down, up;
  switch (arch) {
    case ArchId::SimpleA:  // sequential V: (0,1)(1,2)(2,3) then (2,3)(1,2)(0,1)
      down = {pair(0, 1), pair(1, 2), pair(2, 3)};
      up = {pair(2, 3), pair(1, 2), pair(0, 1)};
      break;
    case ArchId::SimpleB:  // parallel outer pairs, then the middle pair
      down = {outer_pairs(), pair(1, 2)};
      up = {pair(1, 2), outer_pairs()};
      break;
    case ArchId::SimpleC:  // outer, middle, outer on both sides
      down = {outer_pairs(), pair(1, 2), outer_pairs()};
      up = {outer_pairs(), pair(1, 2), outer_pairs()};
      break;
    case ArchId::SimpleD:  // middle first, then outer pairs
      down = {pair(1, 2), outer_pairs()};
      up = {outer_pairs(), pair(1, 2)};
      break;
    default:
      throw std::invalid_argument("not a simple architecture");
  }
  std::vector<Layer> layers;
  layers.push_back(rotation_layer(Axis::X, [](int q) { return ParamSlot{MergedSlot{q, q}}; }));
  layers.insert(layers.end(), down.begin(), down.end());
  layers.push_back(rotation_layer(Axis::X, [](int q) { return ParamSlot{WeightSlot{4 + q}}; }));
  layers.push_back(rotation_layer(Axis::Y, [](int q) { return ParamSlot{WeightSlot{8 + q}}; }));
  layers.insert(layers.end(), up.begin(), up.end());
  append_euler(layers, 12);
  return CircuitTemplate(arch, kQubits, fsim, std::nullopt, std::move(layers));
}

int ceil_div(int a, int b) { return (a + b - 1) / b; }

// Depth (in layers) of each image family and the number of single-qubit
// rotation layers that carry convolution angles and extra free angles.
int image_depth(ArchId arch) {
  switch (arch) {
    case ArchId::MnistA: return 27;
    case ArchId::MnistB: return 17;
    case ArchId::MnistC: return 15;
    default: throw std::invalid_argument("not an image architecture");
  }
}

int image_rotation_layers(ArchId arch, const enc::ConvSpec& conv) {
  const int needed = ceil_div(conv.kernel_count(), kQubits);
  switch (arch) {
    case ArchId::MnistA:
      // Stride-1 tilings get a wide data region; its size per LRF shape is
      // part of the catalog definition.
      if (conv.stride == 1 && conv.lrf_rows == 2 && conv.lrf_cols == 2) return std::max(13, needed);
      if (conv.stride == 1 && conv.lrf_rows == 3 && conv.lrf_cols == 3) return std::max(12, needed);
      return needed;
    case ArchId::MnistB: return std::max(8, needed);
    case ArchId::MnistC: return std::max(6, needed);
    default: throw std::invalid_argument("not an image architecture");
  }
}

// Rotation layers alternate X/Y and carry weights 4i..4i+3; entangler layers
// are spread evenly between them. Family a cycles single gates along the V
// (0,1)(1,2)(2,3)(2,3)(1,2)(0,1); families b and c alternate the parallel
// outer pairs with the middle pair.
CircuitTemplate build_image(ArchId arch, const enc::ConvSpec& conv, FSimParams fsim) {
  conv.validate();
  const int rot = image_rotation_layers(arch, conv);
  const int ent = image_depth(arch) - rot - 3;
  if (ent < 1)
    throw std::invalid_argument("conv spec " + enc::describe(conv) + " needs " +
                                std::to_string(conv.kernel_count()) +
                                " angle slots, too many for " + to_string(arch));
  const std::vector<Layer> pattern =
      arch == ArchId::MnistA
          ? std::vector<Layer>{pair(0, 1), pair(1, 2), pair(2, 3), pair(2, 3), pair(1, 2), pair(0, 1)}
          : std::vector<Layer>{outer_pairs(), pair(1, 2)};

  std::vector<Layer> layers;
  std::size_t next_ent = 0;
  for (int i = 0; i < rot; ++i) {
    const Axis axis = i % 2 == 0 ? Axis::X : Axis::Y;
    layers.push_back(rotation_layer(axis, [i](int q) { return ParamSlot{WeightSlot{4 * i + q}}; }));
    const int count = (i + 1) * ent / rot - i * ent / rot;
    for (int e = 0; e < count; ++e) layers.push_back(pattern[next_ent++ % pattern.size()]);
  }
  append_euler(layers, 4 * rot);
  return CircuitTemplate(arch, kQubits, fsim, conv, std::move(layers), conv.kernel_count());
}

}  // namespace

std::string to_string(ArchId id) {
  switch (id) {
    case ArchId::SimpleA: return "simple-a";
    case ArchId::SimpleB: return "simple-b";
    case ArchId::SimpleC: return "simple-c";
    case ArchId::SimpleD: return "simple-d";
    case ArchId::MnistA: return "mnist-a";
    case ArchId::MnistB: return "mnist-b";
    case ArchId::MnistC: return "mnist-c";
  }
  return "?";
}

ArchId parse_arch(const std::string& text) {
  for (ArchId id : {ArchId::SimpleA, ArchId::SimpleB, ArchId::SimpleC, ArchId::SimpleD,
                    ArchId::MnistA, ArchId::MnistB, ArchId::MnistC})
    if (text == to_string(id)) return id;
  throw ConfigError("unknown architecture '" + text + "'");
}

bool is_image_arch(ArchId id) {
  return id == ArchId::MnistA || id == ArchId::MnistB || id == ArchId::MnistC;
}

CircuitTemplate::CircuitTemplate(ArchId arch, int n_qubits, FSimParams fsim,
                                 std::optional<enc::ConvSpec> conv, std::vector<Layer> layers,
                                 int conv_slots)
    : arch_(arch), n_qubits_(n_qubits), fsim_(fsim), conv_(std::move(conv)),
      layers_(std::move(layers)), conv_slots_(conv_slots) {
  if (n_qubits < 1 || n_qubits > qsim::kMaxQubits)
    throw std::invalid_argument("template qubit count out of range");
  std::vector<int> weight_use;
  int max_feature = -1;
  auto check_q = [&](int q) {
    if (q < 0 || q >= n_qubits) throw std::invalid_argument("template qubit index out of range");
  };
  for (const auto& layer : layers_) {
    std::vector<bool> busy(n_qubits, false);
    auto occupy = [&](int q) {
      check_q(q);
      if (busy[q]) throw std::invalid_argument("two gates on one qubit within a layer");
      busy[q] = true;
    };
    for (const auto& step : layer) {
      std::visit(overloaded{
                     [&](const Rotation& r) {
                       occupy(r.qubit);
                       auto use_weight = [&](int j) {
                         if (j < 0) throw std::invalid_argument("negative weight index");
                         if (static_cast<std::size_t>(j) >= weight_use.size())
                           weight_use.resize(j + 1, -1);
                         if (weight_use[j] >= 0)
                           throw std::invalid_argument("weight index used more than once");
                         weight_use[j] = static_cast<int>(steps_.size());
                       };
                       std::visit(overloaded{
                                      [&](const FeatureSlot& s) { max_feature = std::max(max_feature, s.feature); },
                                      [&](const WeightSlot& s) { use_weight(s.weight); },
                                      [&](const MergedSlot& s) {
                                        max_feature = std::max(max_feature, s.feature);
                                        use_weight(s.weight);
                                      },
                                      [](const FixedAngle&) {},
                                  },
                                  r.slot);
                     },
                     [&](const Entangler& e) {
                       if (e.qubit_a == e.qubit_b) throw std::invalid_argument("entangler on one qubit");
                       occupy(e.qubit_a);
                       occupy(e.qubit_b);
                     },
                 },
                 step);
      steps_.push_back(step);
    }
  }
  if (std::find(weight_use.begin(), weight_use.end(), -1) != weight_use.end())
    throw std::invalid_argument("weight indices are not contiguous");
  weight_step_ = std::move(weight_use);
  feature_count_ = max_feature + 1;
  if (conv_slots_ < 0 || conv_slots_ > weight_count())
    throw std::invalid_argument("conv slot count exceeds weight count");
  if (conv_slots_ > 0 && !conv_)
    throw std::invalid_argument("conv slots require a conv spec");
}

int CircuitTemplate::trainable_count() const {
  if (!conv_) return weight_count();
  return conv_->kernel_count() * (conv_->patch_size() + 1) + free_weight_count() + 1;
}

std::string CircuitTemplate::describe() const {
  std::string out = "arch=" + to_string(arch_) + " fsim=" + format_double(fsim_.theta) + "," +
                    format_double(fsim_.phi) + " conv=";
  out += conv_ ? enc::describe(*conv_) : "none";
  return out;
}

CircuitTemplate build_template(ArchId arch, const std::optional<enc::ConvSpec>& conv,
                               FSimParams fsim) {
  if (is_image_arch(arch)) {
    if (!conv) throw std::invalid_argument(to_string(arch) + " requires a conv spec");
    return build_image(arch, *conv, fsim);
  }
  if (conv) throw std::invalid_argument(to_string(arch) + " does not take a conv spec");
  return build_simple(arch, fsim);
}

CircuitTemplate parse_template(const std::string& description) {
  auto field = [&](const std::string& key, bool to_end) {
    const auto pos = description.find(key + "=");
    if (pos == std::string::npos) throw ConfigError("template description lacks '" + key + "'");
    const auto begin = pos + key.size() + 1;
    const auto end = to_end ? description.size() : description.find(' ', begin);
    return description.substr(begin, end == std::string::npos ? std::string::npos : end - begin);
  };
  const ArchId arch = parse_arch(field("arch", false));
  const std::string fsim_text = field("fsim", false);
  const auto comma = fsim_text.find(',');
  if (comma == std::string::npos) throw ConfigError("malformed fsim field '" + fsim_text + "'");
  FSimParams fsim;
  try {
    fsim.theta = parse_double(fsim_text.substr(0, comma));
    fsim.phi = parse_double(fsim_text.substr(comma + 1));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("malformed fsim field: ") + e.what());
  }
  const std::string conv_text = field("conv", true);
  std::optional<enc::ConvSpec> conv;
  if (conv_text != "none") conv = enc::parse_conv_spec(conv_text);
  return build_template(arch, conv, fsim);
}

int param_count(const CircuitTemplate& tmpl) { return tmpl.weight_count(); }

enc::ConvSpec default_conv_spec(ArchId arch) {
  enc::ConvSpec s;
  switch (arch) {
    case ArchId::MnistC: return s;  // 3x3/2, one zero row at the bottom, two passes
    case ArchId::MnistB:
      s.lrf_rows = s.lrf_cols = 2;
      s.pad_bottom_rows = 0;
      return s;
    case ArchId::MnistA:
      s.lrf_rows = s.lrf_cols = 2;
      s.stride = 1;
      s.passes = 1;
      return s;
    default:
      throw std::invalid_argument(to_string(arch) + " has no conv spec");
  }
}

std::vector<ImageConfig> image_config_catalog() {
  auto spec = [](int lrf, int stride, int pad_bottom, int pad_right, int passes) {
    enc::ConvSpec s;
    s.lrf_rows = s.lrf_cols = lrf;
    s.stride = stride;
    s.pad_bottom_rows = pad_bottom;
    s.pad_right_cols = pad_right;
    s.passes = passes;
    return s;
  };
  return {
      {ArchId::MnistA, spec(2, 1, 1, 0, 1)},
      {ArchId::MnistC, spec(2, 2, 0, 0, 1)},
      {ArchId::MnistB, spec(2, 2, 0, 0, 2)},
      {ArchId::MnistC, spec(3, 2, 1, 0, 2)},
      {ArchId::MnistA, spec(3, 1, 0, 1, 1)},
  };
}

double slot_angle(const ParamSlot& slot, std::span<const double> features,
                  std::span<const double> theta) {
  return std::visit(overloaded{
                        [&](const FeatureSlot& s) { return features[s.feature]; },
                        [&](const WeightSlot& s) { return theta[s.weight]; },
                        [&](const MergedSlot& s) { return features[s.feature] + theta[s.weight]; },
                        [](const FixedAngle& s) { return s.value; },
                    },
                    slot);
}

namespace {

void check_lengths(const CircuitTemplate& tmpl, std::span<const double> features,
                   std::span<const double> theta) {
  if (features.size() != static_cast<std::size_t>(tmpl.feature_count()))
    throw std::invalid_argument("feature angle count " + std::to_string(features.size()) +
                                " does not match template (" +
                                std::to_string(tmpl.feature_count()) + ")");
  if (theta.size() != static_cast<std::size_t>(tmpl.weight_count()))
    throw std::invalid_argument("parameter count " + std::to_string(theta.size()) +
                                " does not match template (" +
                                std::to_string(tmpl.weight_count()) + ")");
}

void apply_step(qsim::StateVector& state, const Step& step, const FSimParams& fsim,
                std::span<const double> features, std::span<const double> theta,
                double shift = 0.0) {
  if (const auto* r = std::get_if<Rotation>(&step)) {
    const double angle = slot_angle(r->slot, features, theta) + shift;
    if (r->axis == Axis::X) state.apply_rx(r->qubit, angle);
    else state.apply_ry(r->qubit, angle);
  } else {
    const auto& e = std::get<Entangler>(step);
    state.apply_fsim(e.qubit_a, e.qubit_b, fsim.theta, fsim.phi);
  }
}

}  // namespace

qsim::StateVector run_state(const CircuitTemplate& tmpl, std::span<const double> features,
                            std::span<const double> theta) {
  check_lengths(tmpl, features, theta);
  qsim::StateVector state(tmpl.n_qubits());
  for (const auto& step : tmpl.steps()) apply_step(state, step, tmpl.fsim(), features, theta);
  return state;
}

double bind_and_run(const CircuitTemplate& tmpl, std::span<const double> features,
                    std::span<const double> theta, const qsim::MeasurementMode& mode) {
  return qsim::measure_z(run_state(tmpl, features, theta), tmpl.readout_qubit(), mode);
}

ShiftGradient shift_gradient(const CircuitTemplate& tmpl, std::span<const double> features,
                             std::span<const double> theta, const qsim::MeasurementMode& mode) {
  check_lengths(tmpl, features, theta);
  const auto steps = tmpl.steps();
  const int m = tmpl.weight_count();

  // prefix[k] is the state just before step k, kept only where a weight sits.
  std::vector<int> prefix_slot(steps.size(), -1);
  for (int j = 0; j < m; ++j) prefix_slot[tmpl.step_of_weight(j)] = j;
  std::vector<qsim::StateVector> prefix(m, qsim::StateVector(tmpl.n_qubits()));

  qsim::StateVector state(tmpl.n_qubits());
  for (std::size_t k = 0; k < steps.size(); ++k) {
    if (prefix_slot[k] >= 0) prefix[prefix_slot[k]] = state;
    apply_step(state, steps[k], tmpl.fsim(), features, theta);
  }

  ShiftGradient out;
  out.value = qsim::measure_z(state, tmpl.readout_qubit(), mode);
  out.d_theta.resize(m);
  constexpr double kShift = std::numbers::pi / 2;
  for (int j = 0; j < m; ++j) {
    const auto k = static_cast<std::size_t>(tmpl.step_of_weight(j));
    double g[2];
    for (int side = 0; side < 2; ++side) {
      qsim::StateVector s = prefix[j];
      apply_step(s, steps[k], tmpl.fsim(), features, theta, side == 0 ? kShift : -kShift);
      for (std::size_t r = k + 1; r < steps.size(); ++r)
        apply_step(s, steps[r], tmpl.fsim(), features, theta);
      g[side] = qsim::measure_z(s, tmpl.readout_qubit(), mode);
    }
    out.d_theta[j] = (g[0] - g[1]) / 2.0;
  }
  return out;
}

}  // namespace hql::pqc
