#include "hql/qsim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hql::qsim {
namespace {

constexpr amplitude kI{0.0, 1.0};

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

Matrix2 rx_matrix(double angle) {
  const double c = std::cos(angle / 2);
  const double s = std::sin(angle / 2);
  return {amplitude{c, 0}, amplitude{0, -s}, amplitude{0, -s}, amplitude{c, 0}};
}

Matrix2 ry_matrix(double angle) {
  const double c = std::cos(angle / 2);
  const double s = std::sin(angle / 2);
  return {amplitude{c, 0}, amplitude{-s, 0}, amplitude{s, 0}, amplitude{c, 0}};
}

Matrix4 fsim_matrix(double theta, double phi) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Matrix4 m{};
  m[0] = 1.0;
  m[5] = c;
  m[6] = -kI * s;
  m[9] = -kI * s;
  m[10] = c;
  m[15] = std::exp(-kI * phi);
  return m;
}

StateVector::StateVector(int n_qubits) : n_qubits_(n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits)
    throw std::invalid_argument("qubit count must be in [1, " +
                                std::to_string(kMaxQubits) + "], got " +
                                std::to_string(n_qubits));
  amps_.assign(std::size_t{1} << n_qubits, amplitude{});
  amps_[0] = 1.0;
}

StateVector StateVector::from_amplitudes(int n_qubits, std::vector<amplitude> amps) {
  StateVector s(n_qubits);
  if (amps.size() != s.amps_.size())
    throw std::invalid_argument("amplitude count does not match 2^n_qubits");
  s.amps_ = std::move(amps);
  if (std::abs(s.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("amplitudes are not normalized");
  return s;
}

double StateVector::norm() const {
  double sum = 0.0;
  for (const auto& a : amps_) sum += std::norm(a);
  return std::sqrt(sum);
}

void StateVector::check_qubit(int q) const {
  if (q < 0 || q >= n_qubits_)
    throw std::invalid_argument("qubit index " + std::to_string(q) +
                                " out of range for " + std::to_string(n_qubits_) +
                                "-qubit state");
}

void StateVector::apply_single(int qubit, const Matrix2& m) {
  check_qubit(qubit);
  const std::size_t mask = std::size_t{1} << qubit;
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    if (i & mask) continue;
    const amplitude a0 = amps_[i];
    const amplitude a1 = amps_[i | mask];
    amps_[i] = m[0] * a0 + m[1] * a1;
    amps_[i | mask] = m[2] * a0 + m[3] * a1;
  }
}

void StateVector::apply_rx(int qubit, double angle) { apply_single(qubit, rx_matrix(angle)); }

void StateVector::apply_ry(int qubit, double angle) { apply_single(qubit, ry_matrix(angle)); }

void StateVector::apply_fsim(int qubit_a, int qubit_b, double theta, double phi) {
  check_qubit(qubit_a);
  check_qubit(qubit_b);
  if (qubit_a == qubit_b) throw std::invalid_argument("fsim qubits must differ");
  const std::size_t ma = std::size_t{1} << qubit_a;
  const std::size_t mb = std::size_t{1} << qubit_b;
  const double c = std::cos(theta);
  const amplitude mis = -kI * std::sin(theta);
  const amplitude phase = std::exp(-kI * phi);
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    if (i & (ma | mb)) continue;
    amplitude& a01 = amps_[i | ma];
    amplitude& a10 = amps_[i | mb];
    const amplitude x = a01;
    const amplitude y = a10;
    a01 = c * x + mis * y;
    a10 = mis * x + c * y;
    amps_[i | ma | mb] *= phase;
  }
}

void StateVector::apply(const GateOp& gate) {
  std::visit(overloaded{
                 [this](const RX& g) { apply_rx(g.qubit, g.angle); },
                 [this](const RY& g) { apply_ry(g.qubit, g.angle); },
                 [this](const FSim& g) { apply_fsim(g.qubit_a, g.qubit_b, g.theta, g.phi); },
             },
             gate);
}

StateVector new_state(int n_qubits) { return StateVector(n_qubits); }

StateVector apply_gate(StateVector state, const GateOp& gate) {
  state.apply(gate);
  return state;
}

double expect_z(const StateVector& state, int qubit) {
  if (qubit < 0 || qubit >= state.n_qubits())
    throw std::invalid_argument("expect_z: qubit index out of range");
  const std::size_t mask = std::size_t{1} << qubit;
  double value = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    const double p = std::norm(state[i]);
    value += (i & mask) ? -p : p;
  }
  // Rounding can push a pure eigenstate a hair outside [-1, 1].
  return std::clamp(value, -1.0, 1.0);
}

double sample_expect_z(const StateVector& state, int qubit, std::uint32_t shots,
                       RandomStream& stream) {
  if (shots == 0) throw std::invalid_argument("sample_expect_z: shots must be >= 1");
  const double p_plus = (1.0 + expect_z(state, qubit)) / 2.0;
  std::int64_t balance = 0;
  for (std::uint32_t s = 0; s < shots; ++s) balance += stream.uniform() < p_plus ? 1 : -1;
  return static_cast<double>(balance) / shots;
}

double measure_z(const StateVector& state, int qubit, const MeasurementMode& mode) {
  if (const auto* shots = std::get_if<Shots>(&mode)) {
    if (shots->stream == nullptr) throw std::invalid_argument("shot mode requires a stream");
    return sample_expect_z(state, qubit, shots->count, *shots->stream);
  }
  return expect_z(state, qubit);
}

}  // namespace hql::qsim
