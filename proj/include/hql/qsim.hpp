#pragma once

// Ideal pure-state simulator for small qubit registers.
//
// Basis ordering is little-endian: qubit q is bit q of the basis index, so
// qubit 0 is the least significant bit. Single-qubit rotations follow
// R_P(angle) = exp(-i angle P / 2).

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "hql/rng.hpp"

namespace hql::qsim {

using amplitude = std::complex<double>;
using Matrix2 = std::array<amplitude, 4>;   // row-major 2x2
using Matrix4 = std::array<amplitude, 16>;  // row-major 4x4, basis |00>,|01>,|10>,|11>

inline constexpr int kMaxQubits = 12;

struct RX {
  int qubit;
  double angle;
};

struct RY {
  int qubit;
  double angle;
};

/// Excitation-preserving two-qubit gate: swap angle theta on the
/// single-excitation block and phase exp(-i phi) on |11>.
struct FSim {
  int qubit_a;
  int qubit_b;
  double theta;
  double phi;
};

using GateOp = std::variant<RX, RY, FSim>;

Matrix2 rx_matrix(double angle);
Matrix2 ry_matrix(double angle);
Matrix4 fsim_matrix(double theta, double phi);

class StateVector {
 public:
  /// Ground state |0...0> on n_qubits in [1, kMaxQubits].
  explicit StateVector(int n_qubits);

  /// Takes ownership of explicit amplitudes; the vector must have length
  /// 2^n_qubits and unit norm within 1e-10.
  static StateVector from_amplitudes(int n_qubits, std::vector<amplitude> amps);

  int n_qubits() const { return n_qubits_; }
  std::size_t size() const { return amps_.size(); }
  std::span<const amplitude> amplitudes() const { return amps_; }
  const amplitude& operator[](std::size_t i) const { return amps_[i]; }
  double norm() const;

  /// In-place gate application; throws std::invalid_argument for bad indices.
  void apply(const GateOp& gate);
  void apply_rx(int qubit, double angle);
  void apply_ry(int qubit, double angle);
  void apply_fsim(int qubit_a, int qubit_b, double theta, double phi);

 private:
  void check_qubit(int q) const;
  void apply_single(int qubit, const Matrix2& m);

  int n_qubits_;
  std::vector<amplitude> amps_;
};

StateVector new_state(int n_qubits);
StateVector apply_gate(StateVector state, const GateOp& gate);

/// <sigma_z> on one qubit.
double expect_z(const StateVector& state, int qubit);

/// Shot estimate of <sigma_z>: draws `shots` per-shot outcomes with
/// p(+1) = (1 + <sigma_z>) / 2 and returns (n_plus - n_minus) / shots.
double sample_expect_z(const StateVector& state, int qubit, std::uint32_t shots,
                       RandomStream& stream);

struct Exact {};

struct Shots {
  std::uint32_t count;
  RandomStream* stream;  // not owned; never shared between concurrent tasks
};

using MeasurementMode = std::variant<Exact, Shots>;

/// Dispatches to expect_z or sample_expect_z.
double measure_z(const StateVector& state, int qubit, const MeasurementMode& mode);

}  // namespace hql::qsim
