#pragma once

#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "hqfl/tensor.hpp"

namespace hqfl::quantum {

// Exact state-vector simulation of the variational circuit: amplitude
// embedding, per-qubit Rz-Ry-Rz cascades with CNOT entanglement, Pauli-Z
// readout. Qubit 0 is the most significant bit of the basis-state index:
// for n=2, |10> means qubit 0 in state 1, qubit 1 in state 0, index 2.

using Complex = std::complex<double>;

struct QuantumState {
  std::vector<Complex> amplitudes;
  std::size_t n_qubits = 0;

  double norm_sq() const;
};

constexpr std::size_t kMaxQubits = 8;

enum class RotationAxis { kY, kZ };

/// Per-layer CNOT wiring. Pairs are applied in list order within a layer.
struct CnotSchedule {
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> layers;
};

/// Ring wiring with layer-dependent range: layer l (1-based) connects
/// (i, (i + r) mod n) for all i, with r = ((l-1) mod (n-1)) + 1. A single
/// qubit gets an empty schedule.
CnotSchedule make_ring_schedule(std::size_t n_qubits, std::size_t n_layers);

/// Rotation angles, shape [n_layers, n_qubits, 3] in cascade order
/// (Rz angle, Ry angle, Rz angle).
struct EntanglingLayerParams {
  Tensor angles;

  std::size_t n_layers() const { return angles.shape[0]; }
  std::size_t n_qubits() const { return angles.shape[1]; }
  static EntanglingLayerParams random(std::size_t n_layers, std::size_t n_qubits,
                                      class ::hqfl::Rng& rng);  // uniform [0, 2*pi)
};

/// x must have unit L2 norm within 1e-9 and power-of-two length <= 2^kMaxQubits.
QuantumState amplitude_embed(const std::vector<double>& x);

void apply_rotation(QuantumState& state, std::size_t qubit, RotationAxis axis, double angle);
void apply_cnot(QuantumState& state, std::size_t control, std::size_t target);

/// All layers: rotation cascades then the layer's CNOT pairs, in order.
void apply_entangling_layers(QuantumState& state, const EntanglingLayerParams& params,
                             const CnotSchedule& schedule);

/// Inverse of apply_entangling_layers (reverse order, negated angles).
void apply_entangling_layers_inverse(QuantumState& state, const EntanglingLayerParams& params,
                                     const CnotSchedule& schedule);

/// <Z_i> for every qubit; each component lies in [-1, 1].
std::vector<double> pauli_z_expectations(const QuantumState& state);

/// Embeds x, runs the circuit, measures. Convenience composition.
std::vector<double> circuit_expectations(const std::vector<double>& x,
                                         const EntanglingLayerParams& params,
                                         const CnotSchedule& schedule);

/// Exact angle gradients via the parameter-shift rule:
/// d<Z_i>/d theta = (E(theta + pi/2) - E(theta - pi/2)) / 2.
/// Output shape [n_layers, n_qubits, 3, n_qubits] (last axis = observable).
Tensor parameter_shift_grad(const std::vector<double>& x,
                            const EntanglingLayerParams& params,
                            const CnotSchedule& schedule);

/// d<Z_i>/dx_j = 2 Re[(U^dag Z_i U x)_j] for real unit x. Rows are
/// observables, columns input amplitudes. The normalization chain rule is
/// the caller's job.
Tensor input_adjoint_grad(const std::vector<double>& x,
                          const EntanglingLayerParams& params,
                          const CnotSchedule& schedule);

}  // namespace hqfl::quantum

namespace hqfl {
class Rng;
}
