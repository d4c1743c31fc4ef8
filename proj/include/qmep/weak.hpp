#pragma once

// Generalized measurement through an apparatus whose pointer basis |k> is
// rotated away from the entangling basis |alpha_j>:
//
//   K_k = sum_j <alpha_j|k> |psi_j><psi_j|,   |Psi> -> K_k |Psi> / sqrt(p_k)
//
// with p_k = |K_k Psi|^2. Identity mixing is the projective limit.

#include <cstdint>
#include <span>
#include <vector>

#include "qmep/born.hpp"
#include "qmep/linalg.hpp"

namespace qmep {

inline constexpr double kProbabilityFloor = 1e-14;

class KrausSet {
public:
    /// `mixing(j, k)` = <alpha_j|k>. Throws InvariantError unless the basis is
    /// orthonormal and the mixing matrix unitary.
    KrausSet(Matrix psi_basis, Matrix mixing);

    Index dim() const { return psi_.rows(); }
    std::size_t size() const { return ops_.size(); }
    const std::vector<Operator>& operators() const { return ops_; }
    const Operator& operator[](std::size_t k) const { return ops_[k]; }
    const Matrix& psi_basis() const { return psi_; }
    const Matrix& mixing() const { return mixing_; }

    /// Max-abs entry of sum_k K_k^dagger K_k - 1.
    double completeness_residual() const;

private:
    Matrix psi_;
    Matrix mixing_;
    std::vector<Operator> ops_;
};

KrausSet build_kraus(const Matrix& psi_basis, const Matrix& mixing);

/// Real rotation by `angle` in the plane of the first two basis vectors.
Matrix rotation_mixing(Index dim, double angle);

/// p_k = |K_k psi|^2 for every outcome.
std::vector<double> outcome_probabilities(const StateVector& psi, const KrausSet& kraus);

struct WeakUpdate {
    StateVector state;
    double probability;
};

/// Throws InvariantError when p_k <= kProbabilityFloor.
WeakUpdate weak_update(const StateVector& psi, const KrausSet& kraus, std::size_t k);

/// Born weights |<psi_j|Psi>|^2 in the Kraus set's basis.
RealVector born_weights(const StateVector& psi, const Matrix& psi_basis);

enum class StateRecording { All, FinalOnly };

struct Trajectory {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::vector<std::size_t> outcomes;
    /// All post-update states (index 0 = initial) or only the final one.
    std::vector<StateVector> states;
    /// born_weights(j, t) = |<psi_j|Psi_t>|^2, t = 0 .. n_steps.
    RealMatrix born_weights;
    /// Max over steps of |sum_k p_k - 1|.
    double max_probability_residual = 0.0;

    std::size_t steps() const { return outcomes.size(); }
    const StateVector& final_state() const { return states.back(); }
};

/// Repeated measurements with a freshly prepared apparatus each step.
/// Outcomes are drawn by inverse CDF from CounterRng(seed, stream).
Trajectory run_trajectory(const StateVector& psi0, const KrausSet& kraus, std::size_t n_steps, std::uint64_t seed,
                          std::uint64_t stream = 0, StateRecording recording = StateRecording::All);

/// `count` trajectories on streams 0 .. count-1. Independent of `threads`.
std::vector<Trajectory> run_ensemble(const StateVector& psi0, const KrausSet& kraus, std::size_t n_steps,
                                     std::uint64_t seed, std::size_t count, unsigned threads = 1,
                                     StateRecording recording = StateRecording::FinalOnly);

struct ConvergenceStatistics {
    std::size_t trajectories = 0;
    /// Fraction of trajectories whose final Born weights peak at j.
    std::vector<double> empirical_dist;
    /// Ensemble means, (j, t) for t = 0 .. n_steps.
    RealMatrix mean_weight;
    /// Mean and standard error of p_j(t+1) - p_j(t), (j, t) for t = 0 .. n_steps-1.
    RealMatrix martingale_drift;
    RealMatrix drift_stderr;
    /// Ensemble mean of max_j p_j(t) and the standard error of its per-step increment.
    std::vector<double> mean_max_weight;
    std::vector<double> max_weight_increment_stderr;
};

/// Throws InvariantError for an empty ensemble or trajectories that differ in
/// dimension, length or initial Born weights.
ConvergenceStatistics convergence_statistics(std::span<const Trajectory> trajectories);

}  // namespace qmep
