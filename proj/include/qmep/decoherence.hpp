#pragma once

// System + apparatus + spin-1/2 bath. The apparatus couples to the bath only
// through its pointer observable A:
//
//   H = H_S (x) 1 + V delta(t - t0) + sum_i g_i A (x) sigma_z^(i)
//
// The delta kick integrates to the von Neumann entangler and is applied as an
// instantaneous unitary at t0. With a static bath coupling, the reduced
// apparatus coherences are multiplied by
//
//   r_kk'(t) = prod_i (|a_i|^2 e^{-i D g_i (t-t0)} + |b_i|^2 e^{+i D g_i (t-t0)}),
//   D = A_k - A_k'.
//
// Composite layout: (S, A, spin_0, ..., spin_{N-1}), spin |0> = sigma_z +1.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "qmep/born.hpp"
#include "qmep/density.hpp"
#include "qmep/linalg.hpp"
#include "qmep/projector.hpp"

namespace qmep {

class CounterRng;

inline constexpr Index kDimensionBudget = 4096;

class SpinBathSpec {
public:
    using SpinAmplitudes = std::array<Complex, 2>;

    /// Throws InvariantError unless every amplitude pair is normalized and
    /// there is one pair per coupling.
    SpinBathSpec(std::vector<double> couplings, std::vector<SpinAmplitudes> initial_amplitudes);

    /// a_i = b_i = 1/sqrt(2) for every spin.
    static SpinBathSpec half_amplitude(std::vector<double> couplings);
    /// Couplings uniform in [lo, hi), half-amplitude spins.
    static SpinBathSpec random(CounterRng& rng, std::size_t n_spins, double lo = 0.5, double hi = 1.5);

    std::size_t n_spins() const { return couplings_.size(); }
    const std::vector<double>& couplings() const { return couplings_; }
    const std::vector<SpinAmplitudes>& initial_amplitudes() const { return amplitudes_; }

    /// |eps_0> = (x)_i (a_i|0> + b_i|1>); the scalar 1 for an empty bath.
    StateVector initial_state() const;

private:
    std::vector<double> couplings_;
    std::vector<SpinAmplitudes> amplitudes_;
};

class DecoherenceModel {
public:
    /// Throws DimensionError when the pieces disagree in dimension or the
    /// composite exceeds kDimensionBudget, InvariantError when h_system is not
    /// Hermitian or a pointer projector is not rank one.
    DecoherenceModel(Operator h_system, EntanglerSpec entangler, ObservableDecomposition pointer,
                     SpinBathSpec bath, StateVector initial_system, double t0 = 0.0);

    Index system_dim() const { return h_system_.dim(); }
    Index apparatus_dim() const { return entangler_.apparatus_dim(); }
    Index bath_dim() const { return Index{1} << bath_.n_spins(); }
    Index total_dim() const { return system_dim() * apparatus_dim() * bath_dim(); }
    CompositeSpace space() const;

    const Operator& h_system() const { return h_system_; }
    const EntanglerSpec& entangler() const { return entangler_; }
    const ObservableDecomposition& pointer() const { return pointer_; }
    /// Unit vectors |k> spanning the rank-one pointer projectors (columns).
    const Matrix& pointer_states() const { return pointer_states_; }
    const SpinBathSpec& bath() const { return bath_; }
    const StateVector& initial_system() const { return initial_system_; }
    double t0() const { return t0_; }

    /// |Psi_S> (x) |alpha_ready> (x) |eps_0>
    StateVector initial_state() const;

private:
    Operator h_system_;
    EntanglerSpec entangler_;
    ObservableDecomposition pointer_;
    Matrix pointer_states_;
    SpinBathSpec bath_;
    StateVector initial_system_;
    double t0_;
};

/// Drift generator H_S (x) 1 + sum_i g_i A (x) sigma_z^(i) as a dense matrix.
/// The pointer observable commutes with it by construction.
Operator build_total_hamiltonian(const DecoherenceModel& model);

struct DecoherenceSample {
    double time;
    DensityOperator rho_sa;
    DensityOperator rho_a;  // apparatus computational basis
    double global_purity;   // Tr(rho_total^2) = |psi|^4
};

/// Evolves the pure initial state: drift to t0, kick, drift to t. Samples at
/// t < t0 have not been kicked; a sample at exactly t0 is taken after the
/// kick. Independent time points are evaluated on up to `threads` threads.
std::vector<DecoherenceSample> simulate(const DecoherenceModel& model, std::span<const double> times,
                                        unsigned threads = 1);

/// Full density operators for a mixed bath start rho_S,A (x) rho_E.
/// Limited to composites of dimension <= 1024.
std::vector<DensityOperator> simulate_global(const DecoherenceModel& model, const DensityOperator& bath_density,
                                             std::span<const double> times);

/// <k| rho_a |k'> in the pointer basis.
Complex pointer_element(const DecoherenceModel& model, const DensityOperator& rho_a, Index k, Index k_prime);

/// Closed-form decoherence factor r_kk'(t) for t >= t0.
Complex decoherence_factor(const DecoherenceModel& model, Index k, Index k_prime, double t);

/// d_S x d_S block <., k| rho_SA |., k'> in the apparatus pointer basis.
Matrix pointer_block(const DecoherenceModel& model, const DensityOperator& rho_sa, Index k, Index k_prime);

/// rho_SA(t) predicted from the post-kick rho_SA(t0): block (k, k') scaled by
/// r_kk'(t), then H_S evolution on S. Exact when the bath is still in a
/// product state with S+A at t0, e.g. when the ready state is a pointer state.
Operator predicted_rho_sa(const DecoherenceModel& model, const DensityOperator& rho_sa_t0, double t);

/// Max-abs entry of rho_SA - process1(rho_SA) for the pointer decomposition
/// padded with the identity on S.
double collapse_distance(const DensityOperator& rho_sa, const ObservableDecomposition& pointer);

/// max_t |S(rho(t)) - S(rho(t_first))|
double global_entropy_check(std::span<const DensityOperator> trajectory);

}  // namespace qmep
