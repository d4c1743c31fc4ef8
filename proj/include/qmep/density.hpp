#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qmep/linalg.hpp"

namespace qmep {

class Projector;

/// Hermitian, unit-trace, positive semidefinite operator.
class DensityOperator {
public:
    /// Full validation: Hermitian, trace 1, eigenvalues >= -1e-10.
    explicit DensityOperator(Operator op);

    /// Checks Hermiticity and unit trace only. For results of operations that
    /// preserve positivity by construction (partial traces, unitary
    /// conjugation, dephasing).
    static DensityOperator assume_positive(Operator op);
    static DensityOperator pure(const StateVector& psi);

    Index dim() const { return op_.dim(); }
    const Operator& op() const { return op_; }
    const Matrix& matrix() const { return op_.matrix(); }

    /// Tr(rho^2)
    double purity() const;

private:
    struct Unchecked {};
    DensityOperator(Operator op, Unchecked);
    Operator op_;
};

/// rho = sum_i weights[i] |states[i]><states[i]|
struct PureDecomposition {
    std::vector<double> weights;
    std::vector<StateVector> states;
    // Components whose weights lie within the degeneracy gap share a group id.
    std::vector<std::size_t> groups;

    Operator reconstruct() const;
    /// Projector onto the span of the components in `group`.
    Operator group_projector(std::size_t group) const;
};

/// sum_X pdf[X] P_X / Tr P_X. Throws InvariantError when pdf is negative or
/// not normalized, or when a projector has zero weight.
DensityOperator density_from_assignment(const std::vector<Projector>& projectors,
                                        std::span<const double> pdf);

/// Tr(A rho) for Hermitian A.
double expectation(const Operator& a, const DensityOperator& rho);

/// Spectral decomposition into orthonormal pure components. Eigenvalues below
/// 1e-12 are dropped.
PureDecomposition purify(const DensityOperator& rho, double degeneracy_gap = 1e-8);

/// -Tr(rho ln rho) in nats, with 0 ln 0 = 0.
double von_neumann_entropy(const DensityOperator& rho);

/// U rho U^dagger (Schrodinger picture).
DensityOperator evolve_density(const DensityOperator& rho, const Operator& u);

DensityOperator partial_trace(const DensityOperator& rho, const CompositeSpace& space,
                              std::span<const std::size_t> keep);

}  // namespace qmep
