#pragma once

// Von Neumann premeasurement and the two-apparatus protocol: a system S is
// entangled first with apparatus A in the psi-basis, then with apparatus B in
// the phi-basis. The conditional probability of B's outcome given A's is
// obtained from statistical weights of commuting (Heisenberg-picture)
// pointer projectors only.

#include "qmep/linalg.hpp"
#include "qmep/projector.hpp"

namespace qmep {

using RealMatrix = Eigen::MatrixXd;

/// Entangling interaction between a d-dim system and a d-dim apparatus.
class EntanglerSpec {
public:
    /// `system_basis` columns are the |psi_j>; throws InvariantError unless
    /// they are orthonormal.
    explicit EntanglerSpec(Matrix system_basis, Index ready_index = 0);

    const Matrix& system_basis() const { return basis_; }
    Index apparatus_dim() const { return basis_.cols(); }
    Index ready_index() const { return ready_; }
    /// Apparatus pointer index recorded for system state |psi_j>.
    Index outcome_index(Index j) const { return (ready_ + j) % apparatus_dim(); }

private:
    Matrix basis_;
    Index ready_;
};

/// U = sum_j |psi_j><psi_j| (x) X^j with X|alpha_m> = |alpha_{m+1 mod d}>,
/// so U |psi_j>|alpha_0> = |psi_j>|alpha_j>. Acts on S (x) A.
Operator build_entangler(const EntanglerSpec& spec);

class DoubleApparatusSetup {
public:
    static constexpr double kDefaultMinAmplitude = 1e-6;

    /// Throws InvariantError when a basis is not orthonormal, the dimensions
    /// disagree, or some |<psi_j|Psi>| < min_amplitude.
    DoubleApparatusSetup(Matrix psi_basis, Matrix phi_basis, StateVector initial_state,
                         double min_amplitude = kDefaultMinAmplitude);

    Index dim() const { return psi_.cols(); }
    const Matrix& psi_basis() const { return psi_; }
    const Matrix& phi_basis() const { return phi_; }
    const StateVector& initial_state() const { return initial_; }
    /// Factors (S, A, B), each of dimension d.
    CompositeSpace composite() const { return CompositeSpace({dim(), dim(), dim()}); }

private:
    Matrix psi_;
    Matrix phi_;
    StateVector initial_;
};

struct DoubleApparatusResult {
    StateVector final_state;
    /// conditional(l, j) = p(beta_l | alpha_j) from weight ratios.
    RealMatrix conditional;
};

DoubleApparatusResult run_double_apparatus(const DoubleApparatusSetup& setup);

/// U^dagger P U. Throws InvariantError when U is not unitary.
Projector heisenberg_projector(const Projector& p, const Operator& u_total);

/// Von Neumann's dephasing map sum_k P_k rho P_k.
DensityOperator process1(const DensityOperator& rho, const ObservableDecomposition& decomposition);

}  // namespace qmep
