#pragma once

// Observables as families of orthogonal projectors, and statistical weights
// of observations: W_X = Tr P_X, p(Y|X) = Tr(P_X P_Y) / Tr P_X for
// commuting P_X, P_Y.

#include <span>
#include <vector>

#include "qmep/density.hpp"
#include "qmep/linalg.hpp"

namespace qmep {

/// Hermitian idempotent operator with integer trace.
class Projector {
public:
    /// Throws InvariantError unless `op` is Hermitian, idempotent and has a
    /// trace within tolerance * dim of a non-negative integer.
    explicit Projector(Operator op, double tolerance = tol::proj);

    /// Projector onto the span of orthonormal `columns`.
    static Projector onto(const Matrix& columns);
    static Projector identity(Index dim);
    static Projector zero(Index dim);

    Index dim() const { return op_.dim(); }
    Index rank() const { return rank_; }
    const Operator& op() const { return op_; }
    const Matrix& matrix() const { return op_.matrix(); }

private:
    Operator op_;
    Index rank_ = 0;
};

/// Projector kept in factored form P = V V^dagger. Products and traces with
/// it cost O(dim^2 rank) instead of O(dim^3).
class RangeProjector {
public:
    /// Throws InvariantError unless the columns are orthonormal within
    /// tolerance, which makes V V^dagger Hermitian and idempotent.
    explicit RangeProjector(Matrix columns, double tolerance = tol::proj);

    Index dim() const { return v_.rows(); }
    Index rank() const { return v_.cols(); }
    const Matrix& columns() const { return v_; }
    Projector dense() const;

private:
    Matrix v_;
};

/// Complete family of mutually orthogonal projectors with distinct values,
/// A = sum_k A_k P_k.
class ObservableDecomposition {
public:
    /// Validates orthogonality and completeness within tol::proj.
    ObservableDecomposition(std::vector<double> eigenvalues, std::vector<Projector> projectors);

    /// Rank-1 decomposition: P_k = |b_k><b_k| for the orthonormal columns of
    /// `basis`, paired with `values`.
    static ObservableDecomposition from_basis(const Matrix& basis, std::span<const double> values);

    std::size_t size() const { return projectors_.size(); }
    Index dim() const { return projectors_.front().dim(); }
    const std::vector<double>& eigenvalues() const { return values_; }
    const std::vector<Projector>& projectors() const { return projectors_; }

    /// sum_k A_k P_k
    Operator observable() const;

private:
    std::vector<double> values_;
    std::vector<Projector> projectors_;
};

/// Eigenspaces of a Hermitian operator. Sorted eigenvalues are split into
/// clusters wherever consecutive values differ by more than `degeneracy_gap`;
/// each cluster is reported with its mean value.
ObservableDecomposition eigenspace_projectors(const Operator& a, double degeneracy_gap = 1e-8);

/// W = Tr P.
double weight(const Projector& p);

/// Max-abs entry of [P, Q] within `tolerance`.
bool compatible(const Projector& p, const Projector& q, double tolerance = tol::commute);

/// P Q for compatible P, Q. Throws InvariantError otherwise.
Projector meet(const Projector& p, const Projector& q);

/// Tr(P_X P_Y) / Tr P_X. Throws InvariantError for incompatible inputs or a
/// zero-weight condition.
double conditional_probability(const Projector& x, const Projector& y);

/// Tr(Pi P_X P_Y) / Tr(Pi P_X): the weight ratio of Y given X under prior
/// knowledge Pi. Requires X, Y compatible and the ordered product Pi P_X
/// idempotent.
double conditional_probability_chain(const Projector& prior, const Projector& x, const Projector& y);

double weight(const RangeProjector& p);
/// Frobenius norm of [P, Q] within `tolerance` (stricter than the max-abs test).
bool compatible(const RangeProjector& p, const RangeProjector& q, double tolerance = tol::commute);
/// Same values and checks as the dense overload, for every y in `ys`; the
/// prior/condition work is shared.
std::vector<double> conditional_probability_chain(const Projector& prior, const RangeProjector& x,
                                                  std::span<const RangeProjector> ys);

/// Identity / dim.
DensityOperator uniform_prior(Index dim);

}  // namespace qmep
