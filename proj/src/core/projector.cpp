#include "qmep/projector.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qmep/error.hpp"

namespace qmep {

namespace {

double real_trace(const Matrix& m) { return m.trace().real(); }

template <class P, class Q>
void require_same_dim(const P& p, const Q& q, const char* what) {
    if (p.dim() != q.dim()) throw DimensionError(std::string(what) + ": dimension mismatch");
}

double checked_ratio(double p, const char* what) {
    if (p < -tol::proj || p > 1.0 + tol::proj) {
        throw InvariantError(std::string(what) + ": value " + std::to_string(p) + " outside [0, 1]");
    }
    return std::clamp(p, 0.0, 1.0);
}

}  // namespace

Projector::Projector(Operator op, double tolerance) : op_(std::move(op)) {
    if (!op_.is_hermitian(tolerance)) throw InvariantError("Projector: not Hermitian");
    const Matrix& m = op_.matrix();
    if (max_abs(m * m - m) > tolerance) throw InvariantError("Projector: not idempotent");
    const double tr = real_trace(m);
    const double rounded = std::round(tr);
    if (rounded < 0.0 || std::abs(tr - rounded) > tolerance * static_cast<double>(dim())) {
        throw InvariantError("Projector: trace " + std::to_string(tr) + " is not a non-negative integer");
    }
    rank_ = static_cast<Index>(rounded);
}

Projector Projector::onto(const Matrix& columns) { return Projector(Operator(columns * columns.adjoint())); }

Projector Projector::identity(Index dim) { return Projector(Operator::identity(dim)); }

Projector Projector::zero(Index dim) { return Projector(Operator::zero(dim)); }

// ----------------------------------------------------- ObservableDecomposition

ObservableDecomposition::ObservableDecomposition(std::vector<double> eigenvalues, std::vector<Projector> projectors)
    : values_(std::move(eigenvalues)), projectors_(std::move(projectors)) {
    if (projectors_.empty() || values_.size() != projectors_.size()) {
        throw DimensionError("ObservableDecomposition: need one value per projector");
    }
    const Index d = projectors_.front().dim();
    Matrix sum = Matrix::Zero(d, d);
    for (std::size_t k = 0; k < projectors_.size(); ++k) {
        if (projectors_[k].dim() != d) throw DimensionError("ObservableDecomposition: projector dimension mismatch");
        for (std::size_t m = k + 1; m < projectors_.size(); ++m) {
            if (max_abs(projectors_[k].matrix() * projectors_[m].matrix()) > tol::proj) {
                throw InvariantError("ObservableDecomposition: projectors " + std::to_string(k) + " and " +
                                     std::to_string(m) + " are not orthogonal");
            }
        }
        sum += projectors_[k].matrix();
    }
    if (max_abs(sum - Matrix::Identity(d, d)) > tol::proj) {
        throw InvariantError("ObservableDecomposition: projectors do not sum to identity");
    }
}

ObservableDecomposition ObservableDecomposition::from_basis(const Matrix& basis, std::span<const double> values) {
    if (basis.rows() != basis.cols() || static_cast<std::size_t>(basis.cols()) != values.size()) {
        throw DimensionError("ObservableDecomposition::from_basis: need a square basis and one value per vector");
    }
    std::vector<Projector> projectors;
    projectors.reserve(values.size());
    for (Index k = 0; k < basis.cols(); ++k) projectors.push_back(Projector::onto(basis.col(k)));
    return ObservableDecomposition(std::vector<double>(values.begin(), values.end()), std::move(projectors));
}

Operator ObservableDecomposition::observable() const {
    Matrix m = Matrix::Zero(dim(), dim());
    for (std::size_t k = 0; k < projectors_.size(); ++k) m += values_[k] * projectors_[k].matrix();
    return Operator(std::move(m));
}

ObservableDecomposition eigenspace_projectors(const Operator& a, double degeneracy_gap) {
    const EigenDecomposition eig = hermitian_eig(a);
    const Index n = eig.eigenvalues.size();
    std::vector<double> values;
    std::vector<Projector> projectors;
    Index start = 0;
    for (Index i = 1; i <= n; ++i) {
        if (i < n && eig.eigenvalues(i) - eig.eigenvalues(i - 1) <= degeneracy_gap) continue;
        const Index len = i - start;
        values.push_back(eig.eigenvalues.segment(start, len).mean());
        projectors.push_back(Projector::onto(eig.eigenvectors.middleCols(start, len)));
        start = i;
    }
    return ObservableDecomposition(std::move(values), std::move(projectors));
}

// ------------------------------------------------------------ weights

double weight(const Projector& p) { return real_trace(p.matrix()); }

bool compatible(const Projector& p, const Projector& q, double tolerance) {
    require_same_dim(p, q, "compatible");
    const Matrix pq = p.matrix() * q.matrix();
    // QP = (PQ)^dagger for Hermitian P, Q.
    return max_abs(pq - pq.adjoint()) <= tolerance;
}

Projector meet(const Projector& p, const Projector& q) {
    if (!compatible(p, q)) throw InvariantError("meet: projectors do not commute");
    Matrix pq = p.matrix() * q.matrix();
    pq = 0.5 * (pq + pq.adjoint()).eval();
    return Projector(Operator(std::move(pq)));
}

double conditional_probability(const Projector& x, const Projector& y) {
    if (!compatible(x, y)) throw InvariantError("conditional_probability: observations are not compatible");
    if (x.rank() == 0) throw InvariantError("conditional_probability: conditioning observation has zero weight");
    const double p = (x.matrix().cwiseProduct(y.matrix().transpose())).sum().real() / weight(x);
    return checked_ratio(p, "conditional_probability");
}

double conditional_probability_chain(const Projector& prior, const Projector& x, const Projector& y) {
    require_same_dim(prior, x, "conditional_probability_chain");
    require_same_dim(x, y, "conditional_probability_chain");
    if (!compatible(x, y)) throw InvariantError("conditional_probability_chain: observations are not compatible");
    const Matrix px = prior.matrix() * x.matrix();
    if (max_abs(px * px - px) > tol::proj) {
        throw InvariantError("conditional_probability_chain: prior and condition do not form a consistent history");
    }
    const double w = real_trace(px);
    if (w < 0.5) throw InvariantError("conditional_probability_chain: conditioning weight is zero");
    const double p = (px.cwiseProduct(y.matrix().transpose())).sum().real() / w;
    return checked_ratio(p, "conditional_probability_chain");
}

// ------------------------------------------------------------- RangeProjector

RangeProjector::RangeProjector(Matrix columns, double tolerance) : v_(std::move(columns)) {
    const Index r = v_.cols();
    if (max_abs(v_.adjoint() * v_ - Matrix::Identity(r, r)) > tolerance) {
        throw InvariantError("RangeProjector: columns are not orthonormal");
    }
}

Projector RangeProjector::dense() const { return Projector(Operator(v_ * v_.adjoint())); }

double weight(const RangeProjector& p) { return static_cast<double>(p.rank()); }

bool compatible(const RangeProjector& p, const RangeProjector& q, double tolerance) {
    require_same_dim(p, q, "compatible");
    // With E = (1 - P) Q P, [P, Q] = E^dagger - E and the two terms have
    // orthogonal ranges, so |[P, Q]|_F = sqrt(2) |E|_F = sqrt(2) |(W - V M) M^dagger|_F
    // for M = V^dagger W. The Frobenius norm bounds every entry.
    const Matrix& v = p.columns();
    const Matrix& w = q.columns();
    const Matrix m = v.adjoint() * w;
    const Matrix e = (w - v * m) * m.adjoint();
    return std::sqrt(2.0) * e.norm() <= tolerance;
}

std::vector<double> conditional_probability_chain(const Projector& prior, const RangeProjector& x,
                                                  std::span<const RangeProjector> ys) {
    require_same_dim(prior, x, "conditional_probability_chain");
    const Matrix& v = x.columns();
    const Matrix piv = prior.matrix() * v;
    const Matrix inner = v.adjoint() * piv;
    // (Pi X)^2 - Pi X = Pi V (V^dagger Pi V - 1) V^dagger
    const Matrix defect = (piv * (inner - Matrix::Identity(x.rank(), x.rank()))) * v.adjoint();
    if (max_abs(defect) > tol::proj) {
        throw InvariantError("conditional_probability_chain: prior and condition do not form a consistent history");
    }
    const double w = inner.trace().real();
    if (w < 0.5) throw InvariantError("conditional_probability_chain: conditioning weight is zero");
    std::vector<double> out;
    out.reserve(ys.size());
    for (const RangeProjector& y : ys) {
        require_same_dim(x, y, "conditional_probability_chain");
        if (!compatible(x, y)) throw InvariantError("conditional_probability_chain: observations are not compatible");
        const Matrix& u = y.columns();
        // Tr(Pi V V^dagger U U^dagger) = Tr((U^dagger Pi V)(V^dagger U))
        const double p = ((u.adjoint() * piv) * (v.adjoint() * u)).trace().real() / w;
        out.push_back(checked_ratio(p, "conditional_probability_chain"));
    }
    return out;
}

DensityOperator uniform_prior(Index dim) {
    if (dim < 1) throw DimensionError("uniform_prior: dimension must be >= 1");
    return DensityOperator(Operator((1.0 / static_cast<double>(dim)) * Matrix::Identity(dim, dim)));
}

}  // namespace qmep
