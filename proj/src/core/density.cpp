#include "qmep/density.hpp"

#include <cmath>
#include <string>

#include "qmep/error.hpp"
#include "qmep/projector.hpp"

namespace qmep {

namespace {

constexpr double kMinEigenvalue = -1e-10;
constexpr double kDropWeight = 1e-12;

void check_hermitian_unit_trace(const Operator& op) {
    if (!op.is_hermitian()) throw InvariantError("DensityOperator: not Hermitian");
    const Complex tr = op.trace();
    if (!(std::abs(tr - Complex(1.0)) <= tol::trace)) {
        throw InvariantError("DensityOperator: trace " + std::to_string(tr.real()) + " is not 1");
    }
}

}  // namespace

DensityOperator::DensityOperator(Operator op) : op_(std::move(op)) {
    check_hermitian_unit_trace(op_);
    const RealVector ev = SpectralPropagator(op_).eigenvalues();
    if (ev(0) < kMinEigenvalue) {
        throw InvariantError("DensityOperator: negative eigenvalue " + std::to_string(ev(0)));
    }
}

DensityOperator::DensityOperator(Operator op, Unchecked) : op_(std::move(op)) {}

DensityOperator DensityOperator::assume_positive(Operator op) {
    check_hermitian_unit_trace(op);
    return DensityOperator(std::move(op), Unchecked{});
}

DensityOperator DensityOperator::pure(const StateVector& psi) {
    return DensityOperator(Operator::outer(psi.amplitudes(), psi.amplitudes()), Unchecked{});
}

double DensityOperator::purity() const {
    // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho.
    return matrix().squaredNorm();
}

Operator PureDecomposition::reconstruct() const {
    const Index d = states.empty() ? 1 : states.front().dim();
    Matrix m = Matrix::Zero(d, d);
    for (std::size_t i = 0; i < states.size(); ++i) {
        m += weights[i] * states[i].amplitudes() * states[i].amplitudes().adjoint();
    }
    return Operator(std::move(m));
}

Operator PureDecomposition::group_projector(std::size_t group) const {
    const Index d = states.empty() ? 1 : states.front().dim();
    Matrix m = Matrix::Zero(d, d);
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (groups[i] == group) m += states[i].amplitudes() * states[i].amplitudes().adjoint();
    }
    return Operator(std::move(m));
}

DensityOperator density_from_assignment(const std::vector<Projector>& projectors, std::span<const double> pdf) {
    if (projectors.empty() || projectors.size() != pdf.size()) {
        throw DimensionError("density_from_assignment: projector and pdf lists differ in length");
    }
    double total = 0.0;
    for (double f : pdf) {
        if (!(f >= 0.0)) throw InvariantError("density_from_assignment: negative probability");
        total += f;
    }
    if (std::abs(total - 1.0) > tol::trace) {
        throw InvariantError("density_from_assignment: pdf sums to " + std::to_string(total) + ", not 1");
    }
    const Index d = projectors.front().dim();
    Matrix m = Matrix::Zero(d, d);
    for (std::size_t x = 0; x < projectors.size(); ++x) {
        if (projectors[x].dim() != d) throw DimensionError("density_from_assignment: projector dimension mismatch");
        if (projectors[x].rank() == 0) throw InvariantError("density_from_assignment: zero-weight projector");
        m += (pdf[x] / weight(projectors[x])) * projectors[x].matrix();
    }
    return DensityOperator(Operator(std::move(m)));
}

double expectation(const Operator& a, const DensityOperator& rho) {
    if (a.dim() != rho.dim()) throw DimensionError("expectation: dimension mismatch");
    if (!a.is_hermitian()) throw InvariantError("expectation: observable is not Hermitian");
    // Tr(A rho) = sum_ij A_ij rho_ji
    return (a.matrix().cwiseProduct(rho.matrix().transpose())).sum().real();
}

PureDecomposition purify(const DensityOperator& rho, double degeneracy_gap) {
    const EigenDecomposition eig = hermitian_eig(rho.op());
    PureDecomposition out;
    std::size_t group = 0;
    double previous = 0.0;
    // Descending order: dominant components first.
    for (Index k = eig.eigenvalues.size(); k-- > 0;) {
        const double p = eig.eigenvalues(k);
        if (p < kDropWeight) break;
        if (!out.weights.empty() && previous - p > degeneracy_gap) ++group;
        out.weights.push_back(p);
        out.states.emplace_back(eig.eigenvectors.col(k));
        out.groups.push_back(group);
        previous = p;
    }
    return out;
}

double von_neumann_entropy(const DensityOperator& rho) {
    const RealVector ev = SpectralPropagator(rho.op()).eigenvalues();
    double s = 0.0;
    for (double p : ev) {
        if (p > 0.0) s -= p * std::log(p);
    }
    return s;
}

DensityOperator evolve_density(const DensityOperator& rho, const Operator& u) {
    if (u.dim() != rho.dim()) throw DimensionError("evolve_density: dimension mismatch");
    Matrix m = u.matrix() * rho.matrix() * u.matrix().adjoint();
    m = 0.5 * (m + m.adjoint()).eval();
    return DensityOperator::assume_positive(Operator(std::move(m)));
}

DensityOperator partial_trace(const DensityOperator& rho, const CompositeSpace& space,
                              std::span<const std::size_t> keep) {
    return DensityOperator::assume_positive(Operator(partial_trace(rho.matrix(), space, keep)));
}

}  // namespace qmep
