#include "qmep/born.hpp"

#include <array>
#include <cmath>
#include <string>

#include "qmep/error.hpp"

namespace qmep {

EntanglerSpec::EntanglerSpec(Matrix system_basis, Index ready_index)
    : basis_(std::move(system_basis)), ready_(ready_index) {
    if (!is_orthonormal_basis(basis_)) throw InvariantError("EntanglerSpec: system basis is not orthonormal");
    if (ready_ < 0 || ready_ >= basis_.cols()) throw DimensionError("EntanglerSpec: ready index out of range");
}

Operator build_entangler(const EntanglerSpec& spec) {
    const Index d = spec.apparatus_dim();
    const Matrix& psi = spec.system_basis();
    Matrix u = Matrix::Zero(d * d, d * d);
    for (Index j = 0; j < d; ++j) {
        const Matrix pj = psi.col(j) * psi.col(j).adjoint();
        // X^j on the apparatus: |alpha_m> -> |alpha_{(m + j) mod d}>.
        for (Index m = 0; m < d; ++m) {
            const Index target = (m + j) % d;
            for (Index r = 0; r < d; ++r) {
                for (Index c = 0; c < d; ++c) u(r * d + target, c * d + m) += pj(r, c);
            }
        }
    }
    return Operator(std::move(u));
}

DoubleApparatusSetup::DoubleApparatusSetup(Matrix psi_basis, Matrix phi_basis, StateVector initial_state,
                                           double min_amplitude)
    : psi_(std::move(psi_basis)), phi_(std::move(phi_basis)), initial_(std::move(initial_state)) {
    if (!is_orthonormal_basis(psi_)) throw InvariantError("DoubleApparatusSetup: psi basis is not orthonormal");
    if (!is_orthonormal_basis(phi_)) throw InvariantError("DoubleApparatusSetup: phi basis is not orthonormal");
    if (phi_.rows() != psi_.rows() || initial_.dim() != psi_.rows()) {
        throw DimensionError("DoubleApparatusSetup: bases and initial state differ in dimension");
    }
    const Vector c = psi_.adjoint() * initial_.amplitudes();
    for (Index j = 0; j < c.size(); ++j) {
        if (std::abs(c(j)) < min_amplitude) {
            throw InvariantError("DoubleApparatusSetup: amplitude |c_" + std::to_string(j) + "| = " +
                                 std::to_string(std::abs(c(j))) + " is below the minimum");
        }
    }
}

DoubleApparatusResult run_double_apparatus(const DoubleApparatusSetup& setup) {
    const Index d = setup.dim();
    const CompositeSpace space = setup.composite();
    constexpr std::array<std::size_t, 2> kSystemA{0, 1};
    constexpr std::array<std::size_t, 2> kSystemB{0, 2};
    constexpr std::array<std::size_t, 2> kApparata{1, 2};

    const Operator u_a = embed(build_entangler(EntanglerSpec(setup.psi_basis())), space, kSystemA);
    const Operator u_b = embed(build_entangler(EntanglerSpec(setup.phi_basis())), space, kSystemB);
    const Operator u_total = u_b * u_a;

    const StateVector ready = tensor_state(tensor_state(setup.initial_state(), StateVector::basis(d, 0)),
                                           StateVector::basis(d, 0));
    StateVector final_state = apply(u_total, ready);

    // Prior knowledge: both apparata in their ready states, system arbitrary.
    const Vector ready_ab = tensor_state(StateVector::basis(d, 0), StateVector::basis(d, 0)).amplitudes();
    const Projector prior(embed(Operator::outer(ready_ab, ready_ab), space, kApparata));

    // Heisenberg pointer projectors U^dagger P U, kept factored: for a
    // projector onto basis vectors e_i, U^dagger P U = V V^dagger with V the
    // corresponding columns of U^dagger.
    if (!u_total.is_unitary()) throw InvariantError("run_double_apparatus: evolution is not unitary");
    const Matrix u_dag = u_total.matrix().adjoint();
    const auto pointer = [&](Index factor_weight, Index k) {
        Matrix v(u_dag.rows(), d * d);
        Index col = 0;
        for (Index i = 0; i < u_dag.cols(); ++i) {
            if ((i / factor_weight) % d == k) v.col(col++) = u_dag.col(i);
        }
        return RangeProjector(std::move(v));
    };
    std::vector<RangeProjector> pointer_a;
    std::vector<RangeProjector> pointer_b;
    pointer_a.reserve(static_cast<std::size_t>(d));
    pointer_b.reserve(static_cast<std::size_t>(d));
    for (Index k = 0; k < d; ++k) {
        pointer_a.push_back(pointer(d, k));
        pointer_b.push_back(pointer(1, k));
    }

    RealMatrix conditional(d, d);
    for (Index j = 0; j < d; ++j) {
        const std::vector<double> p = conditional_probability_chain(prior, pointer_a[static_cast<std::size_t>(j)], pointer_b);
        for (Index l = 0; l < d; ++l) conditional(l, j) = p[static_cast<std::size_t>(l)];
    }
    return {std::move(final_state), std::move(conditional)};
}

Projector heisenberg_projector(const Projector& p, const Operator& u_total) {
    if (u_total.dim() != p.dim()) throw DimensionError("heisenberg_projector: dimension mismatch");
    if (!u_total.is_unitary()) throw InvariantError("heisenberg_projector: evolution is not unitary");
    return Projector(conjugate(u_total, p.op()));
}

DensityOperator process1(const DensityOperator& rho, const ObservableDecomposition& decomposition) {
    if (decomposition.dim() != rho.dim()) throw DimensionError("process1: dimension mismatch");
    Matrix out = Matrix::Zero(rho.dim(), rho.dim());
    for (const Projector& p : decomposition.projectors()) out += p.matrix() * rho.matrix() * p.matrix();
    out = 0.5 * (out + out.adjoint()).eval();
    return DensityOperator::assume_positive(Operator(std::move(out)));
}

}  // namespace qmep
