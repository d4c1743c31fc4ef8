#include <gtest/gtest.h>

#include <array>
#include <numbers>

#include "oracles.hpp"
#include "qmep/error.hpp"
#include "qmep/linalg.hpp"
#include "qmep/random.hpp"

using namespace qmep;

namespace {

Operator pauli_x() {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = m(1, 0) = 1.0;
    return Operator(m);
}

Operator diag2(double a, double b) {
    const std::array<double, 2> v{a, b};
    return Operator::diagonal(v);
}

// All factorizations of n into factors >= 2 (ordered), plus n itself.
void shapes_of(long n, std::vector<long>& prefix, std::vector<std::vector<long>>& out) {
    if (n == 1) {
        if (!prefix.empty()) out.push_back(prefix);
        return;
    }
    for (long f = 2; f <= n; ++f) {
        if (n % f) continue;
        prefix.push_back(f);
        shapes_of(n / f, prefix, out);
        prefix.pop_back();
    }
}

}  // namespace

TEST(StateVector, RejectsUnnormalized) {
    Vector v(2);
    v << 1.0, 1.0;
    EXPECT_THROW(StateVector{v}, InvariantError);
    EXPECT_NEAR(StateVector::normalized(v).amplitudes().norm(), 1.0, 1e-15);
    EXPECT_THROW(StateVector{Vector(0)}, Error);
}

TEST(Operator, RejectsNonSquare) { EXPECT_THROW(Operator{Matrix::Zero(2, 3)}, DimensionError); }

TEST(Tensor, IdentityTimesIdentity) {
    EXPECT_EQ(max_abs(tensor(Operator::identity(2), Operator::identity(2)).matrix() - Matrix::Identity(4, 4)), 0.0);
}

TEST(Tensor, DiagonalProduct) {
    const Operator z = diag2(1, -1);
    const Matrix expect = Eigen::Vector4cd(1, -1, -1, 1).asDiagonal();
    EXPECT_EQ(max_abs(tensor(z, z).matrix() - expect), 0.0);
}

TEST(Tensor, Dimensions) { EXPECT_EQ(tensor(Operator::identity(2), Operator::identity(3)).dim(), 6); }

TEST(Tensor, MatchesKroneckerOracleAndIsAssociative) {
    CounterRng rng(5, 0);
    const Operator a(ginibre(rng, 2, 2));
    const Operator b(ginibre(rng, 3, 3));
    const Operator c(ginibre(rng, 2, 2));
    EXPECT_LE(max_abs(tensor(a, b).matrix() - oracle::kron(a.matrix(), b.matrix())), 1e-15);
    EXPECT_LE(max_abs(tensor(tensor(a, b), c).matrix() - tensor(a, tensor(b, c)).matrix()), 1e-14);
}

TEST(TensorState, IndexConvention) {
    const StateVector zz = tensor_state(StateVector::basis(2, 0), StateVector::basis(2, 0));
    EXPECT_EQ(zz.dim(), 4);
    EXPECT_EQ(zz[0], Complex(1.0));
    const StateVector one_zero = tensor_state(StateVector::basis(2, 1), StateVector::basis(2, 0));
    EXPECT_EQ(one_zero[2], Complex(1.0));
    EXPECT_EQ((one_zero.amplitudes() - Eigen::Vector4cd(0, 0, 1, 0)).norm(), 0.0);
}

TEST(TensorState, NormPreserved) {
    CounterRng rng(1, 0);
    const StateVector s = tensor_state(random_state(rng, 3), random_state(rng, 4));
    EXPECT_NEAR(s.amplitudes().norm(), 1.0, 1e-14);
}

TEST(CompositeSpace, RowMajorDigits) {
    const CompositeSpace space({2, 3, 4});
    EXPECT_EQ(space.total_dim(), 24);
    const std::vector<Index> d = space.digits(1 * 12 + 2 * 4 + 3);
    EXPECT_EQ(d, (std::vector<Index>{1, 2, 3}));
    EXPECT_EQ(space.index(d), 23);
}

TEST(PartialTrace, ProductStateFactorizes) {
    CounterRng rng(2, 0);
    const Matrix ra = random_density(rng, 2).matrix();
    const Matrix rb = random_density(rng, 3).matrix();
    const CompositeSpace space({2, 3});
    const std::array<std::size_t, 1> keep_a{0};
    const std::array<std::size_t, 1> keep_b{1};
    EXPECT_LE(max_abs(partial_trace(oracle::kron(ra, rb), space, keep_a) - ra), 1e-15);
    EXPECT_LE(max_abs(partial_trace(oracle::kron(ra, rb), space, keep_b) - rb), 1e-15);
}

TEST(PartialTrace, BellStateIsMaximallyMixed) {
    Vector bell = Vector::Zero(4);
    bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
    const CompositeSpace space({2, 2});
    const std::array<std::size_t, 1> keep{0};
    EXPECT_LE(max_abs(partial_trace(bell * bell.adjoint(), space, keep) - Matrix::Identity(2, 2) / 2.0), 1e-15);
    EXPECT_LE(max_abs(reduced_density(bell, space, keep) - Matrix::Identity(2, 2) / 2.0), 1e-15);
}

TEST(PartialTrace, RejectsBadKeepSets) {
    const CompositeSpace space({2, 2});
    const Matrix rho = Matrix::Identity(4, 4) / 4.0;
    EXPECT_THROW(partial_trace(rho, space, std::span<const std::size_t>{}), DimensionError);
    const std::array<std::size_t, 2> dup{0, 0};
    EXPECT_THROW(partial_trace(rho, space, dup), DimensionError);
    const std::array<std::size_t, 1> out{2};
    EXPECT_THROW(partial_trace(rho, space, out), DimensionError);
    EXPECT_THROW(partial_trace(Matrix::Identity(3, 3), space, std::array<std::size_t, 1>{0}), DimensionError);
}

TEST(PartialTrace, AllFactorsGivesScalarTraceAndKeepOrderIsSorted) {
    CounterRng rng(3, 0);
    const Matrix rho = random_density(rng, 12).matrix();
    const CompositeSpace space({2, 3, 2});
    const std::array<std::size_t, 3> all{2, 0, 1};
    const Matrix full = partial_trace(rho, space, all);
    EXPECT_LE(max_abs(full - rho), 1e-15);
    const std::array<std::size_t, 1> none_kept_but_first{0};
    EXPECT_NEAR(partial_trace(rho, space, none_kept_but_first).trace().real(), 1.0, 1e-14);
}

TEST(PartialTrace, MatchesBruteForceOnAllShapesUpTo64) {
    CounterRng rng(4, 0);
    std::size_t checked = 0;
    for (long total = 2; total <= 64; ++total) {
        std::vector<std::vector<long>> shapes;
        std::vector<long> prefix;
        shapes_of(total, prefix, shapes);
        for (const auto& dims : shapes) {
            const Matrix rho = random_density(rng, total).matrix();
            const CompositeSpace space(std::vector<Index>(dims.begin(), dims.end()));
            const std::size_t nf = dims.size();
            for (unsigned mask = 1; mask < (1u << nf); ++mask) {
                std::vector<std::size_t> keep;
                for (std::size_t f = 0; f < nf; ++f) {
                    if (mask & (1u << f)) keep.push_back(f);
                }
                ASSERT_LE(max_abs(partial_trace(rho, space, keep) - oracle::partial_trace(rho, dims, keep)), 1e-12);
                ++checked;
            }
        }
    }
    EXPECT_GT(checked, 500u);
}

TEST(ReducedDensity, MatchesPartialTraceOfOuterProduct) {
    CounterRng rng(6, 0);
    const CompositeSpace space({2, 3, 2, 2});
    const Vector psi = random_state(rng, space.total_dim()).amplitudes();
    const std::array<std::size_t, 2> keep{1, 3};
    EXPECT_LE(max_abs(reduced_density(psi, space, keep) - partial_trace(psi * psi.adjoint(), space, keep)), 1e-14);
}

TEST(Embed, MatchesKroneckerAndApplyLocal) {
    CounterRng rng(7, 0);
    const CompositeSpace space({2, 3, 2});
    const Operator local(ginibre(rng, 4, 4));
    const std::array<std::size_t, 2> outer{0, 2};
    const Operator lifted = embed(local, space, outer);
    // Direct construction: matrix element <a b c| L_{ac} |a' b' c'> = L[(a c),(a' c')] delta_bb'.
    Matrix expect = Matrix::Zero(12, 12);
    for (long a = 0; a < 2; ++a)
        for (long b = 0; b < 3; ++b)
            for (long c = 0; c < 2; ++c)
                for (long a2 = 0; a2 < 2; ++a2)
                    for (long c2 = 0; c2 < 2; ++c2)
                        expect(a * 6 + b * 2 + c, a2 * 6 + b * 2 + c2) = local.matrix()(a * 2 + c, a2 * 2 + c2);
    EXPECT_LE(max_abs(lifted.matrix() - expect), 1e-15);
    const Vector psi = random_state(rng, 12).amplitudes();
    EXPECT_LE((apply_local(local, space, outer, psi) - lifted.matrix() * psi).norm(), 1e-14);

    Matrix acc = Matrix::Zero(12, 12);
    accumulate_embedded(acc, local, space, outer, Complex(0.0, 2.0));
    EXPECT_LE(max_abs(acc - Complex(0.0, 2.0) * expect), 1e-14);
}

TEST(HermitianEig, DiagonalInput) {
    const std::array<double, 3> v{3, 1, 2};
    const EigenDecomposition e = hermitian_eig(Operator::diagonal(v));
    EXPECT_DOUBLE_EQ(e.eigenvalues(0), 1.0);
    EXPECT_DOUBLE_EQ(e.eigenvalues(1), 2.0);
    EXPECT_DOUBLE_EQ(e.eigenvalues(2), 3.0);
}

TEST(HermitianEig, PauliX) {
    const EigenDecomposition e = hermitian_eig(pauli_x());
    EXPECT_NEAR(e.eigenvalues(0), -1.0, 1e-15);
    EXPECT_NEAR(e.eigenvalues(1), 1.0, 1e-15);
    const double r = 1.0 / std::sqrt(2.0);
    EXPECT_NEAR(std::abs(e.eigenvectors.col(0).dot(Eigen::Vector2cd(r, -r))), 1.0, 1e-14);
    EXPECT_NEAR(std::abs(e.eigenvectors.col(1).dot(Eigen::Vector2cd(r, r))), 1.0, 1e-14);
}

TEST(HermitianEig, RandomReconstruction) {
    CounterRng rng(8, 0);
    const Operator h = random_hermitian(rng, 6);
    const EigenDecomposition e = hermitian_eig(h);
    const Matrix& v = e.eigenvectors;
    EXPECT_LE(max_abs(v * e.eigenvalues.cast<Complex>().asDiagonal() * v.adjoint() - h.matrix()), 1e-12);
    EXPECT_LE(max_abs(v * v.adjoint() - Matrix::Identity(6, 6)), 1e-12);
}

TEST(HermitianEig, RejectsNonHermitian) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = 1.0;
    EXPECT_THROW(hermitian_eig(Operator(m)), InvariantError);
    EXPECT_THROW(evolve(Operator(m), 1.0), InvariantError);
}

TEST(Evolve, ZeroHamiltonianAndDiagonalCase) {
    EXPECT_LE(max_abs(evolve(Operator::zero(3), 2.7).matrix() - Matrix::Identity(3, 3)), 0.0);
    const Operator u = evolve(diag2(1, -1), std::numbers::pi / 2);
    EXPECT_LE(std::abs(u(0, 0) - std::polar(1.0, -std::numbers::pi / 2)), 1e-15);
    EXPECT_LE(std::abs(u(1, 1) - std::polar(1.0, std::numbers::pi / 2)), 1e-15);
    EXPECT_LE(max_abs(evolve(diag2(1, -1), 0.0).matrix() - Matrix::Identity(2, 2)), 0.0);
}

TEST(Evolve, MatchesTaylorOracleAndGroupLaws) {
    CounterRng rng(9, 0);
    for (int trial = 0; trial < 10; ++trial) {
        const Operator h = random_hermitian(rng, 5);
        const double t = 3.0 * rng.uniform() - 1.5;
        const double s = 3.0 * rng.uniform() - 1.5;
        const Operator ut = evolve(h, t);
        EXPECT_TRUE(ut.is_unitary());
        EXPECT_LE(max_abs(ut.matrix() - oracle::expm_taylor(h.matrix(), t)), 1e-10);
        EXPECT_LE(max_abs((ut * evolve(h, s)).matrix() - evolve(h, t + s).matrix()), 1e-10);
        EXPECT_LE(max_abs((ut * evolve(h, -t)).matrix() - Matrix::Identity(5, 5)), 1e-10);
    }
}

TEST(SpectralPropagator, BlockSplitMatchesDense) {
    CounterRng rng(10, 0);
    // Block-diagonal generator with blocks of size 3, 1 and 2, permuted.
    Matrix h = Matrix::Zero(6, 6);
    h.block(0, 0, 3, 3) = random_hermitian(rng, 3).matrix();
    h(3, 3) = 0.7;
    h.block(4, 4, 2, 2) = random_hermitian(rng, 2).matrix();
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(6);
    perm.indices() << 4, 0, 5, 2, 3, 1;
    const Matrix hp = perm * h * perm.transpose();
    const SpectralPropagator prop{Operator(hp)};
    EXPECT_EQ(prop.block_count(), 3u);
    EXPECT_LE(max_abs(prop.unitary(1.3).matrix() - oracle::expm_taylor(hp, 1.3)), 1e-10);
    const Vector psi = random_state(rng, 6).amplitudes();
    EXPECT_LE((prop.apply(psi, -0.4) - oracle::expm_taylor(hp, -0.4) * psi).norm(), 1e-10);
    const EigenDecomposition e = prop.decomposition();
    EXPECT_LE(max_abs(e.eigenvectors * e.eigenvalues.cast<Complex>().asDiagonal() * e.eigenvectors.adjoint() - hp),
              1e-12);
    for (Index i = 1; i < 6; ++i) EXPECT_LE(e.eigenvalues(i - 1), e.eigenvalues(i));
}

TEST(Apply, IdentityAndPauliX) {
    CounterRng rng(11, 0);
    const StateVector psi = random_state(rng, 3);
    EXPECT_LE((apply(Operator::identity(3), psi).amplitudes() - psi.amplitudes()).norm(), 0.0);
    const StateVector one = apply(pauli_x(), StateVector::basis(2, 0));
    EXPECT_EQ(one[1], Complex(1.0));
    EXPECT_THROW(apply(Operator::identity(2), psi), DimensionError);
}

TEST(Conjugate, PreservesSpectrumAndTrace) {
    CounterRng rng(12, 0);
    const Operator h = random_hermitian(rng, 5);
    const Operator u = random_unitary(rng, 5);
    const Operator c = conjugate(u, h);
    EXPECT_TRUE(c.is_hermitian());
    EXPECT_LE((hermitian_eig(c).eigenvalues - hermitian_eig(h).eigenvalues).cwiseAbs().maxCoeff(), 1e-12);
    const Matrix rho = random_density(rng, 5).matrix();
    EXPECT_NEAR((u.matrix() * rho * u.matrix().adjoint()).trace().real(), 1.0, 1e-12);
}

TEST(Bases, FourierIsHadamardForTwoAndOrthonormal) {
    const Matrix f = fourier_basis(2);
    const double r = 1.0 / std::sqrt(2.0);
    EXPECT_NEAR(f(0, 1).real(), r, 1e-15);
    EXPECT_NEAR(f(1, 1).real(), -r, 1e-15);
    for (Index d = 1; d <= 8; ++d) EXPECT_TRUE(is_orthonormal_basis(fourier_basis(d)));
    Matrix bad = computational_basis(3);
    bad(0, 1) = 0.1;
    EXPECT_FALSE(is_orthonormal_basis(bad));
}
