#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "oracles.hpp"
#include "qmep/decoherence.hpp"
#include "qmep/error.hpp"
#include "qmep/random.hpp"

using namespace qmep;

namespace {

ObservableDecomposition default_pointer(Index d) {
    std::vector<double> v;
    for (Index k = 0; k < d; ++k) v.push_back(static_cast<double>(d - 1 - 2 * k));
    return ObservableDecomposition::from_basis(computational_basis(d), v);
}

StateVector uniform(Index d) { return StateVector::normalized(Vector::Ones(d)); }

DecoherenceModel qubit_model(SpinBathSpec bath, double t0 = 0.0) {
    return DecoherenceModel(Operator::zero(2), EntanglerSpec(computational_basis(2)), default_pointer(2),
                            std::move(bath), uniform(2), t0);
}

std::vector<std::pair<Complex, Complex>> pairs_of(const SpinBathSpec& b) {
    std::vector<std::pair<Complex, Complex>> out;
    for (const auto& ab : b.initial_amplitudes()) out.emplace_back(ab[0], ab[1]);
    return out;
}

}  // namespace

TEST(SpinBath, InitialStateIsRowMajorProduct) {
    const SpinBathSpec b({1.0, 2.0}, {SpinBathSpec::SpinAmplitudes{0.6, 0.8}, SpinBathSpec::SpinAmplitudes{1.0, 0.0}});
    const StateVector s = b.initial_state();
    EXPECT_NEAR(s[0].real(), 0.6, 1e-15);
    EXPECT_NEAR(s[2].real(), 0.8, 1e-15);
    EXPECT_NEAR(std::abs(s[1]) + std::abs(s[3]), 0.0, 1e-15);
    EXPECT_THROW(SpinBathSpec({1.0}, {SpinBathSpec::SpinAmplitudes{1.0, 1.0}}), InvariantError);
    EXPECT_THROW(SpinBathSpec({1.0, 2.0}, {SpinBathSpec::SpinAmplitudes{1.0, 0.0}}), DimensionError);
}

TEST(Hamiltonian, NoBathIsSystemOnly) {
    CounterRng rng(1, 0);
    const Operator hs = random_hermitian(rng, 2);
    const DecoherenceModel m(hs, EntanglerSpec(computational_basis(2)), default_pointer(2),
                             SpinBathSpec::half_amplitude({}), uniform(2));
    EXPECT_LE(max_abs(build_total_hamiltonian(m).matrix() - tensor(hs, Operator::identity(2)).matrix()), 1e-15);
}

TEST(Hamiltonian, SingleSpinMatchesHandExpansion) {
    const DecoherenceModel m = qubit_model(SpinBathSpec::half_amplitude({1.0}));
    // A = diag(1,-1) on the apparatus, sigma_z on the spin, identity on S.
    const Matrix z = Eigen::Vector2cd(1, -1).asDiagonal();
    const Matrix expect = oracle::kron(Matrix::Identity(2, 2), oracle::kron(z, z));
    EXPECT_LE(max_abs(build_total_hamiltonian(m).matrix() - expect), 0.0);
}

TEST(Hamiltonian, CommutesWithPointerObservable) {
    CounterRng rng(2, 0);
    const SpinBathSpec bath = SpinBathSpec::random(rng, 4);
    const DecoherenceModel m(random_hermitian(rng, 3), EntanglerSpec(random_unitary(rng, 3).matrix()),
                             default_pointer(3), bath, uniform(3));
    const Operator h = build_total_hamiltonian(m);
    const std::array<std::size_t, 1> fa{1};
    const Operator a = embed(m.pointer().observable(), m.space(), fa);
    EXPECT_LE(max_abs(h.matrix() * a.matrix() - a.matrix() * h.matrix()), 1e-12);
    EXPECT_TRUE(h.is_hermitian());
}

TEST(Model, EnforcesDimensionBudget) {
    std::vector<double> g(11, 1.0);
    EXPECT_THROW(qubit_model(SpinBathSpec::half_amplitude(g)), DimensionError);
    EXPECT_NO_THROW(qubit_model(SpinBathSpec::half_amplitude(std::vector<double>(10, 1.0))));
}

TEST(DecoherenceFactor, Examples) {
    const DecoherenceModel m = qubit_model(SpinBathSpec::half_amplitude({1.0}), 0.5);
    EXPECT_EQ(decoherence_factor(m, 1, 1, 3.0), Complex(1.0));
    EXPECT_EQ(decoherence_factor(m, 0, 1, 0.5), Complex(1.0));
    for (double tau : {0.1, 0.7, 2.3}) {
        const Complex r = decoherence_factor(m, 0, 1, 0.5 + tau);
        EXPECT_NEAR(r.real(), std::cos(2.0 * tau), 1e-15);
        EXPECT_NEAR(r.imag(), 0.0, 1e-15);
    }
    EXPECT_THROW(decoherence_factor(m, 0, 2, 1.0), DimensionError);
    EXPECT_THROW(decoherence_factor(m, 0, 1, 0.0), InvariantError);
}

TEST(DecoherenceFactor, MatchesBathSumOracle) {
    CounterRng rng(3, 0);
    std::vector<SpinBathSpec::SpinAmplitudes> amps;
    std::vector<double> g;
    for (int i = 0; i < 6; ++i) {
        const StateVector s = random_state(rng, 2);
        amps.push_back({s[0], s[1]});
        g.push_back(0.5 + rng.uniform());
    }
    const SpinBathSpec bath(g, amps);
    const DecoherenceModel m = qubit_model(bath);
    for (double t : {0.3, 1.1, 4.0}) {
        const Complex r = decoherence_factor(m, 0, 1, t);
        EXPECT_LE(std::abs(r - oracle::bath_overlap(g, pairs_of(bath), 2.0, t)), 1e-12);
        EXPECT_LE(std::abs(r), 1.0 + 1e-15);
    }
}

TEST(Simulate, BeforeKickApparatusIsReady) {
    CounterRng rng(4, 0);
    const DecoherenceModel m = qubit_model(SpinBathSpec::random(rng, 3), 2.0);
    const std::array<double, 2> t{0.0, 1.5};
    for (const DecoherenceSample& s : simulate(m, t)) {
        EXPECT_LE(max_abs(s.rho_a.matrix() - Operator::outer(Vector::Unit(2, 0), Vector::Unit(2, 0)).matrix()), 1e-12);
    }
    const std::array<double, 2> unsorted{1.0, 0.0};
    EXPECT_THROW(simulate(m, unsorted), InvariantError);
}

TEST(Simulate, NoCouplingMeansNoDecoherence) {
    const DecoherenceModel m = qubit_model(SpinBathSpec::half_amplitude({0.0, 0.0, 0.0}));
    const std::array<double, 3> t{0.0, 1.0, 5.0};
    const auto samples = simulate(m, t);
    for (const auto& s : samples) {
        EXPECT_LE(max_abs(s.rho_sa.matrix() - samples.front().rho_sa.matrix()), 1e-12);
    }
}

TEST(Simulate, BlockCoherencesFollowClosedForm) {
    CounterRng rng(5, 0);
    const Index d = 3;
    // Pointer basis differs from the entangling basis, so rho_A itself keeps
    // coherences; S carries its own Hamiltonian.
    const Matrix ptr = random_unitary(rng, d).matrix();
    std::vector<double> values{1.0, 0.2, -0.9};
    const DecoherenceModel m(random_hermitian(rng, d), EntanglerSpec(computational_basis(d)),
                             ObservableDecomposition::from_basis(ptr, values), SpinBathSpec::random(rng, 5),
                             random_state(rng, d), 0.0);
    std::vector<double> times{0.0};
    for (int i = 1; i <= 8; ++i) times.push_back(0.37 * i);
    const auto samples = simulate(m, times, 2);
    const DensityOperator& rho0 = samples.front().rho_sa;
    const DensityOperator& ra0 = samples.front().rho_a;
    for (const auto& s : samples) {
        EXPECT_LE(max_abs(s.rho_sa.matrix() - predicted_rho_sa(m, rho0, s.time).matrix()), 1e-10);
        for (Index k = 0; k < d; ++k) {
            for (Index kp = 0; kp < d; ++kp) {
                const Complex expect = decoherence_factor(m, k, kp, s.time) * pointer_element(m, ra0, k, kp);
                EXPECT_LE(std::abs(pointer_element(m, s.rho_a, k, kp) - expect), 1e-10);
            }
        }
        EXPECT_NEAR(s.global_purity, 1.0, 1e-10);
    }
}

TEST(Simulate, ThreadCountDoesNotChangeResults) {
    CounterRng rng(6, 0);
    const DecoherenceModel m = qubit_model(SpinBathSpec::random(rng, 6), 0.5);
    std::vector<double> t;
    for (int i = 0; i < 12; ++i) t.push_back(0.25 * i);
    const auto a = simulate(m, t, 1);
    const auto b = simulate(m, t, 4);
    for (std::size_t i = 0; i < t.size(); ++i) EXPECT_EQ(a[i].rho_sa.matrix(), b[i].rho_sa.matrix());
}

TEST(CollapseDistance, Examples) {
    const ObservableDecomposition z = default_pointer(2);
    const DensityOperator mixed = DensityOperator::assume_positive(Operator::diagonal(std::array<double, 4>{0.5, 0, 0, 0.5}));
    EXPECT_EQ(collapse_distance(mixed, z), 0.0);
    Vector bell = Vector::Zero(4);
    bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
    EXPECT_NEAR(collapse_distance(DensityOperator::pure(StateVector(bell)), z), 0.5, 1e-15);
}

TEST(GlobalEntropy, PureAndMixedBathStarts) {
    CounterRng rng(7, 0);
    const DecoherenceModel m = qubit_model(SpinBathSpec::random(rng, 3), 0.2);
    std::vector<double> t{0.0, 0.2, 0.9, 2.0, 4.5};
    const auto pure = simulate_global(m, DensityOperator::pure(m.bath().initial_state()), t);
    EXPECT_LE(global_entropy_check(pure), 1e-8);
    EXPECT_NEAR(von_neumann_entropy(pure.front()), 0.0, 1e-8);
    const auto mixed = simulate_global(m, random_density(rng, 8), t);
    EXPECT_LE(global_entropy_check(mixed), 1e-8);

    // Reduced S+A entropy grows after the kick while the global entropy stays put.
    const auto samples = simulate(m, t);
    EXPECT_NEAR(von_neumann_entropy(samples[1].rho_sa), 0.0, 1e-8);
    EXPECT_GT(von_neumann_entropy(samples[3].rho_sa), 0.1);
    EXPECT_LT(samples[3].rho_sa.purity(), samples[1].rho_sa.purity());
}
