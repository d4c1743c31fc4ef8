#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "qmep/error.hpp"
#include "qmep/random.hpp"
#include "qmep/weak.hpp"

using namespace qmep;

namespace {

StateVector plus2() { return StateVector::normalized(Eigen::Vector2cd(1, 1)); }

}  // namespace

TEST(BuildKraus, ProjectiveLimit) {
    CounterRng rng(1, 0);
    const Matrix psi = random_unitary(rng, 3).matrix();
    const KrausSet k = build_kraus(psi, Matrix::Identity(3, 3));
    for (Index j = 0; j < 3; ++j) {
        EXPECT_LE(max_abs(k[j].matrix() - psi.col(j) * psi.col(j).adjoint()), 1e-14);
    }
}

TEST(BuildKraus, SmallRotationStructure) {
    const double eps = 0.1;
    const KrausSet k = build_kraus(computational_basis(2), rotation_mixing(2, eps));
    EXPECT_NEAR(std::abs(k[0](0, 0)), std::cos(eps), 1e-15);
    EXPECT_NEAR(std::abs(k[0](1, 1)), std::sin(eps), 1e-15);
    EXPECT_NEAR(std::abs(k[0](0, 1)), 0.0, 1e-15);
}

TEST(BuildKraus, CompletenessForRandomMixing) {
    CounterRng rng(2, 0);
    for (Index d = 1; d <= 6; ++d) {
        for (int trial = 0; trial < 10; ++trial) {
            const KrausSet k = build_kraus(random_unitary(rng, d).matrix(), random_unitary(rng, d).matrix());
            EXPECT_LE(k.completeness_residual(), 1e-12);
        }
    }
}

TEST(BuildKraus, RejectsNonUnitaryMixing) {
    Matrix bad = Matrix::Identity(2, 2);
    bad(0, 1) = 0.1;
    EXPECT_THROW(build_kraus(computational_basis(2), bad), InvariantError);
}

TEST(WeakUpdate, ProjectiveExamples) {
    const KrausSet k = build_kraus(computational_basis(2), Matrix::Identity(2, 2));
    const WeakUpdate u = weak_update(StateVector::basis(2, 0), k, 0);
    EXPECT_NEAR(u.probability, 1.0, 1e-15);
    EXPECT_LE((u.state.amplitudes() - StateVector::basis(2, 0).amplitudes()).norm(), 1e-15);
    const auto p = outcome_probabilities(plus2(), k);
    EXPECT_NEAR(p[0], 0.5, 1e-15);
    EXPECT_NEAR(p[1], 0.5, 1e-15);
    EXPECT_THROW(weak_update(StateVector::basis(2, 0), k, 1), InvariantError);
}

TEST(WeakUpdate, ProbabilitiesSumToOne) {
    CounterRng rng(3, 0);
    for (int trial = 0; trial < 50; ++trial) {
        const Index d = 2 + trial % 5;
        const KrausSet k = build_kraus(random_unitary(rng, d).matrix(), random_unitary(rng, d).matrix());
        const auto p = outcome_probabilities(random_state(rng, d), k);
        EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
    }
}

TEST(RunTrajectory, ProjectivePinsAfterOneStep) {
    const KrausSet k = build_kraus(computational_basis(3), Matrix::Identity(3, 3));
    const StateVector psi0 = StateVector::normalized(Eigen::Vector3cd(1, 1, 1));
    for (std::uint64_t s = 0; s < 20; ++s) {
        const Trajectory t = run_trajectory(psi0, k, 10, 5, s);
        for (std::size_t i = 1; i < t.steps(); ++i) EXPECT_EQ(t.outcomes[i], t.outcomes[0]);
        for (Index step = 1; step <= 10; ++step) {
            EXPECT_NEAR(t.born_weights(static_cast<Index>(t.outcomes[0]), step), 1.0, 1e-12);
        }
    }
}

TEST(RunTrajectory, IdentityMixingKeepsWeightsOfEigenstate) {
    const KrausSet k = build_kraus(computational_basis(2), Matrix::Identity(2, 2));
    const Trajectory t = run_trajectory(StateVector::basis(2, 1), k, 5, 1);
    for (Index step = 0; step <= 5; ++step) EXPECT_EQ(t.born_weights(1, step), 1.0);
}

TEST(RunTrajectory, DeterministicAndNormalized) {
    CounterRng rng(4, 0);
    const KrausSet k = build_kraus(computational_basis(4), random_unitary(rng, 4).matrix());
    const StateVector psi0 = random_state(rng, 4);
    const Trajectory a = run_trajectory(psi0, k, 50, 9, 2);
    const Trajectory b = run_trajectory(psi0, k, 50, 9, 2);
    EXPECT_EQ(a.outcomes, b.outcomes);
    EXPECT_EQ(a.born_weights, b.born_weights);
    for (const StateVector& s : a.states) EXPECT_NEAR(s.amplitudes().norm(), 1.0, 1e-10);
    EXPECT_LE(a.max_probability_residual, 1e-10);
}

TEST(RunEnsemble, IndependentOfThreads) {
    const KrausSet k = build_kraus(computational_basis(2), rotation_mixing(2, 0.3));
    const auto a = run_ensemble(plus2(), k, 40, 3, 64, 1);
    const auto b = run_ensemble(plus2(), k, 40, 3, 64, 4);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].outcomes, b[i].outcomes);
        EXPECT_EQ(a[i].born_weights, b[i].born_weights);
    }
}

TEST(ConvergenceStatistics, EigenstateAndErrors) {
    const KrausSet k = build_kraus(computational_basis(3), rotation_mixing(3, 0.2));
    const auto ens = run_ensemble(StateVector::basis(3, 0), k, 10, 1, 20);
    const ConvergenceStatistics s = convergence_statistics(ens);
    EXPECT_EQ(s.empirical_dist, (std::vector<double>{1.0, 0.0, 0.0}));
    EXPECT_EQ(s.martingale_drift.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_THROW(convergence_statistics(std::span<const Trajectory>{}), InvariantError);
}

TEST(ConvergenceStatistics, MaxWeightNonDecreasingOnAverage) {
    const KrausSet k = build_kraus(computational_basis(2), rotation_mixing(2, 0.2));
    const StateVector psi0 = StateVector::normalized(Eigen::Vector2cd(0.6, 0.8));
    const auto ens = run_ensemble(psi0, k, 100, 2, 2000);
    const ConvergenceStatistics s = convergence_statistics(ens);
    double sum = 0.0;
    for (double f : s.empirical_dist) sum += f;
    EXPECT_NEAR(sum, 1.0, 1e-15);
    for (std::size_t t = 0; t + 1 < s.mean_max_weight.size(); ++t) {
        EXPECT_GE(s.mean_max_weight[t + 1] - s.mean_max_weight[t], -3.0 * s.max_weight_increment_stderr[t]);
    }
    EXPECT_GT(s.mean_max_weight.back(), s.mean_max_weight.front());
}

TEST(ConvergenceStatistics, DriftKeepsPrecisionAfterCollapse) {
    // Late in the run every weight is within rounding of 0 or 1; the drifts of
    // the two weights must still cancel to full relative precision.
    const KrausSet k = build_kraus(computational_basis(2), rotation_mixing(2, 0.1));
    const StateVector psi0 = StateVector::normalized(Eigen::Vector2cd(0.6, 0.8));
    const auto ens = run_ensemble(psi0, k, 40, 7, 500);
    const ConvergenceStatistics s = convergence_statistics(ens);
    for (Index t = 20; t < 40; ++t) {
        const double a = s.martingale_drift(0, t);
        const double b = s.martingale_drift(1, t);
        ASSERT_NE(a, 0.0);
        EXPECT_LE(std::abs(a + b), 1e-12 * std::abs(a)) << "step " << t;
        EXPECT_NEAR(s.drift_stderr(0, t), s.drift_stderr(1, t), 1e-12 * s.drift_stderr(0, t));
    }
}
