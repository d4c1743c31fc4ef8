#include "qmep/decoherence.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "qmep/error.hpp"
#include "qmep/parallel.hpp"
#include "qmep/random.hpp"

namespace qmep {

namespace {

constexpr std::array<std::size_t, 2> kSystemApparatus{0, 1};
constexpr std::array<std::size_t, 1> kApparatus{1};
constexpr Index kMixedBudget = 1024;

// Unit vector spanning a rank-one projector: its largest column, normalized,
// with the largest component made real and positive.
Vector rank_one_vector(const Projector& p) {
    Index col = 0;
    p.matrix().colwise().norm().maxCoeff(&col);
    Vector v = p.matrix().col(col);
    v.normalize();
    Index big = 0;
    v.cwiseAbs().maxCoeff(&big);
    v *= std::abs(v(big)) / v(big);
    return v;
}

}  // namespace

// ---------------------------------------------------------------- SpinBathSpec

SpinBathSpec::SpinBathSpec(std::vector<double> couplings, std::vector<SpinAmplitudes> initial_amplitudes)
    : couplings_(std::move(couplings)), amplitudes_(std::move(initial_amplitudes)) {
    if (couplings_.size() != amplitudes_.size()) {
        throw DimensionError("SpinBathSpec: need one amplitude pair per coupling");
    }
    for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
        const double n = std::norm(amplitudes_[i][0]) + std::norm(amplitudes_[i][1]);
        if (!(std::abs(std::sqrt(n) - 1.0) <= tol::norm)) {
            throw InvariantError("SpinBathSpec: amplitudes of spin " + std::to_string(i) + " are not normalized");
        }
        if (!std::isfinite(couplings_[i])) throw InvariantError("SpinBathSpec: non-finite coupling");
    }
}

SpinBathSpec SpinBathSpec::half_amplitude(std::vector<double> couplings) {
    const Complex h(1.0 / std::sqrt(2.0), 0.0);
    std::vector<SpinAmplitudes> amps(couplings.size(), SpinAmplitudes{h, h});
    return SpinBathSpec(std::move(couplings), std::move(amps));
}

SpinBathSpec SpinBathSpec::random(CounterRng& rng, std::size_t n_spins, double lo, double hi) {
    std::vector<double> g(n_spins);
    for (double& gi : g) gi = lo + (hi - lo) * rng.uniform();
    return half_amplitude(std::move(g));
}

StateVector SpinBathSpec::initial_state() const {
    Vector v = Vector::Ones(1);
    for (const SpinAmplitudes& ab : amplitudes_) {
        Vector next(2 * v.size());
        // Row-major: earlier spins are more significant.
        for (Index i = 0; i < v.size(); ++i) {
            next(2 * i) = v(i) * ab[0];
            next(2 * i + 1) = v(i) * ab[1];
        }
        v = std::move(next);
    }
    return StateVector(std::move(v));
}

// ------------------------------------------------------------ DecoherenceModel

DecoherenceModel::DecoherenceModel(Operator h_system, EntanglerSpec entangler, ObservableDecomposition pointer,
                                   SpinBathSpec bath, StateVector initial_system, double t0)
    : h_system_(std::move(h_system)),
      entangler_(std::move(entangler)),
      pointer_(std::move(pointer)),
      bath_(std::move(bath)),
      initial_system_(std::move(initial_system)),
      t0_(t0) {
    if (entangler_.system_basis().rows() != h_system_.dim() || initial_system_.dim() != h_system_.dim()) {
        throw DimensionError("DecoherenceModel: system dimension mismatch");
    }
    if (pointer_.dim() != apparatus_dim()) throw DimensionError("DecoherenceModel: pointer dimension mismatch");
    if (bath_.n_spins() > 12 || total_dim() > kDimensionBudget) {
        throw DimensionError("DecoherenceModel: composite dimension exceeds the budget of " +
                             std::to_string(kDimensionBudget));
    }
    if (!h_system_.is_hermitian()) throw InvariantError("DecoherenceModel: system Hamiltonian is not Hermitian");
    if (!std::isfinite(t0_)) throw InvariantError("DecoherenceModel: non-finite kick time");
    pointer_states_.resize(apparatus_dim(), static_cast<Index>(pointer_.size()));
    for (std::size_t k = 0; k < pointer_.size(); ++k) {
        if (pointer_.projectors()[k].rank() != 1) {
            throw InvariantError("DecoherenceModel: pointer states must be non-degenerate");
        }
        pointer_states_.col(static_cast<Index>(k)) = rank_one_vector(pointer_.projectors()[k]);
    }
}

CompositeSpace DecoherenceModel::space() const {
    std::vector<Index> dims{system_dim(), apparatus_dim()};
    dims.insert(dims.end(), bath_.n_spins(), Index{2});
    return CompositeSpace(std::move(dims));
}

StateVector DecoherenceModel::initial_state() const {
    const StateVector sa =
        tensor_state(initial_system_, StateVector::basis(apparatus_dim(), entangler_.ready_index()));
    return tensor_state(sa, bath_.initial_state());
}

// ------------------------------------------------------------------ dynamics

Operator build_total_hamiltonian(const DecoherenceModel& model) {
    const CompositeSpace space = model.space();
    Matrix h = Matrix::Zero(space.total_dim(), space.total_dim());
    constexpr std::array<std::size_t, 1> kSystem{0};
    accumulate_embedded(h, model.h_system(), space, kSystem);

    const Operator a = model.pointer().observable();
    const std::array<double, 2> z{1.0, -1.0};
    const Operator a_z = tensor(a, Operator::diagonal(z));
    for (std::size_t i = 0; i < model.bath().n_spins(); ++i) {
        const std::array<std::size_t, 2> factors{1, 2 + i};
        accumulate_embedded(h, a_z, space, factors, model.bath().couplings()[i]);
    }
    return Operator(std::move(h));
}

std::vector<DecoherenceSample> simulate(const DecoherenceModel& model, std::span<const double> times,
                                        unsigned threads) {
    if (!std::is_sorted(times.begin(), times.end())) throw InvariantError("simulate: times must be sorted");
    const CompositeSpace space = model.space();
    const SpectralPropagator drift(build_total_hamiltonian(model));
    const Vector psi0 = model.initial_state().amplitudes();
    const Vector kicked = apply_local(build_entangler(model.entangler()), space, kSystemApparatus,
                                      drift.apply(psi0, model.t0()));

    std::vector<std::optional<DecoherenceSample>> slots(times.size());
    parallel_for(times.size(), threads, [&](std::size_t i) {
        const double t = times[i];
        const Vector psi = t < model.t0() ? drift.apply(psi0, t) : drift.apply(kicked, t - model.t0());
        const double n2 = psi.squaredNorm();
        slots[i] = DecoherenceSample{
            t,
            DensityOperator::assume_positive(Operator(reduced_density(psi, space, kSystemApparatus))),
            DensityOperator::assume_positive(Operator(reduced_density(psi, space, kApparatus))),
            n2 * n2,
        };
    });
    std::vector<DecoherenceSample> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

std::vector<DensityOperator> simulate_global(const DecoherenceModel& model, const DensityOperator& bath_density,
                                             std::span<const double> times) {
    if (bath_density.dim() != model.bath_dim()) throw DimensionError("simulate_global: bath density dimension mismatch");
    if (model.total_dim() > kMixedBudget) {
        throw DimensionError("simulate_global: composite dimension exceeds " + std::to_string(kMixedBudget));
    }
    if (!std::is_sorted(times.begin(), times.end())) throw InvariantError("simulate_global: times must be sorted");
    const CompositeSpace space = model.space();
    const SpectralPropagator drift(build_total_hamiltonian(model));
    const Operator kick = embed(build_entangler(model.entangler()), space, kSystemApparatus);

    const StateVector sa =
        tensor_state(model.initial_system(), StateVector::basis(model.apparatus_dim(), model.entangler().ready_index()));
    const DensityOperator rho0 =
        DensityOperator::assume_positive(tensor(DensityOperator::pure(sa).op(), bath_density.op()));
    const Operator u_t0 = drift.unitary(model.t0());
    const DensityOperator kicked = evolve_density(evolve_density(rho0, u_t0), kick);

    std::vector<DensityOperator> out;
    out.reserve(times.size());
    for (double t : times) {
        out.push_back(t < model.t0() ? evolve_density(rho0, drift.unitary(t))
                                     : evolve_density(kicked, drift.unitary(t - model.t0())));
    }
    return out;
}

Complex pointer_element(const DecoherenceModel& model, const DensityOperator& rho_a, Index k, Index k_prime) {
    if (rho_a.dim() != model.apparatus_dim()) throw DimensionError("pointer_element: dimension mismatch");
    const Index n = model.pointer_states().cols();
    if (k < 0 || k >= n || k_prime < 0 || k_prime >= n) throw DimensionError("pointer_element: index out of range");
    const Matrix& p = model.pointer_states();
    return (p.col(k).adjoint() * rho_a.matrix() * p.col(k_prime))(0, 0);
}

Complex decoherence_factor(const DecoherenceModel& model, Index k, Index k_prime, double t) {
    const auto n = static_cast<Index>(model.pointer().size());
    if (k < 0 || k >= n || k_prime < 0 || k_prime >= n) throw DimensionError("decoherence_factor: index out of range");
    if (t < model.t0()) throw InvariantError("decoherence_factor: time precedes the kick");
    const double tau = t - model.t0();
    if (k == k_prime || tau == 0.0) return 1.0;
    const double delta = model.pointer().eigenvalues()[static_cast<std::size_t>(k)] -
                         model.pointer().eigenvalues()[static_cast<std::size_t>(k_prime)];
    Complex r = 1.0;
    const auto& g = model.bath().couplings();
    const auto& amps = model.bath().initial_amplitudes();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double phase = delta * g[i] * tau;
        r *= std::norm(amps[i][0]) * std::polar(1.0, -phase) + std::norm(amps[i][1]) * std::polar(1.0, phase);
    }
    return r;
}

namespace {

// I_S (x) |k> as a (d_S d_A) x d_S isometry.
Matrix pointer_isometry(const DecoherenceModel& model, Index k) {
    const Index ds = model.system_dim();
    const Index da = model.apparatus_dim();
    Matrix w = Matrix::Zero(ds * da, ds);
    for (Index s = 0; s < ds; ++s) w.block(s * da, s, da, 1) = model.pointer_states().col(k);
    return w;
}

}  // namespace

Matrix pointer_block(const DecoherenceModel& model, const DensityOperator& rho_sa, Index k, Index k_prime) {
    const Index n = model.pointer_states().cols();
    if (rho_sa.dim() != model.system_dim() * model.apparatus_dim()) {
        throw DimensionError("pointer_block: dimension mismatch");
    }
    if (k < 0 || k >= n || k_prime < 0 || k_prime >= n) throw DimensionError("pointer_block: index out of range");
    return pointer_isometry(model, k).adjoint() * rho_sa.matrix() * pointer_isometry(model, k_prime);
}

Operator predicted_rho_sa(const DecoherenceModel& model, const DensityOperator& rho_sa_t0, double t) {
    const Index n = model.pointer_states().cols();
    std::vector<Matrix> w;
    for (Index k = 0; k < n; ++k) w.push_back(pointer_isometry(model, k));
    Matrix out = Matrix::Zero(rho_sa_t0.dim(), rho_sa_t0.dim());
    for (Index k = 0; k < n; ++k) {
        for (Index kp = 0; kp < n; ++kp) {
            const auto ku = static_cast<std::size_t>(k);
            const auto kpu = static_cast<std::size_t>(kp);
            out += decoherence_factor(model, k, kp, t) * w[ku] * (w[ku].adjoint() * rho_sa_t0.matrix() * w[kpu]) *
                   w[kpu].adjoint();
        }
    }
    const Operator u_s = tensor(evolve(model.h_system(), t - model.t0()), Operator::identity(model.apparatus_dim()));
    return Operator(u_s.matrix() * out * u_s.matrix().adjoint());
}

double collapse_distance(const DensityOperator& rho_sa, const ObservableDecomposition& pointer) {
    const Index da = pointer.dim();
    if (rho_sa.dim() % da != 0) throw DimensionError("collapse_distance: dimension mismatch");
    const Operator id_s = Operator::identity(rho_sa.dim() / da);
    std::vector<Projector> padded;
    padded.reserve(pointer.size());
    for (const Projector& p : pointer.projectors()) padded.emplace_back(tensor(id_s, p.op()));
    const ObservableDecomposition lifted(pointer.eigenvalues(), std::move(padded));
    return max_abs(rho_sa.matrix() - process1(rho_sa, lifted).matrix());
}

double global_entropy_check(std::span<const DensityOperator> trajectory) {
    if (trajectory.empty()) return 0.0;
    const double s0 = von_neumann_entropy(trajectory.front());
    double worst = 0.0;
    for (const DensityOperator& rho : trajectory) worst = std::max(worst, std::abs(von_neumann_entropy(rho) - s0));
    return worst;
}

}  // namespace qmep
