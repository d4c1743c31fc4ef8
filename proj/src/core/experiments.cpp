#include "qmep/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>

#include "qmep/born.hpp"
#include "qmep/decoherence.hpp"
#include "qmep/density.hpp"
#include "qmep/error.hpp"
#include "qmep/parallel.hpp"
#include "qmep/random.hpp"
#include "qmep/weak.hpp"

#ifndef QMEP_VERSION
#define QMEP_VERSION "0.0.0"
#endif

namespace qmep {

std::string tool_version() { return QMEP_VERSION; }

namespace {

constexpr std::uint64_t kBornStream = 1;
constexpr std::uint64_t kBathStream = 2;
constexpr std::uint64_t kWeakStream = 3;
constexpr std::uint64_t kEntropyStream = 4;
constexpr int kMaxRejections = 100000;
constexpr double kRankCutoff = 1e-12;

Matrix resolve_basis(const BasisSpec& spec, Index dim, CounterRng& rng) {
    if (const auto* m = std::get_if<Matrix>(&spec)) return *m;
    switch (std::get<NamedBasis>(spec)) {
        case NamedBasis::Computational: return computational_basis(dim);
        case NamedBasis::Fourier: return fourier_basis(dim);
        case NamedBasis::Random: return random_unitary(rng, dim).matrix();
    }
    return computational_basis(dim);
}

// Named and index states are expressed in `basis`. Random states are redrawn
// until every amplitude in `basis` reaches `min_amplitude`.
StateVector resolve_state(const StateSpec& spec, const Matrix& basis, CounterRng& rng, double min_amplitude = 0.0) {
    const Index d = basis.cols();
    if (const auto* v = std::get_if<Vector>(&spec)) return StateVector(*v);
    if (const auto* b = std::get_if<BasisIndexState>(&spec)) return StateVector(Vector(basis.col(b->index)));
    if (std::get<NamedState>(spec) == NamedState::Uniform) {
        return StateVector::normalized(basis * Vector::Ones(d));
    }
    for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
        StateVector psi = random_state(rng, d);
        if ((basis.adjoint() * psi.amplitudes()).cwiseAbs().minCoeff() >= min_amplitude) return psi;
    }
    throw InvariantError("could not draw a random state with all amplitudes >= " + format_real(min_amplitude));
}

std::uint64_t seed_or_zero(const ExperimentConfig& cfg) { return cfg.seed.value_or(0); }

template <class T>
std::vector<T> unwrap(std::vector<std::optional<T>>& slots) {
    std::vector<T> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

// ------------------------------------------------------------------ born

ResultTable run_born(const ExperimentConfig& cfg, const BornParams& p, const RunOptions& opt) {
    const Index d = p.dim;
    struct Trial {
        Matrix psi;
        Matrix phi;
        RealMatrix conditional;
    };
    std::vector<std::optional<Trial>> slots(p.trials);
    parallel_for(p.trials, opt.threads, [&](std::size_t t) {
        CounterRng rng(seed_or_zero(cfg), stream_id(kBornStream, t));
        Matrix psi = resolve_basis(p.psi_basis, d, rng);
        Matrix phi = resolve_basis(p.phi_basis, d, rng);
        StateVector init = resolve_state(p.initial_state, psi, rng, p.random_min_amplitude);
        const DoubleApparatusSetup setup(psi, phi, std::move(init), p.min_amplitude);
        RealMatrix cond = run_double_apparatus(setup).conditional;
        for (Index j = 0; j < d; ++j) {
            if (std::abs(cond.col(j).sum() - 1.0) > tol::norm) {
                throw InvariantError("conditional probabilities for outcome " + std::to_string(j) +
                                     " do not sum to 1");
            }
        }
        slots[t] = Trial{std::move(psi), std::move(phi), std::move(cond)};
    });

    ResultTable table({{"trial", ColumnType::Integer},
                       {"j", ColumnType::Integer},
                       {"l", ColumnType::Integer},
                       {"p_emergent", ColumnType::Real},
                       {"born_overlap", ColumnType::Real},
                       {"abs_error", ColumnType::Real}});
    for (std::size_t t = 0; t < slots.size(); ++t) {
        const Trial& tr = *slots[t];
        for (Index j = 0; j < d; ++j) {
            for (Index l = 0; l < d; ++l) {
                const double emergent = tr.conditional(l, j);
                const double born = std::norm(tr.phi.col(l).dot(tr.psi.col(j)));
                table.add_row({static_cast<std::int64_t>(t), static_cast<std::int64_t>(j), static_cast<std::int64_t>(l),
                               emergent, born, std::abs(emergent - born)});
            }
        }
    }
    return table;
}

// -------------------------------------------------------------- decohere

ResultTable run_decohere(const ExperimentConfig& cfg, const DecohereParams& p, const RunOptions& opt) {
    const Index d = p.dim;
    CounterRng rng(seed_or_zero(cfg), stream_id(kBathStream, 0));
    const Matrix ent_basis = resolve_basis(p.entangler_basis, d, rng);
    const Matrix ptr_basis = resolve_basis(p.pointer_basis, d, rng);
    const StateVector init = resolve_state(p.initial_state, ent_basis, rng);

    std::vector<double> couplings;
    if (const auto* g = std::get_if<std::vector<double>>(&p.couplings)) {
        couplings = *g;
    } else {
        const auto range = std::get<UniformRange>(p.couplings);
        for (std::size_t i = 0; i < p.n_spins; ++i) couplings.push_back(range.lo + (range.hi - range.lo) * rng.uniform());
    }
    const SpinBathSpec bath = p.amplitudes ? SpinBathSpec(couplings, *p.amplitudes)
                                           : SpinBathSpec::half_amplitude(couplings);

    std::vector<double> values = p.pointer_eigenvalues.value_or(std::vector<double>{});
    if (!p.pointer_eigenvalues) {
        for (Index k = 0; k < d; ++k) values.push_back(static_cast<double>(d - 1 - 2 * k));
    }
    const DecoherenceModel model(p.h_system ? Operator(*p.h_system) : Operator::zero(d), EntanglerSpec(ent_basis),
                                 ObservableDecomposition::from_basis(ptr_basis, values), bath, init, p.t0);

    const std::vector<DecoherenceSample> samples = simulate(model, p.times, opt.threads);
    const std::array<double, 1> kick_time{p.t0};
    const DecoherenceSample reference = simulate(model, kick_time, 1).front();

    ResultTable table({{"t", ColumnType::Real},
                       {"k", ColumnType::Integer},
                       {"k_prime", ColumnType::Integer},
                       {"r", ColumnType::Complex},
                       {"r_abs", ColumnType::Real},
                       {"rho_a_abs", ColumnType::Real},
                       {"coherence_sa", ColumnType::Real},
                       {"ratio_error", ColumnType::Real},
                       {"collapse_distance", ColumnType::Real},
                       {"entropy_sa", ColumnType::Real},
                       {"global_purity", ColumnType::Real}});
    for (const DecoherenceSample& s : samples) {
        if (std::abs(s.global_purity - 1.0) > tol::trace) {
            throw InvariantError("global purity drifted to " + format_real(s.global_purity) + " at t = " +
                                 format_real(s.time));
        }
        const double dist = collapse_distance(s.rho_sa, model.pointer());
        const double entropy = von_neumann_entropy(s.rho_sa);
        std::optional<DensityOperator> predicted;
        if (s.time >= p.t0) {
            predicted = DensityOperator::assume_positive(predicted_rho_sa(model, reference.rho_sa, s.time));
        }
        for (Index k = 0; k < d; ++k) {
            for (Index kp = k + 1; kp < d; ++kp) {
                const Complex element = pointer_element(model, s.rho_a, k, kp);
                const Matrix block = pointer_block(model, s.rho_sa, k, kp);
                Complex r = 1.0;
                double ratio_error = 0.0;
                if (predicted) {
                    r = decoherence_factor(model, k, kp, s.time);
                    ratio_error = std::max(std::abs(element - r * pointer_element(model, reference.rho_a, k, kp)),
                                           max_abs(block - pointer_block(model, *predicted, k, kp)));
                }
                table.add_row({s.time, static_cast<std::int64_t>(k), static_cast<std::int64_t>(kp), r, std::abs(r),
                               std::abs(element), block.cwiseAbs().maxCoeff(), ratio_error, dist, entropy,
                               s.global_purity});
            }
        }
    }
    return table;
}

// ------------------------------------------------------------------ weak

ResultTable run_weak(const ExperimentConfig& cfg, const WeakParams& p, const RunOptions& opt) {
    const Index d = p.dim;
    const std::uint64_t seed = seed_or_zero(cfg);
    CounterRng rng(seed, stream_id(kWeakStream, 0));
    const Matrix psi_basis = resolve_basis(p.psi_basis, d, rng);
    Matrix mixing;
    if (const auto* m = std::get_if<Matrix>(&p.mixing)) {
        mixing = *m;
    } else if (const auto* rot = std::get_if<RotationMixing>(&p.mixing)) {
        mixing = rotation_mixing(d, rot->angle);
    } else if (std::get<NamedMixing>(p.mixing) == NamedMixing::Random) {
        mixing = random_unitary(rng, d).matrix();
    } else {
        mixing = Matrix::Identity(d, d);
    }
    const StateVector psi0 = resolve_state(p.initial_state, psi_basis, rng);
    const KrausSet kraus(psi_basis, mixing);
    if (kraus.completeness_residual() > tol::norm) throw InvariantError("Kraus set is not complete");

    const std::vector<Trajectory> ens =
        run_ensemble(psi0, kraus, p.steps, seed, p.trajectories, opt.threads, StateRecording::FinalOnly);
    for (const Trajectory& tr : ens) {
        if (tr.max_probability_residual > tol::norm) {
            throw InvariantError("outcome probabilities of trajectory " + std::to_string(tr.stream) +
                                 " do not sum to 1");
        }
    }
    const ConvergenceStatistics st = convergence_statistics(ens);
    const auto n = static_cast<double>(ens.size());

    ResultTable table({{"kind", ColumnType::Integer},
                       {"index", ColumnType::Integer},
                       {"j", ColumnType::Integer},
                       {"value", ColumnType::Real},
                       {"reference", ColumnType::Real},
                       {"stderr", ColumnType::Real}});
    const auto steps = static_cast<Index>(p.steps);
    std::size_t dominant_runs = 0;
    for (std::size_t i = 0; i < ens.size(); ++i) {
        Index j = 0;
        const double w = ens[i].born_weights.col(steps).maxCoeff(&j);
        if (w >= p.dominance_threshold) ++dominant_runs;
        table.add_row({std::int64_t{0}, static_cast<std::int64_t>(i), static_cast<std::int64_t>(j), w,
                       p.dominance_threshold, 0.0});
    }
    for (Index t = 0; t < steps; ++t) {
        for (Index j = 0; j < d; ++j) {
            table.add_row({std::int64_t{1}, static_cast<std::int64_t>(t + 1), static_cast<std::int64_t>(j),
                           st.martingale_drift(j, t), st.mean_weight(j, t + 1), st.drift_stderr(j, t)});
        }
    }
    const RealVector initial = born_weights(psi0, psi_basis);
    for (Index j = 0; j < d; ++j) {
        const double f = st.empirical_dist[static_cast<std::size_t>(j)];
        const double born = initial(j);
        table.add_row({std::int64_t{2}, std::int64_t{0}, static_cast<std::int64_t>(j), f, born,
                       std::sqrt(born * (1.0 - born) / n)});
    }
    const double frac = static_cast<double>(dominant_runs) / n;
    table.add_row({std::int64_t{3}, std::int64_t{0}, std::int64_t{-1}, frac, p.dominance_fraction,
                   std::sqrt(frac * (1.0 - frac) / n)});
    return table;
}

// --------------------------------------------------------------- entropy

ResultTable run_entropy(const ExperimentConfig& cfg, const EntropyParams& p, const RunOptions& opt) {
    const Index d = p.dim;
    struct Sample {
        double s, s_unitary, s_process1, purity;
        std::int64_t rank;
    };
    std::vector<std::optional<Sample>> slots(p.samples);
    parallel_for(p.samples, opt.threads, [&](std::size_t i) {
        CounterRng rng(seed_or_zero(cfg), stream_id(kEntropyStream, i));
        std::optional<DensityOperator> rho;
        if (const auto* m = std::get_if<Matrix>(&p.density)) {
            rho.emplace(Operator(*m));
        } else {
            switch (std::get<NamedDensity>(p.density)) {
                case NamedDensity::Uniform: rho.emplace(uniform_prior(d)); break;
                case NamedDensity::Random: rho.emplace(random_density(rng, d)); break;
                case NamedDensity::PureRandom: rho.emplace(DensityOperator::pure(random_state(rng, d))); break;
            }
        }
        const Matrix basis = resolve_basis(p.dephasing_basis, d, rng);
        const Operator u = random_unitary(rng, d);
        std::vector<double> labels(static_cast<std::size_t>(d));
        for (std::size_t k = 0; k < labels.size(); ++k) labels[k] = static_cast<double>(k);
        const ObservableDecomposition dephasing = ObservableDecomposition::from_basis(basis, labels);

        Sample out{};
        out.s = von_neumann_entropy(*rho);
        out.s_unitary = von_neumann_entropy(evolve_density(*rho, u));
        out.s_process1 = von_neumann_entropy(process1(*rho, dephasing));
        out.purity = rho->purity();
        const RealVector ev = hermitian_eig(rho->op()).eigenvalues;
        out.rank = static_cast<std::int64_t>((ev.array() > kRankCutoff).count());

        if (std::abs(out.s_unitary - out.s) > tol::herm) {
            throw InvariantError("entropy changed under a unitary in sample " + std::to_string(i));
        }
        if (out.s_process1 < out.s - tol::herm) {
            throw InvariantError("dephasing lowered the entropy in sample " + std::to_string(i));
        }
        slots[i] = out;
    });

    ResultTable table({{"sample", ColumnType::Integer},
                       {"entropy", ColumnType::Real},
                       {"entropy_unitary", ColumnType::Real},
                       {"entropy_process1", ColumnType::Real},
                       {"ln_dim", ColumnType::Real},
                       {"purity", ColumnType::Real},
                       {"rank", ColumnType::Integer}});
    const double ln_d = std::log(static_cast<double>(d));
    const std::vector<Sample> samples = unwrap(slots);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Sample& s = samples[i];
        table.add_row({static_cast<std::int64_t>(i), s.s, s.s_unitary, s.s_process1, ln_d, s.purity, s.rank});
    }
    return table;
}

ResultTable dispatch(const ExperimentConfig& cfg, const RunOptions& opt) {
    return std::visit(
        [&](const auto& params) -> ResultTable {
            using T = std::decay_t<decltype(params)>;
            if constexpr (std::is_same_v<T, BornParams>) return run_born(cfg, params, opt);
            if constexpr (std::is_same_v<T, DecohereParams>) return run_decohere(cfg, params, opt);
            if constexpr (std::is_same_v<T, WeakParams>) return run_weak(cfg, params, opt);
            if constexpr (std::is_same_v<T, EntropyParams>) return run_entropy(cfg, params, opt);
        },
        cfg.params);
}

}  // namespace

ResultTable run(const ExperimentConfig& config, const RunOptions& options) {
    const std::string context = std::string(to_string(config.experiment)) + ": ";
    std::optional<ResultTable> table;
    try {
        table.emplace(dispatch(config, options));
    } catch (const DimensionError& e) {
        throw DimensionError(context + e.what());
    } catch (const InvariantError& e) {
        throw InvariantError(context + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(context + e.what());
    } catch (const IoError& e) {
        throw IoError(context + e.what());
    }
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config.config_hash));
    table->set_metadata("experiment", std::string(to_string(config.experiment)));
    table->set_metadata("config_hash", hash);
    table->set_metadata("seed", config.seed ? std::to_string(*config.seed) : "none");
    table->set_metadata("tool_version", tool_version());
    return std::move(*table);
}

}  // namespace qmep
