#pragma once

// Experiment configuration: one JSON document per run (comments allowed).
//
//   {
//     "experiment": "born" | "decohere" | "weak" | "entropy",
//     "seed": 42,
//     "output": {"path": "out.csv", "format": "csv" | "json"},
//     "<experiment>": { ...parameters... }
//   }
//
// Unknown or duplicated keys are rejected. Inline matrices must satisfy the
// invariants of their target type when the file is loaded.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qmep/linalg.hpp"

namespace qmep {

enum class Experiment { Born, Decohere, Weak, Entropy };
enum class TableFormat { Csv, Json };

std::string_view to_string(Experiment e);
std::string_view to_string(TableFormat f);

enum class NamedBasis { Computational, Fourier, Random };
/// A named basis or explicit orthonormal columns.
using BasisSpec = std::variant<NamedBasis, Matrix>;

enum class NamedState { Uniform, Random };
struct BasisIndexState {
    Index index;
};
/// Uniform and basis-index states refer to the experiment's reference basis;
/// explicit amplitudes are in the computational basis.
using StateSpec = std::variant<NamedState, BasisIndexState, Vector>;

struct BornParams {
    Index dim = 2;
    BasisSpec psi_basis = NamedBasis::Computational;
    BasisSpec phi_basis = NamedBasis::Fourier;
    StateSpec initial_state = NamedState::Uniform;
    std::size_t trials = 1;
    double min_amplitude = 1e-6;
    /// Rejection threshold on min_j |c_j| for random initial states.
    double random_min_amplitude = 0.05;
};

struct UniformRange {
    double lo;
    double hi;
};

struct DecohereParams {
    Index dim = 2;
    std::optional<Matrix> h_system;  // zero when absent
    BasisSpec entangler_basis = NamedBasis::Computational;
    BasisSpec pointer_basis = NamedBasis::Computational;
    std::optional<std::vector<double>> pointer_eigenvalues;  // d-1-2k when absent
    StateSpec initial_state = NamedState::Uniform;
    std::size_t n_spins = 0;
    std::variant<std::vector<double>, UniformRange> couplings = UniformRange{0.5, 1.5};
    std::optional<std::vector<std::array<Complex, 2>>> amplitudes;  // half-amplitude when absent
    double t0 = 0.0;
    std::vector<double> times;
};

enum class NamedMixing { Identity, Random };
struct RotationMixing {
    double angle;
};
using MixingSpec = std::variant<NamedMixing, RotationMixing, Matrix>;

struct WeakParams {
    Index dim = 2;
    BasisSpec psi_basis = NamedBasis::Computational;
    MixingSpec mixing = NamedMixing::Identity;
    StateSpec initial_state = NamedState::Uniform;
    std::size_t steps = 500;
    std::size_t trajectories = 1000;
    /// A trajectory counts as converged when max_j p_j(final) >= threshold;
    /// the table reports whether at least `dominance_fraction` of them did.
    double dominance_threshold = 0.999;
    double dominance_fraction = 0.99;
};

enum class NamedDensity { Uniform, Random, PureRandom };
using DensitySpec = std::variant<NamedDensity, Matrix>;

struct EntropyParams {
    Index dim = 2;
    DensitySpec density = NamedDensity::Random;
    BasisSpec dephasing_basis = NamedBasis::Computational;
    std::size_t samples = 1;
};

struct OutputSpec {
    std::string path;
    TableFormat format = TableFormat::Csv;
};

struct ExperimentConfig {
    Experiment experiment = Experiment::Born;
    std::optional<std::uint64_t> seed;
    std::optional<OutputSpec> output;
    std::variant<BornParams, DecohereParams, WeakParams, EntropyParams> params;
    /// FNV-1a of the canonical (sorted, whitespace-free) document.
    std::uint64_t config_hash = 0;
};

/// Throws IoError when the file cannot be read, ConfigError otherwise.
ExperimentConfig load_config(const std::string& path);

/// `source` names the document in error messages.
ExperimentConfig parse_config(std::string_view text, std::string_view source = "<config>");

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace qmep
