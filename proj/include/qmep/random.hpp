#pragma once

// Counter-based random numbers (Philox4x32-10) and random quantum objects.
//
// A generator is fully determined by (seed, stream). Independent work items
// (trajectories, trials) each take their own stream id, so results do not
// depend on how the items are scheduled across threads.

#include <array>
#include <cstdint>

#include "qmep/density.hpp"
#include "qmep/linalg.hpp"

namespace qmep {

/// Philox4x32 with 10 rounds.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next_u64();
    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    /// Standard normal (Box-Muller, cosine branch).
    double normal();

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int available_ = 0;
};

/// Complex Gaussian matrix with i.i.d. N(0,1/2) + i N(0,1/2) entries.
Matrix ginibre(CounterRng& rng, Index rows, Index cols);

/// Haar-random unitary (QR of a Ginibre matrix with phase fixing).
Operator random_unitary(CounterRng& rng, Index dim);

Operator random_hermitian(CounterRng& rng, Index dim);

StateVector random_state(CounterRng& rng, Index dim);

/// G G^dagger / Tr(G G^dagger) for a square Ginibre G (full rank almost surely).
DensityOperator random_density(CounterRng& rng, Index dim);

}  // namespace qmep
