#pragma once

// Experiment registry: turns a validated configuration into a result table.
//
// Random draws come from CounterRng(seed, stream) with stream ids
//   born trial t           (1 << 32) | t
//   decohere setup         (2 << 32)
//   weak setup             (3 << 32)
//   weak trajectory i      i
//   entropy sample s       (4 << 32) | s
// so tables do not depend on the thread count.

#include <cstdint>
#include <string>

#include "qmep/config.hpp"
#include "qmep/table.hpp"

namespace qmep {

struct RunOptions {
    /// Worker threads for independent work items; 0 uses all cores.
    unsigned threads = 1;
};

/// Module errors are rethrown with the experiment name prefixed, keeping
/// their type. A numerical invariant checked by the harness itself (norm
/// conservation, probability sums, entropy bounds) raises InvariantError.
ResultTable run(const ExperimentConfig& config, const RunOptions& options = {});

inline constexpr std::uint64_t stream_id(std::uint64_t purpose, std::uint64_t index) {
    return (purpose << 32) | index;
}

/// Tool version string compiled into the library.
std::string tool_version();

}  // namespace qmep
