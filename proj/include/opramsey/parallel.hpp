#pragma once

#include <cstdint>

namespace opramsey {

/// Worker count for the OpenMP kernels; OPRAMSEY_THREADS caps it.
int max_threads();

/// Deterministic child seed for task `index` of a run seeded with `seed`.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace opramsey
