#pragma once

// Data-parallel inner loops. Every OpenMP kernel has a serial twin used as the
// test reference and as the benchmark baseline.

#include <cstdint>
#include <vector>

#include "opramsey/linalg.hpp"
#include "opramsey/sdp.hpp"

namespace opramsey::kernels {

/// Constraint terms regrouped by block, ready for the Schur complement loops.
struct CompiledConstraints {
  struct Term {
    int row;
    int col;
    Complex value;
  };
  int num_blocks = 0;
  // terms[i][b]: nonzeros of constraint i on block b
  std::vector<std::vector<std::vector<Term>>> terms;
};

CompiledConstraints compile(const SdpProblem& p);

/// M_ij = Re tr(A_i X A_j S^{-1}), the HKM Schur complement.
RealMatrix schur_serial(const CompiledConstraints& c, const std::vector<ComplexMatrix>& x,
                        const std::vector<ComplexMatrix>& s_inv);
RealMatrix schur_parallel(const CompiledConstraints& c, const std::vector<ComplexMatrix>& x,
                          const std::vector<ComplexMatrix>& s_inv);

/// v_i = Re tr(A_i Z) for arbitrary per-block Z.
RealVector pair_serial(const CompiledConstraints& c, const std::vector<ComplexMatrix>& z);
RealVector pair_parallel(const CompiledConstraints& c, const std::vector<ComplexMatrix>& z);

/// Number of rigid surjections n -> k by explicit enumeration.
std::uint64_t count_epi_serial(int n, int k);
std::uint64_t count_epi_parallel(int n, int k);

}  // namespace opramsey::kernels
