#pragma once

// Random instance generators shared by the unit tests and the acceptance run.

#include <random>
#include <vector>

#include "opramsey/linalg.hpp"
#include "opramsey/opspace.hpp"

namespace opramsey::testing {

inline ComplexMatrix random_isometry(int rows, int cols, std::mt19937_64& rng) {
  Eigen::HouseholderQR<ComplexMatrix> qr(random_gaussian(rows, cols, rng));
  return qr.householderQ() * ComplexMatrix::Identity(rows, cols);
}

/// eta_j(x) = sum_i V_ji* x_i V_ji with [V_j1; ...; V_jd] an isometry: unital and CP.
inline BlockLinearMap random_ucp(int d, int n, int q, std::mt19937_64& rng) {
  const SpaceDescriptor dom = SpaceDescriptor::ell_inf(d, q, q, Category::Osy);
  const SpaceDescriptor cod = SpaceDescriptor::ell_inf(n, q, q, Category::Osy);
  std::vector<ComplexMatrix> v;
  for (int j = 0; j < n; ++j) v.push_back(random_isometry(d * q, q, rng));
  return BlockLinearMap::from_function(dom, cod, [&](const std::vector<ComplexMatrix>& x) {
    std::vector<ComplexMatrix> y;
    for (int j = 0; j < n; ++j) {
      ComplexMatrix acc = ComplexMatrix::Zero(q, q);
      for (int i = 0; i < d; ++i) {
        const ComplexMatrix vi = v[j].middleRows(i * q, q);
        acc += vi.adjoint() * x[i] * vi;
      }
      y.push_back(acc);
    }
    return y;
  });
}

/// Unital but not CP when q > 1: the last output block is transposed.
inline BlockLinearMap random_unital_non_cp(int d, int n, int q, std::mt19937_64& rng) {
  BlockLinearMap f = random_ucp(d, n, q, rng);
  const int k = q * q;
  const int o = f.codomain.offset(n - 1);
  ComplexMatrix last = f.action.middleRows(o, k);
  for (int r = 0; r < q; ++r)
    for (int c = 0; c < q; ++c) f.action.row(o + r * q + c) = last.row(c * q + r);
  return f;
}

/// A CP map that is not unital: a ucp map scaled by 1.25.
inline BlockLinearMap random_cp_non_unital(int d, int n, int q, std::mt19937_64& rng) {
  BlockLinearMap f = random_ucp(d, n, q, rng);
  f.action *= 1.25;
  return f;
}

inline BlockLinearMap random_map(const SpaceDescriptor& d, const SpaceDescriptor& c, std::mt19937_64& rng) {
  return {d, c, random_gaussian(c.dim(), d.dim(), rng)};
}

/// f multiplied by a scalar.
inline BlockLinearMap scaled(BlockLinearMap f, double factor) {
  f.action *= factor;
  return f;
}

}  // namespace opramsey::testing
