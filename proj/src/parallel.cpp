#include "opramsey/parallel.hpp"

#include <cstdlib>
#include <string>

#ifdef OPRAMSEY_HAVE_OPENMP
#include <omp.h>
#endif

namespace opramsey {

int max_threads() {
  int n = 1;
#ifdef OPRAMSEY_HAVE_OPENMP
  n = omp_get_max_threads();
#endif
  if (const char* cap = std::getenv("OPRAMSEY_THREADS")) {
    try {
      const int c = std::stoi(cap);
      if (c >= 1 && c < n) n = c;
    } catch (...) {
    }
  }
  return n;
}

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 over (seed, index)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace opramsey
