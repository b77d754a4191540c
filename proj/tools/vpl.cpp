#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "runners.hpp"

int main(int argc, char** argv) {
#ifdef _OPENMP
  // VPL_THREADS caps worker parallelism; unset means library default.
  if (const char* env = std::getenv("VPL_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) omp_set_num_threads(cap);
  }
#endif
  return vpl::cli::parse_and_run(argc, argv);
}
