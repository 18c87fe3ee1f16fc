#include "lcp/parallel.hpp"

#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lcp {

namespace {

Exec initial_exec() {
  const char* v = std::getenv("LCP_SERIAL");
  if (v != nullptr && v[0] == '1') {
    return Exec::serial;
  }
  return Exec::parallel;
}

Exec g_exec = initial_exec();

}  // namespace

Exec default_exec() { return g_exec; }

void set_default_exec(Exec mode) { g_exec = mode; }

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_max_threads(int n) {
#ifdef _OPENMP
  if (n > 0) {
    omp_set_num_threads(n);
  }
#else
  (void)n;
#endif
}

}  // namespace lcp
