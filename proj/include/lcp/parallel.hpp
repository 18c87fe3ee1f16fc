#pragma once

#include <cstdint>

namespace lcp {

// Execution mode for the data-parallel kernels. Parallel kernels partition
// independent output elements across threads; the per-element arithmetic and
// its accumulation order are identical to the serial path, so results are
// bit-identical for any thread count.
enum class Exec { serial, parallel };

// Process-wide default. LCP_SERIAL=1 in the environment forces serial.
Exec default_exec();
void set_default_exec(Exec mode);

int max_threads();
void set_max_threads(int n);

template <class F>
void parallel_for(std::int64_t n, Exec mode, F&& body) {
  if (mode == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      body(i);
    }
  } else {
    for (std::int64_t i = 0; i < n; ++i) {
      body(i);
    }
  }
}

template <class F>
void parallel_for(std::int64_t n, F&& body) {
  parallel_for(n, default_exec(), body);
}

}  // namespace lcp
