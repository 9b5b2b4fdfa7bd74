#include "reid/parallel.hpp"

#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace reid {

int thread_count() {
#ifdef _OPENMP
  int n = omp_get_max_threads();
#else
  int n = 1;
#endif
  if (const char* env = std::getenv("REID_THREADS")) {
    long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = static_cast<int>(cap);
  }
  return n;
}

namespace detail {

void run_parallel(std::size_t count, void (*fn)(std::size_t, void*), void* ctx) {
#ifdef _OPENMP
  const int threads = thread_count();
  const long long end = static_cast<long long>(count);
#pragma omp parallel for schedule(static) num_threads(threads)
  for (long long i = 0; i < end; ++i) {
    fn(static_cast<std::size_t>(i), ctx);
  }
#else
  for (std::size_t i = 0; i < count; ++i) fn(i, ctx);
#endif
}

}  // namespace detail
}  // namespace reid
