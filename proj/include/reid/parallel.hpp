#pragma once

#include <cstddef>

namespace reid {

// Execution policy for the heavy loops. Parallel kernels must be written
// so that both policies produce byte-identical results; the serial path is
// the reference the tests compare against.
enum class Exec { serial, parallel };

// Worker count for Exec::parallel: the REID_THREADS environment variable
// when set, otherwise OpenMP's default. Re-read on every call so a
// process can change it between runs.
int thread_count();

namespace detail {
void run_parallel(std::size_t count, void (*fn)(std::size_t, void*), void* ctx);
}

// Apply body to every index in [0, count). With Exec::parallel the bodies
// for distinct indices may run concurrently, so they must only touch
// disjoint state; iteration order is unspecified but the work done per
// index is identical to the serial path.
template <class F>
void for_each_index(Exec exec, std::size_t count, F&& body) {
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  auto thunk = [](std::size_t i, void* ctx) { (*static_cast<F*>(ctx))(i); };
  detail::run_parallel(count, thunk, &body);
}

}  // namespace reid
