#pragma once

// Node-parallel loops. Thread count comes from BETTI_HEIGHTS_THREADS when set;
// exceptions thrown by the body are rethrown on the calling thread (the one
// from the lowest index wins, so failures are deterministic).

#include <cstddef>
#include <cstdlib>
#include <exception>
#include <vector>

#ifdef BETTI_HEIGHTS_HAVE_OPENMP
#include <omp.h>
#endif

namespace bh {

inline int worker_threads() {
  if (const char* env = std::getenv("BETTI_HEIGHTS_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
#ifdef BETTI_HEIGHTS_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

template <class F>
void parallel_for(std::size_t n, F&& body) {
  std::exception_ptr first;
  std::size_t first_index = n;
#ifdef BETTI_HEIGHTS_HAVE_OPENMP
  const int threads = worker_threads();
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
#endif
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#ifdef BETTI_HEIGHTS_HAVE_OPENMP
#pragma omp critical(bh_parallel_error)
#endif
      {
        if (static_cast<std::size_t>(i) < first_index) {
          first_index = static_cast<std::size_t>(i);
          first = std::current_exception();
        }
      }
    }
  }
  if (first) std::rethrow_exception(first);
}

}  // namespace bh
