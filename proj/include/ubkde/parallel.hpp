#pragma once

#include <cstddef>
#include <exception>
#include <limits>

#include <omp.h>

namespace ubkde {

/// Runs body(i) for i in [0, n) across OpenMP threads. If any iteration
/// throws, the exception from the lowest index is rethrown after the loop,
/// so error reporting does not depend on scheduling.
template <class Body>
void parallel_for(std::size_t n, Body&& body, int threads = 0) {
  std::exception_ptr first_error;
  std::size_t first_index = std::numeric_limits<std::size_t>::max();
  const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 64) num_threads(threads > 0 ? threads : omp_get_max_threads())
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(ubkde_parallel_for_error)
      {
        if (static_cast<std::size_t>(i) < first_index) {
          first_index = static_cast<std::size_t>(i);
          first_error = std::current_exception();
        }
      }
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace ubkde
