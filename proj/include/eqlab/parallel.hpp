#pragma once

#include <cstddef>
#include <exception>

namespace eqlab {

/// Serial is the reference path kept for testing; Parallel runs the same
/// per-item kernel under OpenMP and must produce identical bits.
enum class Execution { Serial, Parallel };

/// Calls fn(k) for k in [0, n). Each call must write only its own slot of the
/// output, so both paths give the same result. Under OpenMP the first
/// exception thrown by any iteration is rethrown after the loop.
template <class Fn>
void for_each_index(std::size_t n, Execution exec, Fn&& fn) {
  if (exec == Execution::Serial) {
    for (std::size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  std::exception_ptr failure;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(static)
  for (long long k = 0; k < count; ++k) {
    try {
      fn(static_cast<std::size_t>(k));
    } catch (...) {
#pragma omp critical(eqlab_for_each_index_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace eqlab
