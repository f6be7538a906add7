#pragma once

#include <cstddef>
#include <exception>

namespace sdpsa {

/// Independent work items run either in a plain loop or across OpenMP threads.
/// The serial path is the reference the parallel one is checked against.
enum class Execution { serial, parallel };

template <class Body>
void for_each_index(std::size_t count, Execution exec, Body&& body) {
  if (exec == Execution::serial) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  const auto signed_count = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < signed_count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(sdpsa_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

int worker_count();

}  // namespace sdpsa
