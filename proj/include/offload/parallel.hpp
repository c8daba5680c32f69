#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace offload {

enum class Exec { kSerial, kParallel };

// out[i] = f(i) for i in [0, n). The serial path is the reference; the OpenMP
// path writes each slot independently, so results are identical. If several
// indices throw, the exception from the lowest index is rethrown.
template <class T, class F>
std::vector<T> map_indices(std::size_t n, F&& f, Exec exec) {
  std::vector<T> out(n);
  if (exec == Exec::kSerial) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(n);
  const long count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic, 4)
  for (long i = 0; i < count; ++i) {
    try {
      out[i] = f(static_cast<std::size_t>(i));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace offload
