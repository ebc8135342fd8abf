#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace monoweight {

/// out[i] = fn(i) for i < count, computed by `workers` threads pulling
/// indices from a shared counter. Results are stored by index, so the output
/// never depends on scheduling. The first exception is rethrown.
template <class R>
std::vector<R> parallel_map(std::size_t count, std::size_t workers, const std::function<R(std::size_t)>& fn) {
  std::vector<R> out(count);
  if (count == 0) return out;
  workers = std::clamp<std::size_t>(workers, 1, count);
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          out[i] = fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace monoweight
