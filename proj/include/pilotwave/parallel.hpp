#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace pilotwave {

/// Run body(begin, end) over contiguous chunks of [0, count) on `workers`
/// threads. The partition does not affect results when body writes only
/// into its own index range.
template <class Body>
void parallel_chunks(std::size_t count, int workers, Body body) {
  const std::size_t n = std::max<std::size_t>(1, std::min<std::size_t>(count, std::max(1, workers)));
  if (n <= 1) {
    body(std::size_t{0}, count);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(n);
  const std::size_t chunk = (count + n - 1) / n;
  for (std::size_t w = 0; w < n; ++w) {
    const std::size_t begin = std::min(count, w * chunk);
    const std::size_t end = std::min(count, begin + chunk);
    threads.emplace_back([&, w, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace pilotwave
