#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "stochlab/errors.hpp"

namespace stochlab {

inline constexpr long kChunkPaths = 4096;

template <std::size_t k, class F>
std::array<Estimate, k> run_paths(const RadialSDEConfig& config, double r0, double K, long n, F&& f,
                                  std::uint64_t first) {
  if (n <= 0) throw PreconditionError("number of paths must be positive");
  const long chunks = (n + kChunkPaths - 1) / kChunkPaths;
  std::vector<std::array<Estimate, k>> partial(static_cast<std::size_t>(chunks));
  std::atomic<long> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    try {
      std::array<std::vector<double>, k> samples;
      for (long c = next++; c < chunks; c = next++) {
        const long begin = c * kChunkPaths;
        const long end = std::min(n, begin + kChunkPaths);
        for (auto& s : samples) s.clear();
        for (long i = begin; i < end; ++i) {
          const std::array<double, k> v = f(simulate_radial_path(config, r0, K, first + static_cast<std::uint64_t>(i)));
          for (std::size_t j = 0; j < k; ++j) samples[j].push_back(v[j]);
        }
        for (std::size_t j = 0; j < k; ++j)
          partial[static_cast<std::size_t>(c)][j] =
              Estimate::from_samples(samples[j], first + static_cast<std::uint64_t>(begin));
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = chunks;
    }
  };

  const long threads = std::min<long>(chunks, std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (long t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  std::array<Estimate, k> total = partial.front();
  for (std::size_t c = 1; c < partial.size(); ++c)
    for (std::size_t j = 0; j < k; ++j) total[j] = merge(total[j], partial[c][j]);
  return total;
}

}  // namespace stochlab
