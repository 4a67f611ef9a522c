#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace effscreen {

// Run fn(rep) for rep in [0, n_reps) across `workers` threads. Work is split
// into contiguous blocks; callers must write results into slots indexed by rep
// so output is identical for any worker count.
inline void parallel_reps(long n_reps, int workers, const std::function<void(long)>& fn) {
  if (workers < 1) workers = 1;
  if (workers > n_reps) workers = static_cast<int>(n_reps > 0 ? n_reps : 1);
  if (workers == 1) {
    for (long r = 0; r < n_reps; ++r) fn(r);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const long chunk = (n_reps + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const long lo = w * chunk;
    const long hi = std::min(n_reps, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (long r = lo; r < hi; ++r) fn(r);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace effscreen
