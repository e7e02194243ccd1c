#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace modality {

//! Runs fn(0..n_tasks-1) on up to `threads` workers. Tasks must write to
//! disjoint slots; results are then independent of the schedule.
inline void parallel_for(int n_tasks, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n_tasks <= 1) {
    for (int i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  const int workers = std::min(threads, n_tasks);
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n_tasks) return;
        fn(i);
      }
    });
  for (auto& t : pool) t.join();
}

}  // namespace modality
