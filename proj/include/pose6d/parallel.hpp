#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace pose6d {

/// Fixed-size worker pool. parallel_for hands out indices dynamically; the
/// callee must write results into per-index slots so output never depends
/// on scheduling. A pool of size 1 runs everything on the calling thread.
class ThreadPool {
 public:
  explicit ThreadPool(unsigned threads = 1);
  ~ThreadPool();
  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  unsigned size() const { return size_; }

  /// Runs fn(i) for i in [0, n). Rethrows the first exception (lowest index)
  /// after all work finished.
  void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

 private:
  void worker_loop();

  unsigned size_;
  std::vector<std::thread> workers_;
  std::mutex mutex_;
  std::condition_variable wake_, done_;
  const std::function<void(std::size_t)>* job_ = nullptr;
  std::size_t job_size_ = 0, next_ = 0, finished_ = 0;
  std::size_t generation_ = 0;
  bool stop_ = false;
  std::vector<std::exception_ptr> errors_;
};

/// Runs fn(i) for i in [0, n) on `pool` or inline when pool is null.
void run_indexed(ThreadPool* pool, std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace pose6d
