#include "pose6d/parallel.hpp"

#include <algorithm>

namespace pose6d {

ThreadPool::ThreadPool(unsigned threads) : size_(std::max(1u, threads)) {
  for (unsigned i = 1; i < size_; ++i) workers_.emplace_back([this] { worker_loop(); });
}

ThreadPool::~ThreadPool() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  wake_.notify_all();
  for (auto& t : workers_) t.join();
}

void ThreadPool::worker_loop() {
  std::size_t seen = 0;
  for (;;) {
    std::unique_lock lock(mutex_);
    wake_.wait(lock, [&] { return stop_ || generation_ != seen; });
    if (stop_) return;
    seen = generation_;
    while (next_ < job_size_) {
      const std::size_t i = next_++;
      const auto* job = job_;
      lock.unlock();
      try {
        (*job)(i);
      } catch (...) {
        lock.lock();
        errors_[i] = std::current_exception();
        lock.unlock();
      }
      lock.lock();
      if (++finished_ == job_size_) done_.notify_all();
    }
  }
}

void ThreadPool::parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  if (size_ == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::unique_lock lock(mutex_);
  job_ = &fn;
  job_size_ = n;
  next_ = 0;
  finished_ = 0;
  errors_.assign(n, nullptr);
  ++generation_;
  wake_.notify_all();
  // The calling thread works too.
  while (next_ < job_size_) {
    const std::size_t i = next_++;
    lock.unlock();
    try {
      fn(i);
    } catch (...) {
      lock.lock();
      errors_[i] = std::current_exception();
      lock.unlock();
    }
    lock.lock();
    ++finished_;
  }
  done_.wait(lock, [&] { return finished_ == job_size_; });
  job_ = nullptr;
  job_size_ = 0;
  for (auto& e : errors_) {
    if (e) std::rethrow_exception(e);
  }
}

void run_indexed(ThreadPool* pool, std::size_t n, const std::function<void(std::size_t)>& fn) {
  if (pool) {
    pool->parallel_for(n, fn);
  } else {
    for (std::size_t i = 0; i < n; ++i) fn(i);
  }
}

}  // namespace pose6d
