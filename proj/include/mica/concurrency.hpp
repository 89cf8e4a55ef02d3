#ifndef MICA_CONCURRENCY_HPP
#define MICA_CONCURRENCY_HPP

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace mica {

/// Blocking FIFO with a fixed capacity. close() wakes everyone; pop() then
/// drains what is left and returns nullopt once empty.
template <class T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity == 0 ? 1 : capacity) {}

  bool push(T value) {
    std::unique_lock lk(mu_);
    not_full_.wait(lk, [&] { return closed_ || items_.size() < capacity_; });
    if (closed_) return false;
    items_.push_back(std::move(value));
    not_empty_.notify_one();
    return true;
  }

  std::optional<T> pop() {
    std::unique_lock lk(mu_);
    not_empty_.wait(lk, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    T v = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return v;
  }

  void close() {
    std::lock_guard lk(mu_);
    closed_ = true;
    not_full_.notify_all();
    not_empty_.notify_all();
  }

 private:
  std::size_t capacity_;
  std::mutex mu_;
  std::condition_variable not_full_, not_empty_;
  std::deque<T> items_;
  bool closed_ = false;
};

/// Hands completed items to a single consumer, either in key order (with at
/// most `window` keys outstanding ahead of the next one due) or in arrival
/// order.
template <class T>
class ReorderChannel {
 public:
  ReorderChannel(bool ordered, std::size_t window, std::size_t producers)
      : ordered_(ordered), window_(window == 0 ? 1 : window), producers_(producers) {}

  bool put(std::uint64_t key, T value) {
    std::unique_lock lk(mu_);
    can_put_.wait(lk, [&] { return aborted_ || !ordered_ || key < next_ + window_; });
    if (aborted_) return false;
    pending_.emplace(key, std::move(value));
    arrival_.push_back(key);
    can_take_.notify_all();
    return true;
  }

  std::optional<T> take() {
    std::unique_lock lk(mu_);
    can_take_.wait(lk, [&] { return aborted_ || ready() || producers_ == 0; });
    if (aborted_ || !ready()) return std::nullopt;
    std::uint64_t key;
    if (ordered_) {
      key = next_++;
      std::erase(arrival_, key);
    } else {
      key = arrival_.front();
      arrival_.pop_front();
    }
    auto node = pending_.extract(key);
    can_put_.notify_all();
    return std::move(node.mapped());
  }

  void producer_done() {
    std::lock_guard lk(mu_);
    if (producers_ > 0) --producers_;
    can_take_.notify_all();
  }

  void abort() {
    std::lock_guard lk(mu_);
    aborted_ = true;
    can_put_.notify_all();
    can_take_.notify_all();
  }

 private:
  bool ready() const { return ordered_ ? pending_.count(next_) != 0 : !pending_.empty(); }

  bool ordered_;
  std::size_t window_;
  std::size_t producers_;
  std::mutex mu_;
  std::condition_variable can_put_, can_take_;
  std::map<std::uint64_t, T> pending_;
  std::deque<std::uint64_t> arrival_;
  std::uint64_t next_ = 0;
  bool aborted_ = false;
};

/// Fixed set of threads that all run the same task per round.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t workers) {
    if (workers == 0) workers = 1;
    threads_.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) threads_.emplace_back([this, w] { loop(w); });
  }

  ~WorkerPool() {
    {
      std::lock_guard lk(mu_);
      stopping_ = true;
    }
    start_.notify_all();
    for (auto& t : threads_) t.join();
  }

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  std::size_t size() const { return threads_.size(); }

  /// Run task(worker_index) on every worker and wait. The first exception
  /// thrown by any worker is rethrown here.
  void run(const std::function<void(std::size_t)>& task) {
    std::unique_lock lk(mu_);
    task_ = &task;
    error_ = nullptr;
    running_ = threads_.size();
    ++generation_;
    start_.notify_all();
    done_.wait(lk, [&] { return running_ == 0; });
    task_ = nullptr;
    if (error_) std::rethrow_exception(error_);
  }

 private:
  void loop(std::size_t index) {
    std::uint64_t seen = 0;
    for (;;) {
      const std::function<void(std::size_t)>* task;
      {
        std::unique_lock lk(mu_);
        start_.wait(lk, [&] { return stopping_ || generation_ != seen; });
        if (stopping_) return;
        seen = generation_;
        task = task_;
      }
      std::exception_ptr err;
      try {
        (*task)(index);
      } catch (...) {
        err = std::current_exception();
      }
      std::lock_guard lk(mu_);
      if (err && !error_) error_ = err;
      if (--running_ == 0) done_.notify_all();
    }
  }

  std::vector<std::thread> threads_;
  std::mutex mu_;
  std::condition_variable start_, done_;
  const std::function<void(std::size_t)>* task_ = nullptr;
  std::exception_ptr error_;
  std::size_t running_ = 0;
  std::uint64_t generation_ = 0;
  bool stopping_ = false;
};

}  // namespace mica

#endif  // MICA_CONCURRENCY_HPP
