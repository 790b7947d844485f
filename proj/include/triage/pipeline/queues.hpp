#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>

#include "triage/pipeline/config.hpp"

namespace triage::pipeline {

struct AdmitOutcome {
  bool admitted = false;
  std::optional<std::int64_t> dropped;  // index evicted to make room (drop_oldest)
  bool would_block = false;             // block policy with a full queue
};

// Admission rule over a queue of frame indices, without waiting:
//   drop_oldest on full -> evict the oldest, admit the new frame
//   block on full       -> nothing changes, the caller must wait
AdmitOutcome admit_frame(std::deque<std::int64_t>& queue, std::size_t capacity,
                         DropPolicy policy, std::int64_t frame_index);

struct QueueCounters {
  std::uint64_t in = 0;         // admitted
  std::uint64_t dropped = 0;    // evicted before processing
  std::uint64_t processed = 0;  // popped by the consumer
  std::uint64_t queued = 0;     // currently waiting
};

// Bounded multi-producer queue. Counters are updated under the queue lock so
// in == processed + dropped + queued holds in every snapshot.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

  // Waits for space. Returns false if the queue closed first.
  bool push(T item) {
    std::unique_lock lock(mu_);
    not_full_.wait(lock, [&] { return items_.size() < capacity_ || closed_; });
    if (closed_) return false;
    items_.push_back(std::move(item));
    ++counters_.in;
    not_empty_.notify_one();
    return true;
  }

  // Never waits: on a full queue the oldest item is evicted and returned.
  std::optional<T> push_evicting(T item) {
    std::lock_guard lock(mu_);
    std::optional<T> evicted;
    if (closed_) return evicted;
    if (items_.size() >= capacity_) {
      evicted = std::move(items_.front());
      items_.pop_front();
      ++counters_.dropped;
    }
    items_.push_back(std::move(item));
    ++counters_.in;
    not_empty_.notify_one();
    return evicted;
  }

  // Waits for an item; nullopt once closed and empty.
  std::optional<T> pop() {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return !items_.empty() || closed_; });
    if (items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    ++counters_.processed;
    not_full_.notify_one();
    return item;
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

  QueueCounters counters() const {
    std::lock_guard lock(mu_);
    QueueCounters c = counters_;
    c.queued = items_.size();
    return c;
  }

  std::size_t capacity() const { return capacity_; }

 private:
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
  std::deque<T> items_;
  QueueCounters counters_;
  bool closed_ = false;
};

}  // namespace triage::pipeline
