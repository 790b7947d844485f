#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "triage/pipeline/record.hpp"

namespace triage::pipeline {

enum class Topic { Results = 0, Alarms = 1, Metrics = 2, Control = 3 };
inline constexpr std::size_t kNumTopics = 4;

std::string to_string(Topic t);
Topic topic_from_string(const std::string& s);

enum class MessageKind { Record, Terminal, Text };

struct BusMessage {
  Topic topic = Topic::Results;
  std::uint64_t seq = 0;  // per-topic, assigned by the bus
  MessageKind kind = MessageKind::Record;
  ResultRecord record;
  std::string text;
};

enum class SubscribeFrom { Latest, All };

// One subscriber's bounded inbox. When the publisher finds it full the
// subscription is disconnected instead of blocking the publisher.
class Subscription {
 public:
  Subscription(Topic topic, std::size_t capacity) : topic_(topic), capacity_(capacity) {}

  // Next message, or nullopt on timeout / disconnect / end of stream.
  std::optional<BusMessage> next(std::chrono::milliseconds timeout);
  std::vector<BusMessage> drain();

  bool disconnected() const;
  // True once the bus closed and every queued message was consumed.
  bool finished() const;
  void cancel();

  Topic topic() const { return topic_; }

 private:
  friend class Bus;
  enum class Offer { Delivered, Overflow, Dead };
  // Overflow disconnects the subscription; Dead means it was already gone.
  Offer offer(const BusMessage& m);
  void close();

  Topic topic_;
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<BusMessage> inbox_;
  bool disconnected_ = false;
  bool closed_ = false;
};

// In-process topic bus. Per topic, messages reach every subscriber in
// publish order. Publishers never block on subscribers.
class Bus {
 public:
  Bus(std::size_t history_capacity, std::size_t subscriber_capacity);

  // False once the bus is closed (nothing is delivered).
  bool publish(Topic topic, BusMessage message);
  bool publish(Topic topic, const ResultRecord& record);

  // `All` replays the retained history (bounded by history capacity and the
  // subscriber inbox) before live messages. capacity 0 uses the default.
  std::shared_ptr<Subscription> subscribe(Topic topic, SubscribeFrom from,
                                          std::size_t capacity = 0);

  // Publishes a terminal marker on every topic, then rejects further publishes.
  void close();
  bool closed() const { return closed_.load(); }

  std::uint64_t slow_consumer_events() const { return slow_consumers_.load(); }
  std::uint64_t published(Topic topic) const;

 private:
  struct Channel {
    std::mutex mu;
    std::uint64_t next_seq = 0;
    bool closed = false;
    std::deque<BusMessage> history;
    std::vector<std::shared_ptr<Subscription>> subscribers;
  };

  bool publish_locked(Channel& ch, BusMessage message);

  std::size_t history_capacity_;
  std::size_t subscriber_capacity_;
  mutable std::array<Channel, kNumTopics> channels_;
  std::atomic<bool> closed_{false};
  std::mutex close_mu_;
  std::atomic<std::uint64_t> slow_consumers_{0};
};

}  // namespace triage::pipeline
