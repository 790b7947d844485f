#include "triage/pipeline/bus.hpp"

#include <algorithm>

#include "triage/core/log.hpp"
#include "triage/error.hpp"

namespace triage::pipeline {

std::string to_string(Topic t) {
  switch (t) {
    case Topic::Results: return "results";
    case Topic::Alarms: return "alarms";
    case Topic::Metrics: return "metrics";
    case Topic::Control: return "control";
  }
  return "results";
}

Topic topic_from_string(const std::string& s) {
  for (std::size_t i = 0; i < kNumTopics; ++i) {
    if (to_string(static_cast<Topic>(i)) == s) return static_cast<Topic>(i);
  }
  throw ValidationError("unknown topic '" + s + "'");
}

std::optional<BusMessage> Subscription::next(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return !inbox_.empty() || disconnected_ || closed_; });
  if (inbox_.empty()) return std::nullopt;
  BusMessage m = std::move(inbox_.front());
  inbox_.pop_front();
  return m;
}

std::vector<BusMessage> Subscription::drain() {
  std::lock_guard lock(mu_);
  std::vector<BusMessage> out(std::make_move_iterator(inbox_.begin()),
                              std::make_move_iterator(inbox_.end()));
  inbox_.clear();
  return out;
}

bool Subscription::disconnected() const {
  std::lock_guard lock(mu_);
  return disconnected_;
}

bool Subscription::finished() const {
  std::lock_guard lock(mu_);
  return (closed_ || disconnected_) && inbox_.empty();
}

void Subscription::cancel() {
  std::lock_guard lock(mu_);
  disconnected_ = true;
  cv_.notify_all();
}

Subscription::Offer Subscription::offer(const BusMessage& m) {
  std::lock_guard lock(mu_);
  if (disconnected_) return Offer::Dead;
  if (inbox_.size() >= capacity_) {
    disconnected_ = true;
    inbox_.clear();
    cv_.notify_all();
    return Offer::Overflow;
  }
  inbox_.push_back(m);
  cv_.notify_one();
  return Offer::Delivered;
}

void Subscription::close() {
  std::lock_guard lock(mu_);
  closed_ = true;
  cv_.notify_all();
}

Bus::Bus(std::size_t history_capacity, std::size_t subscriber_capacity)
    : history_capacity_(std::max<std::size_t>(1, history_capacity)),
      subscriber_capacity_(std::max<std::size_t>(1, subscriber_capacity)) {}

bool Bus::publish_locked(Channel& ch, BusMessage message) {
  message.seq = ch.next_seq++;
  ch.history.push_back(message);
  while (ch.history.size() > history_capacity_) ch.history.pop_front();
  std::erase_if(ch.subscribers, [&](const std::shared_ptr<Subscription>& s) {
    switch (s->offer(message)) {
      case Subscription::Offer::Delivered: return false;
      case Subscription::Offer::Dead: return true;
      case Subscription::Offer::Overflow:
        ++slow_consumers_;
        log::warn("bus: slow consumer on '" + to_string(message.topic) + "' disconnected");
        return true;
    }
    return true;
  });
  return true;
}

bool Bus::publish(Topic topic, BusMessage message) {
  Channel& ch = channels_[static_cast<std::size_t>(topic)];
  std::lock_guard lock(ch.mu);
  if (ch.closed) return false;
  message.topic = topic;
  return publish_locked(ch, std::move(message));
}

bool Bus::publish(Topic topic, const ResultRecord& record) {
  BusMessage m;
  m.kind = MessageKind::Record;
  m.record = record;
  return publish(topic, std::move(m));
}

std::shared_ptr<Subscription> Bus::subscribe(Topic topic, SubscribeFrom from,
                                             std::size_t capacity) {
  auto sub = std::make_shared<Subscription>(topic, capacity == 0 ? subscriber_capacity_ : capacity);
  Channel& ch = channels_[static_cast<std::size_t>(topic)];
  std::lock_guard lock(ch.mu);
  if (from == SubscribeFrom::All) {
    const std::size_t n = std::min(ch.history.size(), sub->capacity_);
    for (auto it = ch.history.end() - static_cast<std::ptrdiff_t>(n); it != ch.history.end(); ++it) {
      sub->offer(*it);
    }
  }
  if (ch.closed) {
    sub->close();
  } else {
    ch.subscribers.push_back(sub);
  }
  return sub;
}

void Bus::close() {
  std::lock_guard close_lock(close_mu_);
  if (closed_) return;
  for (std::size_t i = 0; i < kNumTopics; ++i) {
    Channel& ch = channels_[i];
    std::lock_guard lock(ch.mu);
    BusMessage end;
    end.topic = static_cast<Topic>(i);
    end.kind = MessageKind::Terminal;
    publish_locked(ch, std::move(end));
    ch.closed = true;
    for (auto& s : ch.subscribers) s->close();
    ch.subscribers.clear();
  }
  closed_ = true;
}

std::uint64_t Bus::published(Topic topic) const {
  Channel& ch = channels_[static_cast<std::size_t>(topic)];
  std::lock_guard lock(ch.mu);
  return ch.next_seq;
}

}  // namespace triage::pipeline
