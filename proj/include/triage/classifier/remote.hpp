#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <list>
#include <mutex>
#include <string>
#include <thread>

#include "triage/classifier/protocol.hpp"

namespace triage::classifier {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  // "host:port"; throws ConfigError.
  static Endpoint parse(const std::string& text);
  std::string to_string() const { return host + ":" + std::to_string(port); }
};

inline constexpr std::chrono::milliseconds kDefaultRemoteTimeout{200};

// Client side of the worker protocol. Keeps one connection open and
// reconnects on the next call after any failure. Not thread-safe: use one
// instance per pipeline worker thread.
class RemoteClassifier {
 public:
  explicit RemoteClassifier(Endpoint endpoint,
                            std::chrono::milliseconds timeout = kDefaultRemoteTimeout);
  ~RemoteClassifier();
  RemoteClassifier(const RemoteClassifier&) = delete;
  RemoteClassifier& operator=(const RemoteClassifier&) = delete;

  // Throws Timeout (deadline passed or endpoint unreachable), ProtocolError or
  // BadSimplex. latency_ms is the measured round trip.
  ClassifierOutput classify(const Clip& clip);
  ClassifierOutput classify(const protocol::Request& request);

  const Endpoint& endpoint() const { return endpoint_; }

 private:
  void connect_until(std::chrono::steady_clock::time_point deadline);
  void close();

  Endpoint endpoint_;
  std::chrono::milliseconds timeout_;
  int fd_ = -1;
};

inline ClassifierOutput remote_classify(const Clip& clip, RemoteClassifier& client) {
  return client.classify(clip);
}

using Responder = std::function<protocol::Response(const protocol::Request&)>;

// Always answers with the given probabilities.
Responder fixed_responder(std::array<float, kNumStatuses> probs, std::uint8_t flags = 0);

// Loopback TCP server speaking the worker protocol, used by tests and by the
// `triage worker` subcommand as a stand-in for a neural model process.
class ClassifierWorker {
 public:
  // port 0 picks a free port. Throws BindError.
  explicit ClassifierWorker(Responder responder, std::uint16_t port = 0,
                            const std::string& host = "127.0.0.1");
  ~ClassifierWorker();
  ClassifierWorker(const ClassifierWorker&) = delete;
  ClassifierWorker& operator=(const ClassifierWorker&) = delete;

  std::uint16_t port() const { return port_; }
  Endpoint endpoint() const { return {host_, port_}; }
  std::size_t requests_served() const { return served_.load(); }
  void stop();

 private:
  void accept_loop();
  void serve(int fd);

  Responder responder_;
  std::string host_;
  std::uint16_t port_ = 0;
  int listen_fd_ = -1;
  std::atomic<bool> stopping_{false};
  std::atomic<std::size_t> served_{0};
  std::mutex conn_mu_;
  std::list<int> conn_fds_;
  std::list<std::jthread> conn_threads_;
  std::jthread acceptor_;
};

}  // namespace triage::classifier
