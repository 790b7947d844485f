#include "triage/classifier/remote.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "triage/error.hpp"

namespace triage::classifier {
namespace {

using Clock = std::chrono::steady_clock;

int remaining_ms(Clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
  return static_cast<int>(std::max<long long>(0, left.count()));
}

// Waits for `events` on fd until the deadline; throws Timeout.
void wait_for(int fd, short events, Clock::time_point deadline) {
  while (true) {
    pollfd p{fd, events, 0};
    const int rc = ::poll(&p, 1, remaining_ms(deadline));
    if (rc > 0) return;
    if (rc == 0) throw Timeout("deadline exceeded");
    if (errno != EINTR) throw Timeout(std::string("poll: ") + std::strerror(errno));
  }
}

void send_all(int fd, std::span<const std::uint8_t> data, Clock::time_point deadline) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    wait_for(fd, POLLOUT, deadline);
    const ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EAGAIN || errno == EINTR) continue;
      throw Timeout(std::string("send: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }
}

void recv_all(int fd, std::span<std::uint8_t> out, Clock::time_point deadline) {
  std::size_t got = 0;
  while (got < out.size()) {
    wait_for(fd, POLLIN, deadline);
    const ssize_t n = ::recv(fd, out.data() + got, out.size() - got, 0);
    if (n == 0) throw ProtocolError("connection closed mid-message");
    if (n < 0) {
      if (errno == EAGAIN || errno == EINTR) continue;
      throw Timeout(std::string("recv: ") + std::strerror(errno));
    }
    got += static_cast<std::size_t>(n);
  }
}

// Blocking helpers for the worker side.
bool read_exact(int fd, std::uint8_t* out, std::size_t len) {
  std::size_t got = 0;
  while (got < len) {
    const ssize_t n = ::recv(fd, out + got, len - got, 0);
    if (n == 0) return false;
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    got += static_cast<std::size_t>(n);
  }
  return true;
}

bool write_exact(int fd, const std::uint8_t* data, std::size_t len) {
  std::size_t sent = 0;
  while (sent < len) {
    const ssize_t n = ::send(fd, data + sent, len - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

sockaddr_in resolve(const Endpoint& ep) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(ep.port);
  const std::string host = ep.host == "localhost" ? "127.0.0.1" : ep.host;
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr) {
      throw Timeout("cannot resolve host '" + ep.host + "'");
    }
    addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
    ::freeaddrinfo(res);
  }
  return addr;
}

}  // namespace

Endpoint Endpoint::parse(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw ConfigError("endpoint must be host:port, got '" + text + "'");
  }
  Endpoint ep;
  ep.host = text.substr(0, colon);
  try {
    const int port = std::stoi(text.substr(colon + 1));
    if (port < 0 || port > 65535) throw std::out_of_range("port");
    ep.port = static_cast<std::uint16_t>(port);
  } catch (const std::exception&) {
    throw ConfigError("bad port in endpoint '" + text + "'");
  }
  return ep;
}

RemoteClassifier::RemoteClassifier(Endpoint endpoint, std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), timeout_(timeout) {}

RemoteClassifier::~RemoteClassifier() { close(); }

void RemoteClassifier::close() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

void RemoteClassifier::connect_until(Clock::time_point deadline) {
  const sockaddr_in addr = resolve(endpoint_);
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw Timeout(std::string("socket: ") + std::strerror(errno));
  ::fcntl(fd_, F_SETFL, ::fcntl(fd_, F_GETFL) | O_NONBLOCK);
  const int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  if (::connect(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
    if (errno != EINPROGRESS) {
      const std::string why = std::strerror(errno);
      close();
      throw Timeout("connect " + endpoint_.to_string() + ": " + why);
    }
    try {
      wait_for(fd_, POLLOUT, deadline);
    } catch (...) {
      close();
      throw;
    }
    int err = 0;
    socklen_t len = sizeof(err);
    ::getsockopt(fd_, SOL_SOCKET, SO_ERROR, &err, &len);
    if (err != 0) {
      close();
      throw Timeout("connect " + endpoint_.to_string() + ": " + std::strerror(err));
    }
  }
}

ClassifierOutput RemoteClassifier::classify(const Clip& clip) {
  return classify(protocol::make_request(clip));
}

ClassifierOutput RemoteClassifier::classify(const protocol::Request& request) {
  const auto start = Clock::now();
  const auto deadline = start + timeout_;
  const auto bytes = protocol::encode(request);
  try {
    if (fd_ < 0) connect_until(deadline);
    send_all(fd_, bytes, deadline);
    std::array<std::uint8_t, protocol::kResponseSize> reply{};
    recv_all(fd_, reply, deadline);
    ClassifierOutput out = protocol::to_output(protocol::decode_response(reply));
    out.latency_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    return out;
  } catch (...) {
    // A late reply would desynchronize the stream; start over next call.
    close();
    throw;
  }
}

Responder fixed_responder(std::array<float, kNumStatuses> probs, std::uint8_t flags) {
  return [probs, flags](const protocol::Request&) { return protocol::Response{probs, flags}; };
}

ClassifierWorker::ClassifierWorker(Responder responder, std::uint16_t port,
                                   const std::string& host)
    : responder_(std::move(responder)), host_(host) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw BindError(std::string("socket: ") + std::strerror(errno));
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host == "localhost" ? "127.0.0.1" : host.c_str(), &addr.sin_addr) != 1 ||
      ::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(listen_fd_, 16) != 0) {
    const std::string why = std::strerror(errno);
    ::close(listen_fd_);
    throw BindError(host + ":" + std::to_string(port) + ": " + why);
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  acceptor_ = std::jthread([this] { accept_loop(); });
}

ClassifierWorker::~ClassifierWorker() { stop(); }

void ClassifierWorker::stop() {
  if (stopping_.exchange(true)) return;
  if (acceptor_.joinable()) acceptor_.join();
  {
    std::lock_guard lock(conn_mu_);
    for (int fd : conn_fds_) ::shutdown(fd, SHUT_RDWR);
  }
  conn_threads_.clear();  // joins
  ::close(listen_fd_);
}

void ClassifierWorker::accept_loop() {
  while (!stopping_) {
    pollfd p{listen_fd_, POLLIN, 0};
    if (::poll(&p, 1, 20) <= 0) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    std::lock_guard lock(conn_mu_);
    conn_fds_.push_back(fd);
    conn_threads_.emplace_back([this, fd] { serve(fd); });
  }
}

void ClassifierWorker::serve(int fd) {
  std::vector<std::uint8_t> header(protocol::kRequestHeaderSize);
  while (!stopping_) {
    if (!read_exact(fd, header.data(), header.size())) break;
    protocol::Request req;
    try {
      req = protocol::decode_request_header(header);
    } catch (const ProtocolError&) {
      break;
    }
    req.payload.resize(req.expected_payload());
    if (!read_exact(fd, req.payload.data(), req.payload.size())) break;
    const auto reply = protocol::encode(responder_(req));
    if (!write_exact(fd, reply.data(), reply.size())) break;
    ++served_;
  }
  std::lock_guard lock(conn_mu_);
  conn_fds_.remove(fd);
  ::close(fd);
}

}  // namespace triage::classifier
