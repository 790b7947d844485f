#include "triage/core/log.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <mutex>

namespace triage::log {
namespace {

std::atomic<Level> g_level{Level::Warn};
std::mutex g_mu;

const char* name(Level l) {
  switch (l) {
    case Level::Debug: return "debug";
    case Level::Info: return "info";
    case Level::Warn: return "warn";
    case Level::Error: return "error";
    case Level::Off: return "off";
  }
  return "?";
}

}  // namespace

void set_level(Level level) { g_level = level; }
Level level() { return g_level; }

Level level_from_string(std::string_view s) {
  if (s == "debug") return Level::Debug;
  if (s == "info") return Level::Info;
  if (s == "warn") return Level::Warn;
  if (s == "error") return Level::Error;
  return Level::Off;
}

void write(Level level, std::string_view message) {
  if (level < g_level.load(std::memory_order_relaxed)) return;
  const auto now = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                       .count();
  std::lock_guard lock(g_mu);
  std::fprintf(stderr, "[%lld.%03lld] %-5s %.*s\n", static_cast<long long>(now / 1000),
               static_cast<long long>(now % 1000), name(level), static_cast<int>(message.size()),
               message.data());
}

}  // namespace triage::log
