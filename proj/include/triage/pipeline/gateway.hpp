#pragma once

#include <memory>
#include <string>

namespace triage::pipeline {

class Pipeline;

// HTTP bridge for operator consoles:
//   GET    /api/tracks                  current statuses
//   GET    /api/stream[?from=all]       NDJSON ResultRecords (results + alarms), chunked
//   GET    /api/frame/latest            newest frame (base64 PPM) and its records
//   POST   /api/tracks/{id}/override    {"status": "...", "operator": "..."}
//   DELETE /api/tracks/{id}/override
//   GET    /api/metrics
class Gateway {
 public:
  // bind is "host:port"; port 0 picks a free port. Throws BindError.
  Gateway(Pipeline& pipeline, const std::string& bind);
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  int port() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace triage::pipeline
