#include "triage/pipeline/gateway.hpp"

#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "triage/classifier/remote.hpp"
#include "triage/core/log.hpp"
#include "triage/error.hpp"
#include "triage/pipeline/metrics.hpp"
#include "triage/pipeline/pipeline.hpp"

namespace triage::pipeline {

namespace {

using nlohmann::json;

json record_json(const ResultRecord& r) { return json::parse(to_json_line(r)); }

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& kind, const std::string& msg) {
  send_json(res, status, {{"error", kind}, {"message", msg}});
}

std::string frame_base64(const Image& image) {
  const auto bytes = encode_ppm(image);
  return httplib::detail::base64_encode(std::string(bytes.begin(), bytes.end()));
}

}  // namespace

struct Gateway::Impl {
  Pipeline& pipeline;
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::atomic<bool> stopping{false};

  explicit Impl(Pipeline& p) : pipeline(p) {}

  void routes();
  void stream(const httplib::Request& req, httplib::Response& res);
  void override_post(const httplib::Request& req, httplib::Response& res);
  void override_delete(const httplib::Request& req, httplib::Response& res);
};

void Gateway::Impl::routes() {
  server.Get("/api/tracks", [this](const httplib::Request&, httplib::Response& res) {
    json arr = json::array();
    for (const auto& v : pipeline.tracks_view()) {
      arr.push_back({{"track_id", v.track_id},
                     {"status", to_string(v.status)},
                     {"source", to_string(v.source)},
                     {"operator", v.operator_id},
                     {"last", record_json(v.last)}});
    }
    send_json(res, 200, {{"video_id", pipeline.video_id()}, {"tracks", arr}});
  });

  server.Get("/api/metrics", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(metrics_json(pipeline.metrics_snapshot()), "application/json");
  });

  server.Get("/api/frame/latest", [this](const httplib::Request&, httplib::Response& res) {
    auto f = pipeline.latest_frame();
    if (!f) return send_error(res, 404, "NoFrame", "no frame admitted yet");
    json records = json::array();
    for (const auto& r : f->records) records.push_back(record_json(r));
    send_json(res, 200,
              {{"video_id", pipeline.video_id()},
               {"frame_index", f->frame_index},
               {"width", f->image->width},
               {"height", f->image->height},
               {"format", "ppm"},
               {"image_base64", frame_base64(*f->image)},
               {"records", records}});
  });

  server.Get("/api/stream", [this](const httplib::Request& req, httplib::Response& res) { stream(req, res); });
  server.Post(R"(/api/tracks/(\d+)/override)",
              [this](const httplib::Request& req, httplib::Response& res) { override_post(req, res); });
  server.Delete(R"(/api/tracks/(\d+)/override)",
                [this](const httplib::Request& req, httplib::Response& res) { override_delete(req, res); });
}

void Gateway::Impl::stream(const httplib::Request& req, httplib::Response& res) {
  const auto from = req.get_param_value("from") == "all" ? SubscribeFrom::All : SubscribeFrom::Latest;
  auto results = pipeline.bus().subscribe(Topic::Results, from);
  auto alarms = pipeline.bus().subscribe(Topic::Alarms, from);
  res.set_chunked_content_provider(
      "application/x-ndjson",
      [this, results, alarms](std::size_t, httplib::DataSink& sink) {
        std::string out;
        bool done = false;
        auto take = [&](const BusMessage& m) {
          if (m.kind == MessageKind::Record) out += to_json_line(m.record) + "\n";
        };
        if (auto m = results->next(std::chrono::milliseconds(100))) take(*m);
        for (const auto& m : results->drain()) take(m);
        for (const auto& m : alarms->drain()) take(m);
        if (results->finished() && alarms->finished()) done = true;
        if (results->disconnected() || alarms->disconnected() || stopping) done = true;
        if (!out.empty() && !sink.write(out.data(), out.size())) return false;
        if (done) sink.done();
        return true;
      },
      [results, alarms](bool) {
        results->cancel();
        alarms->cancel();
      });
}

void Gateway::Impl::override_post(const httplib::Request& req, httplib::Response& res) {
  const auto track = std::stoull(req.matches[1].str());
  json body;
  try {
    body = json::parse(req.body);
  } catch (const json::exception& e) {
    return send_error(res, 400, "ParseError", e.what());
  }
  if (!body.is_object() || !body.contains("status") || !body["status"].is_string()) {
    return send_error(res, 400, "ParseError", "body needs a string 'status'");
  }
  const std::string op = body.value("operator", std::string());
  try {
    const auto category = category_from_label(body["status"].get<std::string>());
    auto rec = pipeline.apply_override(track, category, op);
    json out = {{"track_id", track}, {"status", to_string(category)}, {"operator", op}};
    if (rec) out["record"] = record_json(*rec);
    send_json(res, 200, out);
  } catch (const UnknownTrack& e) {
    send_error(res, 404, e.kind(), e.what());
  } catch (const Error& e) {
    send_error(res, 400, e.kind(), e.what());
  }
}

void Gateway::Impl::override_delete(const httplib::Request& req, httplib::Response& res) {
  const auto track = std::stoull(req.matches[1].str());
  try {
    pipeline.apply_override(track, std::nullopt, req.get_param_value("operator"));
    send_json(res, 200, {{"track_id", track}, {"cleared", true}});
  } catch (const UnknownTrack& e) {
    send_error(res, 404, e.kind(), e.what());
  }
}

Gateway::Gateway(Pipeline& pipeline, const std::string& bind) : impl_(std::make_unique<Impl>(pipeline)) {
  classifier::Endpoint ep;
  try {
    ep = classifier::Endpoint::parse(bind);
  } catch (const Error& e) {
    throw BindError("gateway bind '" + bind + "': " + e.what());
  }
  impl_->routes();
  // httplib defaults to SO_REUSEPORT, which lets a second server share a busy port.
  impl_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  });
  if (ep.port == 0) {
    impl_->port = impl_->server.bind_to_any_port(ep.host);
  } else {
    impl_->port = impl_->server.bind_to_port(ep.host, ep.port) ? ep.port : -1;
  }
  if (impl_->port <= 0) throw BindError("gateway cannot bind " + bind);
  impl_->thread = std::thread([impl = impl_.get()] { impl->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  log::info("gateway listening on " + ep.host + ":" + std::to_string(impl_->port));
}

Gateway::~Gateway() { stop(); }

int Gateway::port() const { return impl_->port; }

void Gateway::stop() {
  if (impl_->stopping.exchange(true)) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace triage::pipeline
