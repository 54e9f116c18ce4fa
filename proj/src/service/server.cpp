#include "fleet/service/server.hpp"

#include <httplib.h>

#include "fleet/errors.hpp"

namespace fleet::service {

using nlohmann::json;

namespace {

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json error_body(const std::string& kind, const std::string& message) {
  return {{"v", kWireVersion}, {"error", kind}, {"message", message}};
}

}  // namespace

struct HttpServer::Impl {
  httplib::Server http;
};

std::pair<std::string, int> parse_address(const std::string& addr) {
  auto colon = addr.rfind(':');
  std::string host = colon == std::string::npos ? "127.0.0.1" : addr.substr(0, colon);
  std::string port = colon == std::string::npos ? addr : addr.substr(colon + 1);
  if (host.empty()) host = "127.0.0.1";
  try {
    std::size_t used = 0;
    int p = std::stoi(port, &used);
    if (used != port.size() || p < 0 || p > 65535) throw std::invalid_argument(port);
    return {host, p};
  } catch (const std::exception&) {
    throw std::invalid_argument("bad address '" + addr + "'");
  }
}

HttpServer::HttpServer(RequestDesk& desk, const Board& board) : impl_(std::make_unique<Impl>()) {
  auto& http = impl_->http;
  RequestDesk* d = &desk;
  const Board* b = &board;

  auto submit = [d](const json& body, httplib::Response& res) {
    try {
      std::string id = d->submit(body);
      reply(res, 202, {{"v", kWireVersion}, {"request", id}, {"status", "queued"}});
    } catch (const TraceInvalid& e) {
      reply(res, 400, error_body("invalidRequest", e.what()));
    }
  };

  http.Post("/requests", [submit](const httplib::Request& req, httplib::Response& res) {
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded()) return reply(res, 400, error_body("invalidRequest", "body is not JSON"));
    submit(body, res);
  });

  http.Post("/resolve", [submit](const httplib::Request& req, httplib::Response& res) {
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) return reply(res, 400, error_body("invalidRequest", "body is not JSON"));
    json env{{"v", body.value("v", 0)}, {"kind", "resolve"},
             {"payload", {{"conflict", body.value("conflict", "")}, {"keep", body.value("keep", "")}}}};
    if (body.contains("id")) env["id"] = body["id"];
    submit(env, res);
  });

  http.Get(R"(/requests/([^/]+))", [d](const httplib::Request& req, httplib::Response& res) {
    auto o = d->outcome(req.matches[1]);
    if (!o) return reply(res, 404, {{"v", kWireVersion}, {"request", req.matches[1]}, {"status", "pending"}});
    reply(res, 200, o->to_json());
  });

  http.Get("/conflicts", [d](const httplib::Request&, httplib::Response& res) {
    json out = json::array();
    for (const auto& c : d->open_conflicts()) out.push_back(c.to_json());
    reply(res, 200, {{"v", kWireVersion}, {"conflicts", out}});
  });

  http.Get("/snapshot", [b](const httplib::Request&, httplib::Response& res) {
    auto snap = b->snapshot();
    if (!snap) return reply(res, 503, error_body("notReady", "no tick published yet"));
    reply(res, 200, *snap);
  });

  http.Get("/events", [b](const httplib::Request& req, httplib::Response& res) {
    long since = 0;
    if (req.has_param("since")) {
      try {
        since = std::stol(req.get_param_value("since"));
      } catch (const std::exception&) {
        return reply(res, 400, error_body("invalidRequest", "since must be an integer"));
      }
    }
    auto events = b->events_since(since);
    long next = since + static_cast<long>(events.size());
    reply(res, 200, {{"v", kWireVersion}, {"events", events}, {"next", next}});
  });

  http.Get("/stream", [b](const httplib::Request&, httplib::Response& res) {
    auto last = std::make_shared<json>();
    auto seen = std::make_shared<long>(-1);
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider("text/event-stream", [b, last, seen](std::size_t, httplib::DataSink& sink) {
      if (b->closed()) {
        sink.done();
        return false;
      }
      long v = b->wait_for(*seen, std::chrono::milliseconds(250));
      if (v == *seen) return sink.is_writable();
      *seen = v;
      auto snap = b->snapshot();
      if (!snap) return true;
      std::string msg;
      if (last->is_null()) {
        msg = "event: snapshot\ndata: " + snap->dump() + "\n\n";
      } else {
        json delta{{"v", kWireVersion}, {"tick", snap->value("tick", 0L)}, {"patch", json::diff(*last, *snap)}};
        msg = "event: delta\ndata: " + delta.dump() + "\n\n";
      }
      *last = *snap;
      return sink.write(msg.data(), msg.size());
    });
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  auto& http = impl_->http;
  port_ = port == 0 ? http.bind_to_any_port(host) : (http.bind_to_port(host, port) ? port : -1);
  if (port_ < 0) return -1;
  thread_ = std::thread([this] { impl_->http.listen_after_bind(); });
  http.wait_until_ready();
  return port_;
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->http.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace fleet::service
