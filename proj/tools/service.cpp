#include "service.hpp"

#include <httplib.h>

#include <random>
#include <sstream>

#include "json.hpp"
#include "tubetrace/errors.hpp"
#include "tubetrace/io.hpp"
#include "tubetrace/pipeline.hpp"

namespace tubetrace::service {

using nlohmann::json;

std::string SessionStore::next_id() {
  static thread_local std::mt19937_64 salt{std::random_device{}()};
  std::ostringstream os;
  os << std::hex << salt() << '-' << ++counter_;
  return os.str();
}

std::shared_ptr<Session> SessionStore::add(std::unique_ptr<Session> s) {
  std::lock_guard lock(mutex_);
  s->id = next_id();
  std::shared_ptr<Session> shared(std::move(s));
  order_.push_front(shared->id);
  sessions_[shared->id] = {shared, order_.begin()};
  while (sessions_.size() > capacity_) {
    sessions_.erase(order_.back());
    order_.pop_back();
  }
  return shared;
}

std::shared_ptr<Session> SessionStore::find(const std::string& id) {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) return nullptr;
  order_.splice(order_.begin(), order_, it->second.second);
  return it->second.first;
}

bool SessionStore::erase(const std::string& id) {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) return false;
  order_.erase(it->second.second);
  sessions_.erase(it);
  return true;
}

std::size_t SessionStore::size() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

namespace {

constexpr const char* kJson = "application/json";

class HttpError : public std::runtime_error {
 public:
  HttpError(int status, const std::string& msg) : std::runtime_error(msg), status(status) {}
  int status;
};

void send_json(httplib::Response& res, const std::string& body, int status = 200) {
  res.status = status;
  res.set_content(body, kJson);
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, json{{"error", message}}.dump(), status);
}

std::string content_type_of(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() >= 8 && bytes[0] == 0x89 && bytes[1] == 'P' && bytes[2] == 'N')
    return "image/png";
  return "image/x-portable-graymap";
}

ImagingParams imaging_from_request(const httplib::Request& req) {
  ImagingParams p;
  auto value = [&](const char* key) -> std::optional<std::string> {
    if (req.has_param(key)) return req.get_param_value(key);
    if (req.has_file(key)) return req.get_file_value(key).content;
    return std::nullopt;
  };
  try {
    if (auto v = value("threshold")) p.threshold = std::stod(*v);
    if (auto v = value("min_length")) p.min_length = std::stoi(*v);
    if (auto v = value("bright_on_dark")) p.bright_on_dark = *v == "true" || *v == "1";
    if (auto v = value("scales")) {
      p.scales.clear();
      std::stringstream ss(*v);
      for (std::string tok; std::getline(ss, tok, ',');) p.scales.push_back(std::stod(tok));
    }
  } catch (const std::logic_error&) {
    throw HttpError(400, "malformed imaging parameter");
  }
  if (!(p.threshold > 0.0 && p.threshold < 1.0))
    throw HttpError(400, "threshold must lie in (0, 1)");
  if (p.scales.empty()) throw HttpError(400, "scales must not be empty");
  return p;
}

std::shared_ptr<Session> session_or_404(SessionStore& store, const httplib::Request& req) {
  auto s = store.find(req.path_params.at("id"));
  if (!s) throw HttpError(404, "unknown session");
  return s;
}

Point2 point_field(const json& body, const char* key) {
  if (!body.contains(key)) throw HttpError(400, std::string("missing '") + key + "'");
  const json& p = body[key];
  if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
    throw HttpError(400, std::string("'") + key + "' must be [x, y]");
  return {p[0].get<double>(), p[1].get<double>()};
}

std::string run_trace(Session& s, const json& body) {
  const Point2 start = point_field(body, "start");
  const Point2 end = point_field(body, "end");
  TraceConfig cfg;
  cfg.imaging = s.imaging;
  if (body.contains("params") && !body["params"].is_null()) {
    const json& params = body["params"];
    if (!params.is_object()) throw HttpError(400, "'params' must be an object");
    for (const char* key : {"scales", "threshold", "min_length", "bright_on_dark"})
      if (params.contains(key))
        throw HttpError(400, std::string("'") + key + "' is fixed when the session is created");
    try {
      apply_config_json(cfg, params.dump());
      cfg.agent.validate();
    } catch (const Error& e) {
      throw HttpError(400, e.what());
    }
  }
  if (!s.image.extent().contains(start) || !s.image.extent().contains(end))
    throw HttpError(400, "seed point outside the image");

  std::lock_guard lock(s.mutex);
  const auto key = std::make_tuple(cfg.graph.xi, cfg.graph.r_patch, cfg.graph.elastica.n_theta);
  if (s.cache_key != key) {
    s.cache->clear();
    s.cache_key = key;
  }
  TraceResult r;
  if (cfg.method == Method::IsoFm) {
    r = iso_fm_trace(s.image, start, end, cfg);
  } else {
    SegmentGraph g = SegmentGraph::abstract(0);
    r = trace_segments(s.segments, s.image.extent(), start, end, cfg, s.cache, &g);
    if (g.has_geometry()) s.last_graph_json = graph_to_json(g);
  }
  s.last_trace_log = episode_trace_jsonl(r.episodes);

  json doc = json::parse(path_result_to_json(r));
  doc["path"] = doc["points"];
  doc["converged"] = r.stats.converged;
  return doc.dump();
}

}  // namespace

Service::Service(ServiceOptions options)
    : options_(std::move(options)), store_(options_.session_capacity),
      server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool Service::listen_after_bind() { return server_->listen_after_bind(); }

void Service::stop() {
  if (server_ && server_->is_running()) server_->stop();
}

void Service::wait_until_ready() const { server_->wait_until_ready(); }

void Service::install_routes() {
  httplib::Server& srv = *server_;

  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res,
                               std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const HttpError& e) {
      send_error(res, e.status, e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, std::string("malformed JSON: ") + e.what());
    } catch (const InvalidArgument& e) {
      send_error(res, 400, e.what());
    } catch (const FormatError& e) {
      send_error(res, 400, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    } catch (...) {
      send_error(res, 500, "internal error");
    }
  });

  srv.Post("/api/sessions", [this](const httplib::Request& req, httplib::Response& res) {
    std::string raw;
    if (req.is_multipart_form_data()) {
      if (!req.has_file("image")) throw HttpError(400, "multipart upload needs an 'image' part");
      raw = req.get_file_value("image").content;
    } else {
      raw = req.body;
    }
    if (raw.empty()) throw HttpError(400, "empty image upload");
    auto s = std::make_unique<Session>();
    s->image_bytes.assign(raw.begin(), raw.end());
    s->content_type = content_type_of(s->image_bytes);
    s->imaging = imaging_from_request(req);
    try {
      s->image = decode_image(s->image_bytes);
    } catch (const Error& e) {
      throw HttpError(400, e.what());
    }
    s->segments = segments_from_image(s->image, s->imaging);
    s->created_at = std::chrono::system_clock::now();
    auto stored = store_.add(std::move(s));
    send_json(res, json{{"session_id", stored->id},
                        {"width", stored->image.width()},
                        {"height", stored->image.height()},
                        {"segment_count", stored->segments.size()}}
                       .dump(),
              201);
  });

  srv.Get("/api/sessions/:id/image", [this](const httplib::Request& req, httplib::Response& res) {
    auto s = session_or_404(store_, req);
    res.set_content(std::string(s->image_bytes.begin(), s->image_bytes.end()), s->content_type);
  });

  srv.Get("/api/sessions/:id/segments",
          [this](const httplib::Request& req, httplib::Response& res) {
            auto s = session_or_404(store_, req);
            send_json(res, segments_to_json(s->segments));
          });

  srv.Post("/api/sessions/:id/trace", [this](const httplib::Request& req, httplib::Response& res) {
    auto s = session_or_404(store_, req);
    json body;
    try {
      body = json::parse(req.body.empty() ? std::string("{}") : req.body);
    } catch (const json::parse_error& e) {
      throw HttpError(400, std::string("malformed JSON: ") + e.what());
    }
    if (!body.is_object()) throw HttpError(400, "trace body must be a JSON object");
    send_json(res, run_trace(*s, body));
  });

  srv.Get("/api/sessions/:id/graph", [this](const httplib::Request& req, httplib::Response& res) {
    auto s = session_or_404(store_, req);
    std::lock_guard lock(s->mutex);
    if (s->last_graph_json.empty()) {
      const TraceConfig cfg;
      if (s->segments.empty()) {
        send_json(res, json{{"nodes", json::array()},
                            {"edges", json::array()},
                            {"geodesic_calls", 0}}
                           .dump());
        return;
      }
      const SegmentGraph g =
          build_initial_graph(s->segments, s->image.extent(), cfg.agent.ell0, cfg.graph);
      send_json(res, graph_to_json(g));
      return;
    }
    send_json(res, s->last_graph_json);
  });

  srv.Get("/api/sessions/:id/trace-log",
          [this](const httplib::Request& req, httplib::Response& res) {
            auto s = session_or_404(store_, req);
            std::lock_guard lock(s->mutex);
            res.set_content(s->last_trace_log, "application/x-ndjson");
          });

  srv.Delete("/api/sessions/:id", [this](const httplib::Request& req, httplib::Response& res) {
    if (!store_.erase(req.path_params.at("id"))) throw HttpError(404, "unknown session");
    send_json(res, json{{"deleted", true}}.dump());
  });

  if (options_.static_dir) {
    if (!srv.set_mount_point("/", options_.static_dir->string()))
      throw InvalidArgument("static directory not found: " + options_.static_dir->string());
  }
}

}  // namespace tubetrace::service
