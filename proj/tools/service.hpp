#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "tubetrace/graph.hpp"
#include "tubetrace/imaging.hpp"

namespace httplib {
class Server;
}

namespace tubetrace::service {

struct Session {
  std::string id;
  std::vector<std::uint8_t> image_bytes;
  std::string content_type;
  RasterImage image;
  ImagingParams imaging;
  std::vector<Segment> segments;
  std::chrono::system_clock::time_point created_at;

  /// Serialises trace requests on this session.
  std::mutex mutex;
  std::shared_ptr<GeodesicCache> cache = std::make_shared<GeodesicCache>();
  /// Weight-affecting parameters the cache was filled under: xi, r_patch, n_theta.
  std::optional<std::tuple<double, double, int>> cache_key;
  std::string last_graph_json;
  std::string last_trace_log;
};

/// In-memory sessions with least-recently-used eviction.
class SessionStore {
 public:
  explicit SessionStore(std::size_t capacity = 16) : capacity_(capacity) {}

  std::shared_ptr<Session> add(std::unique_ptr<Session> s);
  std::shared_ptr<Session> find(const std::string& id);
  bool erase(const std::string& id);
  std::size_t size() const;

 private:
  std::string next_id();

  mutable std::mutex mutex_;
  std::size_t capacity_;
  std::uint64_t counter_ = 0;
  std::list<std::string> order_;  // most recent first
  std::unordered_map<std::string,
                     std::pair<std::shared_ptr<Session>, std::list<std::string>::iterator>>
      sessions_;
};

struct ServiceOptions {
  std::optional<std::filesystem::path> static_dir;
  std::size_t session_capacity = 16;
};

class Service {
 public:
  explicit Service(ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds to `port` (0 picks a free one) and returns the bound port, or -1.
  int bind(const std::string& host, int port);
  /// Blocks serving requests until stop().
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

  SessionStore& sessions() { return store_; }

 private:
  void install_routes();

  ServiceOptions options_;
  SessionStore store_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace tubetrace::service
