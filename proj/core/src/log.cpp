#include "log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>

#include <cstdlib>

#include "tubetrace/errors.hpp"
#include "tubetrace/logging.hpp"

namespace tubetrace {

namespace log {

spdlog::logger& logger() {
  static std::shared_ptr<spdlog::logger> instance = [] {
    auto l = spdlog::stderr_color_mt("tubetrace");
    l->set_level(spdlog::level::warn);
    return l;
  }();
  return *instance;
}

}  // namespace log

void set_log_level(const std::string& level) {
  const auto parsed = spdlog::level::from_str(level);
  if (parsed == spdlog::level::off && level != "off")
    throw InvalidArgument("unknown log level '" + level + "'");
  log::logger().set_level(parsed);
}

void configure_logging_from_env() {
  if (const char* v = std::getenv("TUBETRACE_LOG"); v && *v) set_log_level(v);
}

}  // namespace tubetrace
