#pragma once

#include <string>

namespace tubetrace {

/// Sets library log verbosity from a level name (trace, debug, info, warn, error, off).
void set_log_level(const std::string& level);
/// Applies TUBETRACE_LOG if it is set; the default level is warn.
void configure_logging_from_env();

}  // namespace tubetrace
