#pragma once

#include <sstream>
#include <string>
#include <string_view>

namespace gcontext {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

LogLevel parse_log_level(std::string_view text);
std::string_view to_string(LogLevel level);

void set_log_level(LogLevel level);
LogLevel log_level();
void log_message(LogLevel level, std::string_view message);

namespace detail {
template <class... Args>
void log_fmt(LogLevel level, const Args&... args) {
  if (static_cast<int>(level) > static_cast<int>(log_level())) return;
  std::ostringstream os;
  (os << ... << args);
  log_message(level, os.str());
}
}  // namespace detail

template <class... Args>
void log_warn(const Args&... args) { detail::log_fmt(LogLevel::warn, args...); }
template <class... Args>
void log_info(const Args&... args) { detail::log_fmt(LogLevel::info, args...); }
template <class... Args>
void log_debug(const Args&... args) { detail::log_fmt(LogLevel::debug, args...); }

}  // namespace gcontext
