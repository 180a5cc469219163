#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace mollescore {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Error taxonomy. The CLI maps config/capability/parse errors to exit code 2
// and numerical failures to exit code 3.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct capability_error : config_error {
  using config_error::config_error;
};
struct parse_error : config_error {
  using config_error::config_error;
};
struct io_error : config_error {
  using config_error::config_error;
};
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Precondition violations (t <= 0 and friends).
struct domain_error : numerical_error {
  using numerical_error::numerical_error;
};

enum class LogLevel { error = 0, info = 1, debug = 2 };

// Level comes from MOLLESCORE_LOG in {error, info, debug}; default info.
LogLevel log_level();

void log_line(LogLevel lvl, const std::string& msg);

inline void log_error(const std::string& m) { log_line(LogLevel::error, m); }
inline void log_info(const std::string& m) { log_line(LogLevel::info, m); }
inline void log_debug(const std::string& m) { log_line(LogLevel::debug, m); }

template <typename... Args>
std::string strf(const char* fmt, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return std::string(buf);
}

}  // namespace mollescore
