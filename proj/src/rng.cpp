#include "mollescore/rng.hpp"

#include <cmath>
#include <cstdlib>
#include <mutex>

#include "mollescore/common.hpp"

namespace mollescore {

std::uint64_t RngStream::below(std::uint64_t n) {
  // rejection on the top range to stay unbiased
  std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v;
  do {
    v = u64();
  } while (v >= limit);
  return v % n;
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = unit();
  double u2 = unit_co();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

void step_normals(std::uint64_t key, std::uint64_t step, int d, double* out) {
  const int pairs = (d + 1) / 2;
  std::uint64_t base = step * static_cast<std::uint64_t>(2 * pairs);
  for (int p = 0; p < pairs; ++p) {
    double u1 = counter_unit(key, base + 2 * p);
    double u2 =
        static_cast<double>(counter_u64(key, base + 2 * p + 1) >> 11) *
        0x1.0p-53;
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    out[2 * p] = r * std::cos(a);
    if (2 * p + 1 < d) out[2 * p + 1] = r * std::sin(a);
  }
}

LogLevel log_level() {
  static LogLevel lvl = [] {
    const char* e = std::getenv("MOLLESCORE_LOG");
    if (!e) return LogLevel::info;
    std::string s(e);
    if (s == "error") return LogLevel::error;
    if (s == "debug") return LogLevel::debug;
    return LogLevel::info;
  }();
  return lvl;
}

void log_line(LogLevel lvl, const std::string& msg) {
  if (lvl > log_level()) return;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  const char* tag = lvl == LogLevel::error  ? "error"
                    : lvl == LogLevel::info ? "info"
                                            : "debug";
  std::fprintf(stderr, "[%s] %s\n", tag, msg.c_str());
}

}  // namespace mollescore
