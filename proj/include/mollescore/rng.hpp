#pragma once

#include <cstdint>
#include <string_view>

namespace mollescore {

// Splittable counter-based generator. The core is the SplitMix64 output
// function applied to key + (counter+1)*GAMMA, so any draw is addressable by
// (key, counter) and streams can be split without touching each other.
// Stream keys are derived by mixing FNV-1a hashes of labels/indices into the
// parent key. Normal variates use Box-Muller on 53-bit uniforms.
namespace rngdetail {
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t mix(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}
}  // namespace rngdetail

inline std::uint64_t derive_stream(std::uint64_t key, std::string_view label) {
  return rngdetail::mix(key ^ rngdetail::mix(rngdetail::fnv1a(label)));
}

inline std::uint64_t derive_stream(std::uint64_t key, std::uint64_t a,
                                   std::uint64_t b = 0) {
  using namespace rngdetail;
  return mix(key ^ mix(a * 0xD1342543DE82EF95ULL + 1) ^
             mix(b * 0x9E6C63D0876A9A47ULL + 2));
}

inline std::uint64_t counter_u64(std::uint64_t key, std::uint64_t counter) {
  return rngdetail::mix(key + (counter + 1) * rngdetail::kGamma);
}

// uniform in (0, 1]; never 0 so log() is safe
inline double counter_unit(std::uint64_t key, std::uint64_t counter) {
  return static_cast<double>((counter_u64(key, counter) >> 11) + 1) * 0x1.0p-53;
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : key_(key) {}
  RngStream(std::uint64_t key, std::string_view label)
      : key_(derive_stream(key, label)) {}

  std::uint64_t u64() { return counter_u64(key_, ctr_++); }
  // uniform in (0, 1]
  double unit() { return counter_unit(key_, ctr_++); }
  // uniform in [0, 1)
  double unit_co() {
    return static_cast<double>(u64() >> 11) * 0x1.0p-53;
  }
  std::uint64_t below(std::uint64_t n);  // unbiased integer in [0, n)
  double normal();                       // Box-Muller, pair-cached

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Fixed-address per-step Gaussian block: the d normals consumed by stream
// `key` at step `step` come from counters [step*2*ceil(d/2), ...), one
// Box-Muller pair per two slots.  Identical output whether trajectories are
// advanced one by one or in batches.
void step_normals(std::uint64_t key, std::uint64_t step, int d, double* out);

}  // namespace mollescore
