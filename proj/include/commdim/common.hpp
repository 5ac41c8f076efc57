#pragma once

// Shared primitives: typed errors, deterministic RNG, hashing, UTC calendar math.

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace commdim {

inline constexpr const char* kVersion = "0.1.0";

// Sentinel author carried by records whose author identity was withheld.
inline constexpr const char* kDeletedUser = "[deleted]";

// 2005-01-01T00:00:00Z; records before this are malformed.
inline constexpr std::int64_t kMinTimestamp = 1104537600;

// Error taxonomy maps onto CLI exit codes: config=2, input=3, numeric=4.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Deterministic 64-bit RNG (splitmix64). Behaviour is identical across
// platforms, which the reproducibility contract depends on; std distributions
// are implementation-defined and are not used anywhere in the library.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Unbiased uniform integer in [0, n). n must be > 0.
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

 private:
  std::uint64_t state_;
};

// Derives an independent stream from a base seed (worker shards, sub-stages).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  SplitMix64 rng(base ^ (0x9e3779b97f4a7c15ull * (stream + 1)));
  return rng.next();
}

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;

inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = kFnvOffset) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = kFnvOffset) {
  return fnv1a64(s.data(), s.size(), h);
}

// Exact match for string literals; otherwise const char* decays to const
// void* and the seed argument is taken for a byte count.
inline std::uint64_t fnv1a64(const char* s, std::uint64_t h = kFnvOffset) {
  return fnv1a64(std::string_view(s), h);
}

inline std::uint64_t hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file for hashing: " + path);
  std::uint64_t h = kFnvOffset;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0)
    h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
  return h;
}

inline std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---- UTC calendar -----------------------------------------------------------
// Days-to-civil conversion after Howard Hinnant's algorithms; exact for the
// whole int64 second range we accept.

struct CivilDate {
  int year;
  int month;  // 1..12
  int day;    // 1..31
};

inline CivilDate civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return CivilDate{static_cast<int>(y + (m <= 2)), static_cast<int>(m),
                   static_cast<int>(d)};
}

// Month index = year*12 + (month-1); total order on UTC calendar months.
inline int month_index_of(std::int64_t unix_seconds) {
  std::int64_t days = unix_seconds / 86400;
  if (unix_seconds < 0 && unix_seconds % 86400 != 0) --days;
  const CivilDate c = civil_from_days(days);
  return c.year * 12 + (c.month - 1);
}

inline int year_of_month(int month_index) {
  return month_index >= 0 ? month_index / 12
                          : (month_index - 11) / 12;
}

inline std::string month_label(int month_index) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%04d-%02d", year_of_month(month_index),
                month_index - year_of_month(month_index) * 12 + 1);
  return buf;
}

// Parses "YYYY-MM" back to a month index. Throws InputError on junk.
inline int parse_month_label(std::string_view s) {
  int y = 0, m = 0;
  if (std::sscanf(std::string(s).c_str(), "%d-%d", &y, &m) != 2 || m < 1 ||
      m > 12)
    throw InputError("bad month label: " + std::string(s));
  return y * 12 + (m - 1);
}

// Formats a double with `sig` significant digits (deterministic table output).
inline std::string fmt_g(double v, int sig = 9) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", sig, v);
  return buf;
}

static_assert(std::endian::native == std::endian::little,
              "binary embedding format assumes a little-endian host");

}  // namespace commdim
