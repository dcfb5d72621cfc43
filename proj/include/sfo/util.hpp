#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sfo {

static_assert(std::endian::native == std::endian::little,
              "on-disk formats are little-endian and read/written raw");

// splitmix64: per-sample sub-seeds are derived as hash(seed, index).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 1));
}

// Deterministic Gaussian source. std::normal_distribution is
// implementation-defined, so Box-Muller over a fully specified generator
// keeps outputs bitwise stable across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(splitmix64(seed)) {}

  std::uint64_t next_u64() {
    state_ = splitmix64(state_);
    return splitmix64(state_ ^ 0xd1b54a32d192ed03ULL);
  }

  // uniform in [0, 1)
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double next_gaussian();

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool spare_valid_ = false;
};

inline double Rng::next_gaussian() {
  if (spare_valid_) {
    spare_valid_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = next_uniform();
  } while (u1 <= 0.0);
  const double u2 = next_uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double two_pi = 6.283185307179586476925286766559;
  spare_ = r * std::sin(two_pi * u2);
  spare_valid_ = true;
  return r * std::cos(two_pi * u2);
}

inline bool is_power_of_two(std::size_t n) {
  return n > 0 && (n & (n - 1)) == 0;
}

// FNV-1a, used for artifact hashes in run manifests.
inline std::uint64_t fnv1a64(const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  return fnv1a64(s.data(), s.size());
}

// --- little-endian binary stream helpers ---

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is, const char* what) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) {
    std::ostringstream msg;
    msg << "truncated read of " << what << " at byte offset "
        << static_cast<long long>(is.gcount());
    throw std::runtime_error(msg.str());
  }
  return v;
}

inline void write_f64_array(std::ostream& os, const std::vector<double>& v) {
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
}

inline void read_f64_array(std::istream& is, std::vector<double>& v,
                           const char* what) {
  is.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!is) {
    std::ostringstream msg;
    msg << "truncated payload while reading " << what << " (got "
        << is.gcount() << " bytes of " << v.size() * sizeof(double) << ")";
    throw std::runtime_error(msg.str());
  }
}

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void write_file_bytes(const std::string& path, const std::string& s) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f.write(s.data(), static_cast<std::streamsize>(s.size()));
}

}  // namespace sfo
