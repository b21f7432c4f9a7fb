#pragma once

#include <bit>
#include <cstdint>
#include <string_view>

namespace selfnorm {

/// 64-bit FNV-1a over little-endian encodings of the values added.
class Fnv1a {
 public:
  void add_bytes(const unsigned char* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      state_ ^= data[i];
      state_ *= 0x100000001b3ULL;
    }
  }
  void add(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    add_bytes(b, 8);
  }
  void add(std::int64_t v) { add(static_cast<std::uint64_t>(v)); }
  void add(double v) { add(std::bit_cast<std::uint64_t>(v)); }
  void add(std::string_view s) {
    add_bytes(reinterpret_cast<const unsigned char*>(s.data()), s.size());
    add(static_cast<std::uint64_t>(s.size()));
  }
  std::uint64_t value() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace selfnorm
