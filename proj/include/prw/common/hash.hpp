#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

namespace prw {

using Digest = std::array<std::uint8_t, 32>;

// SHA-256 of a byte span.
Digest sha256(std::span<const std::uint8_t> bytes);

// Hash of the concatenation of several digests/byte blocks, in order.
class HashBuilder {
 public:
  HashBuilder();
  ~HashBuilder();
  HashBuilder(const HashBuilder&) = delete;
  HashBuilder& operator=(const HashBuilder&) = delete;

  HashBuilder& add(std::span<const std::uint8_t> bytes);
  HashBuilder& add(const Digest& d) { return add(std::span(d)); }
  HashBuilder& add(const std::string& s);
  Digest finish();

 private:
  struct Impl;
  Impl* impl_;
};

std::string to_hex(const Digest& d);
Digest from_hex(const std::string& hex);

}  // namespace prw
