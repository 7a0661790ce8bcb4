#include "prw/common/hash.hpp"

#include <openssl/evp.h>

#include <stdexcept>

#include "prw/common/error.hpp"

namespace prw {

struct HashBuilder::Impl {
  EVP_MD_CTX* ctx = nullptr;
};

HashBuilder::HashBuilder() : impl_(new Impl) {
  impl_->ctx = EVP_MD_CTX_new();
  if (impl_->ctx == nullptr ||
      EVP_DigestInit_ex(impl_->ctx, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 init failed");
  }
}

HashBuilder::~HashBuilder() {
  EVP_MD_CTX_free(impl_->ctx);
  delete impl_;
}

HashBuilder& HashBuilder::add(std::span<const std::uint8_t> bytes) {
  EVP_DigestUpdate(impl_->ctx, bytes.data(), bytes.size());
  return *this;
}

HashBuilder& HashBuilder::add(const std::string& s) {
  return add(std::span(reinterpret_cast<const std::uint8_t*>(s.data()),
                       s.size()));
}

Digest HashBuilder::finish() {
  Digest d{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(impl_->ctx, d.data(), &len);
  return d;
}

Digest sha256(std::span<const std::uint8_t> bytes) {
  HashBuilder h;
  h.add(bytes);
  return h.finish();
}

std::string to_hex(const Digest& d) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (auto b : d) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xF]);
  }
  return out;
}

Digest from_hex(const std::string& hex) {
  if (hex.size() != 64) throw ValidationError("digest hex must be 64 chars");
  auto nibble = [](char c) -> std::uint8_t {
    if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
    throw ValidationError("bad hex digit");
  };
  Digest d{};
  for (std::size_t i = 0; i < 32; ++i) {
    d[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 |
                                     nibble(hex[2 * i + 1]));
  }
  return d;
}

}  // namespace prw
