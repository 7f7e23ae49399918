#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace strokegestalt {

/// Incremental SHA-256 (OpenSSL EVP) producing a lowercase hex digest.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::span<const std::byte> bytes);
  void update(std::string_view s);
  std::string hex_digest();

 private:
  void* ctx_;
};

std::string sha256_hex(std::string_view s);

/// Stable 64-bit seed derivation: seed = mix(global_seed, key).
/// Independent of std::hash so seeds survive toolchain changes.
uint64_t derive_seed(uint64_t global_seed, std::string_view key);

}  // namespace strokegestalt
