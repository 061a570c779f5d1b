#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

namespace streamtrace {

// Streaming SHA-256 over OpenSSL's EVP interface. The manifest format is
// fixed to SHA-256; no other algorithm is exposed.
class Sha256 {
public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const void* data, size_t len);
  std::string finish_hex();

  static std::string hex_of(std::span<const uint8_t> bytes);
  // Streamed; handles files larger than the in-memory read cap.
  static std::string hex_of_file(const std::filesystem::path& path, uint64_t* size_out = nullptr);

private:
  void* ctx_;
};

}  // namespace streamtrace
