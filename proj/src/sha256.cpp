#include "streamtrace/sha256.hpp"

#include <openssl/evp.h>

#include <fstream>

#include "streamtrace/errors.hpp"
#include "streamtrace/util.hpp"

namespace streamtrace {

Sha256::Sha256() : ctx_(EVP_MD_CTX_new()) {
  if (!ctx_ || EVP_DigestInit_ex(static_cast<EVP_MD_CTX*>(ctx_), EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 init failed");
}

Sha256::~Sha256() { EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_)); }

void Sha256::update(const void* data, size_t len) {
  if (EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), data, len) != 1)
    throw std::runtime_error("sha256 update failed");
}

std::string Sha256::finish_hex() {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), digest, &len) != 1)
    throw std::runtime_error("sha256 final failed");
  return hex_lower({digest, len});
}

std::string Sha256::hex_of(std::span<const uint8_t> bytes) {
  Sha256 h;
  if (!bytes.empty()) h.update(bytes.data(), bytes.size());
  return h.finish_hex();
}

std::string Sha256::hex_of_file(const std::filesystem::path& path, uint64_t* size_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::FileNotFound, path.string());
  Sha256 h;
  char buf[1 << 16];
  uint64_t total = 0;
  while (in) {
    in.read(buf, sizeof(buf));
    std::streamsize got = in.gcount();
    if (got > 0) {
      h.update(buf, static_cast<size_t>(got));
      total += static_cast<uint64_t>(got);
    }
  }
  if (size_out) *size_out = total;
  return h.finish_hex();
}

}  // namespace streamtrace
