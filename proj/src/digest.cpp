#include "ctkit/digest.hpp"

#include <fstream>
#include <sstream>

#include "ctkit/errors.hpp"

namespace ctkit {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string digest_hex(std::uint64_t digest) {
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = hex[digest & 0xF];
    digest >>= 4;
  }
  return out;
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open for digest: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return "fnv1a64:" + digest_hex(fnv1a64(buf.str()));
}

}  // namespace ctkit
