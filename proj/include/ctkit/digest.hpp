#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace ctkit {

// FNV-1a 64-bit content digest. Used for provenance manifests and
// reproducibility checks, not for security.
std::uint64_t fnv1a64(std::string_view bytes);
std::string digest_hex(std::uint64_t digest);
std::string file_digest(const std::filesystem::path& path);

}  // namespace ctkit
