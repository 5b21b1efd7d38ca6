#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace kgcoop {

std::uint64_t fnv1a64(std::string_view bytes);

// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace kgcoop
