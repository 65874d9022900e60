#pragma once

#include <string>
#include <string_view>

namespace taxoqa {

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::string& path);

// Standard alphabet with padding.
std::string base64_encode(std::string_view bytes);

}  // namespace taxoqa
