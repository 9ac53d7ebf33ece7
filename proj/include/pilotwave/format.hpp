#pragma once

#include <string>

namespace pilotwave {

/// Shortest round-trip text for a double (%.17g).
std::string format_double(double v);

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

}  // namespace pilotwave
