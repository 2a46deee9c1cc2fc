#pragma once

#include <string>
#include <string_view>

namespace tokrot {

// FIPS 180-4 SHA-256, hex-encoded.
std::string sha256_hex(std::string_view data);

}  // namespace tokrot
