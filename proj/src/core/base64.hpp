#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace opf::base64 {

std::string encode(const std::vector<uint8_t>& data);
std::string encode(std::string_view data);

// Strict RFC 4648 decoding: standard alphabet, correct '=' padding, no
// embedded whitespace. Raises Errc::parse on anything else.
std::vector<uint8_t> decode(std::string_view text);

} // namespace opf::base64
