#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace seirios::harness {

// RFC 4648 base64 with padding; the 6-bit text encoding used for IQ
// payloads on the upload line protocol.
std::string base64_encode(const std::uint8_t* data, std::size_t len);
std::string base64_encode(const std::vector<std::uint8_t>& data);

// Throws std::invalid_argument on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace seirios::harness
