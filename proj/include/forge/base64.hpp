#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace forge::base64 {

std::string encode(const std::vector<std::uint8_t>& bytes);
// Throws invalid_argument on characters outside the standard alphabet.
std::vector<std::uint8_t> decode(std::string_view text);

}  // namespace forge::base64
