#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace iam {

// Lowercase hex.
std::string to_hex(std::span<const std::uint8_t> bytes);
// nullopt on odd length or a non-hex character. Accepts either case.
std::optional<std::vector<std::uint8_t>> from_hex(std::string_view hex);

std::optional<int> hex_digit_value(char c);

}  // namespace iam
