#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qpq {

// One element per bit, each 0 or 1.
using Bits = std::vector<std::uint8_t>;

// Packs bits most significant bit first; the final byte is zero-padded.
std::vector<std::uint8_t> pack_bits(std::span<const std::uint8_t> bits);

// Inverse of pack_bits. Throws DomainError when bytes is too short or the
// padding bits are not zero.
Bits unpack_bits(std::span<const std::uint8_t> bytes, std::size_t count);

std::string bits_to_string(std::span<const std::uint8_t> bits);
Bits bits_from_string(std::string_view text);

enum class DatabaseFormat { Auto, Binary, Hex };

// Parses an N-bit database from text. Binary is a run of '0'/'1' characters;
// hex is ceil(N/4) hex digits, most significant bit first, optional "0x".
// Whitespace is ignored. Auto picks binary when the text is exactly N
// binary digits, otherwise hex.
Bits parse_database(std::string_view text, std::size_t n, DatabaseFormat format = DatabaseFormat::Auto);
Bits load_database(const std::string& path, std::size_t n, DatabaseFormat format = DatabaseFormat::Auto);

}  // namespace qpq
