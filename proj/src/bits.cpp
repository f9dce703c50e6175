#include "qpq/bits.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "qpq/errors.hpp"

namespace qpq {

std::vector<std::uint8_t> pack_bits(std::span<const std::uint8_t> bits) {
  std::vector<std::uint8_t> out((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) out[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
  }
  return out;
}

Bits unpack_bits(std::span<const std::uint8_t> bytes, std::size_t count) {
  if (bytes.size() != (count + 7) / 8) throw DomainError("packed bit array has wrong length");
  Bits out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = (bytes[i / 8] >> (7 - i % 8)) & 1u;
  if (count % 8 != 0) {
    const std::uint8_t pad_mask = static_cast<std::uint8_t>(0xFFu >> (count % 8));
    if (bytes.back() & pad_mask) throw DomainError("nonzero padding in packed bit array");
  }
  return out;
}

std::string bits_to_string(std::span<const std::uint8_t> bits) {
  std::string s(bits.size(), '0');
  for (std::size_t i = 0; i < bits.size(); ++i) s[i] = bits[i] ? '1' : '0';
  return s;
}

Bits bits_from_string(std::string_view text) {
  Bits out;
  out.reserve(text.size());
  for (char c : text) {
    if (c == '0' || c == '1') {
      out.push_back(static_cast<std::uint8_t>(c - '0'));
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      throw DomainError(std::string("invalid binary digit '") + c + "'");
    }
  }
  return out;
}

namespace {

std::string strip(std::string_view text) {
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  }
  return s;
}

Bits parse_hex(std::string s, std::size_t n) {
  if (s.size() >= 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) s.erase(0, 2);
  if (s.size() != (n + 3) / 4) {
    throw DomainError("hex database has " + std::to_string(s.size()) + " digits, expected " +
                      std::to_string((n + 3) / 4));
  }
  Bits out;
  out.reserve(s.size() * 4);
  for (char c : s) {
    if (!std::isxdigit(static_cast<unsigned char>(c))) throw DomainError(std::string("invalid hex digit '") + c + "'");
    const int v = std::isdigit(static_cast<unsigned char>(c)) ? c - '0' : std::tolower(c) - 'a' + 10;
    for (int b = 3; b >= 0; --b) out.push_back(static_cast<std::uint8_t>((v >> b) & 1));
  }
  for (std::size_t i = n; i < out.size(); ++i) {
    if (out[i]) throw DomainError("hex database has nonzero trailing bits");
  }
  out.resize(n);
  return out;
}

}  // namespace

Bits parse_database(std::string_view text, std::size_t n, DatabaseFormat format) {
  std::string s = strip(text);
  if (format == DatabaseFormat::Auto) {
    const bool binary = s.size() == n && s.find_first_not_of("01") == std::string::npos;
    format = binary ? DatabaseFormat::Binary : DatabaseFormat::Hex;
  }
  if (format == DatabaseFormat::Binary) {
    Bits bits = bits_from_string(s);
    if (bits.size() != n) {
      throw DomainError("binary database has " + std::to_string(bits.size()) + " bits, expected " + std::to_string(n));
    }
    return bits;
  }
  return parse_hex(std::move(s), n);
}

Bits load_database(const std::string& path, std::size_t n, DatabaseFormat format) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open database file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_database(ss.str(), n, format);
}

}  // namespace qpq
