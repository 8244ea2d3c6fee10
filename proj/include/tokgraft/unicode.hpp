#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tokgraft::uni {

bool is_letter(std::uint32_t cp);
bool is_mark(std::uint32_t cp);
bool is_number(std::uint32_t cp);
bool is_space(std::uint32_t cp);
std::uint8_t combining_class(std::uint32_t cp);

// Decodes one UTF-8 scalar value starting at `pos`. Returns the number of
// bytes consumed, or 0 if the input is not well-formed UTF-8 there
// (truncated sequence, overlong form, surrogate, out of range).
std::size_t decode_utf8(std::string_view s, std::size_t pos, std::uint32_t& cp);

bool is_valid_utf8(std::string_view s);

void append_utf8(std::string& out, std::uint32_t cp);
std::string encode_utf8(const std::vector<std::uint32_t>& cps);

// Throws Error(invalid_utf8) on malformed input.
std::vector<std::uint32_t> to_codepoints(std::string_view s);

// Canonical composition (NFC). Throws Error(invalid_utf8) on malformed input.
std::string to_nfc(std::string_view s);

}  // namespace tokgraft::uni
