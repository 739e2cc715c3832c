#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace btx::utf8 {

/// Unicode scalar values of `s`. Malformed sequences decode to U+FFFD, one per bad byte.
std::u32string decode(std::string_view s);

std::string encode(std::u32string_view s);

/// ASCII whitespace: space, \t, \n, \v, \f, \r.
constexpr bool is_space(char32_t c) { return c == U' ' || (c >= U'\t' && c <= U'\r'); }

}  // namespace btx::utf8
