#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace guardgate::text {

// NFKC normalization followed by Unicode case folding (ICU's NFKC_Casefold).
// Invalid UTF-8 sequences are replaced with U+FFFD before normalizing.
std::string nfkc_casefold(std::string_view input);

// A word token: a maximal run of letters/digits (with any attached combining
// marks) in the original text. `norm` is the NFKC-casefolded form; one source
// run may yield several tokens when normalization introduces separators
// (e.g. "¼" -> "1⁄4"), in which case they share the source byte range.
struct Token {
    std::size_t start = 0;
    std::size_t end = 0;
    std::string norm;
};

std::vector<Token> tokenize(std::string_view input);

// Normalized token strings only.
std::vector<std::string> words(std::string_view input);

bool is_char_boundary(std::string_view input, std::size_t offset);

inline constexpr std::string_view kPlaceholderPrefix = "[REDACTED:";

std::string placeholder(std::string_view rule_id);

// Byte ranges [start, end) of every `[REDACTED:...]` placeholder in `input`.
std::vector<std::pair<std::size_t, std::size_t>> placeholder_ranges(std::string_view input);

// Copy of `input` with every placeholder overwritten by spaces; byte offsets
// are preserved so spans found in the result are valid for `input`.
std::string mask_placeholders(std::string_view input);

} // namespace guardgate::text
