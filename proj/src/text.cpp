#include "guardgate/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <stdexcept>

namespace guardgate::text {

namespace {

const icu::Normalizer2& casefold_normalizer() {
    static const icu::Normalizer2* instance = [] {
        UErrorCode status = U_ZERO_ERROR;
        const icu::Normalizer2* n = icu::Normalizer2::getNFKCCasefoldInstance(status);
        if (U_FAILURE(status) || n == nullptr) {
            throw std::runtime_error("ICU NFKC_Casefold normalizer unavailable");
        }
        return n;
    }();
    return *instance;
}

bool is_word_start(UChar32 c) { return c >= 0 && u_isalnum(c); }

bool is_word_continue(UChar32 c) {
    return c >= 0 && (u_isalnum(c) || (U_GET_GC_MASK(c) & U_GC_M_MASK) != 0);
}

template <typename Emit>
void scan_runs(std::string_view s, Emit&& emit) {
    const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
    const auto length = static_cast<int32_t>(s.size());
    int32_t i = 0;
    int32_t run_start = -1;
    while (i < length) {
        const int32_t at = i;
        UChar32 c = 0;
        U8_NEXT(bytes, i, length, c);
        const bool in_run = run_start >= 0;
        if (in_run ? is_word_continue(c) : is_word_start(c)) {
            if (!in_run) run_start = at;
            continue;
        }
        if (in_run) {
            emit(static_cast<std::size_t>(run_start), static_cast<std::size_t>(at));
            run_start = -1;
        }
    }
    if (run_start >= 0) {
        emit(static_cast<std::size_t>(run_start), static_cast<std::size_t>(length));
    }
}

} // namespace

std::string nfkc_casefold(std::string_view input) {
    UErrorCode status = U_ZERO_ERROR;
    const auto source = icu::UnicodeString::fromUTF8(
        icu::StringPiece(input.data(), static_cast<int32_t>(input.size())));
    const icu::UnicodeString folded = casefold_normalizer().normalize(source, status);
    if (U_FAILURE(status)) {
        throw std::runtime_error("NFKC_Casefold normalization failed");
    }
    std::string out;
    folded.toUTF8String(out);
    return out;
}

std::vector<Token> tokenize(std::string_view input) {
    std::vector<Token> tokens;
    scan_runs(input, [&](std::size_t start, std::size_t end) {
        const std::string folded = nfkc_casefold(input.substr(start, end - start));
        scan_runs(folded, [&](std::size_t s, std::size_t e) {
            tokens.push_back(Token{start, end, folded.substr(s, e - s)});
        });
    });
    return tokens;
}

std::vector<std::string> words(std::string_view input) {
    std::vector<std::string> out;
    for (auto& t : tokenize(input)) out.push_back(std::move(t.norm));
    return out;
}

bool is_char_boundary(std::string_view input, std::size_t offset) {
    if (offset == 0 || offset == input.size()) return true;
    if (offset > input.size()) return false;
    // UTF-8 continuation bytes are 10xxxxxx.
    return (static_cast<unsigned char>(input[offset]) & 0xC0) != 0x80;
}

std::string placeholder(std::string_view rule_id) {
    std::string out(kPlaceholderPrefix);
    out += rule_id;
    out += ']';
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> placeholder_ranges(std::string_view input) {
    std::vector<std::pair<std::size_t, std::size_t>> ranges;
    std::size_t pos = 0;
    while ((pos = input.find(kPlaceholderPrefix, pos)) != std::string_view::npos) {
        const std::size_t close = input.find(']', pos + kPlaceholderPrefix.size());
        if (close == std::string_view::npos) break;
        ranges.emplace_back(pos, close + 1);
        pos = close + 1;
    }
    return ranges;
}

std::string mask_placeholders(std::string_view input) {
    std::string out(input);
    for (const auto& [start, end] : placeholder_ranges(input)) {
        for (std::size_t i = start; i < end; ++i) out[i] = ' ';
    }
    return out;
}

} // namespace guardgate::text
