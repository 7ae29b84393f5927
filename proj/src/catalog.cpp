#include "guardgate/catalog.hpp"

#include <algorithm>
#include <array>

namespace guardgate {

namespace {

constexpr std::array<BuiltinPattern, 5> kCatalog = {{
    {"email", R"(\b[A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,}\b)"},
    {"ssn", R"(\b\d{3}-\d{2}-\d{4}\b)"},
    {"phone", R"((?:\+1[-. ]?)?(?:\(\d{3}\)[-. ]?|\b\d{3}[-. ])\d{3}[-. ]\d{4}\b)"},
    {"credit_card", R"(\b(?:\d{4}[- ]?){3}\d{4}\b)"},
    {"ipv4", R"(\b(?:(?:25[0-5]|2[0-4]\d|1\d\d|[1-9]?\d)\.){3}(?:25[0-5]|2[0-4]\d|1\d\d|[1-9]?\d)\b)"},
}};

} // namespace

std::span<const BuiltinPattern> builtin_catalog() { return kCatalog; }

std::optional<std::string_view> find_builtin_pattern(std::string_view name) {
    const auto it = std::find_if(kCatalog.begin(), kCatalog.end(),
                                 [&](const BuiltinPattern& p) { return p.name == name; });
    if (it == kCatalog.end()) return std::nullopt;
    return it->source;
}

} // namespace guardgate
