#pragma once

#include <optional>
#include <span>
#include <string_view>

namespace guardgate {

// Built-in PII patterns (ECMAScript regex syntax). The same table ships as
// data/builtin_patterns.json; the two are kept identical by a unit test.
inline constexpr int kBuiltinCatalogVersion = 1;

struct BuiltinPattern {
    std::string_view name;
    std::string_view source;
};

std::span<const BuiltinPattern> builtin_catalog();

std::optional<std::string_view> find_builtin_pattern(std::string_view name);

} // namespace guardgate
