#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "celds/domain.hpp"

namespace celds {

/// The "undefined" value of a location (isDef is false).
struct Undef {
    friend bool operator==(Undef, Undef) { return true; }
    friend auto operator<=>(Undef, Undef) = default;
};

/// Enumeration constants and agent names.
struct Symbol {
    std::string name;
    friend bool operator==(const Symbol&, const Symbol&) = default;
    friend auto operator<=>(const Symbol&, const Symbol&) = default;
};

using IdList = std::vector<std::string>;

using Value = std::variant<Undef, bool, std::int64_t, double, Symbol, NodeMetrics, IdList>;

std::string to_string(const Value& v);

/// Structural equality, except that integers and reals compare numerically.
bool values_equal(const Value& a, const Value& b);

/// Numeric view of an int or real value.
std::optional<double> as_number(const Value& v);

/// A location of the machine state: `function(argument)`.
struct Location {
    std::string function;
    std::string argument;

    std::string name() const { return function + "(" + argument + ")"; }

    friend bool operator==(const Location&, const Location&) = default;
    friend auto operator<=>(const Location&, const Location&) = default;
};

} // namespace celds
