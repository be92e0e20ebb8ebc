#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <stdexcept>
#include <string>

namespace ci {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

/// Renders a rational as "p/q" in lowest terms, or just "p" when q == 1.
inline std::string rat_to_string(const Rat& r) {
    std::string s = numerator(r).str();
    if (denominator(r) != 1) {
        s += "/";
        s += denominator(r).str();
    }
    return s;
}

/// Parses "p/q" or "p" (decimal notation is rejected).
inline std::optional<Rat> parse_rational(const std::string& s) {
    if (s.empty()) return std::nullopt;
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) {
            return Rat(Int(s));
        }
        Int num(s.substr(0, slash));
        Int den(s.substr(slash + 1));
        if (den == 0) return std::nullopt;
        return Rat(num, den);
    } catch (const std::runtime_error&) {
        return std::nullopt;
    }
}

inline Int ceil_rat(const Rat& r) {
    Int q = numerator(r) / denominator(r);
    if (q * denominator(r) < numerator(r)) ++q;
    return q;
}

inline Int floor_rat(const Rat& r) {
    Int q = numerator(r) / denominator(r);
    if (q * denominator(r) > numerator(r)) --q;
    return q;
}

}  // namespace ci
