#pragma once

#include <cstdio>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace incmeter {

// Exact arithmetic for payoff values and aggregates. Kept in lowest terms
// with a positive denominator by the underlying representation.
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt factorial(unsigned n) {
    BigInt f = 1;
    for (unsigned i = 2; i <= n; ++i) f *= i;
    return f;
}

// "p" when integral, "p/q" otherwise.
inline std::string to_string(const Rational& q) {
    std::string s = numerator(q).str();
    if (denominator(q) != 1) {
        s += '/';
        s += denominator(q).str();
    }
    return s;
}

inline double to_double(const Rational& q) {
    return q.convert_to<double>();
}

// Shortest-ish decimal rendering used in CSV output next to the exact value.
inline std::string to_decimal_string(const Rational& q) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", to_double(q));
    return buf;
}

}  // namespace incmeter
