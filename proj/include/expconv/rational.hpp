#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace expconv {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

BigInt factorial(unsigned n);

/// "p/q" or "p" in lowest terms.
std::string to_string(const Rational& value);

/// Parses "p", "p/q", or a finite decimal literal such as "-1.25" exactly.
Rational parse_rational(const std::string& text);

double to_double(const Rational& value);

/// r ↦ q(q-1)...(q-r+1); equals 1 for r = 0.
Rational falling_factorial(const Rational& q, unsigned r);

Rational pow(const Rational& base, int exponent);

}  // namespace expconv
