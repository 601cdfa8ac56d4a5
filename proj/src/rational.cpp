#include "expconv/rational.hpp"

#include "expconv/error.hpp"

#include <cctype>

namespace expconv {

BigInt factorial(unsigned n) {
    BigInt result = 1;
    for (unsigned i = 2; i <= n; ++i) result *= i;
    return result;
}

std::string to_string(const Rational& value) {
    const BigInt num = boost::multiprecision::numerator(value);
    const BigInt den = boost::multiprecision::denominator(value);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

Rational parse_rational(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (s.empty()) throw InputError("empty rational literal");

    auto parse_decimal = [&](const std::string& part) -> Rational {
        std::size_t pos = 0;
        bool negative = false;
        if (part[pos] == '+' || part[pos] == '-') negative = part[pos++] == '-';
        BigInt digits = 0;
        BigInt scale = 1;
        bool seen_digit = false;
        bool after_point = false;
        for (; pos < part.size(); ++pos) {
            const char c = part[pos];
            if (c == '.' && !after_point) {
                after_point = true;
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                digits = digits * 10 + (c - '0');
                if (after_point) scale *= 10;
                seen_digit = true;
            } else {
                throw InputError("malformed rational literal '" + text + "'");
            }
        }
        if (!seen_digit) throw InputError("malformed rational literal '" + text + "'");
        Rational value(digits, scale);
        return negative ? Rational(-value) : value;
    };

    const auto slash = s.find('/');
    if (slash == std::string::npos) return parse_decimal(s);
    const Rational num = parse_decimal(s.substr(0, slash));
    const Rational den = parse_decimal(s.substr(slash + 1));
    if (den == 0) throw InputError("zero denominator in '" + text + "'");
    return num / den;
}

double to_double(const Rational& value) { return value.convert_to<double>(); }

Rational falling_factorial(const Rational& q, unsigned r) {
    Rational result = 1;
    for (unsigned j = 0; j < r; ++j) result *= (q - j);
    return result;
}

Rational pow(const Rational& base, int exponent) {
    if (exponent < 0) {
        if (base == 0) throw InputError("zero raised to a negative power");
        return pow(Rational(1) / base, -exponent);
    }
    Rational result = 1;
    for (int i = 0; i < exponent; ++i) result *= base;
    return result;
}

}  // namespace expconv
