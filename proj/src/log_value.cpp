#include "expconv/log_value.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace expconv {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(e^a + e^b) for finite-or--inf a, b.
double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double hi = std::max(a, b);
    const double lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi));
}
}  // namespace

LogValue LogValue::from_log(double log_magnitude, int sign) {
    LogValue v;
    if (sign == 0 || log_magnitude == kNegInf) return v;
    if (std::isnan(log_magnitude)) throw std::domain_error("LogValue: NaN log-magnitude");
    v.sign_ = sign > 0 ? 1 : -1;
    v.log_magnitude_ = log_magnitude;
    return v;
}

LogValue LogValue::from_double(double value) {
    if (std::isnan(value)) throw std::domain_error("LogValue: NaN input");
    if (value == 0.0) return {};
    return from_log(std::log(std::fabs(value)), value > 0 ? 1 : -1);
}

double LogValue::to_double() const {
    if (sign_ == 0) return 0.0;
    return sign_ * std::exp(log_magnitude_);
}

LogValue LogValue::operator-() const {
    LogValue v = *this;
    v.sign_ = -v.sign_;
    return v;
}

LogValue LogValue::pow(unsigned k) const {
    if (k == 0) return one();
    if (sign_ == 0) return {};
    const int s = (sign_ < 0 && (k % 2 == 1)) ? -1 : 1;
    return from_log(log_magnitude_ * k, s);
}

LogValue LogValue::shifted(double shift) const {
    if (sign_ == 0) return {};
    return from_log(log_magnitude_ + shift, sign_);
}

std::string LogValue::to_string() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "(%+d, %.17g)", sign_, log_magnitude_);
    return buf;
}

LogValue operator+(const LogValue& a, const LogValue& b) { return log_arith(LogOp::add, a, b).value; }
LogValue operator-(const LogValue& a, const LogValue& b) { return log_arith(LogOp::sub, a, b).value; }
LogValue operator*(const LogValue& a, const LogValue& b) { return log_arith(LogOp::mul, a, b).value; }
LogValue operator/(const LogValue& a, const LogValue& b) { return log_arith(LogOp::div, a, b).value; }

CheckedLogValue log_arith(LogOp op, const LogValue& a, const LogValue& b) {
    switch (op) {
        case LogOp::mul:
            if (a.is_zero() || b.is_zero()) return {};
            return {LogValue::from_log(a.log_magnitude() + b.log_magnitude(), a.sign() * b.sign())};
        case LogOp::div:
            if (b.is_zero()) throw std::domain_error("LogValue: division by zero");
            if (a.is_zero()) return {};
            return {LogValue::from_log(a.log_magnitude() - b.log_magnitude(), a.sign() * b.sign())};
        case LogOp::add:
        case LogOp::sub: {
            const LogValue rhs = op == LogOp::sub ? -b : b;
            if (a.is_zero()) return {rhs};
            if (rhs.is_zero()) return {a};
            if (a.sign() == rhs.sign())
                return {LogValue::from_log(log_add(a.log_magnitude(), rhs.log_magnitude()), a.sign())};
            const double hi = std::max(a.log_magnitude(), rhs.log_magnitude());
            const double lo = std::min(a.log_magnitude(), rhs.log_magnitude());
            const int sign = a.log_magnitude() >= rhs.log_magnitude() ? a.sign() : rhs.sign();
            if (hi == lo) return {LogValue::zero(), std::numeric_limits<double>::infinity(), true};
            const double result = hi + std::log1p(-std::exp(lo - hi));
            const double drop = hi - result;
            return {LogValue::from_log(result, sign), drop, drop > kCancellationThresholdNats};
        }
    }
    return {};
}

void LogSum::Part::add(double log_magnitude) {
    if (log_magnitude > shift) {
        const double factor = std::exp(shift - log_magnitude);
        scaled *= factor;
        compensation *= factor;
        shift = log_magnitude;
    }
    const double term = std::exp(log_magnitude - shift);
    const double sum = scaled + term;
    compensation += std::fabs(scaled) >= term ? (scaled - sum) + term : (term - sum) + scaled;
    scaled = sum;
}

double LogSum::Part::log() const {
    const double total = scaled + compensation;
    if (total == 0.0) return kNegInf;
    return shift + std::log(total);
}

void LogSum::add_log(double log_magnitude, int sign) {
    if (sign == 0 || log_magnitude == kNegInf) return;
    max_log_ = std::max(max_log_, log_magnitude);
    (sign > 0 ? positive_ : negative_).add(log_magnitude);
}

void LogSum::add(const LogValue& term) { add_log(term.log_magnitude(), term.sign()); }

LogValue LogSum::value() const { return checked_value().value; }

LogValue LogSum::absolute() const {
    return LogValue::from_log(log_add(positive_.log(), negative_.log()), 1);
}

CheckedLogValue LogSum::checked_value() const {
    CheckedLogValue out =
        log_arith(LogOp::sub, LogValue::from_log(positive_.log()), LogValue::from_log(negative_.log()));
    if (max_log_ != kNegInf) {
        const double drop = out.value.is_zero() ? std::numeric_limits<double>::infinity()
                                                : max_log_ - out.value.log_magnitude();
        out.cancellation_nats = std::max(0.0, drop);
        out.ill_conditioned = drop > kCancellationThresholdNats;
    }
    return out;
}

}  // namespace expconv
