#pragma once

#include <cmath>
#include <limits>
#include <string>

namespace expconv {

/// Signed log-magnitude scalar: value = sign · e^{log_magnitude}.
/// sign == 0 exactly when log_magnitude == -inf.
class LogValue {
public:
    constexpr LogValue() = default;

    static LogValue zero() { return {}; }
    static LogValue one() { return from_log(0.0); }
    /// +e^{log_magnitude}
    static LogValue from_log(double log_magnitude, int sign = 1);
    static LogValue from_double(double value);

    int sign() const { return sign_; }
    double log_magnitude() const { return log_magnitude_; }
    bool is_zero() const { return sign_ == 0; }

    /// May overflow to ±inf or underflow to 0.
    double to_double() const;

    LogValue operator-() const;
    LogValue abs() const { return from_log(log_magnitude_, sign_ == 0 ? 0 : 1); }
    LogValue pow(unsigned k) const;
    /// Multiplies by e^{shift}.
    LogValue shifted(double shift) const;

    bool operator==(const LogValue&) const = default;

    std::string to_string() const;

private:
    int sign_ = 0;
    double log_magnitude_ = -std::numeric_limits<double>::infinity();
};

LogValue operator+(const LogValue& a, const LogValue& b);
LogValue operator-(const LogValue& a, const LogValue& b);
LogValue operator*(const LogValue& a, const LogValue& b);
/// Throws std::domain_error when b is zero.
LogValue operator/(const LogValue& a, const LogValue& b);

/// Result of a log-domain addition that may have cancelled.
/// `cancellation_nats` is how far the result sits below the largest operand.
struct CheckedLogValue {
    LogValue value;
    double cancellation_nats = 0.0;
    bool ill_conditioned = false;
};

/// Results more than this far below the largest contributing term are flagged.
inline constexpr double kCancellationThresholdNats = 30.0;

enum class LogOp { add, sub, mul, div };

CheckedLogValue log_arith(LogOp op, const LogValue& a, const LogValue& b);

/// Streaming signed log-sum-exp. Positive and negative parts are kept
/// separately as (shift, scaled sum) pairs, so terms of any magnitude can be
/// folded without overflow. The fold order is the insertion order.
class LogSum {
public:
    void add(const LogValue& term);
    void add_log(double log_magnitude, int sign);

    LogValue value() const;
    /// Sum of |terms|.
    LogValue absolute() const;
    /// log-magnitude of the largest |term| seen (-inf if none).
    double max_term_log() const { return max_log_; }
    CheckedLogValue checked_value() const;

private:
    struct Part {
        double shift = -std::numeric_limits<double>::infinity();
        double scaled = 0.0;
        double compensation = 0.0;  // Neumaier running error of `scaled`
        void add(double log_magnitude);
        double log() const;
    };
    Part positive_;
    Part negative_;
    double max_log_ = -std::numeric_limits<double>::infinity();
};

}  // namespace expconv
