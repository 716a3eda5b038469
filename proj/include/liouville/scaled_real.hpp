#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace liouville {

/// Sign-magnitude floating value `mantissa * 2^exponent` with |mantissa| in
/// [1,2).  Keeps quantities representable far beyond the native double range;
/// solutions of g'' = u*g with u > 0 grow exponentially and overflow doubles
/// long before the domains of interest are exhausted.
class ScaledReal {
public:
    ScaledReal() = default;

    ScaledReal(double v) {  // NOLINT: implicit by design, value semantics
        if (v == 0.0) return;
        if (!std::isfinite(v)) throw std::overflow_error("ScaledReal: non-finite input");
        int e = 0;
        mantissa_ = 2.0 * std::frexp(v, &e);  // frexp: [0.5,1) -> [1,2)
        exponent_ = e - 1;
    }

    static ScaledReal from_parts(double mantissa, std::int64_t exponent) {
        ScaledReal r(mantissa);
        if (!r.is_zero()) r.exponent_ += exponent;
        return r;
    }

    double mantissa() const { return mantissa_; }
    std::int64_t exponent() const { return exponent_; }
    bool is_zero() const { return mantissa_ == 0.0; }
    int sign() const { return mantissa_ > 0 ? 1 : (mantissa_ < 0 ? -1 : 0); }

    /// Convert back to double; throws on overflow, flushes to 0 on underflow.
    double to_double() const {
        if (is_zero()) return 0.0;
        if (exponent_ > 1023) throw std::overflow_error("ScaledReal: unscale overflow");
        if (exponent_ < -1074) return 0.0;
        return std::ldexp(mantissa_, static_cast<int>(exponent_));
    }

    /// log|value|; requires a nonzero value.
    double log_abs() const {
        if (is_zero()) throw std::domain_error("ScaledReal: log of zero");
        constexpr double ln2 = 0.6931471805599453;
        return std::log(std::fabs(mantissa_)) + static_cast<double>(exponent_) * ln2;
    }

    ScaledReal operator-() const {
        ScaledReal r = *this;
        r.mantissa_ = -r.mantissa_;
        return r;
    }

    friend ScaledReal operator*(const ScaledReal& a, const ScaledReal& b) {
        if (a.is_zero() || b.is_zero()) return {};
        ScaledReal r;
        r.mantissa_ = a.mantissa_ * b.mantissa_;  // in (1,4)
        r.exponent_ = a.exponent_ + b.exponent_;
        return r.normalized();
    }

    friend ScaledReal operator/(const ScaledReal& a, const ScaledReal& b) {
        if (b.is_zero()) throw std::domain_error("ScaledReal: division by zero");
        if (a.is_zero()) return {};
        ScaledReal r;
        r.mantissa_ = a.mantissa_ / b.mantissa_;  // in (0.5,2)
        r.exponent_ = a.exponent_ - b.exponent_;
        return r.normalized();
    }

    friend ScaledReal operator+(const ScaledReal& a, const ScaledReal& b) {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        const ScaledReal& hi = (a.exponent_ >= b.exponent_) ? a : b;
        const ScaledReal& lo = (a.exponent_ >= b.exponent_) ? b : a;
        const std::int64_t d = hi.exponent_ - lo.exponent_;
        if (d > 1100) return hi;  // lo is below one ulp of hi
        ScaledReal r;
        r.mantissa_ = hi.mantissa_ + std::ldexp(lo.mantissa_, static_cast<int>(-d));
        r.exponent_ = hi.exponent_;
        return r.normalized();
    }

    friend ScaledReal operator-(const ScaledReal& a, const ScaledReal& b) { return a + (-b); }

    ScaledReal abs() const {
        ScaledReal r = *this;
        r.mantissa_ = std::fabs(r.mantissa_);
        return r;
    }

    /// |a| < |b|
    static bool abs_less(const ScaledReal& a, const ScaledReal& b) {
        if (a.is_zero()) return !b.is_zero();
        if (b.is_zero()) return false;
        if (a.exponent_ != b.exponent_) return a.exponent_ < b.exponent_;
        return std::fabs(a.mantissa_) < std::fabs(b.mantissa_);
    }

    static ScaledReal max_abs(const ScaledReal& a, const ScaledReal& b) {
        return abs_less(a, b) ? b.abs() : a.abs();
    }

private:
    ScaledReal normalized() const {
        if (mantissa_ == 0.0) return {};
        ScaledReal r;
        int e = 0;
        r.mantissa_ = 2.0 * std::frexp(mantissa_, &e);
        r.exponent_ = exponent_ + e - 1;
        return r;
    }

    double mantissa_ = 0.0;
    std::int64_t exponent_ = 0;
};

}  // namespace liouville
