#pragma once

// Exact-arithmetic evaluation support for the oracle tests.

#include <stdexcept>

#include <boost/multiprecision/cpp_int.hpp>

namespace testsupport {

using BigRational = boost::multiprecision::cpp_rational;

/// Scalar ops running SmoothExpr evaluation over exact rationals.  Only the
/// field operations are defined; transcendental nodes throw, except that
/// `exp_as_unit` maps every exp node to 1 (i.e. divides the whole monomial by
/// e^{h(x0)}, which is exact for expressions of degree one in a common
/// exponential factor).
struct RationalOps {
    bool exp_as_unit = false;

    BigRational from_double(double v) const { return BigRational(v); }
    bool is_zero(const BigRational& v) const { return v == 0; }
    bool is_positive(const BigRational& v) const { return v > 0; }
    BigRational exp(const BigRational&) const {
        if (exp_as_unit) return BigRational(1);
        throw std::runtime_error("exp not available over rationals");
    }
    BigRational log(const BigRational&) const {
        throw std::runtime_error("log not available over rationals");
    }
    BigRational sin(const BigRational&) const {
        throw std::runtime_error("sin not available over rationals");
    }
    BigRational cos(const BigRational&) const {
        throw std::runtime_error("cos not available over rationals");
    }
    BigRational sinh(const BigRational&) const {
        throw std::runtime_error("sinh not available over rationals");
    }
    BigRational cosh(const BigRational&) const {
        throw std::runtime_error("cosh not available over rationals");
    }
};

}  // namespace testsupport
