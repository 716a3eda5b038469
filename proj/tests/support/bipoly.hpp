#pragma once

// Minimal exact bivariate-polynomial machinery: the test-side oracle for the
// mixed-derivative formulas.  Repeated symbolic differentiation of
// log(1+J) is represented as num / (1+J)^k with polynomial num, which keeps
// the term count controlled.

#include <map>
#include <utility>
#include <vector>

#include "support/rational.hpp"

namespace testsupport {

struct BiPoly {
    // (t-power, x-power) -> coefficient
    std::map<std::pair<int, int>, BigRational> c;

    static BiPoly monomial(int p, int q, const BigRational& coeff) {
        BiPoly r;
        if (coeff != 0) r.c[{p, q}] = coeff;
        return r;
    }

    BiPoly operator+(const BiPoly& o) const {
        BiPoly r = *this;
        for (const auto& [k, v] : o.c) {
            r.c[k] += v;
            if (r.c[k] == 0) r.c.erase(k);
        }
        return r;
    }

    BiPoly operator-(const BiPoly& o) const {
        BiPoly r = *this;
        for (const auto& [k, v] : o.c) {
            r.c[k] -= v;
            if (r.c[k] == 0) r.c.erase(k);
        }
        return r;
    }

    BiPoly operator*(const BiPoly& o) const {
        BiPoly r;
        for (const auto& [ka, va] : c)
            for (const auto& [kb, vb] : o.c) {
                const std::pair<int, int> k{ka.first + kb.first, ka.second + kb.second};
                r.c[k] += va * vb;
                if (r.c[k] == 0) r.c.erase(k);
            }
        return r;
    }

    BiPoly scaled(const BigRational& s) const {
        BiPoly r;
        if (s == 0) return r;
        for (const auto& [k, v] : c) r.c[k] = v * s;
        return r;
    }

    BiPoly dt() const {
        BiPoly r;
        for (const auto& [k, v] : c)
            if (k.first > 0) r.c[{k.first - 1, k.second}] += v * k.first;
        return r;
    }

    BiPoly dx() const {
        BiPoly r;
        for (const auto& [k, v] : c)
            if (k.second > 0) r.c[{k.first, k.second - 1}] += v * k.second;
        return r;
    }

    BigRational eval(const BigRational& t, const BigRational& x) const {
        BigRational sum = 0;
        for (const auto& [k, v] : c) {
            BigRational term = v;
            for (int i = 0; i < k.first; ++i) term *= t;
            for (int i = 0; i < k.second; ++i) term *= x;
            sum += term;
        }
        return sum;
    }
};

/// num / (1+J)^k with exact differentiation rules.
struct LogDerivative {
    BiPoly num;
    BiPoly base;  // 1 + J
    int k = 0;

    LogDerivative dt() const {
        return {num.dt() * base - num.scaled(BigRational(k)) * base.dt(), base, k + 1};
    }
    LogDerivative dx() const {
        return {num.dx() * base - num.scaled(BigRational(k)) * base.dx(), base, k + 1};
    }
    BigRational eval(const BigRational& t, const BigRational& x) const {
        BigRational denom = 1;
        const BigRational b = base.eval(t, x);
        for (int i = 0; i < k; ++i) denom *= b;
        return num.eval(t, x) / denom;
    }
};

/// d1^gamma d2^beta log(1+J) at (t0, x0), exactly (beta >= 1).
inline BigRational mixed_log_oracle(const BiPoly& J, int gamma, int beta, const BigRational& t0,
                                    const BigRational& x0) {
    const BiPoly base = J + BiPoly::monomial(0, 0, 1);
    LogDerivative d{base.dx(), base, 1};  // d2 log(1+J)
    for (int i = 1; i < beta; ++i) d = d.dx();
    for (int i = 0; i < gamma; ++i) d = d.dt();
    return d.eval(t0, x0);
}

/// Full mixed jet table jt[j][k] = d1^j d2^k J at (t0, x0).
inline std::vector<std::vector<BigRational>> mixed_jet_table(const BiPoly& J, int gamma, int beta,
                                                             const BigRational& t0,
                                                             const BigRational& x0) {
    std::vector<std::vector<BigRational>> jt(static_cast<std::size_t>(gamma) + 1);
    BiPoly row = J;
    for (int j = 0; j <= gamma; ++j) {
        BiPoly cell = row;
        jt[static_cast<std::size_t>(j)].reserve(static_cast<std::size_t>(beta) + 1);
        for (int k = 0; k <= beta; ++k) {
            jt[static_cast<std::size_t>(j)].push_back(cell.eval(t0, x0));
            cell = cell.dx();
        }
        row = row.dt();
    }
    return jt;
}

inline std::vector<std::vector<double>> to_double_table(
    const std::vector<std::vector<BigRational>>& jt) {
    std::vector<std::vector<double>> out(jt.size());
    for (std::size_t i = 0; i < jt.size(); ++i)
        for (const auto& v : jt[i]) out[i].push_back(static_cast<double>(v));
    return out;
}

}  // namespace testsupport
