#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "liouville/expr.hpp"
#include "liouville/jet.hpp"

namespace liouville {

/// Index sets for the combinatorial derivative formulas:
///   partition         R(beta):       a in N^beta with sum j*a_j = beta
///   padded_partition  R(lambda,mu):  a in N^{lambda+1}, sum_{j>=1} j*a_j = lambda,
///                                    sum_{j>=0} a_j = mu
///   composition       T(lambda,mu):  a in N^lambda with sum a_j = mu
enum class CompositionKind { partition, padded_partition, composition };

struct CompositionSet {
    CompositionKind kind;
    int p1 = 0, p2 = 0;
    std::vector<std::vector<int>> elements;  // lexicographically sorted, duplicate-free

    std::size_t size() const { return elements.size(); }
};

enum class CoefficientKind { multinomial_p, length_l, mixed_w, multinomial_n };

inline constexpr int kMaxPartitionOrder = 24;  // enumeration guard
inline constexpr int kMax1dFormulaOrder = 12;
inline constexpr int kMaxMixedFormulaOrder = 10;  // gamma + beta

namespace detail {

using bigint = boost::multiprecision::cpp_int;

inline bigint factorial(int n) {
    bigint r = 1;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

inline long long to_longlong(const bigint& v, const char* what) {
    if (v > bigint(9223372036854775807LL) || v < -bigint(9223372036854775807LL))
        throw std::overflow_error(std::string(what) + ": coefficient exceeds 64-bit range");
    return v.convert_to<long long>();
}

// partitions of beta as multiplicity vectors (a_1..a_beta)
inline void emit_partitions(int beta, std::vector<std::vector<int>>& out) {
    std::vector<int> a(static_cast<std::size_t>(beta), 0);
    const auto rec = [&](auto&& self, int part, int rem) -> void {
        if (rem == 0) {
            out.push_back(a);
            return;
        }
        if (part == 0) return;
        for (int cnt = rem / part; cnt >= 0; --cnt) {
            a[static_cast<std::size_t>(part - 1)] = cnt;
            self(self, part - 1, rem - cnt * part);
        }
        a[static_cast<std::size_t>(part - 1)] = 0;
    };
    rec(rec, beta, beta);
}

inline void emit_compositions(int len, int total, std::vector<std::vector<int>>& out) {
    std::vector<int> a(static_cast<std::size_t>(len), 0);
    const auto rec = [&](auto&& self, int pos, int rem) -> void {
        if (pos == len - 1) {
            a[static_cast<std::size_t>(pos)] = rem;
            out.push_back(a);
            return;
        }
        for (int v = 0; v <= rem; ++v) {
            a[static_cast<std::size_t>(pos)] = v;
            self(self, pos + 1, rem - v);
        }
    };
    if (len == 0) {
        if (total == 0) out.push_back({});
        return;
    }
    rec(rec, 0, total);
}

}  // namespace detail

/// Exhaustive enumeration of one of the index sets.  For padded partitions,
/// lambda = 0 is admitted with R(0, mu) = {(mu)} (an undifferentiated block),
/// which the mixed-derivative expansion needs whenever a composition entry
/// vanishes.
inline CompositionSet enumerate_compositions(CompositionKind kind, int p1, int p2 = 0) {
    CompositionSet set{kind, p1, p2, {}};
    switch (kind) {
        case CompositionKind::partition: {
            if (p1 < 1) throw std::invalid_argument("R(beta) requires beta >= 1");
            if (p1 > kMaxPartitionOrder)
                throw std::invalid_argument("R(beta) refused for beta > " +
                                            std::to_string(kMaxPartitionOrder));
            detail::emit_partitions(p1, set.elements);
            break;
        }
        case CompositionKind::padded_partition: {
            if (p1 < 0 || p2 < 0) throw std::invalid_argument("R(lambda,mu) requires lambda,mu >= 0");
            if (p1 > kMaxPartitionOrder)
                throw std::invalid_argument("R(lambda,mu) refused for lambda > " +
                                            std::to_string(kMaxPartitionOrder));
            std::vector<std::vector<int>> parts;
            if (p1 == 0)
                parts.push_back({});
            else
                detail::emit_partitions(p1, parts);
            for (const auto& p : parts) {
                int used = 0;
                for (int v : p) used += v;
                if (used > p2) continue;
                std::vector<int> padded;
                padded.reserve(p.size() + 1);
                padded.push_back(p2 - used);  // a_0
                padded.insert(padded.end(), p.begin(), p.end());
                set.elements.push_back(std::move(padded));
            }
            break;
        }
        case CompositionKind::composition: {
            if (p1 < 0 || p2 < 0) throw std::invalid_argument("T(lambda,mu) requires lambda,mu >= 0");
            if (p2 > kMaxPartitionOrder)
                throw std::invalid_argument("T(lambda,mu) refused for mu > " +
                                            std::to_string(kMaxPartitionOrder));
            detail::emit_compositions(p1, p2, set.elements);
            break;
        }
    }
    std::sort(set.elements.begin(), set.elements.end());
    return set;
}

namespace detail {

inline const CompositionSet& cached_set(CompositionKind kind, int p1, int p2) {
    static std::map<std::tuple<CompositionKind, int, int>, CompositionSet> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(kind, p1, p2);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, enumerate_compositions(kind, p1, p2)).first;
    return it->second;
}

inline void require_member(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string(what) + ": membership violation");
}

inline bigint coeff_p(int beta, std::span<const int> a) {
    require_member(static_cast<int>(a.size()) == beta, "P");
    int weighted = 0;
    for (int j = 1; j <= beta; ++j) {
        require_member(a[static_cast<std::size_t>(j - 1)] >= 0, "P");
        weighted += j * a[static_cast<std::size_t>(j - 1)];
    }
    require_member(weighted == beta, "P");
    bigint denom = 1;
    for (int j = 1; j <= beta; ++j) {
        const int aj = a[static_cast<std::size_t>(j - 1)];
        for (int r = 0; r < aj; ++r) denom *= factorial(j);
        denom *= factorial(aj);
    }
    return factorial(beta) / denom;
}

inline long long coeff_l(std::span<const int> a) {
    long long s = 0;
    for (int v : a) {
        require_member(v >= 0, "l");
        s += v;
    }
    return s;
}

// mu!/a0! * lambda!/prod_{j>=1} (j!)^{a_j} a_j!   (the a_j-multiset count of
// ways to spread lambda derivatives over mu identical factors)
inline bigint coeff_w(int lambda, int mu, std::span<const int> a) {
    require_member(static_cast<int>(a.size()) == lambda + 1, "W");
    int weighted = 0, total = 0;
    for (int j = 0; j <= lambda; ++j) {
        require_member(a[static_cast<std::size_t>(j)] >= 0, "W");
        weighted += j * a[static_cast<std::size_t>(j)];
        total += a[static_cast<std::size_t>(j)];
    }
    require_member(weighted == lambda && total == mu, "W");
    bigint denom = factorial(a[0]);
    for (int j = 1; j <= lambda; ++j) {
        const int aj = a[static_cast<std::size_t>(j)];
        for (int r = 0; r < aj; ++r) denom *= factorial(j);
        denom *= factorial(aj);
    }
    return factorial(mu) * factorial(lambda) / denom;
}

inline bigint coeff_n(int lambda, int mu, std::span<const int> a) {
    require_member(static_cast<int>(a.size()) == lambda, "N");
    int total = 0;
    bigint denom = 1;
    for (int v : a) {
        require_member(v >= 0, "N");
        total += v;
        denom *= factorial(v);
    }
    require_member(total == mu, "N");
    return factorial(mu) / denom;
}

}  // namespace detail

/// Exact coefficient values (arbitrary-precision intermediates).
inline long long composition_coefficient(CoefficientKind kind, int p1, int p2,
                                         std::span<const int> a) {
    switch (kind) {
        case CoefficientKind::multinomial_p: return detail::to_longlong(detail::coeff_p(p1, a), "P");
        case CoefficientKind::length_l: return detail::coeff_l(a);
        case CoefficientKind::mixed_w: return detail::to_longlong(detail::coeff_w(p1, p2, a), "W");
        case CoefficientKind::multinomial_n:
            return detail::to_longlong(detail::coeff_n(p1, p2, a), "N");
    }
    throw std::invalid_argument("unknown coefficient kind");
}

// ---------------------------------------------------------------------------
// Derivative formulas.  All three are partition expansions; the scalar type is
// a template parameter so tests can run them in exact rational arithmetic.
// ---------------------------------------------------------------------------

namespace detail {

template <class T>
T ipow_t(const T& base, int k) {
    T r = T(1);
    T b = base;
    int e = k;
    while (e > 0) {
        if (e & 1) r = r * b;
        b = b * b;
        e >>= 1;
    }
    return r;
}

}  // namespace detail

/// The polynomial factor of d^beta exp h, i.e. (d^beta exp h) / exp h,
/// from the derivative values h[k] = h^(k).
template <class T>
T exp_derivative_bracket(std::span<const T> h, int beta) {
    if (beta < 1) throw std::invalid_argument("exp_derivative: beta must be >= 1");
    if (beta > kMax1dFormulaOrder)
        throw order_cap_error("exp_derivative: order exceeds cap " +
                              std::to_string(kMax1dFormulaOrder));
    if (static_cast<int>(h.size()) < beta + 1)
        throw std::invalid_argument("exp_derivative: insufficient jet order");
    const CompositionSet& parts = detail::cached_set(CompositionKind::partition, beta, 0);
    T acc = T(0);
    for (const auto& a : parts.elements) {
        T mono = T(static_cast<double>(detail::to_longlong(detail::coeff_p(beta, a), "P")));
        for (int j = 1; j <= beta; ++j) {
            const int aj = a[static_cast<std::size_t>(j - 1)];
            if (aj > 0) mono = mono * detail::ipow_t(h[static_cast<std::size_t>(j)], aj);
        }
        acc = acc + mono;
    }
    return acc;
}

/// d^beta exp h at the base point of the jet.
inline double exp_derivative(const Jet& h_jet, int beta) {
    std::span<const double> h(h_jet.values);
    return exp_derivative_bracket(h, beta) * std::exp(h_jet.values[0]);
}

/// d_i^beta log(1+J) from the directional derivative values j[k] = d_i^k J.
template <class T>
T log_derivative_1d_t(std::span<const T> j, int beta) {
    if (beta < 1) throw std::invalid_argument("log_derivative_1d: beta must be >= 1");
    if (beta > kMax1dFormulaOrder)
        throw order_cap_error("log_derivative_1d: order exceeds cap " +
                              std::to_string(kMax1dFormulaOrder));
    if (static_cast<int>(j.size()) < beta + 1)
        throw std::invalid_argument("log_derivative_1d: insufficient jet order");
    const T one_plus = T(1) + j[0];
    if (!(one_plus > T(0))) throw std::domain_error("log_derivative_1d: 1 + J must be positive");

    const CompositionSet& parts = detail::cached_set(CompositionKind::partition, beta, 0);
    T acc = T(0);
    for (const auto& a : parts.elements) {
        const long long l = detail::coeff_l(a);
        const long long p = detail::to_longlong(detail::coeff_p(beta, a), "P");
        const long long lfact = detail::to_longlong(detail::factorial(static_cast<int>(l) - 1), "l!");
        T mono = T(static_cast<double>(p * lfact));
        if (l % 2 == 1) mono = -mono;  // (-1)^l
        for (int jj = 1; jj <= beta; ++jj) {
            const int ajj = a[static_cast<std::size_t>(jj - 1)];
            if (ajj > 0) mono = mono * detail::ipow_t(j[static_cast<std::size_t>(jj)], ajj);
        }
        acc = acc + mono / detail::ipow_t(one_plus, static_cast<int>(l));
    }
    return -acc;
}

inline double log_derivative_1d(const Jet& J_jet, int beta) {
    std::span<const double> j(J_jet.values);
    return log_derivative_1d_t(j, beta);
}

namespace detail {

// sum over c in R(lambda, mu) of W(c) * prod_{j=0..lambda} (d1^j d2^k J)^{c_j};
// this is d1^lambda applied to (d2^k J)^mu
template <class T>
T padded_block_sum(const std::vector<std::vector<T>>& jt, int k, int lambda, int mu) {
    const CompositionSet& set = cached_set(CompositionKind::padded_partition, lambda, mu);
    T acc = T(0);
    for (const auto& c : set.elements) {
        T mono = T(static_cast<double>(to_longlong(coeff_w(lambda, mu, c), "W")));
        for (int j = 0; j <= lambda; ++j) {
            const int cj = c[static_cast<std::size_t>(j)];
            if (cj > 0)
                mono = mono * ipow_t(jt[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)], cj);
        }
        acc = acc + mono;
    }
    return acc;
}

template <class T>
void check_mixed_args(const std::vector<std::vector<T>>& jt, int gamma, int beta) {
    if (gamma < 1 || beta < 1)
        throw std::invalid_argument("log_derivative_mixed: gamma and beta must be >= 1");
    if (gamma + beta > kMaxMixedFormulaOrder)
        throw order_cap_error("log_derivative_mixed: gamma + beta exceeds cap " +
                              std::to_string(kMaxMixedFormulaOrder));
    if (static_cast<int>(jt.size()) < gamma + 1)
        throw std::invalid_argument("log_derivative_mixed: incomplete jet table (t rows)");
    for (const auto& row : jt)
        if (static_cast<int>(row.size()) < beta + 1)
            throw std::invalid_argument("log_derivative_mixed: incomplete jet table (x columns)");
}

}  // namespace detail

/// d1^gamma d2^beta log(1+J) from the full mixed jet table
/// jt[j][k] = d1^j d2^k J.  Expansion: for each x-partition a in R(beta), the
/// gamma t-derivatives split binomially between the factor (1+J)^{-l(a)}
/// (giving pure d1 blocks over R(r)) and the product of d2-blocks (giving the
/// composition/padded-partition machinery with coefficients N and W).
template <class T>
T log_derivative_mixed_t(const std::vector<std::vector<T>>& jt, int gamma, int beta,
                         bool endpoint_splits_only = false) {
    detail::check_mixed_args(jt, gamma, beta);
    const T one_plus = T(1) + jt[0][0];
    if (!(one_plus > T(0))) throw std::domain_error("log_derivative_mixed: 1 + J must be positive");

    const CompositionSet& xparts = detail::cached_set(CompositionKind::partition, beta, 0);
    T total = T(0);

    for (const auto& a : xparts.elements) {
        const long long l = detail::coeff_l(a);
        const long long p = detail::to_longlong(detail::coeff_p(beta, a), "P");

        T sum_r = T(0);
        for (int r = 0; r <= gamma; ++r) {
            if (endpoint_splits_only && r != 0 && r != gamma) continue;
            // pure-d1 factor from differentiating (1+J)^{-l} r times
            T ufac = T(0);
            if (r == 0) {
                ufac = T(1) / detail::ipow_t(one_plus, static_cast<int>(l));
            } else {
                const CompositionSet& tparts = detail::cached_set(CompositionKind::partition, r, 0);
                for (const auto& b : tparts.elements) {
                    const long long lb = detail::coeff_l(b);
                    const long long pb = detail::to_longlong(detail::coeff_p(r, b), "P");
                    // (l)(l+1)...(l+lb-1) = (l+lb-1)!/(l-1)!
                    long long rising = 1;
                    for (long long i = 0; i < lb; ++i) rising *= (l + i);
                    T mono = T(static_cast<double>(pb * rising));
                    if (lb % 2 == 1) mono = -mono;
                    for (int kk = 1; kk <= r; ++kk) {
                        const int bk = b[static_cast<std::size_t>(kk - 1)];
                        if (bk > 0)
                            mono = mono * detail::ipow_t(jt[static_cast<std::size_t>(kk)][0], bk);
                    }
                    ufac = ufac + mono / detail::ipow_t(one_plus, static_cast<int>(l + lb));
                }
            }

            // distribute the remaining s = gamma - r derivatives over the
            // d2-blocks: compositions b in T(beta, s), weight N, block sums W
            const int s = gamma - r;
            const CompositionSet& comps =
                detail::cached_set(CompositionKind::composition, beta, s);
            T vfac = T(0);
            for (const auto& b : comps.elements) {
                bool feasible = true;
                for (int k = 1; k <= beta; ++k) {
                    // a block of zero factors cannot absorb derivatives
                    if (a[static_cast<std::size_t>(k - 1)] == 0 &&
                        b[static_cast<std::size_t>(k - 1)] > 0) {
                        feasible = false;
                        break;
                    }
                }
                if (!feasible) continue;
                T term = T(static_cast<double>(detail::to_longlong(detail::coeff_n(beta, s, b), "N")));
                for (int k = 1; k <= beta; ++k) {
                    const int ak = a[static_cast<std::size_t>(k - 1)];
                    const int bk = b[static_cast<std::size_t>(k - 1)];
                    if (ak == 0 && bk == 0) continue;
                    term = term * detail::padded_block_sum(jt, k, bk, ak);
                }
                vfac = vfac + term;
            }

            sum_r = sum_r + T(detail::binomial(gamma, r)) * ufac * vfac;
        }

        T coeff = T(static_cast<double>(p *
                                        detail::to_longlong(detail::factorial(static_cast<int>(l) - 1),
                                                            "l!")));
        if (l % 2 == 1) coeff = -coeff;
        total = total + coeff * sum_r;
    }
    return -total;
}

inline double log_derivative_mixed(const std::vector<std::vector<double>>& jt, int gamma,
                                   int beta) {
    return log_derivative_mixed_t(jt, gamma, beta, false);
}

/// Evaluation keeping only the splits where all t-derivatives land on the
/// (1+J)^{-l} factor or all on the d2-blocks.  Complete only for gamma <= 1;
/// exposed so the deviation at higher gamma can be reported rather than
/// silently absorbed.
inline double log_derivative_mixed_endpoint_only(const std::vector<std::vector<double>>& jt,
                                                 int gamma, int beta) {
    return log_derivative_mixed_t(jt, gamma, beta, true);
}

/// Independent route for the mixed derivative: evaluate the 1-d expansion of
/// d2^beta log(1+J) in truncated Taylor arithmetic along t and read off the
/// gamma-th coefficient.  Shares only the partition set R(beta) with the
/// closed formula.
inline double log_derivative_mixed_by_jets(const std::vector<std::vector<double>>& jt, int gamma,
                                           int beta) {
    detail::check_mixed_args(jt, gamma, beta);
    const std::size_t n = static_cast<std::size_t>(gamma) + 1;

    // normalized t-series of d2^k J
    const auto column_series = [&](int k) {
        std::vector<double> c(n);
        double fact = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j > 1) fact *= static_cast<double>(j);
            c[j] = jt[j][static_cast<std::size_t>(k)] / fact;
        }
        return c;
    };
    const auto smul = [&](const std::vector<double>& a, const std::vector<double>& b) {
        std::vector<double> r(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j + i < n; ++j) r[i + j] += a[i] * b[j];
        return r;
    };
    const auto sdiv = [&](const std::vector<double>& a, const std::vector<double>& b) {
        std::vector<double> r(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            double acc = a[k];
            for (std::size_t j = 0; j < k; ++j) acc -= r[j] * b[k - j];
            r[k] = acc / b[0];
        }
        return r;
    };

    std::vector<double> one_plus = column_series(0);
    one_plus[0] += 1.0;
    if (!(one_plus[0] > 0.0))
        throw std::domain_error("log_derivative_mixed_by_jets: 1 + J must be positive");

    const CompositionSet& parts = detail::cached_set(CompositionKind::partition, beta, 0);
    std::vector<double> total(n, 0.0);
    for (const auto& a : parts.elements) {
        const long long l = detail::coeff_l(a);
        const long long p = detail::to_longlong(detail::coeff_p(beta, a), "P");
        const long long lfact = detail::to_longlong(detail::factorial(static_cast<int>(l) - 1), "l!");

        std::vector<double> mono(n, 0.0);
        mono[0] = static_cast<double>(p * lfact) * (l % 2 == 1 ? -1.0 : 1.0);
        for (int k = 1; k <= beta; ++k) {
            const int ak = a[static_cast<std::size_t>(k - 1)];
            const std::vector<double> col = column_series(k);
            for (int rep = 0; rep < ak; ++rep) mono = smul(mono, col);
        }
        for (long long rep = 0; rep < l; ++rep) mono = sdiv(mono, one_plus);
        for (std::size_t i = 0; i < n; ++i) total[i] += mono[i];
    }
    double fact = 1.0;
    for (int j = 2; j <= gamma; ++j) fact *= j;
    return -total[static_cast<std::size_t>(gamma)] * fact;
}

}  // namespace liouville
