#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace liouville {

/// Derivative values of a scalar function at one point: values[k] = f^(k)(point).
struct Jet {
    double point = 0.0;
    std::vector<double> values;

    int order() const { return static_cast<int>(values.size()) - 1; }
    double operator[](int k) const { return values[static_cast<std::size_t>(k)]; }
};

namespace detail {

inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    // small-n table would do; direct product keeps it exact for n <= 57
    double r = 1.0;
    for (int j = 1; j <= k; ++j) r = r * static_cast<double>(n - k + j) / static_cast<double>(j);
    return r;
}

/// Leibniz product of derivative-value jets: (fg)^(k) = sum C(k,j) f^(j) g^(k-j).
inline std::vector<double> djet_mul(std::span<const double> f, std::span<const double> g) {
    const std::size_t n = std::min(f.size(), g.size());
    std::vector<double> r(n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = 0; j <= k; ++j)
            r[k] += binomial(static_cast<int>(k), static_cast<int>(j)) * f[j] * g[k - j];
    return r;
}

inline std::vector<double> djet_add(std::span<const double> f, std::span<const double> g) {
    const std::size_t n = std::min(f.size(), g.size());
    std::vector<double> r(n);
    for (std::size_t k = 0; k < n; ++k) r[k] = f[k] + g[k];
    return r;
}

inline std::vector<double> djet_scale(std::span<const double> f, double c) {
    std::vector<double> r(f.begin(), f.end());
    for (double& v : r) v *= c;
    return r;
}

/// Jet of f' given the jet of f (drops one order).
inline std::vector<double> djet_shift(std::span<const double> f) {
    if (f.size() <= 1) return {};
    return {f.begin() + 1, f.end()};
}

}  // namespace detail
}  // namespace liouville
