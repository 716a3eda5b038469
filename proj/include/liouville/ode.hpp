#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "liouville/expr.hpp"
#include "liouville/jet.hpp"
#include "liouville/scaled_real.hpp"

namespace liouville {

class integration_error : public std::runtime_error {
public:
    explicit integration_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Derivative-value jet with a shared power-of-two scale: f^(k) = v[k] * 2^exponent.
struct ScaledJet {
    std::int64_t exponent = 0;
    std::vector<double> v;
};

struct OdeOptions {
    bool fixed_step = false;  // reproducibility fallback: no adaptivity
    double fixed_step_size = 1e-3;
};

/// Numerically integrated fundamental solution of g'' = u(x) * g on [-L, L],
/// anchored at x = 0 where the data (g(0), g'(0)) = (a, b) is prescribed.
/// Trajectory values are stored scaled; dense output is a quintic Hermite
/// interpolant using the exact second derivatives u*g at the step ends.
class FundamentalSolution {
public:
    struct Node {
        double x;
        ScaledReal g, gp;
        double u;  // potential value at x
    };

    const SmoothExpr& potential() const { return u_; }
    const std::string& potential_text() const { return u_text_; }
    double initial_value() const { return a_; }
    double initial_slope() const { return b_; }
    double domain_radius() const { return radius_; }
    double tolerance() const { return tol_; }
    const std::vector<Node>& trajectory() const { return nodes_; }

    /// Dense-output values (g, g') at x.
    std::pair<ScaledReal, ScaledReal> eval_scaled(double x) const {
        const std::size_t i = locate(x);
        const Node& n0 = nodes_[i];
        if (x == n0.x) return {n0.g, n0.gp};
        const Node& n1 = nodes_[i + 1];
        if (x == n1.x) return {n1.g, n1.gp};

        const std::int64_t e = interval_exponent(n0, n1);
        const double h = n1.x - n0.x;
        const double p0 = rel(n0.g, e), m0 = rel(n0.gp, e) * h;
        const double p1 = rel(n1.g, e), m1 = rel(n1.gp, e) * h;
        const double s0 = n0.u * p0 * h * h, s1 = n1.u * p1 * h * h;

        // two-point Taylor (quintic Hermite) in tau = (x - x0)/h, divided
        // differences on the node multiset {0,0,0,1,1,1}
        const double f00 = m0, f000 = 0.5 * s0;
        const double f01 = p1 - p0;
        const double f011 = m1 - f01;
        const double f0111 = 0.5 * s1 - f011;
        const double f001 = f01 - f00;
        const double f0011 = f011 - f001;
        const double f0001 = f001 - f000;
        const double f00011 = f0011 - f0001;
        const double f00111 = f0111 - f0011;
        const double f000111 = f00111 - f00011;

        const double c0 = p0, c1 = f00, c2 = f000;
        const double c3 = f0001 - f00011 + f000111;
        const double c4 = f00011 - 2.0 * f000111;
        const double c5 = f000111;

        const double tau = (x - n0.x) / h;
        const double val = c0 + tau * (c1 + tau * (c2 + tau * (c3 + tau * (c4 + tau * c5))));
        const double der =
            (c1 + tau * (2 * c2 + tau * (3 * c3 + tau * (4 * c4 + tau * 5 * c5)))) / h;
        return {ScaledReal::from_parts(val, e), ScaledReal::from_parts(der, e)};
    }

    /// Jet with shared scale: orders 0-1 by dense output, higher orders by the
    /// recurrence g^(k+2) = sum_j C(k,j) u^(j) g^(k-j).
    ScaledJet jet_scaled(double x, int n) const {
        if (n < 0) throw std::invalid_argument("jet order must be nonnegative");
        if (n > kMaxDerivativeOrder)
            throw order_cap_error("jet order " + std::to_string(n) + " exceeds cap " +
                                  std::to_string(kMaxDerivativeOrder));
        auto [g, gp] = eval_scaled(x);
        ScaledJet jet;
        jet.exponent = std::max(g.is_zero() ? INT64_MIN : g.exponent(),
                                gp.is_zero() ? INT64_MIN : gp.exponent());
        if (jet.exponent == INT64_MIN) jet.exponent = 0;
        jet.v.assign(static_cast<std::size_t>(n) + 1, 0.0);
        jet.v[0] = rel(g, jet.exponent);
        if (n >= 1) jet.v[1] = rel(gp, jet.exponent);
        if (n >= 2) {
            const Jet ujet = u_.jet(x, n - 2);
            for (int k = 0; k + 2 <= n; ++k) {
                double acc = 0.0;
                for (int j = 0; j <= k; ++j)
                    acc += detail::binomial(k, j) * ujet.values[static_cast<std::size_t>(j)] *
                           jet.v[static_cast<std::size_t>(k - j)];
                jet.v[static_cast<std::size_t>(k) + 2] = acc;
            }
        }
        return jet;
    }

    /// Unscaled derivative jet; throws std::overflow_error when the values do
    /// not fit a double.
    Jet derivative_jet(double x, int n) const {
        const ScaledJet s = jet_scaled(x, n);
        Jet out{x, std::vector<double>(s.v.size())};
        for (std::size_t k = 0; k < s.v.size(); ++k)
            out.values[k] = ScaledReal::from_parts(s.v[k], s.exponent).to_double();
        return out;
    }

    double derivative_value(double x, int k) const {
        return derivative_jet(x, k).values[static_cast<std::size_t>(k)];
    }

private:
    friend FundamentalSolution integrate_fundamental(const SmoothExpr&, double, double, double,
                                                     double, const OdeOptions&);

    std::size_t locate(double x) const {
        const double slack = 1e-12 * std::max(1.0, radius_);
        if (x < -radius_ - slack || x > radius_ + slack)
            throw std::out_of_range("x = " + std::to_string(x) + " outside ODE domain [-" +
                                    std::to_string(radius_) + ", " + std::to_string(radius_) + "]");
        auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x,
                                   [](double v, const Node& n) { return v < n.x; });
        std::size_t i = static_cast<std::size_t>(it - nodes_.begin());
        if (i > 0) --i;
        if (i + 1 >= nodes_.size()) i = nodes_.size() - 2;
        return i;
    }

    static std::int64_t interval_exponent(const Node& a, const Node& b) {
        std::int64_t e = INT64_MIN;
        for (const ScaledReal* v : {&a.g, &a.gp, &b.g, &b.gp})
            if (!v->is_zero()) e = std::max(e, v->exponent());
        return e == INT64_MIN ? 0 : e;
    }

    static double rel(const ScaledReal& v, std::int64_t e) {
        if (v.is_zero()) return 0.0;
        const std::int64_t d = v.exponent() - e;
        if (d < -1074) return 0.0;
        return std::ldexp(v.mantissa(), static_cast<int>(d));
    }

    SmoothExpr u_;
    std::string u_text_;
    double a_ = 0.0, b_ = 0.0;
    double radius_ = 0.0;
    double tol_ = 0.0;
    std::vector<Node> nodes_;
};

namespace detail {

// Dormand-Prince 5(4) coefficients.
inline constexpr double dp_c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double dp_a[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
// b == dp_a[6] (FSAL); e = b - b4 gives the embedded error weights
inline constexpr double dp_e[7] = {71.0 / 57600,      0.0,          -71.0 / 16695, 71.0 / 1920,
                                   -17253.0 / 339200, 22.0 / 525,   -1.0 / 40};

struct OdeState {
    double y1, y2;
};

}  // namespace detail

/// Integrate g'' = u*g with g(0) = a, g'(0) = b over [-L, L], marching
/// outward from 0 in both directions with an adaptive embedded 5(4) pair.
/// Step acceptance: local error <= tol per unit step, measured relative to
/// the current (scaled) solution magnitude.
inline FundamentalSolution integrate_fundamental(const SmoothExpr& u, double a, double b, double L,
                                                 double tol, const OdeOptions& opts = {}) {
    if (!(L > 0.0)) throw std::invalid_argument("domain radius L must be positive");
    if (!(tol > 0.0) || tol > 1e-4)
        throw std::invalid_argument("ODE tolerance must lie in (0, 1e-4]");

    FundamentalSolution sol;
    sol.u_ = u;
    sol.u_text_ = u.str();
    sol.a_ = a;
    sol.b_ = b;
    sol.radius_ = L;
    sol.tol_ = tol;

    const auto rhs = [&u](double x, const detail::OdeState& y) {
        return detail::OdeState{y.y2, u(x) * y.y1};
    };

    const auto march = [&](int dir, std::vector<FundamentalSolution::Node>& out) {
        detail::OdeState y{a, b};
        std::int64_t scale = 0;  // actual solution = y * 2^scale
        double x = 0.0;
        out.push_back({0.0, ScaledReal(a), ScaledReal(b), u(0.0)});

        double h = dir * std::min(0.05, L / 10.0);
        detail::OdeState k[7];
        k[0] = rhs(x, y);
        long rejected_in_row = 0;
        long steps = 0;

        while (dir * x < L) {
            if (++steps > 20'000'000) throw integration_error("step limit exceeded");
            bool final_step = false;
            if (dir * (x + h) >= L) {
                h = L * dir - x;
                final_step = true;
            }
            if (std::fabs(h) < 1e-14 * std::max(1.0, std::fabs(x)))
                throw integration_error("step size underflow at x = " + std::to_string(x));

            for (int s = 1; s < 7; ++s) {
                detail::OdeState ys = y;
                for (int j = 0; j < s; ++j) {
                    ys.y1 += h * detail::dp_a[s][j] * k[j].y1;
                    ys.y2 += h * detail::dp_a[s][j] * k[j].y2;
                }
                k[s] = rhs(x + detail::dp_c[s] * h, ys);
            }
            detail::OdeState ynew = y;
            for (int j = 0; j < 6; ++j) {
                ynew.y1 += h * detail::dp_a[6][j] * k[j].y1;
                ynew.y2 += h * detail::dp_a[6][j] * k[j].y2;
            }
            double e1 = 0.0, e2 = 0.0;
            for (int j = 0; j < 7; ++j) {
                e1 += h * detail::dp_e[j] * k[j].y1;
                e2 += h * detail::dp_e[j] * k[j].y2;
            }
            const double sc1 = 1.0 + std::max(std::fabs(y.y1), std::fabs(ynew.y1));
            const double sc2 = 1.0 + std::max(std::fabs(y.y2), std::fabs(ynew.y2));
            const double err = std::max(std::fabs(e1) / sc1, std::fabs(e2) / sc2);
            const double target = tol * std::fabs(h);

            bool accept = opts.fixed_step || err <= target;
            if (accept) {
                x = final_step ? L * dir : x + h;
                y = ynew;
                k[0] = k[6];  // FSAL
                rejected_in_row = 0;

                // renormalize the running scale when magnitudes drift far from 1
                const double mag = std::max(std::fabs(y.y1), std::fabs(y.y2));
                if (mag > 0.0 && (mag > 1e120 || mag < 1e-120)) {
                    int ex = 0;
                    std::frexp(mag, &ex);
                    const double f = std::ldexp(1.0, -ex);
                    y.y1 *= f;
                    y.y2 *= f;
                    k[0].y1 *= f;
                    k[0].y2 *= f;
                    scale += ex;
                }
                out.push_back({x, ScaledReal::from_parts(y.y1, scale),
                               ScaledReal::from_parts(y.y2, scale), u(x)});
            } else {
                if (++rejected_in_row > 100)
                    throw integration_error("no acceptable step at x = " + std::to_string(x));
            }
            if (!opts.fixed_step) {
                const double ratio = err > 0.0 ? target / err : 1e8;
                double f = 0.9 * std::pow(ratio, 0.25);
                f = std::clamp(f, 0.2, 5.0);
                h *= f;
                const double hmax = std::max(1.0, L / 4.0);
                if (std::fabs(h) > hmax) h = dir * hmax;
            } else {
                h = dir * opts.fixed_step_size;
            }
        }
    };

    std::vector<FundamentalSolution::Node> fwd, bwd;
    march(+1, fwd);
    march(-1, bwd);

    sol.nodes_.reserve(fwd.size() + bwd.size() - 1);
    for (auto it = bwd.rbegin(); it != bwd.rend(); ++it) sol.nodes_.push_back(*it);
    sol.nodes_.pop_back();  // drop duplicate x = 0
    for (const auto& n : fwd) sol.nodes_.push_back(n);
    return sol;
}

/// Deviation of the Wronskian g1*g2' - g1'*g2 at x from its value at 0,
/// relative to the magnitude of the products entering it.
inline double wronskian_defect(const FundamentalSolution& s1, const FundamentalSolution& s2,
                               double x) {
    if (s1.potential_text() != s2.potential_text())
        throw std::invalid_argument("wronskian_defect: solutions have different potentials");
    const auto w_at = [&](double xx) {
        auto [g1, g1p] = s1.eval_scaled(xx);
        auto [g2, g2p] = s2.eval_scaled(xx);
        const ScaledReal p1 = g1 * g2p, p2 = g1p * g2;
        return std::pair<ScaledReal, ScaledReal>{p1 - p2, ScaledReal::max_abs(p1, p2)};
    };
    auto [w, scale] = w_at(x);
    auto [w0, scale0] = w_at(0.0);
    const ScaledReal defect = w - w0;
    if (defect.is_zero()) return 0.0;
    ScaledReal denom = ScaledReal::max_abs(scale, scale0);
    if (denom.is_zero()) denom = ScaledReal(1.0);
    return (defect / denom).to_double();
}

}  // namespace liouville
