#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "liouville/expr.hpp"
#include "liouville/jet.hpp"
#include "liouville/ode.hpp"
#include "liouville/scaled_real.hpp"

namespace liouville {

/// Cauchy data (f1, f2) and the mass parameter of the field equation
/// (d_t^2 - d_x^2) F + (m^2/2) exp F = 0.
struct InitialData {
    SmoothExpr f1;
    SmoothExpr f2;
    double m = 2.0;
};

struct PotentialPair {
    SmoothExpr u;  // built from f1' - f2; drives g2, g4
    SmoothExpr w;  // built from f1' + f2; the potential solved by g1, g3
};

/// u = (1/16)[(f1'-f2)^2 - 4 (f1'-f2)' + m^2 exp f1], and w likewise with
/// f1'+f2.
inline PotentialPair compute_potentials(const InitialData& d) {
    if (!(d.m > 0.0)) throw std::invalid_argument("mass parameter must be positive");
    const SmoothExpr f1p = d.f1.derivative();
    const SmoothExpr mass_term = SmoothExpr::constant(d.m * d.m) * SmoothExpr::exp(d.f1);
    const auto build = [&](const SmoothExpr& s) {
        return SmoothExpr::constant(1.0 / 16.0) *
               (SmoothExpr::pow(s, 2) - SmoothExpr::constant(4.0) * s.derivative() + mass_term);
    };
    return PotentialPair{build(f1p - d.f2), build(f1p + d.f2)};
}

/// Derivative jets of two functions sharing one power-of-two scale.
struct PairJets {
    std::int64_t exponent = 0;
    std::vector<double> a, b;
};

/// The four generating functions of a solution:
///   g2, g4 integrate g'' = u g with data (0,1) and (1,0);
///   g1 = -(4/m) e^{-f1/2} [g4' + (1/4)(f1'-f2) g4],
///   g3 =  (4/m) e^{-f1/2} [g2' + (1/4)(f1'-f2) g2]
/// (the latter two evaluated through jets, never integrated).
class Quartet {
public:
    Quartet(InitialData d, PotentialPair pots, FundamentalSolution g2, FundamentalSolution g4)
        : data_(std::move(d)),
          pots_(std::move(pots)),
          s2_(std::move(g2)),
          s4_(std::move(g4)),
          a_expr_(data_.f1.derivative() - data_.f2),
          exp_half_expr_(SmoothExpr::exp(SmoothExpr::constant(-0.5) * data_.f1)) {}

    const InitialData& data() const { return data_; }
    const PotentialPair& potentials() const { return pots_; }
    const FundamentalSolution& g2() const { return s2_; }
    const FundamentalSolution& g4() const { return s4_; }
    double mass() const { return data_.m; }
    double radius() const { return s2_.domain_radius(); }

    /// Jets of (g2, g4) at eta, aligned to a common scale.
    PairJets jets24(double eta, int n) const {
        ScaledJet j2 = s2_.jet_scaled(eta, n);
        ScaledJet j4 = s4_.jet_scaled(eta, n);
        PairJets out;
        out.exponent = std::max(j2.exponent, j4.exponent);
        out.a = realign(std::move(j2), out.exponent);
        out.b = realign(std::move(j4), out.exponent);
        return out;
    }

    /// Jets of (g1, g3) at xi, assembled from the g2/g4 jets by Leibniz rules.
    PairJets jets13(double xi, int n) const {
        const PairJets base = jets24(xi, n + 1);
        const Jet aj = a_expr_.jet(xi, n);
        const Jet ej = exp_half_expr_.jet(xi, n);

        const auto derived = [&](const std::vector<double>& g, double front) {
            std::vector<double> inner = detail::djet_shift(g);  // g'
            const std::vector<double> ag = detail::djet_mul(aj.values, g);
            for (std::size_t k = 0; k < inner.size(); ++k) inner[k] += 0.25 * ag[k];
            return detail::djet_scale(detail::djet_mul(ej.values, inner), front);
        };

        PairJets out;
        out.exponent = base.exponent;
        out.a = derived(base.b, -4.0 / data_.m);  // g1 from g4
        out.b = derived(base.a, 4.0 / data_.m);   // g3 from g2
        return out;
    }

    /// aleph(x) = G(0, x) = g1 g2 + g3 g4.
    ScaledReal aleph(double x) const {
        const PairJets j13 = jets13(x, 0);
        const PairJets j24 = jets24(x, 0);
        return ScaledReal::from_parts(j13.a[0] * j24.a[0] + j13.b[0] * j24.b[0],
                                      j13.exponent + j24.exponent);
    }

    /// Deviation of g1 g3' - g1' g3 from 1, relative to the product magnitudes.
    double wronskian13_defect(double x) const {
        const PairJets j = jets13(x, 1);
        const ScaledReal g1 = ScaledReal::from_parts(j.a[0], j.exponent);
        const ScaledReal g1p = ScaledReal::from_parts(j.a[1], j.exponent);
        const ScaledReal g3 = ScaledReal::from_parts(j.b[0], j.exponent);
        const ScaledReal g3p = ScaledReal::from_parts(j.b[1], j.exponent);
        const ScaledReal p1 = g1 * g3p, p2 = g1p * g3;
        const ScaledReal defect = (p1 - p2) - ScaledReal(1.0);
        if (defect.is_zero()) return 0.0;
        const ScaledReal denom = ScaledReal::max_abs(ScaledReal::max_abs(p1, p2), ScaledReal(1.0));
        return (defect / denom).to_double();
    }

    /// Deviation of g2 g4' - g2' g4 from its exact value -1.
    double wronskian24_defect(double x) const { return wronskian_defect(s2_, s4_, x); }

    const SmoothExpr& slope_combination() const { return a_expr_; }      // f1' - f2
    const SmoothExpr& exp_half() const { return exp_half_expr_; }        // e^{-f1/2}

private:
    static std::vector<double> realign(ScaledJet j, std::int64_t e) {
        const std::int64_t d = j.exponent - e;
        if (d != 0) {
            for (double& v : j.v) v = (d < -1074) ? 0.0 : std::ldexp(v, static_cast<int>(d));
        }
        return std::move(j.v);
    }

    InitialData data_;
    PotentialPair pots_;
    FundamentalSolution s2_, s4_;
    SmoothExpr a_expr_;
    SmoothExpr exp_half_expr_;
};

/// Integrate the two fundamental solutions and assemble the quartet.
inline Quartet build_quartet(const InitialData& d, double L, double tol,
                             const OdeOptions& opts = {}) {
    if (!(L >= 1.0)) throw std::invalid_argument("quartet radius L must be >= 1");
    PotentialPair pots = compute_potentials(d);
    FundamentalSolution g2 = integrate_fundamental(pots.u, 0.0, 1.0, L, tol, opts);
    FundamentalSolution g4 = integrate_fundamental(pots.u, 1.0, 0.0, L, tol, opts);
    return Quartet(d, std::move(pots), std::move(g2), std::move(g4));
}

template <class F>
concept PartialJetField = requires(const F& f, double t, double x, int bt, int bx) {
    { f.partial(t, x, bt, bx) } -> std::convertible_to<double>;
};

/// Residual of the field equation for any jet-capable field.
template <PartialJetField F>
double pde_residual(const F& field, double m, double t, double x) {
    return field.partial(t, x, 2, 0) - field.partial(t, x, 0, 2) +
           0.5 * m * m * std::exp(field.partial(t, x, 0, 0));
}

/// Maximum total derivative order served by SolutionField::partial.
inline constexpr int kMaxFieldJetOrder = 8;

/// Assembled solution F(t,x) = -log((m^2/16) G^2) with
/// G(t,x) = g1(x+t) g2(x-t) + g3(x+t) g4(x-t).  Evaluation and all partial
/// derivatives run in scaled arithmetic; F is obtained from log-mantissa plus
/// exponent*log 2, never from raw G^2.
class SolutionField {
public:
    SolutionField(Quartet q, double spatial_radius, double time_extent)
        : quartet_(std::move(q)), alpha_(spatial_radius), tmax_(time_extent) {}

    const Quartet& quartet() const { return quartet_; }
    double mass() const { return quartet_.mass(); }
    double spatial_radius() const { return alpha_; }
    double time_extent() const { return tmax_; }
    /// Largest R such that the square [-R,R]^2 lies inside the evaluable cone.
    double working_radius() const { return quartet_.radius() / 2.0; }

    double value(double t, double x) const {
        const LogTable lt = lambda_table(t, x, 0);
        return f_from(lt.lam[0][0]);
    }

    /// d_t^bt d_x^bx F(t, x).
    double partial(double t, double x, int bt, int bx) const {
        const int n = bt + bx;
        check_order(n);
        const LogTable lt = lambda_table(t, x, n);
        return partial_from(lt, bt, bx);
    }

    /// All partials with bt + bx <= n in one sweep; entry [bt][bx].
    std::vector<std::vector<double>> partial_table(double t, double x, int n) const {
        check_order(n);
        const LogTable lt = lambda_table(t, x, n);
        std::vector<std::vector<double>> out(static_cast<std::size_t>(n) + 1);
        for (int bt = 0; bt <= n; ++bt) {
            out[static_cast<std::size_t>(bt)].resize(static_cast<std::size_t>(n - bt) + 1);
            for (int bx = 0; bt + bx <= n; ++bx)
                out[static_cast<std::size_t>(bt)][static_cast<std::size_t>(bx)] =
                    partial_from(lt, bt, bx);
        }
        return out;
    }

    /// Field-equation residual (should vanish for constructed fields).
    double residual(double t, double x) const { return pde_residual(*this, mass(), t, x); }

    /// (m^2/16) G^2 = exp(-F); positive wherever defined.
    double positivity(double t, double x) const { return std::exp(-value(t, x)); }

    /// |G(t,x)| in scaled form.
    ScaledReal abs_g(double t, double x) const {
        const LogTable lt = lambda_table(t, x, 0);
        return ScaledReal::from_parts(std::fabs(lt.g00), lt.exponent);
    }

    /// Mantissa bits lost to cancellation between the two products forming G.
    /// The products grow like exp((m/4)(|xi| + |eta|)) while G itself can stay
    /// exponentially smaller when xi and eta share a sign.  The measured ratio
    /// saturates at the relative-accuracy floor of the inputs, so readings
    /// beyond ~35 bits mean the computed G (and hence F) is noise there.
    double cancellation_bits(double t, double x) const {
        const LogTable lt = lambda_table(t, x, 0);
        return std::log2(std::max(std::fabs(lt.term1), std::fabs(lt.term2)) /
                         std::fabs(lt.g00));
    }

private:
    struct LogTable {
        // lam[p][q] = d_xi^p d_eta^q log|G|; lam[0][0] is the true value
        std::vector<std::vector<double>> lam;
        double g00 = 0.0;        // mantissa-level G
        std::int64_t exponent = 0;  // G = g00 * 2^exponent
        double term1 = 0.0, term2 = 0.0;  // the two products, same scale as g00
    };

    static void check_order(int n) {
        if (n < 0) throw std::invalid_argument("derivative order must be nonnegative");
        if (n > kMaxFieldJetOrder)
            throw order_cap_error("field jet order " + std::to_string(n) + " exceeds cap " +
                                  std::to_string(kMaxFieldJetOrder));
    }

    LogTable lambda_table(double t, double x, int n) const {
        const double xi = x + t, eta = x - t;
        const double L = quartet_.radius();
        const double slack = 1e-12 * std::max(1.0, L);
        if (std::fabs(xi) > L + slack || std::fabs(eta) > L + slack)
            throw std::out_of_range("(t, x) = (" + std::to_string(t) + ", " + std::to_string(x) +
                                    ") leaves the evaluable cone |x+-t| <= " + std::to_string(L));

        const PairJets j13 = quartet_.jets13(xi, n);
        const PairJets j24 = quartet_.jets24(eta, n);

        const std::size_t sz = static_cast<std::size_t>(n) + 1;
        std::vector<std::vector<double>> g(sz, std::vector<double>(sz));
        for (std::size_t p = 0; p < sz; ++p)
            for (std::size_t q = 0; q < sz; ++q)
                g[p][q] = j13.a[p] * j24.a[q] + j13.b[p] * j24.b[q];

        LogTable lt;
        lt.g00 = g[0][0];
        lt.exponent = j13.exponent + j24.exponent;
        lt.term1 = j13.a[0] * j24.a[0];
        lt.term2 = j13.b[0] * j24.b[0];
        if (lt.g00 == 0.0)
            throw std::domain_error("G vanished at the evaluation point; field undefined");

        lt.lam.assign(sz, std::vector<double>(sz, 0.0));
        // log-derivative recurrence: peel one xi (or eta) derivative off
        // G * d(log G) = dG and solve Leibniz for the top term
        for (int s = 1; s <= n; ++s) {
            for (int p = s; p >= 0; --p) {
                const int q = s - p;
                double acc = g[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)];
                if (p > 0) {
                    for (int i = 0; i <= p - 1; ++i)
                        for (int j = 0; j <= q; ++j) {
                            if (i == 0 && j == 0) continue;
                            acc -= detail::binomial(p - 1, i) * detail::binomial(q, j) *
                                   g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
                                   lt.lam[static_cast<std::size_t>(p - i)]
                                         [static_cast<std::size_t>(q - j)];
                        }
                } else {
                    for (int j = 1; j <= q - 1; ++j)
                        acc -= detail::binomial(q - 1, j) *
                               g[0][static_cast<std::size_t>(j)] *
                               lt.lam[0][static_cast<std::size_t>(q - j)];
                }
                lt.lam[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)] = acc / lt.g00;
            }
        }
        constexpr double ln2 = 0.6931471805599453;
        lt.lam[0][0] = std::log(std::fabs(lt.g00)) + static_cast<double>(lt.exponent) * ln2;
        return lt;
    }

    double f_from(double lam00) const {
        return -2.0 * lam00 - 2.0 * std::log(mass() / 4.0);
    }

    double partial_from(const LogTable& lt, int bt, int bx) const {
        if (bt == 0 && bx == 0) return f_from(lt.lam[0][0]);
        const int n = bt + bx;
        // expand (d_xi - d_eta)^bt (d_xi + d_eta)^bx; c[p] multiplies
        // lam[p][n-p]
        std::vector<double> c{1.0};
        for (int i = 0; i < bt; ++i) c = conv(c, -1.0);
        for (int i = 0; i < bx; ++i) c = conv(c, 1.0);
        double acc = 0.0;
        for (int p = 0; p <= n; ++p)
            acc += c[static_cast<std::size_t>(p)] *
                   lt.lam[static_cast<std::size_t>(p)][static_cast<std::size_t>(n - p)];
        return -2.0 * acc;
    }

    // multiply polynomial (in s, coefficients over s-degree) by (s + r0*r)
    static std::vector<double> conv(const std::vector<double>& a, double r0) {
        std::vector<double> r(a.size() + 1, 0.0);
        for (std::size_t i = 0; i < a.size(); ++i) {
            r[i + 1] += a[i];       // * s
            r[i] += r0 * a[i];      // * r
        }
        return r;
    }

    Quartet quartet_;
    double alpha_;
    double tmax_;
};

/// Build the full solution map: potentials, quartet, assembled field.
/// The ODE radius is alpha + tmax + 1 so every characteristic argument stays
/// strictly inside the integrated domain.
inline SolutionField solve_cauchy(const InitialData& d, double alpha, double tmax, double tol,
                                  const OdeOptions& opts = {}) {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    if (tmax < 0.0) throw std::invalid_argument("tmax must be nonnegative");
    const double L = alpha + tmax + 1.0;
    return SolutionField(build_quartet(d, L, tol, opts), alpha, tmax);
}

/// Restriction to the initial-time axis: (F(0,x), dF/dt(0,x)) per sample.
template <PartialJetField F>
std::vector<std::pair<double, double>> restrict_initial(const F& field,
                                                        std::span<const double> xs) {
    std::vector<std::pair<double, double>> out;
    out.reserve(xs.size());
    for (double x : xs)
        out.emplace_back(field.partial(0.0, x, 0, 0), field.partial(0.0, x, 1, 0));
    return out;
}

/// Consistency identities evaluated on the t = 0 axis.
struct DiagnosticsReport {
    struct Identity {
        std::string name;
        double max_defect = 0.0;
        double argmax = 0.0;
    };
    std::vector<Identity> identities;

    double max_defect() const {
        double m = 0.0;
        for (const auto& i : identities) m = std::max(m, i.max_defect);
        return m;
    }
};

/// Defects of the t = 0 trace identities connecting the quartet, the data and
/// the potentials:
///   D1  aleph = (4/m) e^{-f1/2}
///   D2  -g1' g2 - g3' g4 = (1/4)(f1'+f2) aleph
///   D3   g1 g2' + g3 g4' = -(1/4)(f1'-f2) aleph
///   D4   hbar/aleph      = (1/16)[(f1')^2 - f2^2 - m^2 e^{f1}]
///   D5   dt^2 F(0,.)     = (1/2) f2^2 + 4 hbar/aleph - 2(u+w)
///   D6   f1''            = 2 (aleph'/aleph)^2 - 2 aleph''/aleph
inline DiagnosticsReport diagnostics(const InitialData& d, const Quartet& q,
                                     std::span<const double> xs) {
    DiagnosticsReport rep;
    rep.identities = {{"D1", 0, 0}, {"D2", 0, 0}, {"D3", 0, 0},
                      {"D4", 0, 0}, {"D5", 0, 0}, {"D6", 0, 0}};
    const double m = q.mass();
    const SolutionField field(q, q.radius() / 2.0, 0.0);
    const PotentialPair& pots = q.potentials();

    for (double x : xs) {
        const PairJets j13 = q.jets13(x, 2);
        const PairJets j24 = q.jets24(x, 2);
        const double scale = std::ldexp(1.0, static_cast<int>(j13.exponent + j24.exponent));

        const double g1 = j13.a[0], g1p = j13.a[1], g1pp = j13.a[2];
        const double g3 = j13.b[0], g3p = j13.b[1], g3pp = j13.b[2];
        const double g2 = j24.a[0], g2p = j24.a[1], g2pp = j24.a[2];
        const double g4 = j24.b[0], g4p = j24.b[1], g4pp = j24.b[2];

        const double aleph = (g1 * g2 + g3 * g4) * scale;
        const double alephp = (g1p * g2 + g1 * g2p + g3p * g4 + g3 * g4p) * scale;
        const double alephpp =
            (g1pp * g2 + 2 * g1p * g2p + g1 * g2pp + g3pp * g4 + 2 * g3p * g4p + g3 * g4pp) * scale;
        const double hbar = (g1p * g2p + g3p * g4p) * scale;

        const Jet f1j = d.f1.jet(x, 2);
        const double f1v = f1j.values[0], f1p = f1j.values[1], f1pp = f1j.values[2];
        const double f2v = d.f2(x);
        const double uv = pots.u(x), wv = pots.w(x);

        const double defects[6] = {
            aleph - (4.0 / m) * std::exp(-0.5 * f1v),
            (-g1p * g2 - g3p * g4) * scale - 0.25 * (f1p + f2v) * aleph,
            (g1 * g2p + g3 * g4p) * scale + 0.25 * (f1p - f2v) * aleph,
            hbar / aleph - (f1p * f1p - f2v * f2v - m * m * std::exp(f1v)) / 16.0,
            field.partial(0.0, x, 2, 0) -
                (0.5 * f2v * f2v + 4.0 * hbar / aleph - 2.0 * (uv + wv)),
            f1pp - (2.0 * (alephp / aleph) * (alephp / aleph) - 2.0 * alephpp / aleph),
        };
        for (int i = 0; i < 6; ++i) {
            if (std::fabs(defects[i]) > rep.identities[static_cast<std::size_t>(i)].max_defect) {
                rep.identities[static_cast<std::size_t>(i)].max_defect = std::fabs(defects[i]);
                rep.identities[static_cast<std::size_t>(i)].argmax = x;
            }
        }
    }
    return rep;
}

}  // namespace liouville
