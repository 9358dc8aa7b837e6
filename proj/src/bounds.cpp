#include "qmcerr/bounds.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "qmcerr/pointsets.hpp"
#include "qmcerr/wce.hpp"

namespace qmcerr {

Weights tilde_weights(const Weights& w, PStar pstar) {
    const int d = w.dim();
    Weights out(d);
    out.set_gamma(SubsetId(), 0.0);
    const std::uint32_t count = w.subset_count();

    if (pstar.is_infinite()) {
        for (std::uint32_t m = 1; m < count; ++m)
            out.set_gamma(SubsetId(m), std::ldexp(w.gamma(SubsetId(m)), std::popcount(m)));
        return out;
    }

    const double q = pstar.value();
    const double beta = std::pow(2.0, q - 1.0) / (q + 1.0);

    // superset sums of gamma_v^q beta^|v| via the subset-sum transform
    std::vector<double> f(count, 0.0);
    for (std::uint32_t m = 1; m < count; ++m) {
        const double g = w.gamma(SubsetId(m));
        if (g > 0.0) f[m] = std::pow(g, q) * std::pow(beta, std::popcount(m));
    }
    for (int a = 0; a < d; ++a)
        for (std::uint32_t m = 0; m < count; ++m)
            if (!((m >> a) & 1u)) f[m] += f[m | (1u << a)];

    for (std::uint32_t m = 1; m < count; ++m)
        out.set_gamma(SubsetId(m), std::pow(std::pow(q + 1.0, std::popcount(m)) * f[m], 1.0 / q));
    return out;
}

DiscrepancyValue upper_bound_cor1(const PointSet& ps, const Weights& w, PStar pstar, double tol,
                                  const QuadratureLimits& limits) {
    return weighted_lp_discrepancy(ps, tilde_weights(w, pstar), pstar, tol, limits);
}

namespace {

using u128 = unsigned __int128;

u128 gcd128(u128 a, u128 b) {
    while (b != 0) {
        const u128 r = a % b;
        a = b;
        b = r;
    }
    return a;
}

u128 factorial128(int m) {
    u128 f = 1;
    for (int i = 2; i <= m; ++i) f *= static_cast<unsigned>(i);
    return f;
}

void check_t_range(int d, int lo) {
    if (d < lo || d > kMaxWeightDim)
        throw std::invalid_argument("factorial ratio check: need " + std::to_string(lo) +
                                    " <= d <= " + std::to_string(kMaxWeightDim));
}

}  // namespace

double Rational::to_double() const {
    return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
}

Rational t_sequence(int d, int ell) {
    check_t_range(d, 1);
    if (ell < 1 || ell > d) throw std::invalid_argument("t_sequence: need 1 <= ell <= d");
    const u128 fe = factorial128(ell);
    const u128 fd = factorial128(d);
    Rational r{fe * fe, fd * fd};
    const u128 g = gcd128(r.num, r.den);
    r.num /= g;
    r.den /= g;
    return r;
}

bool t_inequality_holds(int d) {
    check_t_range(d, 2);
    // All quantities fit in 128 bits for d <= 20: each summand is
    // ell! * k! / (ell-k)!  <=  20! * 19!  <  2^118.
    for (int ell = 2; ell <= d; ++ell) {
        const u128 fe = factorial128(ell);
        u128 sum = 0;
        for (int k = 1; k <= ell - 1; ++k) {
            const u128 binom = fe / (factorial128(k) * factorial128(ell - k));
            const u128 fk = factorial128(k);
            sum += binom * fk * fk;
        }
        if (!(sum < fe * fe)) return false;
    }
    return true;
}

SandwichBounds sandwich_2d(const PointSet& ps, const Weights& w, PStar pstar, double tol) {
    if (ps.dim() != 2) throw std::invalid_argument("sandwich_2d: need a 2D point set");
    if (pstar.is_infinite()) throw std::invalid_argument("sandwich_2d: need finite p*");
    if (w.dim() != 2) throw std::invalid_argument("sandwich_2d: need 2D weights");
    if (!is_projection_regular(ps))
        throw std::invalid_argument("sandwich_2d: point set is not projection regular");

    const double q = pstar.value();
    const double n = ps.size();
    const double g1 = w.gamma(SubsetId(0b01));
    const double g2 = w.gamma(SubsetId(0b10));
    const double g12 = w.gamma(SubsetId(0b11));

    const DiscrepancyValue lq = lp_discrepancy(ps, pstar, tol);
    const double bracket = (std::pow(g1, q) + std::pow(g2, q)) / (q + 1.0) +
                           std::pow(3.0, q - 1.0) * std::pow(g12, q) *
                               (2.0 / ((q + 1.0) * (q + 1.0)) + std::pow(n * lq.value, q));

    SandwichBounds out;
    out.upper = std::pow(bracket, 1.0 / q) / n;
    out.lower_proxy = g12 * (lq.value - std::pow(2.0, q + 1.0) / ((q + 1.0) * (q + 1.0) * n));
    const ErrorReport rep = wce(ps, w, pstar, tol);
    out.wce_value = rep.total;
    out.wce_tolerance = rep.tolerance;
    return out;
}

double embedding_norm_1d_p2(double gamma1) {
    if (!(gamma1 > 0.0)) throw std::invalid_argument("embedding_norm_1d_p2: need gamma > 0");
    const double inner = std::sqrt(1.0 + gamma1 * gamma1 / 12.0) + gamma1 / std::sqrt(12.0);
    return std::sqrt(1.0 + gamma1 / std::sqrt(3.0) * inner);
}

}  // namespace qmcerr
