#include "qmcerr/discrepancy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cell_quadrature.hpp"

namespace qmcerr {

CellGrid CellGrid::from(const PointSet& ps) { return CellGrid{detail::axis_breaks(ps)}; }

std::int64_t CellGrid::cell_count() const {
    std::int64_t total = 1;
    for (const auto& b : breaks) total *= static_cast<std::int64_t>(b.size()) - 1;
    return total;
}

std::int64_t CellGrid::vertex_count() const {
    std::int64_t total = 1;
    for (const auto& b : breaks) total *= static_cast<std::int64_t>(b.size());
    return total;
}

double local_discrepancy(const PointSet& ps, std::span<const double> t) {
    if (static_cast<int>(t.size()) != ps.dim())
        throw std::invalid_argument("local_discrepancy: t has wrong dimension");
    for (double c : t)
        if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("local_discrepancy: t outside [0,1]^d");
    int count = 0;
    for (int j = 0; j < ps.size(); ++j) {
        bool inside = true;
        for (int a = 0; a < ps.dim() && inside; ++a) inside = ps.coord(j, a) < t[static_cast<std::size_t>(a)];
        count += inside;
    }
    double volume = 1.0;
    for (double c : t) volume *= c;
    return static_cast<double>(count) / ps.size() - volume;
}

namespace {

// Integral of the squared local discrepancy, by expanding the square and
// integrating each product term in closed form.
double l2_squared(const PointSet& ps) {
    const int n = ps.size();
    const int d = ps.dim();
    long double cross = 0.0L;
    for (int j = 0; j < n; ++j) {
        long double prod = 1.0L;
        for (int a = 0; a < d; ++a) {
            const double x = ps.coord(j, a);
            prod *= (1.0 - x * x) / 2.0;
        }
        cross += prod;
    }
    long double pair = 0.0L;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            long double prod = 1.0L;
            for (int a = 0; a < d; ++a) prod *= 1.0 - std::max(ps.coord(j, a), ps.coord(i, a));
            pair += prod;
        }
    }
    const long double value = std::pow(3.0L, static_cast<long double>(-d)) -
                              (2.0L / n) * cross + pair / (static_cast<long double>(n) * n);
    return std::max(0.0, static_cast<double>(value));
}

detail::CellProblem discrepancy_problem(const detail::PrefixCounts& counts, int n) {
    detail::CellProblem prob;
    prob.k = counts.dim();
    prob.breaks = counts.breaks();
    const std::uint32_t full = (1u << prob.k) - 1u;
    prob.cell_coeffs = [&counts, n, full](std::span<const int> idx, std::span<double> coeffs) {
        std::fill(coeffs.begin(), coeffs.end(), 0.0);
        coeffs[0] = static_cast<double>(counts.count_leq(idx)) / n;
        coeffs[full] -= 1.0;
    };
    return prob;
}

struct IntegralWithTol {
    double value = 0.0;       // approximates the p*-th power integral
    double error_bound = 0.0;
};

// p*-th power integral of |local discrepancy| of ps, with absolute error at
// most abs_tol unless the cell budget runs out (then QuadratureBudgetError).
IntegralWithTol lq_power_integral(const PointSet& ps, double q, double abs_tol,
                                  const QuadratureLimits& limits) {
    if (ps.dim() == 1) {
        std::vector<double> xs(ps.flat().begin(), ps.flat().end());
        return {detail::lq_integral_1d(xs, q), 0.0};
    }
    if (q == 2.0) return {l2_squared(ps), 0.0};
    detail::PrefixCounts counts(ps);
    const auto prob = discrepancy_problem(counts, ps.size());
    const auto out = detail::integrate_abs_pow(prob, q, abs_tol, limits.cell_budget);
    if (!out.converged)
        throw QuadratureBudgetError("discrepancy quadrature: cell budget exhausted (partial value " +
                                        std::to_string(out.value) + ", bound " +
                                        std::to_string(out.error_bound) + ")",
                                    out.value, out.error_bound);
    return {out.value, out.error_bound};
}

// Certified tolerance on S^(1/q) when S is known within +-err.
double root_tolerance(double s, double err, double q) {
    const double v = std::pow(s, 1.0 / q);
    const double hi = std::pow(s + err, 1.0 / q);
    const double lo = std::pow(std::max(s - err, 0.0), 1.0 / q);
    return std::max(hi - v, v - lo);
}

}  // namespace

double l2_discrepancy(const PointSet& ps) { return std::sqrt(l2_squared(ps)); }

double linf_discrepancy(const PointSet& ps) {
    if (ps.dim() == 1) {
        std::vector<double> xs(ps.flat().begin(), ps.flat().end());
        return detail::sup_abs_1d(xs);
    }
    const detail::PrefixCounts counts(ps);
    const auto& breaks = counts.breaks();
    const int k = counts.dim();
    const double n = ps.size();
    std::vector<int> idx(static_cast<std::size_t>(k), 0);
    double sup = 0.0;
    while (true) {
        const double c = static_cast<double>(counts.count_leq(idx)) / n;
        double vol_lo = 1.0, vol_hi = 1.0;
        for (int l = 0; l < k; ++l) {
            const auto& b = breaks[static_cast<std::size_t>(l)];
            vol_lo *= b[static_cast<std::size_t>(idx[static_cast<std::size_t>(l)])];
            vol_hi *= b[static_cast<std::size_t>(idx[static_cast<std::size_t>(l)]) + 1];
        }
        sup = std::max({sup, std::abs(c - vol_lo), std::abs(c - vol_hi)});
        int l = 0;
        for (; l < k; ++l) {
            const std::size_t ul = static_cast<std::size_t>(l);
            if (++idx[ul] < static_cast<int>(breaks[ul].size()) - 1) break;
            idx[ul] = 0;
        }
        if (l == k) break;
    }
    return sup;
}

DiscrepancyValue lp_discrepancy(const PointSet& ps, PStar pstar, double tol,
                                const QuadratureLimits& limits) {
    if (!(tol > 0.0)) throw std::invalid_argument("lp_discrepancy: tol must be positive");
    if (pstar.is_infinite()) return {linf_discrepancy(ps), 0.0};
    const double q = pstar.value();

    if (ps.dim() == 1) {
        std::vector<double> xs(ps.flat().begin(), ps.flat().end());
        return {std::pow(detail::lq_integral_1d(xs, q), 1.0 / q), 0.0};
    }

    if (q == 2.0) {
        const double exact = std::sqrt(l2_squared(ps));
        // Cross-check the adaptive engine against the closed form whenever the
        // grid is small enough to afford it.
        detail::PrefixCounts counts(ps);
        const auto prob = discrepancy_problem(counts, ps.size());
        const std::int64_t check_budget = std::min<std::int64_t>(limits.cell_budget, 150'000);
        if (prob.cell_count() <= check_budget) {
            const double check_tol = std::max(tol, 1e-7);
            const auto out =
                detail::integrate_abs_pow(prob, 2.0, 2.0 * check_tol * std::max(exact, 1e-8), check_budget);
            if (out.converged) {
                const double engine = std::sqrt(std::max(out.value, 0.0));
                if (std::abs(engine - exact) > check_tol + root_tolerance(out.value, out.error_bound, 2.0))
                    throw std::logic_error("lp_discrepancy: quadrature disagrees with the exact L2 identity");
            }
        }
        return {exact, 0.0};
    }

    // Refine the power-integral tolerance until the root is certified.
    double target = std::max(tol, 1e-13);
    IntegralWithTol integral{};
    double reported = std::numeric_limits<double>::infinity();
    for (int round = 0; round < limits.rounds; ++round) {
        integral = lq_power_integral(ps, q, target, limits);
        reported = root_tolerance(integral.value, integral.error_bound, q);
        if (reported <= tol) break;
        const double base = std::max(integral.value - integral.error_bound, 0.0);
        target = std::max(std::pow(tol, q), 0.5 * tol * q * std::pow(base, (q - 1.0) / q));
    }
    if (reported > tol)
        throw QuadratureBudgetError("lp_discrepancy: could not certify requested tolerance",
                                    std::pow(integral.value, 1.0 / q), reported);
    return {std::pow(integral.value, 1.0 / q), reported};
}

DiscrepancyValue weighted_lp_discrepancy(const PointSet& ps, const Weights& w, PStar pstar,
                                         double tol, const QuadratureLimits& limits) {
    if (w.dim() != ps.dim())
        throw std::invalid_argument("weighted_lp_discrepancy: weight and point dimensions differ");
    if (!(tol > 0.0)) throw std::invalid_argument("weighted_lp_discrepancy: tol must be positive");

    std::vector<SubsetId> subsets;
    for (SubsetId u : w.u_plus())
        if (!u.empty()) subsets.push_back(u);
    if (subsets.empty()) return {0.0, 0.0};

    if (pstar.is_infinite()) {
        double best = 0.0;
        for (SubsetId u : subsets)
            best = std::max(best, w.gamma(u) * linf_discrepancy(project(ps, u)));
        return {best, 0.0};
    }

    const double q = pstar.value();
    double gamma_q_sum = 0.0;  // over subsets that need adaptive quadrature
    for (SubsetId u : subsets)
        if (u.cardinality() >= 2 && q != 2.0) gamma_q_sum += std::pow(w.gamma(u), q);

    double target = std::max(tol, 1e-13);
    double total = 0.0, total_err = 0.0, reported = 0.0;
    for (int round = 0; round < limits.rounds; ++round) {
        long double s = 0.0L, err = 0.0L;
        const double per_subset_tol = gamma_q_sum > 0.0 ? target / gamma_q_sum : target;
        for (SubsetId u : subsets) {
            const double gq = std::pow(w.gamma(u), q);
            const auto part = lq_power_integral(project(ps, u), q, per_subset_tol, limits);
            s += gq * part.value;
            err += gq * part.error_bound;
        }
        total = static_cast<double>(s);
        total_err = static_cast<double>(err);
        reported = root_tolerance(total, total_err, q);
        if (reported <= tol || gamma_q_sum == 0.0) break;
        const double base = std::max(total - total_err, 0.0);
        target = std::max(std::pow(tol, q), 0.5 * tol * q * std::pow(base, (q - 1.0) / q));
    }
    if (reported > tol)
        throw QuadratureBudgetError("weighted_lp_discrepancy: could not certify requested tolerance",
                                    std::pow(total, 1.0 / q), reported);
    return {std::pow(total, 1.0 / q), reported};
}

PointSet reflect(const PointSet& ps) {
    std::vector<double> flat(ps.flat().begin(), ps.flat().end());
    for (double& c : flat) c = 1.0 - c;
    return PointSet(ps.dim(), std::move(flat));
}

DiscrepancyValue anchored_wce(const PointSet& ps, const Weights& w, PStar pstar, double tol,
                              const QuadratureLimits& limits) {
    return weighted_lp_discrepancy(reflect(ps), w, pstar, tol, limits);
}

}  // namespace qmcerr
