#include "qmcerr/wce.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cell_quadrature.hpp"

namespace qmcerr {

double kernel(double x, double t) { return x >= t ? t : t - 1.0; }

namespace {

std::vector<int> checked_axes(const PointSet& ps, SubsetId u, std::span<const double> t_u) {
    if (u.empty()) throw std::invalid_argument("kernel_sum: empty subset");
    const auto axes = u.axes();
    if (axes.back() >= ps.dim()) throw std::invalid_argument("kernel_sum: subset axis beyond dimension");
    if (t_u.size() != axes.size()) throw std::invalid_argument("kernel_sum: t has wrong length");
    for (double c : t_u)
        if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("kernel_sum: t outside the unit cube");
    return axes;
}

}  // namespace

double kernel_sum(const PointSet& ps, SubsetId u, std::span<const double> t_u) {
    const auto axes = checked_axes(ps, u, t_u);
    long double sum = 0.0L;
    for (int j = 0; j < ps.size(); ++j) {
        double prod = 1.0;
        for (std::size_t l = 0; l < axes.size(); ++l)
            prod *= kernel(ps.coord(j, axes[l]), t_u[l]);
        sum += prod;
    }
    return static_cast<double>(sum);
}

double kernel_sum_via_discrepancy(const PointSet& ps, SubsetId u, std::span<const double> t_u) {
    const auto axes = checked_axes(ps, u, t_u);
    const int n = ps.size();
    // position of each member axis within u, for projecting t_u further
    std::vector<int> slot(static_cast<std::size_t>(ps.dim()), -1);
    for (std::size_t l = 0; l < axes.size(); ++l) slot[static_cast<std::size_t>(axes[l])] = static_cast<int>(l);

    long double sum = 0.0L;
    std::uint32_t v = u.mask();
    do {
        // local discrepancy of the projection onto v, at the matching slice of t_u
        int count = 0;
        for (int j = 0; j < n; ++j) {
            bool inside = true;
            for (std::uint32_t rest = v; rest && inside;) {
                const int a = std::countr_zero(rest);
                rest &= rest - 1;
                inside = ps.coord(j, a) < t_u[static_cast<std::size_t>(slot[static_cast<std::size_t>(a)])];
            }
            count += inside;
        }
        double vol = 1.0;
        for (std::uint32_t rest = v; rest;) {
            const int a = std::countr_zero(rest);
            rest &= rest - 1;
            vol *= t_u[static_cast<std::size_t>(slot[static_cast<std::size_t>(a)])];
        }
        const double delta = static_cast<double>(count) / n - vol;

        double outer = 1.0;
        for (std::uint32_t rest = u.mask() & ~v; rest;) {
            const int a = std::countr_zero(rest);
            rest &= rest - 1;
            outer *= t_u[static_cast<std::size_t>(slot[static_cast<std::size_t>(a)])];
        }
        const int sign = (std::popcount(v) & 1) ? -1 : 1;
        sum += sign * delta * outer;
        v = (v - 1) & u.mask();
    } while (v != 0);
    return static_cast<double>(n) * static_cast<double>(sum);
}

namespace {

// Closed-form integral over t of kernel(x,t) * kernel(y,t).
double kernel_product_integral(double x, double y) {
    return 1.0 / 3.0 - (1.0 - x * x) / 2.0 - (1.0 - y * y) / 2.0 + (1.0 - std::max(x, y));
}

// integral over the subset cube of |kernel sum|^2, via the pairwise identity
double kernel_sq_integral(const PointSet& proj) {
    const int n = proj.size();
    const int k = proj.dim();
    long double sum = 0.0L;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            double prod = 1.0;
            for (int a = 0; a < k; ++a)
                prod *= kernel_product_integral(proj.coord(j, a), proj.coord(i, a));
            sum += prod;
        }
    return std::max(0.0, static_cast<double>(sum));
}

detail::CellProblem kernel_problem(const detail::PrefixCounts& counts) {
    detail::CellProblem prob;
    prob.k = counts.dim();
    prob.breaks = counts.breaks();
    const int k = prob.k;
    const std::uint32_t full = (1u << k) - 1u;
    prob.cell_coeffs = [&counts, k, full](std::span<const int> idx, std::span<double> coeffs) {
        // phi(t) = sum_j prod_l (t_l - ind_{j,l}) with cell-constant indicators;
        // coefficient of prod_{l in S} t_l counts the points indicated on all
        // axes outside S, with alternating sign.
        std::vector<int> corner(static_cast<std::size_t>(k));
        for (std::uint32_t s = 0; s <= full; ++s) {
            for (int l = 0; l < k; ++l) {
                const std::size_t ul = static_cast<std::size_t>(l);
                corner[ul] = ((s >> l) & 1u) ? static_cast<int>(counts.breaks()[ul].size()) - 1 : idx[ul];
            }
            const double cnt = counts.count_leq(corner);
            coeffs[s] = ((k - std::popcount(s)) & 1) ? -cnt : cnt;
        }
    };
    return prob;
}

struct SupResult {
    double lower = 0.0;   // attained value (a true lower bound on the sup)
    double upper = 0.0;   // rigorous upper bound; equals lower when exact
    bool exact = true;
};

std::int64_t exact_sup_cost(const std::vector<std::vector<double>>& breaks) {
    const int k = static_cast<int>(breaks.size());
    std::int64_t cells = 1;
    for (const auto& b : breaks) {
        cells *= static_cast<std::int64_t>(b.size()) - 1;
        if (cells > (std::int64_t{1} << 40)) return cells;
    }
    return cells * (std::int64_t{1} << (2 * k)) * k;
}

SupResult kernel_sup_exact(const PointSet& proj) {
    const detail::PrefixCounts counts(proj);
    const double s = detail::sup_abs(kernel_problem(counts));
    return {s, s, true};
}

// Bounded scan on a coarsened grid: corner evaluations give a true lower
// bound, per-cell factor ranges a rigorous upper bound.
SupResult kernel_sup_coarse(const PointSet& proj, std::int64_t op_budget) {
    const int k = proj.dim();
    const int n = proj.size();
    auto breaks = detail::axis_breaks(proj);

    const double per_cell = static_cast<double>((std::int64_t{1} << k) * n * k + n * k);
    std::int64_t max_cells = std::max<std::int64_t>(std::int64_t(static_cast<double>(op_budget) / per_cell), 1);
    int per_axis = std::max(2, static_cast<int>(std::pow(static_cast<double>(max_cells), 1.0 / k)));

    std::vector<std::vector<double>> coarse(static_cast<std::size_t>(k));
    for (int l = 0; l < k; ++l) {
        const auto& b = breaks[static_cast<std::size_t>(l)];
        auto& c = coarse[static_cast<std::size_t>(l)];
        const int m = static_cast<int>(b.size());
        const int steps = std::min(per_axis, m - 1);
        for (int i = 0; i <= steps; ++i)
            c.push_back(b[static_cast<std::size_t>((static_cast<std::int64_t>(i) * (m - 1)) / steps)]);
        c.erase(std::unique(c.begin(), c.end()), c.end());
    }

    std::vector<int> idx(static_cast<std::size_t>(k), 0);
    std::vector<double> t(static_cast<std::size_t>(k));
    double lower = 0.0, upper = 0.0;
    while (true) {
        // corner values: one-sided limits from inside the cell
        for (std::uint32_t cornerbits = 0; cornerbits < (1u << k); ++cornerbits) {
            long double sum = 0.0L;
            for (int l = 0; l < k; ++l) {
                const std::size_t ul = static_cast<std::size_t>(l);
                const auto& c = coarse[ul];
                t[ul] = ((cornerbits >> l) & 1u) ? c[static_cast<std::size_t>(idx[ul]) + 1]
                                                 : c[static_cast<std::size_t>(idx[ul])];
            }
            for (int j = 0; j < n; ++j) {
                double prod = 1.0;
                for (int l = 0; l < k; ++l) {
                    const std::size_t ul = static_cast<std::size_t>(l);
                    const double x = proj.coord(j, l);
                    const bool ind = ((cornerbits >> l) & 1u) ? (x < t[ul]) : (x <= t[ul]);
                    prod *= t[ul] - (ind ? 1.0 : 0.0);
                }
                sum += prod;
            }
            lower = std::max(lower, std::abs(static_cast<double>(sum)));
        }
        // factor-range bound over the whole cell
        long double bound = 0.0L;
        for (int j = 0; j < n; ++j) {
            double prod = 1.0;
            for (int l = 0; l < k; ++l) {
                const std::size_t ul = static_cast<std::size_t>(l);
                const double lo = coarse[ul][static_cast<std::size_t>(idx[ul])];
                const double hi = coarse[ul][static_cast<std::size_t>(idx[ul]) + 1];
                const double x = proj.coord(j, l);
                double f;
                if (x >= hi) f = hi;                 // never indicated on [lo,hi]
                else if (x < lo) f = 1.0 - lo;       // always indicated
                else f = std::max(hi, 1.0 - lo);     // indicator switches inside
                prod *= f;
            }
            bound += prod;
        }
        upper = std::max(upper, static_cast<double>(bound));

        int l = 0;
        for (; l < k; ++l) {
            const std::size_t ul = static_cast<std::size_t>(l);
            if (++idx[ul] < static_cast<int>(coarse[ul].size()) - 1) break;
            idx[ul] = 0;
        }
        if (l == k) break;
    }
    return {lower, std::max(upper, lower), false};
}

EvalMethod weakest(EvalMethod a, EvalMethod b) { return a < b ? b : a; }

double root_tolerance(double s, double err, double q) {
    const double v = std::pow(s, 1.0 / q);
    const double hi = std::pow(s + err, 1.0 / q);
    const double lo = std::pow(std::max(s - err, 0.0), 1.0 / q);
    return std::max(hi - v, v - lo);
}

}  // namespace

ErrorReport wce(const PointSet& ps, const Weights& w, PStar pstar, double tol, const WceLimits& limits) {
    if (w.dim() != ps.dim()) throw std::invalid_argument("wce: weight and point dimensions differ");
    if (!(tol > 0.0)) throw std::invalid_argument("wce: tol must be positive");

    std::vector<SubsetId> subsets;
    for (SubsetId u : w.u_plus())
        if (!u.empty()) subsets.push_back(u);

    ErrorReport report;
    if (subsets.empty()) return report;

    const int n = ps.size();

    if (pstar.is_infinite()) {
        double best_upper = 0.0;
        EvalMethod method = EvalMethod::exact_grid_sup;
        for (SubsetId u : subsets) {
            const PointSet proj = project(ps, u);
            const auto breaks = detail::axis_breaks(proj);
            SupResult sup = exact_sup_cost(breaks) <= limits.sup_op_budget
                                ? kernel_sup_exact(proj)
                                : kernel_sup_coarse(proj, limits.sup_op_budget);
            const double gamma = w.gamma(u);
            SubsetTerm term;
            term.subset = u;
            term.term = gamma * sup.lower / n;
            term.method = sup.exact ? EvalMethod::exact_grid_sup : EvalMethod::grid_sup_lower_bound;
            report.per_subset.push_back(term);
            if (term.term > report.total) report.total = term.term;
            best_upper = std::max(best_upper, gamma * sup.upper / n);
            method = weakest(method, term.method);
        }
        report.method = method;
        report.tolerance = std::max(0.0, best_upper - report.total);
        return report;
    }

    const double q = pstar.value();
    const bool all_exact_q2 = (q == 2.0);

    double gamma_q_engine = 0.0;
    for (SubsetId u : subsets)
        if (!all_exact_q2 && u.cardinality() >= 2) gamma_q_engine += std::pow(w.gamma(u), q);

    const double nq = std::pow(static_cast<double>(n), q);
    double target = std::max(tol, 1e-13);
    double total_sum = 0.0, total_err = 0.0, reported = 0.0;
    EvalMethod method = EvalMethod::exact_closed_form;

    for (int round = 0; round < limits.rounds; ++round) {
        report.per_subset.clear();
        method = EvalMethod::exact_closed_form;
        long double s = 0.0L, err = 0.0L;
        // absolute tolerance on each subset integral; engine subsets share the
        // budget in proportion to gamma^p*
        const double eps_integral = gamma_q_engine > 0.0 ? target * nq / gamma_q_engine : 0.0;

        for (SubsetId u : subsets) {
            const double gamma = w.gamma(u);
            const double gq = std::pow(gamma, q);
            SubsetTerm term;
            term.subset = u;
            if (all_exact_q2) {
                const PointSet proj = project(ps, u);
                term.term = gq * kernel_sq_integral(proj) / (static_cast<double>(n) * n);
                term.method = EvalMethod::exact_closed_form;
            } else if (u.cardinality() == 1) {
                const PointSet proj = project(ps, u);
                std::vector<double> xs(proj.flat().begin(), proj.flat().end());
                term.term = gq * detail::lq_integral_1d(xs, q);  // n^q from the kernel sum cancels
                term.method = EvalMethod::exact_closed_form;
            } else {
                const PointSet proj = project(ps, u);
                const detail::PrefixCounts counts(proj);
                const auto out =
                    detail::integrate_abs_pow(kernel_problem(counts), q, eps_integral, limits.cell_budget);
                if (!out.converged)
                    throw QuadratureBudgetError(
                        "wce: cell budget exhausted on subset " + subset_to_coord_list(u), out.value / nq,
                        out.error_bound / nq);
                term.term = gq * out.value / nq;
                err += gq * out.error_bound / nq;
                term.method = EvalMethod::quadrature;
            }
            s += term.term;
            method = weakest(method, term.method);
            report.per_subset.push_back(term);
        }

        total_sum = static_cast<double>(s);
        total_err = static_cast<double>(err);
        reported = root_tolerance(total_sum, total_err, q);
        if (reported <= tol || gamma_q_engine == 0.0) break;
        const double base = std::max(total_sum - total_err, 0.0);
        target = std::max(std::pow(tol, q), 0.5 * tol * q * std::pow(base, (q - 1.0) / q));
    }
    if (reported > tol)
        throw QuadratureBudgetError("wce: could not certify requested tolerance",
                                    std::pow(total_sum, 1.0 / q), reported);

    report.total = std::pow(total_sum, 1.0 / q);
    report.tolerance = reported;
    report.method = method;
    return report;
}

}  // namespace qmcerr
