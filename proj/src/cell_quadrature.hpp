#pragma once

// Internal machinery for integrating and maximizing |phi|^q when phi is
// multilinear on every cell of the breakpoint grid of a point set.  Both the
// local-discrepancy function (count/n - volume) and the kernel sum restricted
// to a grid cell have this form, so one engine serves both.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qmcerr/core_types.hpp"

namespace qmcerr::detail {

// ---- 1D exact pieces ----

/// Integral of |t - c|^q over [a, b], exact (the antiderivative is
/// sign(t-c)|t-c|^(q+1)/(q+1), continuous across t = c).
double abs_pow_segment(double a, double b, double c, double q);

/// Exact integral of |count(t)/n - t|^q over [0,1] for a 1D multiset,
/// where count(t) = #{x < t}.
double lq_integral_1d(std::span<const double> coords, double q);

/// Exact sup over [0,1] of |count(t)/n - t| (one-sided limits included).
double sup_abs_1d(std::span<const double> coords);

// ---- breakpoint grids and box counts ----

/// Ascending unique coordinate values per axis, always containing 0 and 1.
std::vector<std::vector<double>> axis_breaks(const PointSet& ps);

/// Number of points in the box {x : x_l <= v_l for all l} for every vertex v
/// of the breakpoint grid, via a multidimensional prefix sum.
class PrefixCounts {
public:
    explicit PrefixCounts(const PointSet& ps);

    const std::vector<std::vector<double>>& breaks() const { return breaks_; }
    int dim() const { return static_cast<int>(breaks_.size()); }
    std::int64_t vertex_count() const { return static_cast<std::int64_t>(data_.size()); }

    /// idx[l] indexes breaks()[l]; returns #{j : x_{j,l} <= breaks_[l][idx[l]] for all l}.
    std::int32_t count_leq(std::span<const int> idx) const;

private:
    std::vector<std::vector<double>> breaks_;
    std::vector<std::int64_t> strides_;
    std::vector<std::int32_t> data_;
};

// ---- multilinear cell problems ----

/// Describes |phi|^q over [0,1]^k: phi is multilinear on each grid cell, and
/// cell_coeffs fills, for the cell whose lower corner has breakpoint indices
/// idx, the 2^k coefficients c_S of phi(t) = sum_S c_S prod_{l in S} t_l
/// (S runs over bit masks of the k axes).
struct CellProblem {
    int k = 0;
    std::vector<std::vector<double>> breaks;
    std::function<void(std::span<const int> idx, std::span<double> coeffs)> cell_coeffs;

    std::int64_t cell_count() const;
};

/// phi evaluated at t from its multilinear coefficients.
double eval_multilinear(std::span<const double> coeffs, std::span<const double> t);

struct IntegralOutcome {
    double value = 0.0;
    double error_bound = 0.0;  // certified absolute bound on |value - integral|
    bool converged = true;
    std::int64_t cells = 0;
};

/// Adaptive evaluation of the integral of |phi|^q over [0,1]^k.
///
/// Per cell: the sign of the multilinear phi is decided exactly from its
/// corner values.  Sign-fixed cells with integer q <= 15 integrate exactly by
/// Gauss-Legendre (the integrand is a polynomial of degree q per axis); other
/// sign-fixed cells use the order-8 vs order-16 difference as the error
/// estimate.  Mixed-sign cells carry the rigorous bound vol * max|corner|^q
/// and are subdivided.  Refinement always splits the cell with the largest
/// error bound; ties break on creation order, so results are reproducible.
IntegralOutcome integrate_abs_pow(const CellProblem& prob, double q, double abs_tol,
                                  std::int64_t cell_budget);

/// Exact sup of |phi| over [0,1]^k: a multilinear function attains its
/// extremes at cell corners, and corner values of each cell are exactly the
/// one-sided limits of phi there.
double sup_abs(const CellProblem& prob);

}  // namespace qmcerr::detail
