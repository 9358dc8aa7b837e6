#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qmcerr/core_types.hpp"

namespace qmcerr {

/// The axis-aligned grid induced by the distinct coordinate values of a point
/// set (plus 0 and 1).  The box-counting function is constant on every open
/// cell, so discrepancy extrema and piecewise integrals reduce to cell work.
struct CellGrid {
    std::vector<std::vector<double>> breaks;  // per axis, ascending, from 0 to 1

    static CellGrid from(const PointSet& ps);
    int dim() const { return static_cast<int>(breaks.size()); }
    std::int64_t cell_count() const;
    std::int64_t vertex_count() const;
};

/// count([0,t)) / n - volume([0,t)); the box is half open, so coordinates
/// equal to t_i (or to 1) are not counted.
double local_discrepancy(const PointSet& ps, std::span<const double> t);

/// Exact L2 discrepancy via the O(n^2 d) double-sum identity.
double l2_discrepancy(const PointSet& ps);

/// Exact sup-norm of the local discrepancy, from both one-sided limits at
/// every grid cell corner.
double linf_discrepancy(const PointSet& ps);

struct DiscrepancyValue {
    double value = 0.0;
    double tolerance = 0.0;  // certified absolute bound; 0 on exact paths
};

struct QuadratureLimits {
    std::int64_t cell_budget = 400'000;  // per adaptive integral
    int rounds = 4;                      // tolerance-target refinement rounds
};

/// L_{p*} norm of the local discrepancy.  Exact for p* = infinity, for d = 1,
/// and for p* = 2 (which is additionally cross-checked against the double-sum
/// identity); otherwise certified adaptive quadrature within tol.
DiscrepancyValue lp_discrepancy(const PointSet& ps, PStar pstar, double tol = 1e-9,
                                const QuadratureLimits& limits = {});

/// Weighted discrepancy: the gamma-weighted p*-sum (or max, for p* = inf) of
/// the projection discrepancies over all positive-weight nonempty subsets.
DiscrepancyValue weighted_lp_discrepancy(const PointSet& ps, const Weights& w, PStar pstar,
                                         double tol = 1e-9, const QuadratureLimits& limits = {});

/// Coordinate-wise reflection x -> 1 - x.
PointSet reflect(const PointSet& ps);

/// Worst-case error over the anchor-0 space: the weighted discrepancy of the
/// reflected node set.
DiscrepancyValue anchored_wce(const PointSet& ps, const Weights& w, PStar pstar,
                              double tol = 1e-9, const QuadratureLimits& limits = {});

}  // namespace qmcerr
