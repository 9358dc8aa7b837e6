#pragma once

#include "qmcerr/core_types.hpp"
#include "qmcerr/discrepancy.hpp"

namespace qmcerr {

/// Modified weights under which the weighted discrepancy of the node set
/// dominates the worst-case error.  For finite p* the weight of u aggregates
/// all positive-weight supersets; for p* = inf it is 2^|u| gamma_u.  The
/// empty-set weight is 0 (it never enters discrepancy sums).
Weights tilde_weights(const Weights& w, PStar pstar);

/// Weighted discrepancy of ps under the modified weights: a certified upper
/// bound on wce(ps, w, pstar).
DiscrepancyValue upper_bound_cor1(const PointSet& ps, const Weights& w, PStar pstar,
                                  double tol = 1e-9, const QuadratureLimits& limits = {});

/// Exact nonnegative rational with 128-bit numerator and denominator.
struct Rational {
    unsigned __int128 num = 0;
    unsigned __int128 den = 1;
    double to_double() const;
    friend bool operator==(const Rational&, const Rational&) = default;
};

/// The factorial ratio (ell!)^2 / (d!)^2, exact.
Rational t_sequence(int d, int ell);

/// Checks, in exact integer arithmetic, that for every ell in {2..d}
///   (ell!)^2 > sum_{k=1}^{ell-1} binom(ell,k) (k!)^2,
/// the strict dominance that drives the lower-bound induction.
bool t_inequality_holds(int d);

struct SandwichBounds {
    double lower_proxy = 0.0;  // gamma_{12} (L_{p*} - 2^{p*+1}/((p*+1)^2 n)); may be negative
    double upper = 0.0;        // explicit projection-regular upper bound
    double wce_value = 0.0;
    double wce_tolerance = 0.0;
};

/// Two-sided bounds for a projection-regular 2D node set with finite p*,
/// together with the computed worst-case error.
SandwichBounds sandwich_2d(const PointSet& ps, const Weights& w, PStar pstar, double tol = 1e-9);

/// Closed-form norm of the embedding between the anchored and unanchored 1D
/// spaces at p = 2 with unit empty-set weight.
double embedding_norm_1d_p2(double gamma1);

}  // namespace qmcerr
