#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qmcerr {

// Weight tables enumerate all 2^d coordinate subsets; larger d is rejected.
inline constexpr int kMaxWeightDim = 20;
// Subsets are stored as 32-bit masks.
inline constexpr int kMaxPointDim = 32;

/// A subset of coordinate axes, encoded as a bit mask (bit i = axis i, 0-based).
class SubsetId {
public:
    constexpr SubsetId() = default;
    constexpr explicit SubsetId(std::uint32_t mask) : mask_(mask) {}

    static SubsetId full(int d);
    static SubsetId single_axis(int axis);

    constexpr std::uint32_t mask() const { return mask_; }
    constexpr bool empty() const { return mask_ == 0; }
    int cardinality() const;
    constexpr bool contains_axis(int axis) const { return (mask_ >> axis) & 1u; }
    constexpr bool subset_of(SubsetId other) const { return (mask_ & other.mask_) == mask_; }
    constexpr bool superset_of(SubsetId other) const { return other.subset_of(*this); }

    /// Member axes in ascending order, 0-based.
    std::vector<int> axes() const;

    friend constexpr bool operator==(SubsetId a, SubsetId b) { return a.mask_ == b.mask_; }
    friend constexpr auto operator<=>(SubsetId a, SubsetId b) { return a.mask_ <=> b.mask_; }

private:
    std::uint32_t mask_ = 0;
};

/// "1,3" style coordinate list (1-based); "()" denotes the empty subset.
std::string subset_to_coord_list(SubsetId u);
SubsetId subset_from_coord_list(std::string_view text, int d);

/// A set of n points in [0,1]^d, stored row-major. Point order is preserved
/// by all constructions and projections; duplicates are allowed.
class PointSet {
public:
    PointSet(int dim, std::vector<double> flat_coords);
    static PointSet from_rows(const std::vector<std::vector<double>>& rows);
    static PointSet from_1d(std::vector<double> coords);

    int dim() const { return dim_; }
    int size() const { return n_; }
    double coord(int point, int axis) const { return coords_[static_cast<std::size_t>(point) * dim_ + axis]; }
    std::span<const double> point(int i) const {
        return {coords_.data() + static_cast<std::size_t>(i) * dim_, static_cast<std::size_t>(dim_)};
    }
    std::span<const double> flat() const { return coords_; }

private:
    int dim_ = 0;
    int n_ = 0;
    std::vector<double> coords_;
};

/// Projection onto the axes in u (u must be nonempty); order-preserving.
PointSet project(const PointSet& ps, SubsetId u);

/// Per-subset weights gamma_u >= 0 over all 2^d subsets of axes.
class Weights {
public:
    explicit Weights(int dim);  // gamma_empty = 1, all other weights 0
    static Weights product(int dim, std::span<const double> per_axis);
    static Weights single(int dim, SubsetId u, double gamma);

    int dim() const { return dim_; }
    std::uint32_t subset_count() const { return 1u << dim_; }
    double gamma(SubsetId u) const { return gamma_[u.mask()]; }
    void set_gamma(SubsetId u, double g);

    /// Subsets with positive weight, ascending mask order (includes the empty
    /// subset when gamma_empty > 0).
    std::vector<SubsetId> u_plus() const;

private:
    int dim_ = 0;
    std::vector<double> gamma_;
};

/// True iff the support of the weights is closed under taking nonempty subsets.
bool condition9_holds(const Weights& w);

/// The exponent p* in [1, infinity]; infinity is a first-class value.
class PStar {
public:
    static PStar infinity();
    static PStar finite(double value);          // value in [1, inf)
    static PStar parse(std::string_view text);  // decimal or "inf"

    bool is_infinite() const { return infinite_; }
    double value() const;  // +inf when infinite
    /// The conjugate exponent p with 1/p + 1/p* = 1.
    double conjugate_value() const;
    PStar conjugate() const;
    std::string str() const;

    friend bool operator==(const PStar&, const PStar&) = default;

private:
    PStar() = default;
    bool infinite_ = false;
    double value_ = 2.0;
};

enum class EvalMethod {
    exact_closed_form,
    exact_grid_sup,
    quadrature,
    grid_sup_lower_bound,
};

std::string_view to_string(EvalMethod m);

struct SubsetTerm {
    SubsetId subset;
    double term = 0.0;  // subset contribution before the outer 1/p* power
    EvalMethod method = EvalMethod::exact_closed_form;
};

/// A computed worst-case error with its per-subset breakdown.
///
/// For finite p*:  total = (sum of terms)^(1/p*).
/// For p* = inf:   total = max of terms.
/// tolerance is a certified absolute error bound on total (0 for exact paths,
/// except grid_sup_lower_bound where it is the gap to a rigorous upper bound).
struct ErrorReport {
    double total = 0.0;
    std::vector<SubsetTerm> per_subset;  // ascending mask order
    EvalMethod method = EvalMethod::exact_closed_form;
    double tolerance = 0.0;
};

/// Thrown when adaptive integration cannot certify the requested tolerance
/// within its subdivision budget. Carries the partial result.
class QuadratureBudgetError : public std::exception {
public:
    QuadratureBudgetError(std::string what, double partial_value, double partial_bound);
    const char* what() const noexcept override { return what_.c_str(); }
    double partial_value() const { return partial_value_; }
    double partial_bound() const { return partial_bound_; }

private:
    std::string what_;
    double partial_value_;
    double partial_bound_;
};

// Point-set files: first line "d n", then n lines of d space-separated
// coordinates. Weights files: lines "coords gamma" with coords a comma
// separated 1-based list ("()" for the empty subset, default gamma 1).
// Blank lines and lines starting with '#' are skipped.
PointSet read_point_set(std::istream& in);
PointSet load_point_set(const std::string& path);
void write_point_set(std::ostream& out, const PointSet& ps);
void save_point_set(const std::string& path, const PointSet& ps);

Weights read_weights(std::istream& in, int d);
Weights load_weights(const std::string& path, int d);
void write_weights(std::ostream& out, const Weights& w);

}  // namespace qmcerr
