#include "qmcerr/core_types.hpp"

#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace qmcerr {

namespace {

void check_axis_dim(int d, const char* who) {
    if (d < 1 || d > kMaxPointDim)
        throw std::invalid_argument(std::string(who) + ": dimension must be in [1, " +
                                    std::to_string(kMaxPointDim) + "], got " + std::to_string(d));
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

SubsetId SubsetId::full(int d) {
    check_axis_dim(d, "SubsetId::full");
    return SubsetId(d == 32 ? 0xffffffffu : ((1u << d) - 1u));
}

SubsetId SubsetId::single_axis(int axis) {
    if (axis < 0 || axis >= kMaxPointDim)
        throw std::invalid_argument("SubsetId::single_axis: axis out of range");
    return SubsetId(1u << axis);
}

int SubsetId::cardinality() const { return std::popcount(mask_); }

std::vector<int> SubsetId::axes() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(cardinality()));
    for (int i = 0; i < kMaxPointDim; ++i)
        if (contains_axis(i)) out.push_back(i);
    return out;
}

std::string subset_to_coord_list(SubsetId u) {
    if (u.empty()) return "()";
    std::string out;
    for (int axis : u.axes()) {
        if (!out.empty()) out += ',';
        out += std::to_string(axis + 1);
    }
    return out;
}

SubsetId subset_from_coord_list(std::string_view text, int d) {
    check_axis_dim(d, "subset_from_coord_list");
    if (text == "()") return SubsetId();
    std::uint32_t mask = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        std::string_view tok = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        int coord = 0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), coord);
        if (ec != std::errc() || ptr != tok.data() + tok.size())
            throw std::invalid_argument("bad subset token '" + std::string(tok) + "'");
        if (coord < 1 || coord > d)
            throw std::invalid_argument("subset coordinate " + std::to_string(coord) +
                                        " out of range for dimension " + std::to_string(d));
        std::uint32_t bit = 1u << (coord - 1);
        if (mask & bit)
            throw std::invalid_argument("duplicate coordinate " + std::to_string(coord) + " in subset");
        mask |= bit;
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return SubsetId(mask);
}

PointSet::PointSet(int dim, std::vector<double> flat_coords)
    : dim_(dim), coords_(std::move(flat_coords)) {
    check_axis_dim(dim, "PointSet");
    if (coords_.empty() || coords_.size() % static_cast<std::size_t>(dim) != 0)
        throw std::invalid_argument("PointSet: coordinate count not a positive multiple of dim");
    n_ = static_cast<int>(coords_.size() / static_cast<std::size_t>(dim));
    for (double c : coords_) {
        if (!(c >= 0.0 && c <= 1.0))
            throw std::invalid_argument("PointSet: coordinate " + format_double(c) + " outside [0,1]");
    }
}

PointSet PointSet::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw std::invalid_argument("PointSet: need at least one point");
    const std::size_t d = rows.front().size();
    std::vector<double> flat;
    flat.reserve(rows.size() * d);
    for (const auto& r : rows) {
        if (r.size() != d) throw std::invalid_argument("PointSet: ragged rows");
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return PointSet(static_cast<int>(d), std::move(flat));
}

PointSet PointSet::from_1d(std::vector<double> coords) { return PointSet(1, std::move(coords)); }

PointSet project(const PointSet& ps, SubsetId u) {
    if (u.empty()) throw std::invalid_argument("project: empty subset");
    const auto axes = u.axes();
    for (int a : axes)
        if (a >= ps.dim()) throw std::invalid_argument("project: subset axis beyond point dimension");
    const int k = static_cast<int>(axes.size());
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(ps.size()) * k);
    for (int j = 0; j < ps.size(); ++j)
        for (int a : axes) flat.push_back(ps.coord(j, a));
    return PointSet(k, std::move(flat));
}

Weights::Weights(int dim) : dim_(dim) {
    check_axis_dim(dim, "Weights");
    if (dim > kMaxWeightDim)
        throw std::invalid_argument("Weights: dimension " + std::to_string(dim) + " exceeds the 2^d table cap of " +
                                    std::to_string(kMaxWeightDim));
    gamma_.assign(std::size_t{1} << dim, 0.0);
    gamma_[0] = 1.0;
}

Weights Weights::product(int dim, std::span<const double> per_axis) {
    Weights w(dim);
    if (static_cast<int>(per_axis.size()) != dim)
        throw std::invalid_argument("Weights::product: need one factor per axis");
    for (double g : per_axis)
        if (!(g >= 0.0) || !std::isfinite(g))
            throw std::invalid_argument("Weights::product: factors must be finite and nonnegative");
    for (std::uint32_t m = 0; m < w.subset_count(); ++m) {
        double g = 1.0;
        for (int a = 0; a < dim; ++a)
            if ((m >> a) & 1u) g *= per_axis[static_cast<std::size_t>(a)];
        w.gamma_[m] = g;
    }
    return w;
}

Weights Weights::single(int dim, SubsetId u, double gamma) {
    Weights w(dim);
    w.set_gamma(u, gamma);
    return w;
}

void Weights::set_gamma(SubsetId u, double g) {
    if (u.mask() >= subset_count())
        throw std::invalid_argument("Weights::set_gamma: subset beyond dimension");
    if (!(g >= 0.0) || !std::isfinite(g))
        throw std::invalid_argument("Weights::set_gamma: weight must be finite and nonnegative");
    gamma_[u.mask()] = g;
}

std::vector<SubsetId> Weights::u_plus() const {
    std::vector<SubsetId> out;
    for (std::uint32_t m = 0; m < subset_count(); ++m)
        if (gamma_[m] > 0.0) out.push_back(SubsetId(m));
    return out;
}

bool condition9_holds(const Weights& w) {
    // Downward closure under removal of a single axis implies full closure.
    const std::uint32_t count = w.subset_count();
    for (std::uint32_t m = 1; m < count; ++m) {
        if (!(w.gamma(SubsetId(m)) > 0.0)) continue;
        for (int a = 0; a < w.dim(); ++a) {
            if (!((m >> a) & 1u)) continue;
            const std::uint32_t sub = m & ~(1u << a);
            if (sub != 0 && !(w.gamma(SubsetId(sub)) > 0.0)) return false;
        }
    }
    return true;
}

PStar PStar::infinity() {
    PStar p;
    p.infinite_ = true;
    p.value_ = std::numeric_limits<double>::infinity();
    return p;
}

PStar PStar::finite(double value) {
    if (std::isinf(value) && value > 0) return infinity();
    if (!(value >= 1.0) || !std::isfinite(value))
        throw std::invalid_argument("PStar: exponent must be in [1, inf], got " + format_double(value));
    PStar p;
    p.value_ = value;
    return p;
}

PStar PStar::parse(std::string_view text) {
    std::string lower(text);
    for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == "inf" || lower == "infinity" || lower == "oo") return infinity();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(lower.data(), lower.data() + lower.size(), v);
    if (ec != std::errc() || ptr != lower.data() + lower.size())
        throw std::invalid_argument("PStar: cannot parse '" + std::string(text) + "'");
    return finite(v);
}

double PStar::value() const {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
}

double PStar::conjugate_value() const {
    if (infinite_) return 1.0;
    if (value_ == 1.0) return std::numeric_limits<double>::infinity();
    return value_ / (value_ - 1.0);
}

PStar PStar::conjugate() const {
    const double p = conjugate_value();
    return std::isinf(p) ? infinity() : finite(p);
}

std::string PStar::str() const { return infinite_ ? "inf" : format_double(value_); }

std::string_view to_string(EvalMethod m) {
    switch (m) {
        case EvalMethod::exact_closed_form: return "exact_closed_form";
        case EvalMethod::exact_grid_sup: return "exact_grid_sup";
        case EvalMethod::quadrature: return "quadrature";
        case EvalMethod::grid_sup_lower_bound: return "grid_sup_lower_bound";
    }
    return "unknown";
}

QuadratureBudgetError::QuadratureBudgetError(std::string what, double partial_value, double partial_bound)
    : what_(std::move(what)), partial_value_(partial_value), partial_bound_(partial_bound) {}

namespace {

bool skippable(const std::string& line) {
    for (char c : line) {
        if (c == '#') return true;
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

}  // namespace

PointSet read_point_set(std::istream& in) {
    std::string line;
    int d = 0, n = 0;
    while (std::getline(in, line)) {
        if (skippable(line)) continue;
        std::istringstream head(line);
        if (!(head >> d >> n)) throw std::invalid_argument("point-set file: bad header line '" + line + "'");
        break;
    }
    if (d == 0) throw std::invalid_argument("point-set file: missing header");
    if (n < 1) throw std::invalid_argument("point-set file: need n >= 1");
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(n) * d);
    int rows = 0;
    while (rows < n && std::getline(in, line)) {
        if (skippable(line)) continue;
        std::istringstream row(line);
        for (int a = 0; a < d; ++a) {
            double v;
            if (!(row >> v)) throw std::invalid_argument("point-set file: short row '" + line + "'");
            flat.push_back(v);
        }
        double extra;
        if (row >> extra) throw std::invalid_argument("point-set file: extra column in row '" + line + "'");
        ++rows;
    }
    if (rows != n) throw std::invalid_argument("point-set file: expected " + std::to_string(n) + " rows, got " +
                                               std::to_string(rows));
    return PointSet(d, std::move(flat));
}

PointSet load_point_set(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open point-set file '" + path + "'");
    return read_point_set(in);
}

void write_point_set(std::ostream& out, const PointSet& ps) {
    out << ps.dim() << ' ' << ps.size() << '\n';
    for (int j = 0; j < ps.size(); ++j) {
        for (int a = 0; a < ps.dim(); ++a) {
            if (a) out << ' ';
            out << format_double(ps.coord(j, a));
        }
        out << '\n';
    }
}

void save_point_set(const std::string& path, const PointSet& ps) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write point-set file '" + path + "'");
    write_point_set(out, ps);
}

Weights read_weights(std::istream& in, int d) {
    Weights w(d);
    std::vector<bool> seen(w.subset_count(), false);
    std::string line;
    while (std::getline(in, line)) {
        if (skippable(line)) continue;
        std::istringstream row(line);
        std::string mask_text;
        double g;
        if (!(row >> mask_text >> g))
            throw std::invalid_argument("weights file: bad line '" + line + "'");
        SubsetId u = subset_from_coord_list(mask_text, d);
        if (seen[u.mask()])
            throw std::invalid_argument("weights file: duplicate subset '" + mask_text + "'");
        seen[u.mask()] = true;
        w.set_gamma(u, g);
    }
    return w;
}

Weights load_weights(const std::string& path, int d) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open weights file '" + path + "'");
    return read_weights(in, d);
}

void write_weights(std::ostream& out, const Weights& w) {
    for (std::uint32_t m = 0; m < w.subset_count(); ++m) {
        const double g = w.gamma(SubsetId(m));
        if (m == 0 ? g != 1.0 : g > 0.0)
            out << subset_to_coord_list(SubsetId(m)) << ' ' << format_double(g) << '\n';
    }
}

}  // namespace qmcerr
