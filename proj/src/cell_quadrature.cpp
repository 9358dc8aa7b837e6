#include "cell_quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace qmcerr::detail {

double abs_pow_segment(double a, double b, double c, double q) {
    auto antideriv = [&](double t) {
        const double d = t - c;
        const double mag = std::pow(std::abs(d), q + 1.0) / (q + 1.0);
        return d >= 0.0 ? mag : -mag;
    };
    return antideriv(b) - antideriv(a);
}

namespace {

// Walks the constant-count segments of a sorted 1D multiset and feeds
// (lo, hi, count_before) to the visitor.  Points at exactly 1 never enter
// any half-open box and therefore never reach the counter.
template <typename Visit>
void walk_segments_1d(std::span<const double> coords, Visit&& visit) {
    std::vector<double> xs(coords.begin(), coords.end());
    std::sort(xs.begin(), xs.end());
    double prev = 0.0;
    int count = 0;
    std::size_t i = 0;
    while (i < xs.size()) {
        const double v = xs[i];
        if (v > prev) {
            visit(prev, v, count);
            prev = v;
        }
        std::size_t j = i;
        while (j < xs.size() && xs[j] == v) ++j;
        count += static_cast<int>(j - i);
        i = j;
    }
    if (prev < 1.0) visit(prev, 1.0, count);
}

}  // namespace

double lq_integral_1d(std::span<const double> coords, double q) {
    const double n = static_cast<double>(coords.size());
    double total = 0.0;
    walk_segments_1d(coords, [&](double lo, double hi, int count) {
        total += abs_pow_segment(lo, hi, static_cast<double>(count) / n, q);
    });
    return total;
}

double sup_abs_1d(std::span<const double> coords) {
    const double n = static_cast<double>(coords.size());
    double sup = 0.0;
    walk_segments_1d(coords, [&](double lo, double hi, int count) {
        const double c = static_cast<double>(count) / n;
        sup = std::max({sup, std::abs(c - lo), std::abs(c - hi)});
    });
    return sup;
}

std::vector<std::vector<double>> axis_breaks(const PointSet& ps) {
    std::vector<std::vector<double>> breaks(static_cast<std::size_t>(ps.dim()));
    for (int a = 0; a < ps.dim(); ++a) {
        auto& b = breaks[static_cast<std::size_t>(a)];
        b.reserve(static_cast<std::size_t>(ps.size()) + 2);
        b.push_back(0.0);
        for (int j = 0; j < ps.size(); ++j) b.push_back(ps.coord(j, a));
        b.push_back(1.0);
        std::sort(b.begin(), b.end());
        b.erase(std::unique(b.begin(), b.end()), b.end());
    }
    return breaks;
}

PrefixCounts::PrefixCounts(const PointSet& ps) : breaks_(axis_breaks(ps)) {
    const int k = ps.dim();
    strides_.assign(static_cast<std::size_t>(k), 1);
    std::int64_t total = 1;
    for (int a = k - 1; a >= 0; --a) {
        strides_[static_cast<std::size_t>(a)] = total;
        total *= static_cast<std::int64_t>(breaks_[static_cast<std::size_t>(a)].size());
        if (total > 60'000'000)
            throw std::invalid_argument("PrefixCounts: breakpoint grid too large for exact enumeration");
    }
    data_.assign(static_cast<std::size_t>(total), 0);

    for (int j = 0; j < ps.size(); ++j) {
        std::int64_t off = 0;
        for (int a = 0; a < k; ++a) {
            const auto& b = breaks_[static_cast<std::size_t>(a)];
            const auto it = std::lower_bound(b.begin(), b.end(), ps.coord(j, a));
            off += strides_[static_cast<std::size_t>(a)] * (it - b.begin());
        }
        ++data_[static_cast<std::size_t>(off)];
    }

    // In-place prefix sum along every axis.
    for (int a = 0; a < k; ++a) {
        const std::int64_t stride = strides_[static_cast<std::size_t>(a)];
        const std::int64_t extent = static_cast<std::int64_t>(breaks_[static_cast<std::size_t>(a)].size());
        const std::int64_t block = stride * extent;
        for (std::int64_t base = 0; base < total; base += block)
            for (std::int64_t i = 1; i < extent; ++i)
                for (std::int64_t r = 0; r < stride; ++r)
                    data_[static_cast<std::size_t>(base + i * stride + r)] +=
                        data_[static_cast<std::size_t>(base + (i - 1) * stride + r)];
    }
}

std::int32_t PrefixCounts::count_leq(std::span<const int> idx) const {
    std::int64_t off = 0;
    for (std::size_t a = 0; a < strides_.size(); ++a) off += strides_[a] * idx[a];
    return data_[static_cast<std::size_t>(off)];
}

std::int64_t CellProblem::cell_count() const {
    std::int64_t total = 1;
    for (const auto& b : breaks) {
        total *= static_cast<std::int64_t>(b.size()) - 1;
        if (total > std::numeric_limits<std::int32_t>::max()) return total;
    }
    return total;
}

double eval_multilinear(std::span<const double> coeffs, std::span<const double> t) {
    const int k = static_cast<int>(t.size());
    double sum = 0.0;
    for (std::uint32_t s = 0; s < coeffs.size(); ++s) {
        double prod = coeffs[s];
        if (prod == 0.0) continue;
        for (int l = 0; l < k; ++l)
            if ((s >> l) & 1u) prod *= t[static_cast<std::size_t>(l)];
        sum += prod;
    }
    return sum;
}

namespace {

struct Rule {
    std::vector<double> x;  // nodes on [0,1]
    std::vector<double> w;  // weights summing to 1
};

Rule make_rule(std::initializer_list<double> half_nodes, std::initializer_list<double> half_weights,
               bool has_center) {
    // half_nodes are the nonnegative Gauss-Legendre abscissae on [-1,1].
    Rule r;
    std::vector<double> hx(half_nodes), hw(half_weights);
    for (std::size_t i = hx.size(); i-- > 0;) {
        r.x.push_back((1.0 - hx[i]) / 2.0);
        r.w.push_back(hw[i] / 2.0);
    }
    std::size_t start = has_center ? 1 : 0;
    for (std::size_t i = start; i < hx.size(); ++i) {
        r.x.push_back((1.0 + hx[i]) / 2.0);
        r.w.push_back(hw[i] / 2.0);
    }
    return r;
}

const Rule& gauss_rule(int g) {
    static const Rule g1 = make_rule({0.0}, {2.0}, true);
    static const Rule g2 = make_rule({0.5773502691896257645091488}, {1.0}, false);
    static const Rule g3 = make_rule({0.0, 0.7745966692414833770358531},
                                     {0.8888888888888888888888889, 0.5555555555555555555555556}, true);
    static const Rule g4 = make_rule({0.3399810435848562648026658, 0.8611363115940525752239465},
                                     {0.6521451548625461426269361, 0.3478548451374538573730639}, false);
    static const Rule g5 = make_rule({0.0, 0.5384693101056830910363144, 0.9061798459386639927976269},
                                     {0.5688888888888888888888889, 0.4786286704993664680412915,
                                      0.2369268850561890875142640},
                                     true);
    static const Rule g8 = make_rule({0.1834346424956498049394761, 0.5255324099163289858177390,
                                      0.7966664774136267395915539, 0.9602898564975362316835609},
                                     {0.3626837833783619829651504, 0.3137066458778872873379622,
                                      0.2223810344533744705443560, 0.1012285362903762591525314},
                                     false);
    static const Rule g16 = make_rule(
        {0.0950125098376374401853193, 0.2816035507792589132304605, 0.4580167776572273863424194,
         0.6178762444026437484466718, 0.7554044083550030338951012, 0.8656312023878317438804679,
         0.9445750230732325760779884, 0.9894009349916499325961542},
        {0.1894506104550684962853967, 0.1826034150449235888667637, 0.1691565193950025381893121,
         0.1495959888165767320815017, 0.1246289712555338720524763, 0.0951585116824927848099251,
         0.0622535239386478928628438, 0.0271524594117540948517806},
        false);
    switch (g) {
        case 1: return g1;
        case 2: return g2;
        case 3: return g3;
        case 4: return g4;
        case 5: return g5;
        case 8: return g8;
        default: return g16;
    }
}

int exact_rule_size(int qi) {
    if (qi <= 1) return 1;
    if (qi <= 3) return 2;
    if (qi <= 5) return 3;
    if (qi <= 7) return 4;
    if (qi <= 9) return 5;
    return 8;  // exact through degree 15
}

double abs_pow(double v, double q, bool integer_q, int qi) {
    v = std::abs(v);
    if (!integer_q) return std::pow(v, q);
    double result = 1.0, base = v;
    int e = qi;
    while (e > 0) {
        if (e & 1) result *= base;
        base *= base;
        e >>= 1;
    }
    return result;
}

struct Cell {
    std::vector<double> lo, hi;
    std::vector<double> coeffs;
    double value = 0.0;
    double err = 0.0;
    bool alive = true;
};

double tensor_gauss(const Cell& c, const Rule& rule, double q, bool integer_q, int qi) {
    const int k = static_cast<int>(c.lo.size());
    const int g = static_cast<int>(rule.x.size());
    double vol = 1.0;
    for (int l = 0; l < k; ++l) vol *= c.hi[static_cast<std::size_t>(l)] - c.lo[static_cast<std::size_t>(l)];
    std::vector<int> idx(static_cast<std::size_t>(k), 0);
    std::vector<double> t(static_cast<std::size_t>(k));
    long double sum = 0.0L;
    while (true) {
        double wprod = vol;
        for (int l = 0; l < k; ++l) {
            const std::size_t ul = static_cast<std::size_t>(l);
            t[ul] = c.lo[ul] + (c.hi[ul] - c.lo[ul]) * rule.x[static_cast<std::size_t>(idx[ul])];
            wprod *= rule.w[static_cast<std::size_t>(idx[ul])];
        }
        sum += wprod * abs_pow(eval_multilinear(c.coeffs, t), q, integer_q, qi);
        int l = 0;
        for (; l < k; ++l) {
            if (++idx[static_cast<std::size_t>(l)] < g) break;
            idx[static_cast<std::size_t>(l)] = 0;
        }
        if (l == k) break;
    }
    return static_cast<double>(sum);
}

void corner_range(const Cell& c, double& mn, double& mx) {
    const int k = static_cast<int>(c.lo.size());
    mn = std::numeric_limits<double>::infinity();
    mx = -mn;
    std::vector<double> t(static_cast<std::size_t>(k));
    for (std::uint32_t corner = 0; corner < (1u << k); ++corner) {
        for (int l = 0; l < k; ++l)
            t[static_cast<std::size_t>(l)] =
                ((corner >> l) & 1u) ? c.hi[static_cast<std::size_t>(l)] : c.lo[static_cast<std::size_t>(l)];
        const double v = eval_multilinear(c.coeffs, t);
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
}

void evaluate_cell(Cell& c, double q, bool integer_q, int qi) {
    double mn, mx;
    corner_range(c, mn, mx);
    if (mn >= 0.0 || mx <= 0.0) {
        if (integer_q && qi <= 15) {
            c.value = tensor_gauss(c, gauss_rule(exact_rule_size(qi)), q, integer_q, qi);
            c.err = 0.0;
        } else {
            const double v8 = tensor_gauss(c, gauss_rule(8), q, integer_q, qi);
            const double v16 = tensor_gauss(c, gauss_rule(16), q, integer_q, qi);
            c.value = v16;
            c.err = std::abs(v16 - v8);
        }
    } else {
        // sign change inside: the rule difference estimates the kink error,
        // capped by the rigorous bound vol * max|corner|^q on the whole cell
        double vol = 1.0;
        for (std::size_t l = 0; l < c.lo.size(); ++l) vol *= c.hi[l] - c.lo[l];
        const double rigorous = vol * abs_pow(std::max(std::abs(mn), std::abs(mx)), q, integer_q, qi);
        const double v8 = tensor_gauss(c, gauss_rule(8), q, integer_q, qi);
        const double v16 = tensor_gauss(c, gauss_rule(16), q, integer_q, qi);
        c.value = v16;
        c.err = std::min(rigorous, std::max(2.0 * std::abs(v16 - v8), 0.001 * rigorous));
    }
}

struct HeapEntry {
    double err;
    std::int64_t seq;
    bool operator<(const HeapEntry& o) const {
        if (err != o.err) return err < o.err;
        return seq > o.seq;  // prefer older cells on ties
    }
};

template <typename Visit>
void for_each_grid_cell(const CellProblem& prob, Visit&& visit) {
    const int k = prob.k;
    std::vector<int> idx(static_cast<std::size_t>(k), 0);
    while (true) {
        visit(idx);
        int l = 0;
        for (; l < k; ++l) {
            const std::size_t ul = static_cast<std::size_t>(l);
            if (++idx[ul] < static_cast<int>(prob.breaks[ul].size()) - 1) break;
            idx[ul] = 0;
        }
        if (l == k) break;
    }
}

}  // namespace

IntegralOutcome integrate_abs_pow(const CellProblem& prob, double q, double abs_tol,
                                  std::int64_t cell_budget) {
    const int k = prob.k;
    const bool integer_q = (q == std::floor(q)) && q <= 15.0;
    const int qi = integer_q ? static_cast<int>(q) : 0;

    const std::int64_t grid_cells = prob.cell_count();
    if (grid_cells > cell_budget)
        return {0.0, std::numeric_limits<double>::infinity(), false, 0};

    std::vector<Cell> cells;
    cells.reserve(static_cast<std::size_t>(std::min<std::int64_t>(grid_cells * 2, cell_budget)));
    std::priority_queue<HeapEntry> heap;
    std::vector<double> coeff_buf(std::size_t{1} << k);

    for_each_grid_cell(prob, [&](const std::vector<int>& idx) {
        Cell c;
        c.lo.resize(static_cast<std::size_t>(k));
        c.hi.resize(static_cast<std::size_t>(k));
        for (int l = 0; l < k; ++l) {
            const auto& b = prob.breaks[static_cast<std::size_t>(l)];
            c.lo[static_cast<std::size_t>(l)] = b[static_cast<std::size_t>(idx[static_cast<std::size_t>(l)])];
            c.hi[static_cast<std::size_t>(l)] = b[static_cast<std::size_t>(idx[static_cast<std::size_t>(l)]) + 1];
        }
        prob.cell_coeffs(idx, coeff_buf);
        c.coeffs = coeff_buf;
        evaluate_cell(c, q, integer_q, qi);
        if (c.err > 0.0) heap.push({c.err, static_cast<std::int64_t>(cells.size())});
        cells.push_back(std::move(c));
    });

    auto total_err = [&]() {
        long double e = 0.0L;
        for (const Cell& c : cells)
            if (c.alive) e += c.err;
        return static_cast<double>(e);
    };

    double err_sum = total_err();
    while (err_sum > abs_tol && !heap.empty() &&
           static_cast<std::int64_t>(cells.size()) + 2 <= cell_budget) {
        const HeapEntry top = heap.top();
        heap.pop();
        const std::size_t pidx = static_cast<std::size_t>(top.seq);
        if (cells[pidx].err <= 0.0) continue;
        const std::vector<double> plo = cells[pidx].lo;
        const std::vector<double> phi = cells[pidx].hi;
        const std::vector<double> pcoeffs = cells[pidx].coeffs;
        const double perr = cells[pidx].err;

        int axis = 0;
        double width = -1.0;
        for (int l = 0; l < k; ++l) {
            const double w = phi[static_cast<std::size_t>(l)] - plo[static_cast<std::size_t>(l)];
            if (w > width) {
                width = w;
                axis = l;
            }
        }
        const double mid = 0.5 * (plo[static_cast<std::size_t>(axis)] + phi[static_cast<std::size_t>(axis)]);
        if (!(mid > plo[static_cast<std::size_t>(axis)] && mid < phi[static_cast<std::size_t>(axis)]))
            continue;  // cell too thin to split further

        for (int side = 0; side < 2; ++side) {
            Cell child;
            child.lo = plo;
            child.hi = phi;
            (side == 0 ? child.hi : child.lo)[static_cast<std::size_t>(axis)] = mid;
            child.coeffs = pcoeffs;
            evaluate_cell(child, q, integer_q, qi);
            err_sum += child.err;
            if (child.err > 0.0) heap.push({child.err, static_cast<std::int64_t>(cells.size())});
            cells.push_back(std::move(child));
        }
        err_sum -= perr;
        cells[pidx].alive = false;
        cells[pidx].err = 0.0;
        if ((cells.size() & 0xfffu) == 0) err_sum = total_err();  // kill accumulation drift
    }

    IntegralOutcome out;
    long double value = 0.0L, err = 0.0L;
    for (const Cell& c : cells) {
        if (!c.alive) continue;
        value += c.value;
        err += c.err;
    }
    out.value = static_cast<double>(value);
    out.error_bound = static_cast<double>(err);
    out.converged = out.error_bound <= abs_tol;
    out.cells = static_cast<std::int64_t>(cells.size());
    return out;
}

double sup_abs(const CellProblem& prob) {
    const int k = prob.k;
    std::vector<double> coeffs(std::size_t{1} << k);
    std::vector<double> t(static_cast<std::size_t>(k));
    double sup = 0.0;
    for_each_grid_cell(prob, [&](const std::vector<int>& idx) {
        prob.cell_coeffs(idx, coeffs);
        for (std::uint32_t corner = 0; corner < (1u << k); ++corner) {
            for (int l = 0; l < k; ++l) {
                const auto& b = prob.breaks[static_cast<std::size_t>(l)];
                const int i = idx[static_cast<std::size_t>(l)] + (((corner >> l) & 1u) ? 1 : 0);
                t[static_cast<std::size_t>(l)] = b[static_cast<std::size_t>(i)];
            }
            sup = std::max(sup, std::abs(eval_multilinear(coeffs, t)));
        }
    });
    return sup;
}

}  // namespace qmcerr::detail
