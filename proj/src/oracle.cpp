#include "qmcerr/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "qmcerr/wce.hpp"

namespace qmcerr {

namespace {

double abs_pow_q(double v, double q) {
    v = std::abs(v);
    if (q == std::floor(q) && q <= 16.0) {
        int e = static_cast<int>(q);
        double r = 1.0, b = v;
        while (e > 0) {
            if (e & 1) r *= b;
            b *= b;
            e >>= 1;
        }
        return r;
    }
    return std::pow(v, q);
}

// Composite midpoint panels on one axis, with panel edges pinned to the
// coordinate values so the integrand stays smooth inside every panel (the
// kernel jumps exactly at the coordinates).  Roughly `target` panels total.
struct AxisPanels {
    std::vector<double> node;    // panel midpoints
    std::vector<double> weight;  // panel widths
};

AxisPanels aligned_midpoint_panels(const PointSet& ps, int axis, int target) {
    std::vector<double> brk;
    brk.reserve(static_cast<std::size_t>(ps.size()) + 2);
    brk.push_back(0.0);
    for (int j = 0; j < ps.size(); ++j) brk.push_back(ps.coord(j, axis));
    brk.push_back(1.0);
    std::sort(brk.begin(), brk.end());
    brk.erase(std::unique(brk.begin(), brk.end()), brk.end());

    AxisPanels panels;
    for (std::size_t s = 0; s + 1 < brk.size(); ++s) {
        const double a = brk[s], b = brk[s + 1];
        const double len = b - a;
        if (!(len > 0.0)) continue;
        const int m = std::max(1, static_cast<int>(std::lround(len * target)));
        for (int i = 0; i < m; ++i) {
            panels.node.push_back(a + (i + 0.5) * len / m);
            panels.weight.push_back(len / m);
        }
    }
    return panels;
}

// midpoint-rule tensor quadrature of |kernel sum|^q over the subset cube
double subset_integral_tensor(const PointSet& ps, SubsetId u, double q, int grid) {
    const auto axes = u.axes();
    const int k = static_cast<int>(axes.size());
    const int n = ps.size();

    // panel nodes and per-node kernel values for every axis
    std::vector<AxisPanels> panels(static_cast<std::size_t>(k));
    std::vector<std::vector<double>> table(static_cast<std::size_t>(k));
    for (int l = 0; l < k; ++l) {
        panels[static_cast<std::size_t>(l)] = aligned_midpoint_panels(ps, axes[static_cast<std::size_t>(l)], grid);
        const auto& p = panels[static_cast<std::size_t>(l)];
        auto& col = table[static_cast<std::size_t>(l)];
        col.resize(p.node.size() * n);
        for (std::size_t i = 0; i < p.node.size(); ++i)
            for (int j = 0; j < n; ++j)
                col[i * n + j] = kernel(ps.coord(j, axes[static_cast<std::size_t>(l)]), p.node[i]);
    }

    std::vector<int> idx(static_cast<std::size_t>(k), 0);
    std::vector<double> prod(static_cast<std::size_t>(n));
    long double sum = 0.0L;
    while (true) {
        std::fill(prod.begin(), prod.end(), 1.0);
        double w = 1.0;
        for (int l = 0; l < k; ++l) {
            const std::size_t i = static_cast<std::size_t>(idx[static_cast<std::size_t>(l)]);
            w *= panels[static_cast<std::size_t>(l)].weight[i];
            const double* col = table[static_cast<std::size_t>(l)].data() + i * n;
            for (int j = 0; j < n; ++j) prod[static_cast<std::size_t>(j)] *= col[j];
        }
        long double ks = 0.0L;
        for (int j = 0; j < n; ++j) ks += prod[static_cast<std::size_t>(j)];
        sum += w * abs_pow_q(static_cast<double>(ks), q);

        int l = 0;
        for (; l < k; ++l) {
            const std::size_t ul = static_cast<std::size_t>(l);
            if (++idx[ul] < static_cast<int>(panels[ul].node.size())) break;
            idx[ul] = 0;
        }
        if (l == k) break;
    }
    return static_cast<double>(sum);
}

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

McEstimate subset_integral_mc(const PointSet& ps, SubsetId u, double q, std::int64_t samples) {
    const auto axes = u.axes();
    const int n = ps.size();
    std::mt19937_64 gen(0x6f7261636cULL ^ u.mask());
    long double sum = 0.0L, sumsq = 0.0L;
    std::vector<double> t(axes.size());
    for (std::int64_t s = 0; s < samples; ++s) {
        for (double& c : t) c = static_cast<double>(gen() >> 11) * 0x1.0p-53;
        long double ks = 0.0L;
        for (int j = 0; j < n; ++j) {
            double prod = 1.0;
            for (std::size_t l = 0; l < axes.size(); ++l) prod *= kernel(ps.coord(j, axes[l]), t[l]);
            ks += prod;
        }
        const double v = abs_pow_q(static_cast<double>(ks), q);
        sum += v;
        sumsq += static_cast<long double>(v) * v;
    }
    McEstimate e;
    e.mean = static_cast<double>(sum / samples);
    const double var = std::max(0.0, static_cast<double>(sumsq / samples) - e.mean * e.mean);
    e.std_error = std::sqrt(var / static_cast<double>(samples));
    return e;
}

}  // namespace

OracleValue quadrature_oracle(const PointSet& ps, const Weights& w, PStar pstar,
                              int grid_points_per_axis) {
    if (pstar.is_infinite()) throw std::invalid_argument("quadrature_oracle: need finite p*");
    if (w.dim() != ps.dim()) throw std::invalid_argument("quadrature_oracle: dimension mismatch");
    if (grid_points_per_axis < 2) throw std::invalid_argument("quadrature_oracle: grid too small");
    const double q = pstar.value();
    const int n = ps.size();

    long double s = 0.0L, var = 0.0L;
    for (SubsetId u : w.u_plus()) {
        if (u.empty()) continue;
        const double gq = std::pow(w.gamma(u), q);
        const int k = u.cardinality();
        if (k <= 4) {
            double nodes = 1.0;
            for (int l = 0; l < k; ++l) nodes *= grid_points_per_axis + ps.size() + 1;
            if (nodes > 2.2e9) throw std::invalid_argument("quadrature_oracle: tensor grid too large");
            s += gq * subset_integral_tensor(ps, u, q, grid_points_per_axis);
        } else {
            const auto mc = subset_integral_mc(ps, u, q, 1'000'000);
            s += gq * mc.mean;
            var += static_cast<long double>(gq * mc.std_error) * (gq * mc.std_error);
        }
    }

    OracleValue out;
    const double total_sum = static_cast<double>(s);
    out.value = std::pow(total_sum, 1.0 / q) / n;
    if (var > 0.0L && total_sum > 0.0) {
        const double sigma_s = std::sqrt(static_cast<double>(var));
        out.mc_std_error = sigma_s * std::pow(total_sum, 1.0 / q - 1.0) / (q * n);
    }
    return out;
}

double discrepancy_quadrature_oracle(const PointSet& ps, PStar pstar, int grid_points_per_axis) {
    if (pstar.is_infinite())
        throw std::invalid_argument("discrepancy_quadrature_oracle: need finite p*");
    if (grid_points_per_axis < 2) throw std::invalid_argument("discrepancy_quadrature_oracle: grid too small");
    const double q = pstar.value();
    const int d = ps.dim();
    const int n = ps.size();

    std::vector<AxisPanels> panels(static_cast<std::size_t>(d));
    double nodes = 1.0;
    for (int l = 0; l < d; ++l) {
        panels[static_cast<std::size_t>(l)] = aligned_midpoint_panels(ps, l, grid_points_per_axis);
        nodes *= static_cast<double>(panels[static_cast<std::size_t>(l)].node.size());
    }
    if (nodes > 2.2e9) throw std::invalid_argument("discrepancy_quadrature_oracle: tensor grid too large");

    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    long double sum = 0.0L;
    while (true) {
        double volume = 1.0, w = 1.0;
        for (int l = 0; l < d; ++l) {
            const auto& p = panels[static_cast<std::size_t>(l)];
            const std::size_t i = static_cast<std::size_t>(idx[static_cast<std::size_t>(l)]);
            volume *= p.node[i];
            w *= p.weight[i];
        }
        int count = 0;
        for (int j = 0; j < n; ++j) {
            bool inside = true;
            for (int l = 0; l < d && inside; ++l)
                inside = ps.coord(j, l) <
                         panels[static_cast<std::size_t>(l)].node[static_cast<std::size_t>(idx[static_cast<std::size_t>(l)])];
            count += inside;
        }
        sum += w * abs_pow_q(static_cast<double>(count) / n - volume, q);
        int l = 0;
        for (; l < d; ++l) {
            const std::size_t ul = static_cast<std::size_t>(l);
            if (++idx[ul] < static_cast<int>(panels[ul].node.size())) break;
            idx[ul] = 0;
        }
        if (l == d) break;
    }
    return std::pow(static_cast<double>(sum), 1.0 / q);
}

namespace {

// L_{p*} discrepancy of a sorted tuple, self-contained on purpose.
double tuple_error_finite(std::span<const double> xs, double q) {
    const int k = static_cast<int>(xs.size());
    const double kk = k;
    auto antideriv = [&](double t, double c) {
        const double diff = t - c;
        const double mag = std::pow(std::abs(diff), q + 1.0) / (q + 1.0);
        return diff >= 0.0 ? mag : -mag;
    };
    double total = 0.0;
    double prev = 0.0;
    for (int j = 0; j <= k; ++j) {
        const double next = j < k ? xs[static_cast<std::size_t>(j)] : 1.0;
        if (next > prev) {
            const double c = static_cast<double>(j) / kk;
            total += antideriv(next, c) - antideriv(prev, c);
            prev = next;
        }
    }
    return std::pow(total, 1.0 / q);
}

double tuple_error_sup(std::span<const double> xs) {
    const int k = static_cast<int>(xs.size());
    const double kk = k;
    double sup = 0.0;
    double prev = 0.0;
    for (int j = 0; j <= k; ++j) {
        const double next = j < k ? xs[static_cast<std::size_t>(j)] : 1.0;
        const double c = static_cast<double>(j) / kk;
        sup = std::max({sup, std::abs(c - prev), std::abs(c - next)});
        prev = std::max(prev, next);
    }
    return sup;
}

}  // namespace

SearchOutcome optimality_search_1d(int n, PStar pstar, int grid_resolution) {
    if (n < 1 || n > 3) throw std::invalid_argument("optimality_search_1d: need 1 <= n <= 3");
    if (grid_resolution < 64) throw std::invalid_argument("optimality_search_1d: need resolution >= 64");

    const int r = grid_resolution;
    const bool inf = pstar.is_infinite();
    const double q = inf ? 0.0 : pstar.value();

    SearchOutcome best;
    best.error = std::numeric_limits<double>::infinity();
    std::vector<double> xs;

    auto consider = [&](std::span<const double> tuple) {
        const double err = inf ? tuple_error_sup(tuple) : tuple_error_finite(tuple, q);
        if (err < best.error) {
            best.error = err;
            best.points.assign(tuple.begin(), tuple.end());
        }
    };

    for (int k = 1; k <= n; ++k) {
        xs.assign(static_cast<std::size_t>(k), 0.0);
        if (k == 1) {
            for (int i = 0; i <= r; ++i) {
                xs[0] = static_cast<double>(i) / r;
                consider(xs);
            }
        } else if (k == 2) {
            for (int i = 0; i <= r; ++i) {
                xs[0] = static_cast<double>(i) / r;
                for (int j = i; j <= r; ++j) {
                    xs[1] = static_cast<double>(j) / r;
                    consider(xs);
                }
            }
        } else {
            for (int i = 0; i <= r; ++i) {
                xs[0] = static_cast<double>(i) / r;
                for (int j = i; j <= r; ++j) {
                    xs[1] = static_cast<double>(j) / r;
                    for (int l = j; l <= r; ++l) {
                        xs[2] = static_cast<double>(l) / r;
                        consider(xs);
                    }
                }
            }
        }
    }
    return best;
}

bool one_point_per_interval_check(std::span<const double> pts, int n) {
    if (n < 1 || static_cast<int>(pts.size()) != n) return false;
    std::vector<int> hits(static_cast<std::size_t>(n), 0);
    for (double x : pts) {
        if (!(x >= 0.0 && x < 1.0)) return false;
        const int j = std::min(static_cast<int>(x * n), n - 1);
        // guard against x * n rounding across an interval boundary
        const double lo = static_cast<double>(j) / n;
        const double hi = static_cast<double>(j + 1) / n;
        int slot = j;
        if (x < lo) slot = j - 1;
        else if (x >= hi) slot = j + 1;
        if (slot < 0 || slot >= n) return false;
        ++hits[static_cast<std::size_t>(slot)];
    }
    for (int h : hits)
        if (h != 1) return false;
    return true;
}

}  // namespace qmcerr
