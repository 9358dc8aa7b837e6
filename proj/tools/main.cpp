#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "qmcerr/bounds.hpp"
#include "qmcerr/core_types.hpp"
#include "qmcerr/discrepancy.hpp"
#include "qmcerr/oracle.hpp"
#include "qmcerr/pointsets.hpp"
#include "qmcerr/wce.hpp"

namespace {

using namespace qmcerr;

struct VerificationFailed : std::exception {
    const char* what() const noexcept override { return "verification failed"; }
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<int> parse_sigma(const std::string& text) {
    std::vector<int> sigma;
    sigma.reserve(text.size());
    for (char c : text) {
        if (c != '0' && c != '1') throw CLI::ValidationError("--sigma", "sigma must be a string of 0s and 1s");
        sigma.push_back(c - '0');
    }
    return sigma;
}

std::pair<int, int> parse_range(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        const int v = std::stoi(text);
        return {v, v};
    }
    const int a = std::stoi(text.substr(0, colon));
    const int b = std::stoi(text.substr(colon + 1));
    if (b < a) throw CLI::ValidationError("range", "end before start in '" + text + "'");
    return {a, b};
}

Weights weights_or_default(const std::optional<std::string>& path, int d) {
    if (path) return load_weights(*path, d);
    return Weights::single(d, SubsetId::full(d), 1.0);  // full-set weight 1
}

void write_to(const std::optional<std::string>& out_path, const std::string& content) {
    if (!out_path) {
        std::cout << content;
        return;
    }
    std::ofstream out(*out_path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open output file '" + *out_path + "'");
    out << content;
}

int worker_count(std::size_t rows) {
    int workers = static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("QMCERR_WORKERS")) workers = std::atoi(env);
    workers = std::max(1, std::min<int>(workers, static_cast<int>(rows)));
    return workers;
}

// ---- gen ----

void run_gen(const std::string& kind, int n, int m, const std::string& sigma_text, int d,
             std::uint64_t seed, const std::optional<std::string>& out) {
    std::optional<PointSet> ps;
    if (kind == "midpoint") {
        ps = midpoint_1d(n);
    } else if (kind == "hammersley") {
        std::vector<int> sigma = sigma_text.empty() ? std::vector<int>(static_cast<std::size_t>(m), 0)
                                                    : parse_sigma(sigma_text);
        ps = hammersley_2d(m, sigma);
    } else if (kind == "hammersley-shifted") {
        std::vector<int> sigma = sigma_text.empty() ? balanced_sigma(m) : parse_sigma(sigma_text);
        ps = hammersley_2d(m, sigma);
    } else if (kind == "random") {
        ps = random_pointset(d, n, seed);
    } else {
        throw CLI::ValidationError("kind", "unknown point-set kind '" + kind + "'");
    }
    std::ostringstream buf;
    write_point_set(buf, *ps);
    write_to(out, buf.str());
}

// ---- wce ----

void run_wce(const std::string& ps_path, const std::optional<std::string>& w_path,
             const std::string& pstar_text, double tol, const std::optional<std::string>& csv) {
    const PointSet ps = load_point_set(ps_path);
    const Weights w = weights_or_default(w_path, ps.dim());
    const PStar pstar = PStar::parse(pstar_text);
    const ErrorReport rep = wce(ps, w, pstar, tol);

    std::cout << "total      " << fmt(rep.total) << "\n"
              << "method     " << to_string(rep.method) << "\n"
              << "tolerance  " << fmt(rep.tolerance) << "\n"
              << "subset terms (" << (pstar.is_infinite() ? "max candidates" : "pre-root contributions")
              << "):\n";
    for (const SubsetTerm& t : rep.per_subset)
        std::cout << "  {" << subset_to_coord_list(t.subset) << "}  " << fmt(t.term) << "  "
                  << to_string(t.method) << "\n";

    if (csv) {
        std::ostringstream buf;
        buf << "mask,coords,term,method\n";
        for (const SubsetTerm& t : rep.per_subset) {
            std::string coords = subset_to_coord_list(t.subset);
            std::replace(coords.begin(), coords.end(), ',', '|');
            buf << t.subset.mask() << ',' << coords << ',' << fmt(t.term) << ',' << to_string(t.method)
                << '\n';
        }
        write_to(csv, buf.str());
    }
}

// ---- disc ----

void run_disc(const std::string& ps_path, const std::optional<std::string>& w_path,
              const std::string& pstar_text, double tol, bool anchored) {
    const PointSet ps = load_point_set(ps_path);
    const Weights w = weights_or_default(w_path, ps.dim());
    const PStar pstar = PStar::parse(pstar_text);
    const DiscrepancyValue v = anchored ? anchored_wce(ps, w, pstar, tol)
                                        : weighted_lp_discrepancy(ps, w, pstar, tol);
    std::cout << "value      " << fmt(v.value) << "\n"
              << "tolerance  " << fmt(v.tolerance) << "\n";
}

// ---- bounds ----

void run_bounds(const std::optional<std::string>& ps_path, const std::string& family,
                const std::string& m_range, const std::optional<std::string>& w_path,
                const std::string& pstar_text, double tol, const std::optional<std::string>& out) {
    const PStar pstar = PStar::parse(pstar_text);
    std::ostringstream buf;
    buf << "m,n,wce,upper,lower_proxy\n";
    auto emit = [&](int m, const PointSet& ps) {
        const Weights w = weights_or_default(w_path, 2);
        const SandwichBounds b = sandwich_2d(ps, w, pstar, tol);
        buf << m << ',' << ps.size() << ',' << fmt(b.wce_value) << ',' << fmt(b.upper) << ','
            << fmt(b.lower_proxy) << '\n';
    };
    if (ps_path) {
        emit(0, load_point_set(*ps_path));
    } else {
        const auto [m_lo, m_hi] = parse_range(m_range);
        for (int m = m_lo; m <= m_hi; ++m) {
            std::vector<int> sigma = family == "hammersley-balanced"
                                         ? balanced_sigma(m)
                                         : std::vector<int>(static_cast<std::size_t>(m), 0);
            emit(m, hammersley_2d(m, sigma));
        }
    }
    write_to(out, buf.str());
}

// ---- study ----

struct StudyRow {
    double n = 0, wce_value = 0, disc = 0;
};

void run_study(const std::string& family, const std::string& n_range, const std::string& m_range,
               const std::optional<std::string>& w_path, const std::string& pstar_text, double tol,
               const std::optional<std::string>& out) {
    const PStar pstar = PStar::parse(pstar_text);
    const bool is_midpoint = family == "midpoint";
    if (!is_midpoint && family != "hammersley-classical" && family != "hammersley-balanced")
        throw CLI::ValidationError("--family", "unknown family '" + family + "'");

    std::vector<int> params;
    if (is_midpoint) {
        const auto [lo, hi] = parse_range(n_range);
        if (lo < 1) throw CLI::ValidationError("--n-range", "need n >= 1");
        for (int v = lo; v <= hi; ++v) params.push_back(v);
    } else {
        const auto [lo, hi] = parse_range(m_range);
        if (lo < 0) throw CLI::ValidationError("--m-range", "need m >= 0");
        for (int v = lo; v <= hi; ++v) params.push_back(v);
    }

    const Weights w = weights_or_default(w_path, is_midpoint ? 1 : 2);

    auto compute = [&](int param) {
        StudyRow row;
        PointSet ps = is_midpoint ? midpoint_1d(param)
                      : family == "hammersley-balanced"
                          ? hammersley_2d(param, balanced_sigma(param))
                          : hammersley_2d(param, std::vector<int>(static_cast<std::size_t>(param), 0));
        row.n = ps.size();
        row.wce_value = wce(ps, w, pstar, tol).total;
        if (pstar.is_infinite()) row.disc = linf_discrepancy(ps);
        else if (pstar.value() == 2.0) row.disc = l2_discrepancy(ps);
        else row.disc = lp_discrepancy(ps, pstar, tol).value;
        return row;
    };

    std::vector<StudyRow> rows(params.size());
    const int workers = worker_count(params.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < params.size(); ++i) rows[i] = compute(params[i]);
    } else {
        std::size_t next = 0;
        while (next < params.size()) {
            std::vector<std::pair<std::size_t, std::future<StudyRow>>> batch;
            for (int b = 0; b < workers && next < params.size(); ++b, ++next)
                batch.emplace_back(next, std::async(std::launch::async, compute, params[next]));
            for (auto& [i, fut] : batch) rows[i] = fut.get();
        }
    }

    std::ostringstream buf;
    buf << "n,wce,n_wce,n_wce_over_sqrt_log_n,n_wce_over_log_n,lp_discrepancy\n";
    for (const StudyRow& r : rows) {
        const double nw = r.n * r.wce_value;
        const double ln = std::log(r.n);
        buf << fmt(r.n) << ',' << fmt(r.wce_value) << ',' << fmt(nw) << ',' << fmt(nw / std::sqrt(ln))
            << ',' << fmt(nw / ln) << ',' << fmt(r.disc) << '\n';
    }
    write_to(out, buf.str());
}

// ---- verify ----

struct Battery {
    int checked = 0;
    int failed = 0;
    void report(bool ok, const std::string& name, const std::string& detail = {}) {
        ++checked;
        if (!ok) ++failed;
        std::cout << (ok ? "  ok   " : "  FAIL ") << name;
        if (!detail.empty()) std::cout << "  (" << detail << ")";
        std::cout << "\n";
    }
};

PointSet random_box_points(std::mt19937_64& gen, int d, int n) {
    std::vector<double> flat(static_cast<std::size_t>(d) * n);
    for (double& c : flat) c = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    return PointSet(d, std::move(flat));
}

void verify_identities(Battery& b) {
    b.report(kernel(0.7, 0.3) == 0.3 && kernel(0.2, 0.6) == -0.4 && kernel(0.5, 0.5) == 0.5,
             "kernel branch values");

    std::mt19937_64 gen(2024);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const int d = 1 + static_cast<int>(gen() % 4);
        const int n = 1 + static_cast<int>(gen() % 64);
        const PointSet ps = random_box_points(gen, d, n);
        const SubsetId u(static_cast<std::uint32_t>(1 + gen() % ((1u << d) - 1u)));
        std::vector<double> t(static_cast<std::size_t>(u.cardinality()));
        for (double& c : t) c = static_cast<double>(gen() >> 11) * 0x1.0p-53;
        worst = std::max(worst, std::abs(kernel_sum(ps, u, t) - kernel_sum_via_discrepancy(ps, u, t)));
    }
    b.report(worst <= 1e-12, "kernel sum vs discrepancy expansion", "max |diff| = " + fmt(worst));

    // closed-form pair integral vs exact piecewise Simpson; between the kinks
    // each kernel factor is t minus a piece-constant shift, so the integrand
    // is a quadratic and Simpson is exact
    worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const double x = static_cast<double>(gen() >> 11) * 0x1.0p-53;
        const double y = static_cast<double>(gen() >> 11) * 0x1.0p-53;
        double exact = 0.0;
        double cuts[4] = {0.0, std::min(x, y), std::max(x, y), 1.0};
        for (int s = 0; s < 3; ++s) {
            const double a = cuts[s], c = cuts[s + 1];
            if (c <= a) continue;
            const double sx = a >= x ? 1.0 : 0.0;  // kernel branch on (a, c)
            const double sy = a >= y ? 1.0 : 0.0;
            auto g = [&](double t) { return (t - sx) * (t - sy); };
            exact += (c - a) / 6.0 * (g(a) + 4.0 * g(0.5 * (a + c)) + g(c));
        }
        const double closed = 1.0 / 3.0 - (1.0 - x * x) / 2.0 - (1.0 - y * y) / 2.0 + (1.0 - std::max(x, y));
        worst = std::max(worst, std::abs(exact - closed));
    }
    b.report(worst <= 1e-12, "pairwise kernel integral closed form", "max |diff| = " + fmt(worst));

    // power-mean inequality used by the weighted bound
    bool ok = true;
    for (int trial = 0; trial < 200 && ok; ++trial) {
        const int len = 1 + static_cast<int>(gen() % 6);
        for (double q : {1.5, 2.0, 3.0}) {
            double sum = 0.0, powsum = 0.0;
            std::vector<double> xs(static_cast<std::size_t>(len));
            for (double& x : xs) x = static_cast<double>(gen() >> 11) * 0x1.0p-53;
            for (double x : xs) {
                sum += x;
                powsum += std::pow(x, q);
            }
            if (std::pow(sum, q) > std::pow(len, q - 1.0) * powsum * (1.0 + 1e-12)) ok = false;
            const double equal_case = std::pow(len * xs[0], q);
            if (std::abs(equal_case - std::pow(len, q - 1.0) * len * std::pow(xs[0], q)) >
                1e-12 * std::max(1.0, equal_case))
                ok = false;
        }
    }
    b.report(ok, "power-mean inequality");
}

void verify_bounds(Battery& b) {
    std::mt19937_64 gen(77);
    int violations = 0;
    double margin = std::numeric_limits<double>::infinity();
    const PStar grid[4] = {PStar::finite(1.5), PStar::finite(2), PStar::finite(3), PStar::infinity()};
    for (int trial = 0; trial < 100; ++trial) {
        const int d = 1 + static_cast<int>(gen() % 3);
        const int n = 1 + static_cast<int>(gen() % (d == 3 ? 10 : 24));
        const PointSet ps = random_box_points(gen, d, n);
        Weights w(d);
        for (std::uint32_t m = 1; m < w.subset_count(); ++m)
            w.set_gamma(SubsetId(m), (gen() % 4 == 0) ? 0.0 : 0.1 + static_cast<double>(gen() >> 11) * 0x1.0p-53);
        const PStar pstar = grid[trial % 4];
        const ErrorReport e = wce(ps, w, pstar, 1e-6);
        const DiscrepancyValue ub = upper_bound_cor1(ps, w, pstar, 1e-6);
        const double slack = ub.value + ub.tolerance + e.tolerance + 1e-12 - e.total;
        if (slack < 0) ++violations;
        margin = std::min(margin, slack);
    }
    b.report(violations == 0, "modified-weights upper bound on 100 random instances",
             "min slack = " + fmt(margin));

    violations = 0;
    for (int m = 2; m <= 8; ++m) {
        std::vector<int> sigma(static_cast<std::size_t>(m));
        for (int rep = 0; rep < 3; ++rep) {
            for (int& s : sigma) s = static_cast<int>(gen() % 2);
            const PointSet ps = hammersley_2d(m, sigma);
            Weights w(2);
            for (std::uint32_t mask = 1; mask < 4u; ++mask)
                w.set_gamma(SubsetId(mask), 0.25 + static_cast<double>(gen() >> 11) * 0x1.0p-53);
            for (double q : {1.5, 2.0, 3.0}) {
                const SandwichBounds sb = sandwich_2d(ps, w, PStar::finite(q), 1e-6);
                if (sb.wce_value > sb.upper + sb.wce_tolerance + 1e-8) ++violations;
                if (sb.wce_value < sb.lower_proxy - sb.wce_tolerance - 1e-8) ++violations;
            }
        }
    }
    b.report(violations == 0, "projection-regular 2D sandwich, m <= 8");

    bool all = true;
    for (int d = 2; d <= 20; ++d) all = all && t_inequality_holds(d);
    b.report(all, "factorial ratio dominance for d = 2..20");

    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int d = 1 + static_cast<int>(gen() % 4);
        std::vector<double> per_axis(static_cast<std::size_t>(d));
        for (double& g : per_axis) g = 0.05 + static_cast<double>(gen() >> 11) * 0x1.0p-53;
        const double q = 1.0 + 3.0 * static_cast<double>(gen() >> 11) * 0x1.0p-53;
        const Weights tw = tilde_weights(Weights::product(d, per_axis), PStar::finite(q));
        for (std::uint32_t m = 1; m < (1u << d); ++m) {
            double expect = 1.0;
            for (int a = 0; a < d; ++a) {
                if ((m >> a) & 1u)
                    expect *= 2.0 * per_axis[static_cast<std::size_t>(a)] / std::pow(2.0, 1.0 / q);
                else
                    expect *= std::pow(1.0 + std::pow(2.0, q - 1.0) / (q + 1.0) *
                                                 std::pow(per_axis[static_cast<std::size_t>(a)], q),
                                       1.0 / q);
            }
            worst = std::max(worst, std::abs(tw.gamma(SubsetId(m)) - expect));
        }
    }
    b.report(worst <= 1e-12, "product-weight form of the modified weights", "max |diff| = " + fmt(worst));
}

void verify_optimality(Battery& b) {
    const PStar grid[3] = {PStar::finite(1), PStar::finite(2), PStar::infinity()};
    bool located = true, intervals = true, floor_ok = true;
    const int resolution = 128;
    for (int n = 1; n <= 3; ++n) {
        const PointSet mp = midpoint_1d(n);
        for (const PStar& pstar : grid) {
            const SearchOutcome best = optimality_search_1d(n, pstar, resolution);
            if (static_cast<int>(best.points.size()) != n) located = false;
            for (int j = 0; j < n && located; ++j)
                if (std::abs(best.points[static_cast<std::size_t>(j)] - mp.coord(j, 0)) >
                    1.0 / resolution + 1e-12)
                    located = false;
            if (!one_point_per_interval_check(best.points, n)) intervals = false;
            const double exact = pstar.is_infinite()
                                     ? 1.0 / (2.0 * n)
                                     : 1.0 / (2.0 * std::pow(pstar.value() + 1.0, 1.0 / pstar.value()) * n);
            if (best.error < exact - 3.0 / resolution) floor_ok = false;
        }
    }
    b.report(located, "search lands on the midpoint configuration");
    b.report(intervals, "search optimum has one point per subinterval");
    b.report(floor_ok, "search error is never below the exact optimum");
}

void run_verify(const std::string& suite) {
    Battery b;
    if (suite == "identities" || suite == "all") {
        std::cout << "identities:\n";
        verify_identities(b);
    }
    if (suite == "bounds" || suite == "all") {
        std::cout << "bounds:\n";
        verify_bounds(b);
    }
    if (suite == "optimality" || suite == "all") {
        std::cout << "optimality:\n";
        verify_optimality(b);
    }
    if (b.checked == 0) throw CLI::ValidationError("suite", "unknown suite '" + suite + "'");
    std::cout << b.checked - b.failed << "/" << b.checked << " checks passed\n";
    if (b.failed > 0) throw VerificationFailed{};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"point-set discrepancy and worst-case integration error toolkit"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a point set file");
    std::string gen_kind;
    int gen_n = 1, gen_m = 0, gen_d = 1;
    std::uint64_t gen_seed = 0;
    std::string gen_sigma;
    std::optional<std::string> gen_out;
    gen->add_option("kind", gen_kind, "midpoint | hammersley | hammersley-shifted | random")->required();
    gen->add_option("--n", gen_n, "number of points (midpoint, random)");
    gen->add_option("--m", gen_m, "log2 of the number of points (hammersley)");
    gen->add_option("--sigma", gen_sigma, "explicit shift bits, e.g. 011");
    gen->add_option("--d", gen_d, "dimension (random)");
    gen->add_option("--seed", gen_seed, "seed (random)");
    gen->add_option("--out", gen_out, "output path (default stdout)");
    gen->callback([&] { run_gen(gen_kind, gen_n, gen_m, gen_sigma, gen_d, gen_seed, gen_out); });

    // wce
    auto* wce_cmd = app.add_subcommand("wce", "worst-case integration error of a node set");
    std::string wce_ps, wce_pstar = "2";
    std::optional<std::string> wce_w, wce_csv;
    double wce_tol = 1e-9;
    wce_cmd->add_option("--pointset", wce_ps, "point-set file")->required();
    wce_cmd->add_option("--weights", wce_w, "weights file (default: full-set weight 1)");
    wce_cmd->add_option("--pstar", wce_pstar, "exponent p*, a decimal or 'inf'");
    wce_cmd->add_option("--tol", wce_tol, "tolerance for quadrature paths");
    wce_cmd->add_option("--csv", wce_csv, "write the per-subset breakdown as CSV");
    wce_cmd->callback([&] { run_wce(wce_ps, wce_w, wce_pstar, wce_tol, wce_csv); });

    // disc
    auto* disc = app.add_subcommand("disc", "weighted discrepancy of a node set");
    std::string disc_ps, disc_pstar = "2";
    std::optional<std::string> disc_w;
    double disc_tol = 1e-9;
    bool disc_anchored = false;
    disc->add_option("--pointset", disc_ps, "point-set file")->required();
    disc->add_option("--weights", disc_w, "weights file (default: full-set weight 1)");
    disc->add_option("--pstar", disc_pstar, "exponent p*, a decimal or 'inf'");
    disc->add_option("--tol", disc_tol, "tolerance for quadrature paths");
    disc->add_flag("--anchored", disc_anchored, "evaluate on the reflected set (anchor-0 error)");
    disc->callback([&] { run_disc(disc_ps, disc_w, disc_pstar, disc_tol, disc_anchored); });

    // bounds
    auto* bounds = app.add_subcommand("bounds", "2D sandwich bounds vs the computed error");
    std::optional<std::string> bounds_ps, bounds_w, bounds_out;
    std::string bounds_family = "hammersley-balanced", bounds_m = "2:8", bounds_pstar = "2";
    double bounds_tol = 1e-9;
    bounds->add_option("--pointset", bounds_ps, "projection-regular 2D point-set file");
    bounds->add_option("--family", bounds_family, "hammersley-classical | hammersley-balanced");
    bounds->add_option("--m-range", bounds_m, "a:b range of m when using --family");
    bounds->add_option("--weights", bounds_w, "weights file (default: full-set weight 1)");
    bounds->add_option("--pstar", bounds_pstar, "finite exponent p*");
    bounds->add_option("--tol", bounds_tol, "tolerance");
    bounds->add_option("--out", bounds_out, "CSV output path (default stdout)");
    bounds->callback(
        [&] { run_bounds(bounds_ps, bounds_family, bounds_m, bounds_w, bounds_pstar, bounds_tol, bounds_out); });

    // study
    auto* study = app.add_subcommand("study", "convergence study over a family of node sets");
    std::string study_family, study_n = "1:16", study_m = "1:8", study_pstar = "2";
    std::optional<std::string> study_w, study_out;
    double study_tol = 1e-9;
    study->add_option("--family", study_family, "midpoint | hammersley-classical | hammersley-balanced")
        ->required();
    study->add_option("--n-range", study_n, "a:b range of n (midpoint family)");
    study->add_option("--m-range", study_m, "a:b range of m (hammersley families)");
    study->add_option("--weights", study_w, "weights file (default: full-set weight 1)");
    study->add_option("--pstar", study_pstar, "exponent p*, a decimal or 'inf'");
    study->add_option("--tol", study_tol, "tolerance for quadrature paths");
    study->add_option("--out", study_out, "CSV output path (default stdout)");
    study->callback([&] { run_study(study_family, study_n, study_m, study_w, study_pstar, study_tol, study_out); });

    // verify
    auto* verify = app.add_subcommand("verify", "run self-check batteries");
    std::string verify_suite = "all";
    verify->add_option("suite", verify_suite, "identities | bounds | optimality | all");
    verify->callback([&] { run_verify(verify_suite); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const VerificationFailed&) {
        return 3;
    } catch (const qmcerr::QuadratureBudgetError& e) {
        std::cerr << "computation failed: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
