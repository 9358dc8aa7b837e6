// Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "qmcerr/bounds.hpp"
#include "qmcerr/core_types.hpp"
#include "qmcerr/discrepancy.hpp"
#include "qmcerr/oracle.hpp"
#include "qmcerr/pointsets.hpp"
#include "qmcerr/wce.hpp"

using namespace qmcerr;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

double rand01(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

PointSet random_points(std::mt19937_64& gen, int d, int n) {
    std::vector<double> flat(static_cast<std::size_t>(d) * n);
    for (double& c : flat) c = rand01(gen);
    return PointSet(d, std::move(flat));
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// 1. closed-form error of the midpoint rule, all exponents, n up to 64
Outcome midpoint_exactness() {
    Outcome out;
    const Weights w = Weights::single(1, SubsetId(0b1), 1.0);
    double worst = 0.0;
    const PStar grid[6] = {PStar::finite(1),  PStar::finite(1.5), PStar::finite(2),
                           PStar::finite(3),  PStar::finite(7),   PStar::infinity()};
    for (int n = 1; n <= 64; ++n) {
        const PointSet mp = midpoint_1d(n);
        for (const PStar& p : grid) {
            const double root = p.is_infinite() ? 1.0 : std::pow(p.value() + 1.0, 1.0 / p.value());
            const double expect = 1.0 / (2.0 * root * n);
            const double got = wce(mp, w, p).total;
            worst = std::max(worst, std::abs(got - expect) / expect);
        }
    }
    out.pass = worst <= 1e-12;
    out.detail = "max relative deviation " + fmt(worst);
    return out;
}

// 2. one-dimensional error equals gamma times the plain norm
Outcome one_d_reduction() {
    Outcome out;
    std::mt19937_64 gen(101);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(gen() % 100);
        const double gamma = 0.2 + 1.6 * rand01(gen);
        const PointSet ps = random_points(gen, 1, n);
        const Weights w = Weights::single(1, SubsetId(0b1), gamma);
        for (const PStar& p : {PStar::finite(1), PStar::finite(2), PStar::finite(3), PStar::infinity()}) {
            const double lhs = wce(ps, w, p).total;
            const double rhs = gamma * lp_discrepancy(ps, p).value;
            worst = std::max(worst, std::abs(lhs - rhs));
        }
    }
    out.pass = worst <= 1e-10;
    out.detail = "max |error - gamma*norm| " + fmt(worst);
    return out;
}

// 3. kernel-sum identity battery
Outcome kernel_sum_identity() {
    Outcome out;
    std::mt19937_64 gen(202);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const int d = 1 + static_cast<int>(gen() % 4);
        const int n = 1 + static_cast<int>(gen() % 64);
        const PointSet ps = random_points(gen, d, n);
        const SubsetId u(static_cast<std::uint32_t>(1 + gen() % ((1u << d) - 1u)));
        std::vector<double> t(static_cast<std::size_t>(u.cardinality()));
        for (double& c : t) c = rand01(gen);
        worst = std::max(worst, std::abs(kernel_sum(ps, u, t) - kernel_sum_via_discrepancy(ps, u, t)));
    }
    out.pass = worst <= 1e-12;
    out.detail = "max |direct - expansion| " + fmt(worst);
    return out;
}

// 4. exact exponent-2 path against the independent midpoint-rule oracle
Outcome exact_vs_oracle() {
    Outcome out;
    std::mt19937_64 gen(303);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 1 + trial % 3;
        const int n = 2 + static_cast<int>(gen() % 31);
        const PointSet ps = random_points(gen, d, n);
        Weights w(d);
        if (trial % 2 == 0) {
            std::vector<double> per_axis(static_cast<std::size_t>(d));
            for (double& g : per_axis) g = 0.3 + rand01(gen);
            w = Weights::product(d, per_axis);
        } else {
            for (std::uint32_t m = 1; m < w.subset_count(); ++m)
                w.set_gamma(SubsetId(m), 0.2 + rand01(gen));
        }
        const int grid = d == 1 ? 1 << 16 : d == 2 ? 3072 : 432;
        const double exact = wce(ps, w, PStar::finite(2)).total;
        const double oracle = quadrature_oracle(ps, w, PStar::finite(2), grid).value;
        worst = std::max(worst, std::abs(exact - oracle));
    }
    out.pass = worst <= 1e-5;
    out.detail = "max |exact - oracle| " + fmt(worst);
    return out;
}

// 5. modified-weights discrepancy bound dominates the error
Outcome cor1_bound() {
    Outcome out;
    std::mt19937_64 gen(404);
    int violations = 0;
    double min_slack = std::numeric_limits<double>::infinity();
    const PStar grid[4] = {PStar::finite(1.5), PStar::finite(2), PStar::finite(3), PStar::infinity()};
    for (int trial = 0; trial < 100; ++trial) {
        const int d = 1 + trial % 3;
        const int n = 1 + static_cast<int>(gen() % (d == 3 ? 12 : 24));
        const PointSet ps = random_points(gen, d, n);
        Weights w(d);
        for (std::uint32_t m = 1; m < w.subset_count(); ++m)
            w.set_gamma(SubsetId(m), gen() % 5 == 0 ? 0.0 : 0.1 + 1.2 * rand01(gen));
        const PStar p = grid[trial % 4];
        const ErrorReport e = wce(ps, w, p, 1e-5);
        const DiscrepancyValue ub = upper_bound_cor1(ps, w, p, 1e-5);
        const double slack = ub.value + ub.tolerance + e.tolerance - e.total;
        min_slack = std::min(min_slack, slack);
        if (slack < 0.0) ++violations;
    }
    out.pass = violations == 0;
    out.detail = std::to_string(violations) + " violations, min slack " + fmt(min_slack);
    return out;
}

// 6. embedding-norm values at gamma = 1, 2, 3 (three printed decimals)
Outcome embedding_values() {
    Outcome out;
    const double anchors[3] = {1.329, 1.732, 2.188};
    const double gammas[3] = {1.0, 2.0, 3.0};
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double v = embedding_norm_1d_p2(gammas[i]);
        worst = std::max(worst, std::abs(v - (anchors[i] + 5e-4)));
    }
    out.pass = worst <= 5e-4;
    out.detail = "max deviation from printed digits " + fmt(worst);
    return out;
}

// 7. factorial ratio dominance in exact arithmetic
Outcome factorial_dominance() {
    Outcome out;
    for (int d = 2; d <= 20; ++d)
        if (!t_inequality_holds(d)) {
            out.pass = false;
            out.detail = "fails at d = " + std::to_string(d);
            return out;
        }
    out.detail = "holds for d = 2..20";
    return out;
}

// 8. search optimality: midpoint configuration within one grid step
Outcome search_optimality() {
    Outcome out;
    const int resolution = 256;
    double worst_offset = 0.0;
    bool intervals = true;
    for (int n = 1; n <= 3; ++n) {
        const PointSet mp = midpoint_1d(n);
        for (const PStar& p : {PStar::finite(1), PStar::finite(2), PStar::infinity()}) {
            const SearchOutcome best = optimality_search_1d(n, p, resolution);
            if (static_cast<int>(best.points.size()) != n) {
                out.pass = false;
                out.detail = "wrong cardinality";
                return out;
            }
            for (int j = 0; j < n; ++j)
                worst_offset = std::max(worst_offset,
                                        std::abs(best.points[static_cast<std::size_t>(j)] - mp.coord(j, 0)));
            intervals = intervals && one_point_per_interval_check(best.points, n);
        }
    }
    out.pass = worst_offset <= 1.0 / resolution + 1e-12 && intervals;
    out.detail = "max node offset " + fmt(worst_offset) + (intervals ? "" : ", interval check failed");
    return out;
}

// 9. projection-regular sandwich at exponent 2
Outcome sandwich() {
    Outcome out;
    std::mt19937_64 gen(505);
    Weights w(2);
    for (std::uint32_t m = 1; m < 4u; ++m) w.set_gamma(SubsetId(m), 1.0);
    int violations = 0;
    for (int m = 2; m <= 8; ++m) {
        for (int rep = 0; rep < 5; ++rep) {
            std::vector<int> sigma(static_cast<std::size_t>(m));
            for (int& s : sigma) s = static_cast<int>(gen() % 2);
            const PointSet ps = hammersley_2d(m, sigma);
            const SandwichBounds b = sandwich_2d(ps, w, PStar::finite(2));
            if (b.wce_value > b.upper + b.wce_tolerance + 1e-12) ++violations;
            if (b.wce_value < b.lower_proxy - b.wce_tolerance - 1e-12) ++violations;
        }
    }
    out.pass = violations == 0;
    out.detail = std::to_string(violations) + " violations over m = 2..8";
    return out;
}

// 10. rate separation between the balanced and unshifted nets
Outcome rate_separation() {
    Outcome out;
    Weights w(2);
    for (std::uint32_t m = 1; m < 4u; ++m) w.set_gamma(SubsetId(m), 1.0);
    std::vector<double> ratio;
    for (int m = 4; m <= 12; ++m) {
        const PointSet balanced = hammersley_2d(m, balanced_sigma(m));
        const PointSet classical = hammersley_2d(m, std::vector<int>(static_cast<std::size_t>(m), 0));
        const double n = balanced.size();
        const double bal = n * wce(balanced, w, PStar::finite(2)).total;
        const double cls = n * wce(classical, w, PStar::finite(2)).total;
        ratio.push_back(bal / cls);
    }
    bool monotone = true;
    for (std::size_t i = 1; i < ratio.size(); ++i) monotone = monotone && ratio[i] < ratio[i - 1];
    const double drop = ratio.back() / ratio.front();
    out.pass = monotone && drop < 0.75;
    out.detail = "r(4) = " + fmt(ratio.front()) + ", r(12) = " + fmt(ratio.back()) +
                 ", ratio " + fmt(drop) + (monotone ? ", monotone" : ", NOT monotone");
    return out;
}

// 11. study command determinism (byte-identical CSV)
Outcome study_determinism() {
    Outcome out;
    auto run = [&](const std::string& path) {
        const std::string cmd = std::string(QMCERR_CLI_PATH) +
                                " study --family hammersley-balanced --m-range 2:6 --pstar 2 --out " +
                                path + " >/dev/null 2>&1";
        const int raw = std::system(cmd.c_str());
        return WIFEXITED(raw) && WEXITSTATUS(raw) == 0;
    };
    auto slurp = [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    if (!run("acceptance_study_1.csv") || !run("acceptance_study_2.csv")) {
        out.pass = false;
        out.detail = "study command failed";
        return out;
    }
    const std::string a = slurp("acceptance_study_1.csv");
    const std::string b = slurp("acceptance_study_2.csv");
    std::remove("acceptance_study_1.csv");
    std::remove("acceptance_study_2.csv");
    out.pass = !a.empty() && a == b;
    out.detail = out.pass ? "byte-identical CSV" : "outputs differ";
    return out;
}

struct Criterion {
    int id;
    std::string name;
    double budget_seconds;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {1, "midpoint exactness", 1.0, midpoint_exactness},
        {2, "1D reduction", 5.0, one_d_reduction},
        {3, "kernel-sum identity", 5.0, kernel_sum_identity},
        {4, "exponent-2 path vs oracle", 60.0, exact_vs_oracle},
        {5, "modified-weights bound", 120.0, cor1_bound},
        {6, "embedding-norm values", 1.0, embedding_values},
        {7, "factorial dominance", 1.0, factorial_dominance},
        {8, "1D search optimality", 120.0, search_optimality},
        {9, "2D sandwich", 60.0, sandwich},
        {10, "rate separation", 120.0, rate_separation},
        {11, "study determinism", 30.0, study_determinism},
    };

    int failed = 0;
    for (const Criterion& c : criteria) {
        if (argc > 1 && std::atoi(argv[1]) != c.id) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail = std::string("exception: ") + e.what();
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_budget = seconds <= c.budget_seconds;
        const bool pass = out.pass && in_budget;
        if (!pass) ++failed;
        std::printf("[%s] %2d %-28s %7.2fs  %s%s\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                    seconds, out.detail.c_str(),
                    in_budget ? "" : (" [over " + std::to_string(c.budget_seconds) + "s budget]").c_str());
    }
    if (failed > 0) std::printf("%d criterion(s) failed\n", failed);
    return failed > 0 ? 1 : 0;
}
