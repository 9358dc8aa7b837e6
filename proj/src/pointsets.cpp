#include "qmcerr/pointsets.hpp"

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace qmcerr {

PointSet midpoint_1d(int n) {
    if (n < 1) throw std::invalid_argument("midpoint_1d: need n >= 1");
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (int j = 1; j <= n; ++j) xs[static_cast<std::size_t>(j - 1)] = (2.0 * j - 1.0) / (2.0 * n);
    return PointSet::from_1d(std::move(xs));
}

namespace {

std::uint64_t reverse_bits(std::uint64_t v, int m) {
    std::uint64_t r = 0;
    for (int i = 0; i < m; ++i) {
        r = (r << 1) | (v & 1u);
        v >>= 1;
    }
    return r;
}

}  // namespace

PointSet hammersley_2d(int m, std::span<const int> sigma) {
    if (m < 0 || m > 24) throw std::invalid_argument("hammersley_2d: need 0 <= m <= 24");
    if (static_cast<int>(sigma.size()) != m)
        throw std::invalid_argument("hammersley_2d: sigma must have exactly m bits");
    std::uint64_t shift = 0;  // bit i-1 = sigma_i
    for (int i = 0; i < m; ++i) {
        if (sigma[static_cast<std::size_t>(i)] != 0 && sigma[static_cast<std::size_t>(i)] != 1)
            throw std::invalid_argument("hammersley_2d: sigma entries must be 0 or 1");
        if (sigma[static_cast<std::size_t>(i)]) shift |= std::uint64_t{1} << i;
    }
    const std::uint64_t count = std::uint64_t{1} << m;
    const double scale = 1.0 / static_cast<double>(count);
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(count) * 2);
    // With digit vector (t_1..t_m) packed as the integer T (bit i-1 = t_i),
    // the first coordinate is T / 2^m and the second is the m-bit reversal
    // of T xor shift, divided by 2^m.
    for (std::uint64_t t = 0; t < count; ++t) {
        flat.push_back(static_cast<double>(t) * scale);
        flat.push_back(static_cast<double>(reverse_bits(t ^ shift, m)) * scale);
    }
    return PointSet(2, std::move(flat));
}

std::vector<int> balanced_sigma(int m) {
    if (m < 0) throw std::invalid_argument("balanced_sigma: need m >= 0");
    std::vector<int> sigma(static_cast<std::size_t>(m), 1);
    for (int i = 0; i < m / 2; ++i) sigma[static_cast<std::size_t>(i)] = 0;
    return sigma;
}

bool is_projection_regular(const PointSet& ps) {
    if (ps.dim() != 2) throw std::invalid_argument("is_projection_regular: need a 2D point set");
    const int n = ps.size();
    for (int axis = 0; axis < 2; ++axis) {
        std::vector<double> proj(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) proj[static_cast<std::size_t>(j)] = ps.coord(j, axis);
        std::sort(proj.begin(), proj.end());
        for (int j = 0; j < n; ++j)
            if (proj[static_cast<std::size_t>(j)] != static_cast<double>(j) / n) return false;
    }
    return true;
}

PointSet random_pointset(int d, int n, std::uint64_t seed) {
    if (d < 1 || n < 1) throw std::invalid_argument("random_pointset: need d >= 1 and n >= 1");
    std::mt19937_64 gen(seed);
    std::vector<double> flat(static_cast<std::size_t>(d) * n);
    for (double& c : flat) c = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    return PointSet(d, std::move(flat));
}

}  // namespace qmcerr
