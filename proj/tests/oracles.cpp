#include "oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace oracle {

double
compensated_sum(std::span<const double> xs)
{
    double sum = 0.0;
    double c = 0.0;
    for (double x : xs)
    {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
        {
            c += (sum - t) + x;
        }
        else
        {
            c += (x - t) + sum;
        }
        sum = t;
    }
    return sum + c;
}

UserMask
sucre_admitted(UserMask retransmitters, const VisMasks& vis)
{
    UserMask admitted = 0;
    for (std::size_t u = 0; u < vis.size(); ++u)
    {
        if (!(retransmitters >> u & 1U) || vis[u] == 0)
        {
            continue;
        }
        bool clash = false;
        for (std::size_t v = 0; v < vis.size(); ++v)
        {
            if (v != u && (retransmitters >> v & 1U) && (vis[u] & vis[v]) != 0)
            {
                clash = true;
            }
        }
        if (!clash)
        {
            admitted |= 1U << u;
        }
    }
    return admitted;
}

UserMask
nvr_admitted(UserMask retransmitters, const VisMasks& vis)
{
    const auto n = vis.size();
    UserMask failed = 0;
    for (std::size_t a = 0; a < n; ++a)
    {
        for (std::size_t b = a + 1; b < n; ++b)
        {
            for (std::size_t c = b + 1; c < n; ++c)
            {
                const UserMask triple = (1U << a) | (1U << b) | (1U << c);
                if ((retransmitters & triple) == triple && (vis[a] & vis[b] & vis[c]) != 0)
                {
                    failed |= triple;
                }
            }
        }
    }
    UserMask admitted = 0;
    for (std::size_t u = 0; u < n; ++u)
    {
        if ((retransmitters >> u & 1U) && !(failed >> u & 1U) && vis[u] != 0)
        {
            admitted |= 1U << u;
        }
    }
    return admitted;
}

std::vector<double>
admissible_cell_probabilities(int nx, int ny, int sub, int hsub)
{
    constexpr double width = 200.0, depth = 100.0, d_min = 10.0, d_max = 180.0;
    constexpr double h_lo = 1.0, h_hi = 1.7, mount = 12.0;
    constexpr int rows_y = 100, rows_z = 5;

    std::vector<double> mass(static_cast<std::size_t>(nx * ny), 0.0);
    double total = 0.0;
    const double cw = width / nx;
    const double cd = depth / ny;
    for (int i = 0; i < nx; ++i)
    {
        for (int j = 0; j < ny; ++j)
        {
            double hits = 0.0;
            for (int a = 0; a < sub; ++a)
            {
                const double x = (i + (a + 0.5) / sub) * cw;
                for (int b = 0; b < sub; ++b)
                {
                    const double y = (j + (b + 0.5) / sub) * cd;
                    double best_dy = std::numeric_limits<double>::infinity();
                    for (int m = 0; m < rows_y; ++m)
                    {
                        best_dy = std::min(best_dy, std::abs(y - m));
                    }
                    for (int c = 0; c < hsub; ++c)
                    {
                        const double h = h_lo + (c + 0.5) / hsub * (h_hi - h_lo);
                        double best_dz = std::numeric_limits<double>::infinity();
                        for (int m = 0; m < rows_z; ++m)
                        {
                            best_dz = std::min(best_dz, std::abs(mount + m - h));
                        }
                        const double r = std::sqrt(x * x + best_dy * best_dy + best_dz * best_dz);
                        hits += (r >= d_min && r <= d_max) ? 1.0 : 0.0;
                    }
                }
            }
            mass[static_cast<std::size_t>(i * ny + j)] = hits;
            total += hits;
        }
    }
    for (auto& m : mass)
    {
        m /= total;
    }
    return mass;
}

} // namespace oracle
