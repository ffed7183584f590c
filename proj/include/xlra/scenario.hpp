#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "xlra/random.hpp"

namespace xlra {

using UserId = std::int32_t;

struct Vec3
{
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

inline double
distance(const Vec3& a, const Vec3& b)
{
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

/**
 * Uniform rectangular array on the y-z plane. Element (m_y, m_z) sits at
 * origin + (0, m_y * spacing, mount_height + m_z * spacing). Antennas are
 * indexed column-major along y: m = m_y * elements_z + m_z.
 */
struct UraGeometry
{
    int elements_y = 100;
    int elements_z = 5;
    double spacing = 1.0;       // d_m, meters
    double mount_height = 12.0; // meters
    Vec3 origin{};

    int antenna_count() const { return elements_y * elements_z; }
    double length_y() const { return elements_y * spacing; }
    double length_z() const { return elements_z * spacing; }

    void validate() const;
};

Vec3 antenna_position(const UraGeometry& geom, int m_y, int m_z);

/// Position of the element with flat index m (see UraGeometry).
Vec3 antenna_position(const UraGeometry& geom, int m);

/// Distance from q to the closest array element.
double distance_to_nearest_element(const UraGeometry& geom, const Vec3& q);

/// Partition of the array into B subarrays of M/B contiguous antennas each.
struct SubarrayPartition
{
    int count = 0;
    int antennas_per_subarray = 0;
    std::vector<int> assignment; // antenna index -> subarray index

    static constexpr int kMinAntennasPerSubarray = 50;

    /// Throws ConfigError when B does not divide M, or when M/B drops below the
    /// massive-MIMO floor and `allow_small` is false.
    static SubarrayPartition make(const UraGeometry& geom, int subarrays, bool allow_small = false);
};

/**
 * User footprint. Users are dropped uniformly on x in [0, width] (broadside,
 * away from the array) and y in [origin.y, origin.y + depth] (along the array),
 * at a height uniform in [height_min, height_max]; draws outside
 * [d_min, d_max] from the nearest element are rejected.
 */
struct CellLayout
{
    double width = 200.0;
    double depth = 100.0;
    double d_min = 10.0;
    double d_max = 180.0;
    double height_min = 1.0;
    double height_max = 1.7;
    int rejection_budget = 100000; // draws per user before giving up

    void validate() const;
};

std::vector<Vec3> place_users(const CellLayout& cell, const UraGeometry& geom, int users, RandomStream& rng);

enum class ShadowingMode
{
    PerAntenna,
    PerSubarray,
};

struct ChannelParams
{
    double path_loss_exponent = 3.8; // kappa
    double reference_gain_db = -34.53;
    double shadow_std_db = 10.0;
    ShadowingMode shadowing = ShadowingMode::PerAntenna;
    double tx_power = 1.0; // rho_k, watts
};

[[noreturn]] void throw_nonpositive_distance();

/// 10^(-kappa*log10(r) + (g_db + shadow_db)/10). Throws ContractViolation for r <= 0.
inline double
large_scale_fading(double r, double shadow_db, double kappa, double g_db)
{
    if (!(r > 0.0))
    {
        throw_nonpositive_distance();
    }
    constexpr double ln10 = std::numbers::ln10;
    return std::exp(-kappa * std::log(r) + ln10 * (g_db + shadow_db) / 10.0);
}

/// Arithmetic mean of the per-antenna gains of one subarray.
double subarray_fading(std::span<const double> per_antenna);

/// Per-user, per-subarray average large-scale gain (K x B, row-major).
struct FadingMap
{
    int users = 0;
    int subarrays = 0;
    std::vector<double> beta;
    std::vector<double> tx_power;

    double at(UserId k, int b) const { return beta[static_cast<std::size_t>(k) * subarrays + b]; }
    std::span<const double> row(UserId k) const
    {
        return {beta.data() + static_cast<std::size_t>(k) * subarrays, static_cast<std::size_t>(subarrays)};
    }
};

struct VisibilityMap
{
    int users = 0;
    int subarrays = 0;
    double probability = 1.0;
    std::vector<std::uint8_t> visible;

    bool at(UserId k, int b) const { return visible[static_cast<std::size_t>(k) * subarrays + b] != 0; }
    int visible_count(UserId k) const;
};

VisibilityMap draw_visibility(int users, int subarrays, double probability, RandomStream& rng);

/// rho_k * tau * sum over visible subarrays of beta_k^(b); zero when nothing is visible.
double effective_uplink_gain(UserId k, const FadingMap& fading, const VisibilityMap& vis, int pilot_length);

struct ScenarioConfig
{
    UraGeometry geometry;
    CellLayout cell;
    ChannelParams channel;
    int users = 1000;
    int subarrays = 10;
    double visibility_probability = 0.1;
    bool allow_small_subarrays = false;

    void validate() const;
};

/// One Monte Carlo trial's physical world.
struct Scenario
{
    SubarrayPartition partition;
    std::vector<Vec3> positions;
    FadingMap fading;
    VisibilityMap visibility;
};

/// Deterministic in (config, master_seed, trial). Placement and per-antenna
/// shadowing come from the geometry stream and do not depend on B or P_b.
Scenario build_scenario(const ScenarioConfig& config, std::uint64_t master_seed, std::uint64_t trial);

/// Same as build_scenario with caller-provided streams.
Scenario build_scenario(const ScenarioConfig& config, RandomStream& geometry_rng, RandomStream& visibility_rng);

} // namespace xlra
