#include "xlra/scenario.hpp"

#include <algorithm>
#include <string>

#include <boost/random/normal_distribution.hpp>

#include "xlra/error.hpp"

namespace xlra {

void
UraGeometry::validate() const
{
    if (elements_y <= 0 || elements_z <= 0)
    {
        throw ConfigError("array must have at least one element along each axis");
    }
    if (!(spacing > 0.0))
    {
        throw ConfigError("element spacing must be positive");
    }
    if (!(mount_height >= 0.0))
    {
        throw ConfigError("array mount height must be non-negative");
    }
}

Vec3
antenna_position(const UraGeometry& geom, int m_y, int m_z)
{
    require(m_y >= 0 && m_y < geom.elements_y, "antenna_position: m_y out of range");
    require(m_z >= 0 && m_z < geom.elements_z, "antenna_position: m_z out of range");
    return {geom.origin.x,
            geom.origin.y + m_y * geom.spacing,
            geom.origin.z + geom.mount_height + m_z * geom.spacing};
}

Vec3
antenna_position(const UraGeometry& geom, int m)
{
    require(m >= 0 && m < geom.antenna_count(), "antenna_position: flat index out of range");
    return antenna_position(geom, m / geom.elements_z, m % geom.elements_z);
}

double
distance_to_nearest_element(const UraGeometry& geom, const Vec3& q)
{
    auto nearest = [&](double offset, int count) {
        const double idx = std::round(offset / geom.spacing);
        return static_cast<int>(std::clamp(idx, 0.0, static_cast<double>(count - 1)));
    };
    const int m_y = nearest(q.y - geom.origin.y, geom.elements_y);
    const int m_z = nearest(q.z - geom.origin.z - geom.mount_height, geom.elements_z);
    return distance(antenna_position(geom, m_y, m_z), q);
}

SubarrayPartition
SubarrayPartition::make(const UraGeometry& geom, int subarrays, bool allow_small)
{
    const int m = geom.antenna_count();
    if (subarrays <= 0)
    {
        throw ConfigError("number of subarrays must be positive");
    }
    if (m % subarrays != 0)
    {
        throw ConfigError("B=" + std::to_string(subarrays) + " does not divide M=" + std::to_string(m));
    }
    const int per = m / subarrays;
    if (per < kMinAntennasPerSubarray && !allow_small)
    {
        throw ConfigError("M/B=" + std::to_string(per) + " is below the minimum of " +
                          std::to_string(kMinAntennasPerSubarray) + " antennas per subarray");
    }
    SubarrayPartition p;
    p.count = subarrays;
    p.antennas_per_subarray = per;
    p.assignment.resize(static_cast<std::size_t>(m));
    for (int a = 0; a < m; ++a)
    {
        p.assignment[static_cast<std::size_t>(a)] = a / per;
    }
    return p;
}

void
CellLayout::validate() const
{
    if (!(width > 0.0) || !(depth > 0.0))
    {
        throw ConfigError("cell footprint must have positive extent");
    }
    if (!(d_min > 0.0) || !(d_min < d_max))
    {
        throw ConfigError("cell distances must satisfy 0 < d_min < d_max");
    }
    if (!(height_min <= height_max))
    {
        throw ConfigError("user height range is empty");
    }
    if (rejection_budget <= 0)
    {
        throw ConfigError("rejection budget must be positive");
    }
}

std::vector<Vec3>
place_users(const CellLayout& cell, const UraGeometry& geom, int users, RandomStream& rng)
{
    require(users >= 0, "place_users: negative user count");
    std::uniform_real_distribution<double> ux(geom.origin.x, geom.origin.x + cell.width);
    std::uniform_real_distribution<double> uy(geom.origin.y, geom.origin.y + cell.depth);
    std::uniform_real_distribution<double> uh(cell.height_min, cell.height_max);

    std::vector<Vec3> out;
    out.reserve(static_cast<std::size_t>(users));
    for (int k = 0; k < users; ++k)
    {
        int tries = 0;
        for (;;)
        {
            if (tries++ == cell.rejection_budget)
            {
                throw ConfigError("could not place a user within [d_min, d_max] of the array after " +
                                  std::to_string(cell.rejection_budget) + " draws");
            }
            const double x = ux(rng);
            const double y = uy(rng);
            const Vec3 q{x, y, geom.origin.z + uh(rng)};
            const double r = distance_to_nearest_element(geom, q);
            if (r >= cell.d_min && r <= cell.d_max)
            {
                out.push_back(q);
                break;
            }
        }
    }
    return out;
}

void
throw_nonpositive_distance()
{
    throw ContractViolation("large_scale_fading: distance must be positive");
}

double
subarray_fading(std::span<const double> per_antenna)
{
    require(!per_antenna.empty(), "subarray_fading: empty subarray");
    double sum = 0.0;
    for (double g : per_antenna)
    {
        sum += g;
    }
    return sum / static_cast<double>(per_antenna.size());
}

int
VisibilityMap::visible_count(UserId k) const
{
    const auto first = visible.begin() + static_cast<std::ptrdiff_t>(k) * subarrays;
    return static_cast<int>(std::count(first, first + subarrays, std::uint8_t{1}));
}

VisibilityMap
draw_visibility(int users, int subarrays, double probability, RandomStream& rng)
{
    require(probability >= 0.0 && probability <= 1.0, "draw_visibility: probability outside [0, 1]");
    require(users >= 0 && subarrays >= 0, "draw_visibility: negative dimensions");
    VisibilityMap vis;
    vis.users = users;
    vis.subarrays = subarrays;
    vis.probability = probability;
    vis.visible.resize(static_cast<std::size_t>(users) * subarrays);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& v : vis.visible)
    {
        v = u(rng) < probability ? 1 : 0;
    }
    return vis;
}

double
effective_uplink_gain(UserId k, const FadingMap& fading, const VisibilityMap& vis, int pilot_length)
{
    double sum = 0.0;
    for (int b = 0; b < fading.subarrays; ++b)
    {
        if (vis.at(k, b))
        {
            sum += fading.at(k, b);
        }
    }
    return fading.tx_power[static_cast<std::size_t>(k)] * pilot_length * sum;
}

void
ScenarioConfig::validate() const
{
    geometry.validate();
    cell.validate();
    if (users < 0)
    {
        throw ConfigError("number of users must be non-negative");
    }
    if (!(visibility_probability >= 0.0 && visibility_probability <= 1.0))
    {
        throw ConfigError("visibility probability must lie in [0, 1]");
    }
    if (!(channel.tx_power > 0.0) || !(channel.shadow_std_db >= 0.0))
    {
        throw ConfigError("transmit power must be positive and shadowing deviation non-negative");
    }
    SubarrayPartition::make(geometry, subarrays, allow_small_subarrays);
}

Scenario
build_scenario(const ScenarioConfig& config, RandomStream& geometry_rng, RandomStream& visibility_rng)
{
    config.validate();
    const UraGeometry& geom = config.geometry;
    const ChannelParams& ch = config.channel;

    Scenario s;
    s.partition = SubarrayPartition::make(geom, config.subarrays, config.allow_small_subarrays);
    s.positions = place_users(config.cell, geom, config.users, geometry_rng);

    const int m_total = geom.antenna_count();
    const int n_sub = s.partition.count;
    const int per = s.partition.antennas_per_subarray;

    std::vector<Vec3> elements(static_cast<std::size_t>(m_total));
    for (int m = 0; m < m_total; ++m)
    {
        elements[static_cast<std::size_t>(m)] = antenna_position(geom, m);
    }

    s.fading.users = config.users;
    s.fading.subarrays = n_sub;
    s.fading.beta.resize(static_cast<std::size_t>(config.users) * n_sub);
    s.fading.tx_power.assign(static_cast<std::size_t>(config.users), ch.tx_power);

    boost::random::normal_distribution<double> shadow(0.0, ch.shadow_std_db);
    std::vector<double> gains(static_cast<std::size_t>(m_total));
    std::vector<double> sa_shadow(static_cast<std::size_t>(n_sub));

    for (int k = 0; k < config.users; ++k)
    {
        const Vec3& q = s.positions[static_cast<std::size_t>(k)];
        if (ch.shadowing == ShadowingMode::PerSubarray)
        {
            for (auto& v : sa_shadow)
            {
                v = shadow(geometry_rng);
            }
        }
        for (int m = 0; m < m_total; ++m)
        {
            const double phi = ch.shadowing == ShadowingMode::PerAntenna
                                   ? shadow(geometry_rng)
                                   : sa_shadow[static_cast<std::size_t>(m / per)];
            gains[static_cast<std::size_t>(m)] = large_scale_fading(
                distance(elements[static_cast<std::size_t>(m)], q), phi, ch.path_loss_exponent, ch.reference_gain_db);
        }
        for (int b = 0; b < n_sub; ++b)
        {
            const std::span<const double> block(gains.data() + static_cast<std::size_t>(b) * per,
                                                static_cast<std::size_t>(per));
            s.fading.beta[static_cast<std::size_t>(k) * n_sub + b] = subarray_fading(block);
        }
    }

    s.visibility = draw_visibility(config.users, n_sub, config.visibility_probability, visibility_rng);
    return s;
}

Scenario
build_scenario(const ScenarioConfig& config, std::uint64_t master_seed, std::uint64_t trial)
{
    RandomStream geometry = make_stream(master_seed, trial, StreamId::Geometry);
    RandomStream visibility = make_stream(master_seed, trial, StreamId::Visibility);
    return build_scenario(config, geometry, visibility);
}

} // namespace xlra
