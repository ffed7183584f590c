#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/random/normal_distribution.hpp>

#include "oracles.hpp"
#include "xlra/error.hpp"
#include "xlra/scenario.hpp"

using namespace xlra;

namespace {

UraGeometry
table_geometry()
{
    return UraGeometry{}; // 100 x 5, 1 m spacing, 12 m mount
}

bool
same_bits(double a, double b)
{
    return std::memcmp(&a, &b, sizeof a) == 0;
}

} // namespace

TEST_CASE("antenna positions follow the linear layout")
{
    const auto g = table_geometry();
    const Vec3 a = antenna_position(g, 0, 0);
    CHECK(a.x == 0.0);
    CHECK(a.y == 0.0);
    CHECK(a.z == 12.0);

    const Vec3 b = antenna_position(g, 99, 0);
    CHECK(b.y == 99.0);
    CHECK(b.z == 12.0);

    const Vec3 c = antenna_position(g, 0, 4);
    CHECK(c.y == 0.0);
    CHECK(c.z == 16.0);

    CHECK(g.length_y() == 100.0);
    CHECK(g.length_z() == 5.0);
    CHECK(g.antenna_count() == 500);

    CHECK_THROWS_AS(antenna_position(g, 100, 0), ContractViolation);
    CHECK_THROWS_AS(antenna_position(g, 0, 5), ContractViolation);
    CHECK_THROWS_AS(antenna_position(g, -1, 0), ContractViolation);
}

TEST_CASE("nearest-element distance matches a brute-force scan")
{
    const auto g = table_geometry();
    RandomStream rng(11);
    std::uniform_real_distribution<double> ux(-20.0, 220.0), uy(-30.0, 130.0), uz(0.0, 20.0);
    for (int i = 0; i < 500; ++i)
    {
        const Vec3 q{ux(rng), uy(rng), uz(rng)};
        double best = 1e300;
        for (int m = 0; m < g.antenna_count(); ++m)
        {
            const Vec3 w = antenna_position(g, m);
            best = std::min(best, std::sqrt((w.x - q.x) * (w.x - q.x) + (w.y - q.y) * (w.y - q.y) +
                                            (w.z - q.z) * (w.z - q.z)));
        }
        CHECK(distance_to_nearest_element(g, q) == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("subarray partition")
{
    const auto g = table_geometry();
    const auto p = SubarrayPartition::make(g, 10);
    CHECK(p.antennas_per_subarray == 50);
    // contiguous along y: subarray 0 holds the first 10 columns
    CHECK(p.assignment[0] == 0);
    CHECK(p.assignment[49] == 0);
    CHECK(p.assignment[50] == 1);
    CHECK(antenna_position(g, 49).y == 9.0);
    CHECK(antenna_position(g, 50).y == 10.0);

    CHECK_THROWS_AS(SubarrayPartition::make(g, 7), ConfigError);
    CHECK_THROWS_AS(SubarrayPartition::make(g, 20), ConfigError); // M_b = 25 < 50
    CHECK(SubarrayPartition::make(g, 20, true).antennas_per_subarray == 25);
    CHECK_THROWS_AS(SubarrayPartition::make(g, 0), ConfigError);
}

TEST_CASE("user placement")
{
    const auto g = table_geometry();
    const CellLayout cell;
    RandomStream rng(5);

    CHECK(place_users(cell, g, 0, rng).empty());

    SUBCASE("every user respects the distance window")
    {
        const auto users = place_users(cell, g, 1000, rng);
        REQUIRE(users.size() == 1000);
        for (const Vec3& q : users)
        {
            const double r = distance_to_nearest_element(g, q);
            CHECK(r >= 10.0);
            CHECK(r <= 180.0);
            CHECK(q.z >= 1.0);
            CHECK(q.z <= 1.7);
        }
    }

    SUBCASE("positions are uniform over the admissible footprint")
    {
        const auto users = place_users(cell, g, 5000, rng);
        const auto expected = oracle::admissible_cell_probabilities(10, 10, 40, 4);
        std::vector<double> counts(100, 0.0);
        for (const Vec3& q : users)
        {
            const int i = std::min(9, static_cast<int>(q.x / 20.0));
            const int j = std::min(9, static_cast<int>(q.y / 10.0));
            counts[static_cast<std::size_t>(i * 10 + j)] += 1.0;
        }
        double stat = 0.0;
        int cells = 0;
        for (std::size_t c = 0; c < counts.size(); ++c)
        {
            const double e = expected[c] * 5000.0;
            if (e > 0.0)
            {
                stat += (counts[c] - e) * (counts[c] - e) / e;
                ++cells;
            }
        }
        const boost::math::chi_squared dist(cells - 1);
        const double p_value = boost::math::cdf(boost::math::complement(dist, stat));
        CHECK(p_value > 0.01);
    }

    SUBCASE("unsatisfiable window is a configuration error")
    {
        CellLayout tight = cell;
        tight.d_min = 500.0;
        tight.d_max = 600.0;
        tight.rejection_budget = 1000;
        CHECK_THROWS_AS(place_users(tight, g, 1, rng), ConfigError);
    }
}

TEST_CASE("large-scale fading")
{
    constexpr double kappa = 3.8, g_db = -34.53;
    CHECK(large_scale_fading(1.0, 0.0, kappa, g_db) == doctest::Approx(3.52370871042487146e-4).epsilon(1e-12));
    CHECK(large_scale_fading(10.0, 0.0, kappa, g_db) == doctest::Approx(5.58470194736830781e-8).epsilon(1e-12));
    CHECK(large_scale_fading(1.0, 10.0, kappa, g_db) / large_scale_fading(1.0, 0.0, kappa, g_db) ==
          doctest::Approx(10.0).epsilon(1e-12));
    CHECK_THROWS_AS(large_scale_fading(0.0, 0.0, kappa, g_db), ContractViolation);
    CHECK_THROWS_AS(large_scale_fading(-1.0, 0.0, kappa, g_db), ContractViolation);

    double prev = large_scale_fading(1.0, 0.0, kappa, g_db);
    for (double r = 1.5; r < 300.0; r *= 1.3)
    {
        const double cur = large_scale_fading(r, 0.0, kappa, g_db);
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("subarray fading is the arithmetic mean")
{
    const std::vector<double> same(50, 4.2e-9);
    CHECK(subarray_fading(same) == doctest::Approx(4.2e-9).epsilon(1e-15));
    const std::vector<double> two{1e-7, 3e-7};
    CHECK(subarray_fading(two) == doctest::Approx(2e-7).epsilon(1e-15));
    CHECK_THROWS_AS(subarray_fading(std::span<const double>{}), ContractViolation);

    RandomStream rng(3);
    boost::random::normal_distribution<double> shadow(0.0, 10.0);
    for (int rep = 0; rep < 20; ++rep)
    {
        std::vector<double> g(50);
        for (auto& v : g)
        {
            v = large_scale_fading(30.0, shadow(rng), 3.8, -34.53);
        }
        const double reference = oracle::compensated_sum(g) / 50.0;
        CHECK(std::abs(subarray_fading(g) - reference) <= 1e-12 * reference);
        CHECK(subarray_fading(g) >= *std::min_element(g.begin(), g.end()));
        CHECK(subarray_fading(g) <= *std::max_element(g.begin(), g.end()));
    }
}

TEST_CASE("visibility draws")
{
    RandomStream rng(9);
    const auto all = draw_visibility(100, 10, 1.0, rng);
    CHECK(std::all_of(all.visible.begin(), all.visible.end(), [](auto v) { return v == 1; }));
    const auto none = draw_visibility(100, 10, 0.0, rng);
    CHECK(std::all_of(none.visible.begin(), none.visible.end(), [](auto v) { return v == 0; }));
    CHECK_THROWS_AS(draw_visibility(10, 10, 1.5, rng), ContractViolation);

    const auto half = draw_visibility(1000, 10, 0.5, rng);
    double mean = 0.0;
    for (UserId k = 0; k < 1000; ++k)
    {
        mean += half.visible_count(k);
    }
    mean /= 1000.0;
    // 3 sigma of the mean of 1000 Binomial(10, 0.5) counts
    CHECK(std::abs(mean - 5.0) <= 3.0 * std::sqrt(10 * 0.25 / 1000.0));
    CHECK(std::abs(mean - 5.0) <= 0.15);
}

TEST_CASE("effective uplink gain")
{
    FadingMap f;
    f.users = 1;
    f.subarrays = 3;
    f.beta = {1e-7, 5e-7, 2e-7};
    f.tx_power = {1.0};
    VisibilityMap v;
    v.users = 1;
    v.subarrays = 3;

    v.visible = {0, 0, 0};
    CHECK(effective_uplink_gain(0, f, v, 10) == 0.0);

    v.visible = {1, 0, 1};
    CHECK(effective_uplink_gain(0, f, v, 10) == doctest::Approx(3e-6).epsilon(1e-12));

    f.beta = {4e-8, 4e-8, 4e-8};
    f.tx_power = {2.0};
    v.visible = {1, 1, 1};
    CHECK(effective_uplink_gain(0, f, v, 10) == doctest::Approx(2.0 * 10 * 3 * 4e-8).epsilon(1e-12));
}

TEST_CASE("scenario generation")
{
    ScenarioConfig cfg;
    cfg.users = 200;
    cfg.subarrays = 10;
    cfg.visibility_probability = 0.5;

    SUBCASE("identical seed gives a bit-identical scenario")
    {
        const Scenario a = build_scenario(cfg, 42, 3);
        const Scenario b = build_scenario(cfg, 42, 3);
        REQUIRE(a.fading.beta.size() == b.fading.beta.size());
        bool identical = a.visibility.visible == b.visibility.visible;
        for (std::size_t i = 0; i < a.fading.beta.size(); ++i)
        {
            identical = identical && same_bits(a.fading.beta[i], b.fading.beta[i]);
        }
        for (std::size_t i = 0; i < a.positions.size(); ++i)
        {
            identical = identical && same_bits(a.positions[i].x, b.positions[i].x) &&
                        same_bits(a.positions[i].y, b.positions[i].y) && same_bits(a.positions[i].z, b.positions[i].z);
        }
        CHECK(identical);
        const Scenario c = build_scenario(cfg, 42, 4);
        CHECK(c.fading.beta != a.fading.beta);
    }

    SUBCASE("subarray gains equal the mean of independently recomputed per-antenna gains")
    {
        RandomStream geo = make_stream(7, 0, StreamId::Geometry);
        RandomStream vis = make_stream(7, 0, StreamId::Visibility);
        const Scenario s = build_scenario(cfg, geo, vis);

        // Replay the geometry stream: placement, then one shadow draw per (user, antenna).
        RandomStream replay = make_stream(7, 0, StreamId::Geometry);
        const auto positions = place_users(cfg.cell, cfg.geometry, cfg.users, replay);
        boost::random::normal_distribution<double> shadow(0.0, 10.0);
        for (UserId k = 0; k < cfg.users; ++k)
        {
            const Vec3& q = positions[static_cast<std::size_t>(k)];
            std::vector<double> per_antenna;
            for (int my = 0; my < 100; ++my)
            {
                for (int mz = 0; mz < 5; ++mz)
                {
                    const double dx = q.x, dy = q.y - my, dz = q.z - (12.0 + mz);
                    const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
                    per_antenna.push_back(std::pow(r, -3.8) * std::pow(10.0, (-34.53 + shadow(replay)) / 10.0));
                }
            }
            for (int b = 0; b < 10; ++b)
            {
                const std::span<const double> block(per_antenna.data() + b * 50, 50);
                const double ref = oracle::compensated_sum(block) / 50.0;
                const double got = s.fading.at(k, b);
                CHECK(std::abs(got - ref) <= 1e-10 * ref);
                CHECK(got >= *std::min_element(block.begin(), block.end()) * (1 - 1e-12));
                CHECK(got <= *std::max_element(block.begin(), block.end()) * (1 + 1e-12));
                CHECK(std::isfinite(got));
                CHECK(got > 0.0);
            }
        }
    }

    SUBCASE("placement and shadowing do not depend on B")
    {
        ScenarioConfig one = cfg;
        one.subarrays = 1;
        const Scenario a = build_scenario(cfg, 1, 0);
        const Scenario b = build_scenario(one, 1, 0);
        for (UserId k = 0; k < cfg.users; ++k)
        {
            double mean10 = 0.0;
            for (int s = 0; s < 10; ++s)
            {
                mean10 += a.fading.at(k, s) / 10.0;
            }
            CHECK(b.fading.at(k, 0) == doctest::Approx(mean10).epsilon(1e-12));
        }
    }

    SUBCASE("per-subarray shadowing mode")
    {
        ScenarioConfig sa = cfg;
        sa.channel.shadowing = ShadowingMode::PerSubarray;
        const Scenario s = build_scenario(sa, 2, 0);
        CHECK(s.fading.beta.size() == 2000);
        CHECK(std::all_of(s.fading.beta.begin(), s.fading.beta.end(), [](double b) { return b > 0.0; }));
    }

    SUBCASE("visibility marginals stay within a 3 sigma binomial band")
    {
        ScenarioConfig big = cfg;
        big.users = 5000;
        big.visibility_probability = 0.3;
        RandomStream vis = make_stream(5, 0, StreamId::Visibility);
        const VisibilityMap m = draw_visibility(big.users, big.subarrays, big.visibility_probability, vis);
        const double band = 3.0 * std::sqrt(0.3 * 0.7 / 5000.0);
        for (int b = 0; b < big.subarrays; ++b)
        {
            int seen = 0;
            for (UserId k = 0; k < big.users; ++k)
            {
                seen += m.at(k, b) ? 1 : 0;
            }
            CHECK(std::abs(seen / 5000.0 - 0.3) <= band);
        }
    }

    SUBCASE("invalid configurations")
    {
        ScenarioConfig bad = cfg;
        bad.subarrays = 7;
        CHECK_THROWS_AS(build_scenario(bad, 1, 0), ConfigError);
        bad = cfg;
        bad.visibility_probability = -0.1;
        CHECK_THROWS_AS(build_scenario(bad, 1, 0), ConfigError);
        bad = cfg;
        bad.cell.d_min = 200.0;
        CHECK_THROWS_AS(build_scenario(bad, 1, 0), ConfigError);
    }
}
