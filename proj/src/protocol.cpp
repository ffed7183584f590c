#include "xlra/protocol.hpp"

#include <algorithm>
#include <cmath>

#include <boost/random/normal_distribution.hpp>

#include "xlra/error.hpp"

namespace xlra {

std::vector<RaUserState>
make_user_states(int users)
{
    std::vector<RaUserState> states(static_cast<std::size_t>(users));
    for (int k = 0; k < users; ++k)
    {
        states[static_cast<std::size_t>(k)].id = k;
    }
    return states;
}

void
draw_access(std::span<AccessDraw> out, const PilotPool& pool, RandomStream& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> pick(0, pool.size - 1);
    for (auto& d : out)
    {
        d.u = u(rng);
        d.pilot = pick(rng);
    }
}

std::vector<std::vector<UserId>>
select_pilots(std::span<RaUserState> states,
              const PilotPool& pool,
              const AccessParams& access,
              std::span<const AccessDraw> draws,
              int block)
{
    require(pool.size >= 1, "select_pilots: empty pilot pool");
    require(draws.size() == states.size(), "select_pilots: one draw per user required");
    std::vector<std::vector<UserId>> contenders(static_cast<std::size_t>(pool.size));
    for (std::size_t i = 0; i < states.size(); ++i)
    {
        RaUserState& s = states[i];
        const AccessDraw& d = draws[i];
        bool joins = false;
        switch (s.lifecycle)
        {
        case Lifecycle::Inactive:
            joins = d.u < access.first_attempt_prob;
            break;
        case Lifecycle::Backlogged:
            joins = d.u < access.retry_prob;
            break;
        default:
            break;
        }
        if (!joins)
        {
            continue;
        }
        if (s.attempts == 0)
        {
            s.episode_start = block;
        }
        s.lifecycle = Lifecycle::Contending;
        s.attempts += 1;
        s.chosen_pilot = d.pilot;
        contenders[static_cast<std::size_t>(d.pilot)].push_back(s.id);
    }
    return contenders;
}

std::vector<std::vector<UserId>>
select_pilots(std::span<RaUserState> states,
              const PilotPool& pool,
              const AccessParams& access,
              RandomStream& rng,
              int block)
{
    std::vector<AccessDraw> draws(states.size());
    draw_access(draws, pool, rng);
    return select_pilots(states, pool, access, draws, block);
}

UserGains
make_user_gains(const Scenario& scenario, const PilotPool& pool)
{
    const FadingMap& f = scenario.fading;
    const VisibilityMap& v = scenario.visibility;
    UserGains g;
    g.subarray_size = scenario.partition.antennas_per_subarray;
    g.uplink.resize(static_cast<std::size_t>(f.users));
    g.visible_beta_sum.resize(static_cast<std::size_t>(f.users));
    g.visible_count.resize(static_cast<std::size_t>(f.users));
    for (UserId k = 0; k < f.users; ++k)
    {
        double sum = 0.0;
        int count = 0;
        for (int b = 0; b < f.subarrays; ++b)
        {
            if (v.at(k, b))
            {
                sum += f.at(k, b);
                ++count;
            }
        }
        const auto i = static_cast<std::size_t>(k);
        g.visible_beta_sum[i] = sum;
        g.visible_count[i] = count;
        g.uplink[i] = effective_uplink_gain(k, f, v, pool.size);
    }
    return g;
}

namespace {

double
perturb_alpha(double alpha, UserId k, const UserGains& gains, const DecisionConfig& cfg, double noise_power,
              RandomStream& rng)
{
    if (cfg.estimator == EstimatorMode::Genie || cfg.noise_scale == 0.0)
    {
        return alpha;
    }
    const int visible = std::max(1, gains.visible_count[static_cast<std::size_t>(k)]);
    const double stddev = cfg.noise_scale * noise_power / std::sqrt(static_cast<double>(gains.subarray_size) * visible);
    boost::random::normal_distribution<double> eta(0.0, stddev);
    return std::max(0.0, alpha + eta(rng));
}

double
total_gain(std::span<const UserId> contenders, const UserGains& gains)
{
    double alpha = 0.0;
    for (UserId i : contenders)
    {
        alpha += gains.uplink[static_cast<std::size_t>(i)];
    }
    return alpha;
}

} // namespace

double
estimate_alpha(UserId k,
               std::span<const UserId> contenders,
               const UserGains& gains,
               const DecisionConfig& cfg,
               double noise_power,
               RandomStream& rng)
{
    return perturb_alpha(total_gain(contenders, gains), k, gains, cfg, noise_power, rng);
}

double
bias_term(double delta, int subarray_size, double sum_beta_visible)
{
    require(subarray_size > 0, "bias_term: subarray size must be positive");
    require(sum_beta_visible > 0.0, "bias_term: empty visibility region");
    return delta / (std::sqrt(static_cast<double>(subarray_size)) * sum_beta_visible);
}

Decision
decide_retransmit(double lhs, double alpha_hat, double epsilon)
{
    return lhs > alpha_hat / 2.0 + epsilon ? Decision::Retransmit : Decision::Withdraw;
}

const char*
to_string(FailureReason reason)
{
    switch (reason)
    {
    case FailureReason::None:
        return "none";
    case FailureReason::ThreePlusOverlap:
        return "three_plus_overlap";
    case FailureReason::OverlapUnresolvable:
        return "overlap_unresolvable";
    case FailureReason::DecodeFail:
        return "decode_fail";
    }
    return "unknown";
}

FailureReason
ContentionOutcome::failure_reason() const
{
    return rejected.empty() ? FailureReason::None : rejected.front().reason;
}

ContentionOutcome
contend(int pilot,
        std::span<const UserId> contenders,
        const UserGains& gains,
        const DecisionConfig& cfg,
        double noise_power,
        RandomStream& rng)
{
    ContentionOutcome out;
    out.pilot = pilot;
    out.contenders.assign(contenders.begin(), contenders.end());
    const double alpha = total_gain(contenders, gains);
    for (UserId k : contenders)
    {
        const auto i = static_cast<std::size_t>(k);
        if (gains.visible_count[i] == 0)
        {
            out.withdrawn.push_back(k);
            continue;
        }
        const double alpha_hat = perturb_alpha(alpha, k, gains, cfg, noise_power, rng);
        const double eps = bias_term(cfg.delta, gains.subarray_size, gains.visible_beta_sum[i]);
        if (decide_retransmit(gains.uplink[i], alpha_hat, eps) == Decision::Retransmit)
        {
            out.retransmitters.push_back(k);
        }
        else
        {
            out.withdrawn.push_back(k);
        }
    }
    return out;
}

ContentionOutcome
resolve_sucre_xl(int pilot, std::span<const UserId> retransmitters, const VisibilityMap& vis)
{
    ContentionOutcome out;
    out.pilot = pilot;
    out.retransmitters.assign(retransmitters.begin(), retransmitters.end());

    std::vector<int> load(static_cast<std::size_t>(vis.subarrays), 0);
    for (UserId u : retransmitters)
    {
        for (int b = 0; b < vis.subarrays; ++b)
        {
            load[static_cast<std::size_t>(b)] += vis.at(u, b) ? 1 : 0;
        }
    }
    for (UserId u : retransmitters)
    {
        if (vis.visible_count(u) == 0)
        {
            out.rejected.push_back({u, FailureReason::DecodeFail});
            continue;
        }
        bool shared = false;
        for (int b = 0; b < vis.subarrays && !shared; ++b)
        {
            shared = vis.at(u, b) && load[static_cast<std::size_t>(b)] > 1;
        }
        if (shared)
        {
            out.rejected.push_back({u, FailureReason::OverlapUnresolvable});
        }
        else
        {
            out.admitted.push_back(u);
        }
    }
    return out;
}

SicSinr
sic_sinr(double rho1, double beta1, double rho2, double beta2, double varpi, double sigma2, bool literal_eq3)
{
    const double p1 = rho1 * beta1;
    const double p2 = rho2 * beta2;
    require(p1 >= p2, "sic_sinr: users must be ordered by descending received power");
    require(sigma2 > 0.0, "sic_sinr: noise power must be positive");
    require(varpi >= 0.0 && varpi <= 1.0, "sic_sinr: residual factor outside [0, 1]");
    SicSinr out;
    out.strong = literal_eq3 ? p1 / (p2 * sigma2) : p1 / (p2 + sigma2);
    out.weak = p2 / (varpi * p1 + sigma2);
    return out;
}

ContentionOutcome
resolve_nvr_xl(int pilot,
               std::span<const UserId> retransmitters,
               const VisibilityMap& vis,
               const FadingMap& fading,
               const ResolutionParams& params)
{
    ContentionOutcome out;
    out.pilot = pilot;
    out.retransmitters.assign(retransmitters.begin(), retransmitters.end());

    // Retransmitters visible in each subarray.
    std::vector<std::vector<UserId>> occupants(static_cast<std::size_t>(vis.subarrays));
    for (UserId u : retransmitters)
    {
        for (int b = 0; b < vis.subarrays; ++b)
        {
            if (vis.at(u, b))
            {
                occupants[static_cast<std::size_t>(b)].push_back(u);
            }
        }
    }

    auto power = [&](UserId u, int b) { return fading.tx_power[static_cast<std::size_t>(u)] * fading.at(u, b); };

    for (UserId u : retransmitters)
    {
        if (vis.visible_count(u) == 0)
        {
            out.rejected.push_back({u, FailureReason::DecodeFail});
            continue;
        }
        bool overloaded = false;
        for (int b = 0; b < vis.subarrays && !overloaded; ++b)
        {
            overloaded = vis.at(u, b) && occupants[static_cast<std::size_t>(b)].size() >= 3;
        }
        if (overloaded)
        {
            out.rejected.push_back({u, FailureReason::ThreePlusOverlap});
            continue;
        }

        std::vector<SubarraySinr> per_sa;
        double total = 0.0;
        for (int b = 0; b < vis.subarrays; ++b)
        {
            if (!vis.at(u, b))
            {
                continue;
            }
            const auto& occ = occupants[static_cast<std::size_t>(b)];
            double gamma = 0.0;
            if (occ.size() == 1)
            {
                gamma = power(u, b) / params.noise_power;
            }
            else
            {
                const UserId v = occ[0] == u ? occ[1] : occ[0];
                const double pu = power(u, b);
                const double pv = power(v, b);
                const bool u_first = pu > pv || (pu == pv && u < v);
                const UserId strong = u_first ? u : v;
                const UserId weak = u_first ? v : u;
                const SicSinr s = sic_sinr(fading.tx_power[static_cast<std::size_t>(strong)],
                                           fading.at(strong, b),
                                           fading.tx_power[static_cast<std::size_t>(weak)],
                                           fading.at(weak, b),
                                           params.varpi,
                                           params.noise_power,
                                           params.literal_eq3);
                gamma = u_first ? s.strong : s.weak;
            }
            per_sa.push_back({b, gamma});
            total += gamma;
        }
        if (params.decode_threshold && total < *params.decode_threshold)
        {
            out.rejected.push_back({u, FailureReason::DecodeFail});
            continue;
        }
        out.admitted.push_back(u);
        out.sinr.push_back(std::move(per_sa));
    }
    return out;
}

std::vector<Episode>
admit(std::span<const ContentionOutcome> outcomes, std::span<RaUserState> states, int max_attempts, bool recycle)
{
    std::vector<Episode> ended;
    auto finish = [&](RaUserState& s, bool accepted) {
        ended.push_back({s.id, s.attempts, accepted, s.episode_start});
        s.chosen_pilot.reset();
        if (recycle)
        {
            s.lifecycle = Lifecycle::Inactive;
            s.attempts = 0;
            s.episode_start = -1;
        }
        else
        {
            s.lifecycle = accepted ? Lifecycle::Accepted : Lifecycle::Dropped;
        }
    };
    auto fail = [&](UserId u) {
        RaUserState& s = states[static_cast<std::size_t>(u)];
        if (s.attempts >= max_attempts)
        {
            finish(s, false);
        }
        else
        {
            s.lifecycle = Lifecycle::Backlogged;
            s.chosen_pilot.reset();
        }
    };

    for (const ContentionOutcome& o : outcomes)
    {
        for (UserId u : o.admitted)
        {
            finish(states[static_cast<std::size_t>(u)], true);
        }
        for (const Rejection& r : o.rejected)
        {
            fail(r.user);
        }
        for (UserId u : o.withdrawn)
        {
            fail(u);
        }
    }
    return ended;
}

} // namespace xlra
