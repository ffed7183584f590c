#include "xlra/metrics.hpp"

#include <cmath>
#include <numeric>

#include "xlra/error.hpp"

namespace xlra {

std::int64_t
TrialTallies::accepted() const
{
    return std::accumulate(accepted_at.begin(), accepted_at.end(), std::int64_t{0});
}

void
TrialTallies::record(const Episode& e)
{
    require(e.attempts >= 1 && e.attempts <= kMaxAttempts, "TrialTallies::record: attempts outside [1, 10]");
    if (e.accepted)
    {
        accepted_at[static_cast<std::size_t>(e.attempts)] += 1;
    }
    else
    {
        dropped += 1;
        dropped_attempts += e.attempts;
    }
}

std::optional<double>
avg_access_attempts(const TrialTallies& t)
{
    const std::int64_t n = t.resolved();
    if (n == 0)
    {
        return std::nullopt;
    }
    std::int64_t total = t.dropped_attempts;
    for (int a = 1; a <= TrialTallies::kMaxAttempts; ++a)
    {
        total += a * t.accepted_at[static_cast<std::size_t>(a)];
    }
    return static_cast<double>(total) / static_cast<double>(n);
}

std::optional<double>
failed_access_probability(const TrialTallies& t)
{
    if (t.episodes_started == 0)
    {
        return std::nullopt;
    }
    return static_cast<double>(t.dropped) / static_cast<double>(t.episodes_started);
}

std::optional<double>
accepted_fraction(const TrialTallies& t)
{
    if (t.episodes_started == 0)
    {
        return std::nullopt;
    }
    return static_cast<double>(t.accepted()) / static_cast<double>(t.episodes_started);
}

std::optional<double>
pending_fraction(const TrialTallies& t)
{
    if (t.episodes_started == 0)
    {
        return std::nullopt;
    }
    return static_cast<double>(t.pending()) / static_cast<double>(t.episodes_started);
}

std::optional<double>
normalized_accepted(const TrialTallies& t)
{
    double sum = 0.0;
    int blocks = 0;
    for (const BlockTally& b : t.blocks)
    {
        if (b.attempting > 0)
        {
            sum += static_cast<double>(b.accepted) / b.attempting;
            ++blocks;
        }
    }
    if (blocks == 0)
    {
        return std::nullopt;
    }
    return sum / blocks;
}

std::optional<double>
mean_sum_rate(const TrialTallies& t, SumRateAveraging averaging)
{
    double sum = 0.0;
    int blocks = 0;
    for (const BlockTally& b : t.blocks)
    {
        if (averaging == SumRateAveraging::PerBlock || b.accepted > 0)
        {
            sum += b.sum_rate;
            ++blocks;
        }
    }
    if (blocks == 0)
    {
        return std::nullopt;
    }
    return sum / blocks;
}

double
sum_rate_nvr(std::span<const ContentionOutcome> outcomes)
{
    double rate = 0.0;
    for (const ContentionOutcome& o : outcomes)
    {
        for (const auto& per_sa : o.sinr)
        {
            for (const SubarraySinr& s : per_sa)
            {
                rate += std::log2(1.0 + s.sinr);
            }
        }
    }
    return rate;
}

double
sum_rate_sucre(std::span<const ContentionOutcome> outcomes,
               const FadingMap& fading,
               const VisibilityMap& vis,
               double noise_power)
{
    double rate = 0.0;
    for (const ContentionOutcome& o : outcomes)
    {
        for (UserId k : o.admitted)
        {
            const double rho = fading.tx_power[static_cast<std::size_t>(k)];
            for (int b = 0; b < fading.subarrays; ++b)
            {
                if (vis.at(k, b))
                {
                    rate += std::log2(1.0 + rho * fading.at(k, b) / noise_power);
                }
            }
        }
    }
    return rate;
}

void
RunningStat::add(double x)
{
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
}

void
RunningStat::merge(const RunningStat& other)
{
    if (other.n_ == 0)
    {
        return;
    }
    if (n_ == 0)
    {
        *this = other;
        return;
    }
    const auto n = n_ + other.n_;
    const double d = other.mean_ - mean_;
    mean_ += d * static_cast<double>(other.n_) / static_cast<double>(n);
    m2_ += other.m2_ + d * d * static_cast<double>(n_) * static_cast<double>(other.n_) / static_cast<double>(n);
    n_ = n;
}

double
RunningStat::variance() const
{
    return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1);
}

double
RunningStat::ci95() const
{
    return n_ == 0 ? 0.0 : 1.959963984540054 * std::sqrt(variance() / static_cast<double>(n_));
}

TrialMetrics
summarize(const TrialTallies& t, SumRateAveraging averaging)
{
    return {avg_access_attempts(t), failed_access_probability(t), normalized_accepted(t), mean_sum_rate(t, averaging)};
}

void
MetricsAccumulator::add(const TrialMetrics& m)
{
    if (m.avg_attempts)
    {
        avg_attempts.add(*m.avg_attempts);
    }
    if (m.failed_prob)
    {
        failed_prob.add(*m.failed_prob);
    }
    if (m.norm_accepted)
    {
        norm_accepted.add(*m.norm_accepted);
    }
    if (m.sum_rate)
    {
        sum_rate.add(*m.sum_rate);
    }
}

void
MetricsAccumulator::merge(const MetricsAccumulator& other)
{
    avg_attempts.merge(other.avg_attempts);
    failed_prob.merge(other.failed_prob);
    norm_accepted.merge(other.norm_accepted);
    sum_rate.merge(other.sum_rate);
}

} // namespace xlra
