#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "xlra/protocol.hpp"
#include "xlra/scenario.hpp"

namespace xlra {

struct BlockTally
{
    int attempting = 0; // users that transmitted a pilot in Step I
    int accepted = 0;
    double sum_rate = 0.0; // bpcu
};

/// Raw counts of one Monte Carlo trial.
struct TrialTallies
{
    static constexpr int kMaxAttempts = 10;

    std::int64_t episodes_started = 0;
    std::array<std::int64_t, kMaxAttempts + 1> accepted_at{}; // index = attempt number, 1..10
    std::int64_t dropped = 0;
    std::int64_t dropped_attempts = 0; // attempts charged to dropped episodes
    std::vector<BlockTally> blocks;

    std::int64_t accepted() const;
    std::int64_t resolved() const { return accepted() + dropped; }
    std::int64_t pending() const { return episodes_started - resolved(); }

    /// Record one finished episode. Attempts above kMaxAttempts are a contract violation.
    void record(const Episode& e);
};

/// Mean attempts per finished episode; dropped episodes count their full attempt budget.
std::optional<double> avg_access_attempts(const TrialTallies& t);

/// Dropped episodes over episodes that made at least one attempt.
std::optional<double> failed_access_probability(const TrialTallies& t);

/// Accepted episodes over episodes that made at least one attempt.
std::optional<double> accepted_fraction(const TrialTallies& t);

/// Episodes still backlogged at the horizon over episodes that made at least one attempt.
std::optional<double> pending_fraction(const TrialTallies& t);

/// Per-block accepted/attempting averaged over blocks with at least one attempt.
std::optional<double> normalized_accepted(const TrialTallies& t);

enum class SumRateAveraging
{
    PerBlock,          // mean over every block of the trial
    AdmissionBlocks,   // mean over blocks that admitted at least one user
};

std::optional<double> mean_sum_rate(const TrialTallies& t, SumRateAveraging averaging);

/// Sum over admitted users and their per-subarray SINRs of log2(1 + SINR).
double sum_rate_nvr(std::span<const ContentionOutcome> outcomes);

/// Sum over admitted users and their visible subarrays of log2(1 + rho*beta/sigma^2).
double sum_rate_sucre(std::span<const ContentionOutcome> outcomes,
                      const FadingMap& fading,
                      const VisibilityMap& vis,
                      double noise_power);

/// Welford running mean and variance, mergeable.
class RunningStat
{
  public:
    void add(double x);
    void merge(const RunningStat& other);

    std::int64_t count() const { return n_; }
    double mean() const { return mean_; }
    /// Unbiased sample variance; 0 with fewer than two samples.
    double variance() const;
    /// Half-width of the normal-approximation 95% interval of the mean.
    double ci95() const;

  private:
    std::int64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Per-trial metric values; empty optionals mark undefined metrics.
struct TrialMetrics
{
    std::optional<double> avg_attempts;
    std::optional<double> failed_prob;
    std::optional<double> norm_accepted;
    std::optional<double> sum_rate;
};

TrialMetrics summarize(const TrialTallies& t, SumRateAveraging averaging);

/// Cross-trial estimators for the four reported metrics.
struct MetricsAccumulator
{
    RunningStat avg_attempts;
    RunningStat failed_prob;
    RunningStat norm_accepted;
    RunningStat sum_rate;

    void add(const TrialMetrics& m);
    void merge(const MetricsAccumulator& other);
};

} // namespace xlra
